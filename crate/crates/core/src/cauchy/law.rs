//! One-dimensional laws on the half-line with quadrature CDFs.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::{CauchyError, CauchyParams};
use crate::numeric::{integrate, integrate_power_tail, quad, solve_increasing_positive};

/// Bisection tolerance for quantiles.
pub const QUANTILE_TOL: f64 = 1e-12;
/// Allowed deviation of the total mass from 1.
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LawKind {
    /// Law of `λ/√W` with `W` chi-square with `β` degrees of freedom.
    NuBetaLambda { beta: f64, lambda: f64 },
    /// Law of `factor · ‖X‖` for `X` generalized Cauchy in dimension `n`.
    Radial { n: usize, beta: f64, factor: f64 },
}

/// A law on `[0, ∞)` given by its density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Density1D {
    kind: LawKind,
    #[serde(skip)]
    ln_const: f64,
    #[serde(skip)]
    pivot: f64,
}

/// The half-line limit law with exponent `β`.
pub fn nu_beta(beta: f64) -> Result<Density1D, CauchyError> {
    nu_beta_lambda(beta, 1.0)
}

/// The limit law rescaled by `λ`.
pub fn nu_beta_lambda(beta: f64, lambda: f64) -> Result<Density1D, CauchyError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(CauchyError::InvalidBeta(beta));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CauchyError::InvalidScale(lambda));
    }
    let ln_const = beta * lambda.ln() + (1.0 - 0.5 * beta) * std::f64::consts::LN_2 - ln_gamma(0.5 * beta);
    Ok(Density1D {
        kind: LawKind::NuBetaLambda { beta, lambda },
        ln_const,
        pivot: lambda,
    })
}

/// Law of `‖x‖` for `x` drawn from `params`.
pub fn radial_law(params: &CauchyParams) -> Density1D {
    let (n, beta, factor) = (params.n, params.beta, params.factor());
    let nf = n as f64;
    let ln_const = std::f64::consts::LN_2 + ln_gamma(0.5 * (nf + beta))
        - ln_gamma(0.5 * nf)
        - ln_gamma(0.5 * beta)
        - factor.ln();
    Density1D {
        kind: LawKind::Radial { n, beta, factor },
        ln_const,
        pivot: factor * nf.sqrt(),
    }
}

impl Density1D {
    pub fn kind(&self) -> LawKind {
        self.kind
    }

    /// Natural log of the density; `-∞` outside the support.
    pub fn ln_pdf(&self, t: f64) -> f64 {
        match self.kind {
            LawKind::NuBetaLambda { beta, lambda } => {
                if t <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                self.ln_const - (beta + 1.0) * t.ln() - lambda * lambda / (2.0 * t * t)
            }
            LawKind::Radial { n, beta, factor } => {
                if t < 0.0 || (t == 0.0 && n > 1) {
                    return f64::NEG_INFINITY;
                }
                let u = t / factor;
                let nf = n as f64;
                let radial = if n == 1 { 0.0 } else { (nf - 1.0) * u.ln() };
                self.ln_const + radial - 0.5 * (nf + beta) * (u * u).ln_1p()
            }
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        self.ln_pdf(t).exp()
    }

    fn head(&self, t: f64) -> Result<f64, CauchyError> {
        Ok(integrate(|s| self.pdf(s), 0.0, t, quad::REL_TOL, quad::ABS_TOL)?.value)
    }

    fn tail(&self, t: f64) -> Result<f64, CauchyError> {
        // Both families decay like t^{-1-β}.
        let beta = match self.kind {
            LawKind::NuBetaLambda { beta, .. } | LawKind::Radial { beta, .. } => beta,
        };
        Ok(integrate_power_tail(|s| self.pdf(s), t, beta, quad::REL_TOL, quad::ABS_TOL)?.value)
    }

    /// `P(T ≤ t)`.
    pub fn cdf(&self, t: f64) -> Result<f64, CauchyError> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        if t == f64::INFINITY {
            return Ok(1.0);
        }
        let v = if t <= self.pivot {
            self.head(t)?
        } else {
            1.0 - self.tail(t)?
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// `P(T ≥ t)`, accurate far in the tail.
    pub fn sf(&self, t: f64) -> Result<f64, CauchyError> {
        if t <= 0.0 {
            return Ok(1.0);
        }
        if t <= self.pivot {
            Ok((1.0 - self.head(t)?).clamp(0.0, 1.0))
        } else {
            Ok(self.tail(t)?.clamp(0.0, 1.0))
        }
    }

    /// CDF at every point of an ascending slice, integrating between
    /// neighbours.
    pub fn cdf_sorted(&self, sorted: &[f64]) -> Result<Vec<f64>, CauchyError> {
        if sorted.is_empty() {
            return Ok(Vec::new());
        }
        let first = self.cdf(sorted[0])?;
        let pieces: Vec<f64> = sorted
            .par_windows(2)
            .map(|w| {
                let (a, b) = (w[0].max(0.0), w[1].max(0.0));
                Ok(integrate(|s| self.pdf(s), a, b, quad::REL_TOL, 1e-16)?.value)
            })
            .collect::<Result<_, CauchyError>>()?;
        let mut out = Vec::with_capacity(sorted.len());
        let mut acc = first;
        out.push(acc);
        for p in pieces {
            acc += p;
            out.push(acc.min(1.0));
        }
        Ok(out)
    }

    /// Smallest `t` with `cdf(t) ≥ p`, to relative accuracy 1e-12.
    pub fn quantile(&self, p: f64) -> Result<f64, CauchyError> {
        if !(0.0..1.0).contains(&p) {
            return Err(CauchyError::InvalidArgument(p));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        let t = solve_increasing_positive(
            |t| self.cdf(t).unwrap_or(f64::NAN),
            p,
            self.pivot,
            QUANTILE_TOL,
        )?;
        Ok(t)
    }

    /// Shortest interval `[a, b]` with mass `alpha`, for a unimodal law:
    /// golden-section search over the left tail mass `p` of
    /// `quantile(p + alpha) - quantile(p)`.
    pub fn shortest_interval(&self, alpha: f64) -> Result<(f64, f64), CauchyError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CauchyError::InvalidArgument(alpha));
        }
        let width = |p: f64| -> Result<(f64, f64), CauchyError> {
            Ok((self.quantile(p)?, self.quantile(p + alpha)?))
        };
        let len = |iv: (f64, f64)| iv.1 - iv.0;
        let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (0.0, 1.0 - alpha);
        // Keep strictly inside so that quantile(p + alpha) < quantile(1).
        hi -= 1e-15;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = width(x1)?;
        let mut f2 = width(x2)?;
        while hi - lo > 1e-11 {
            if len(f1) <= len(f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = width(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = width(x2)?;
            }
        }
        let edge = width(0.0)?;
        let best = if len(f1) <= len(f2) { f1 } else { f2 };
        Ok(if len(edge) < len(best) { edge } else { best })
    }

    /// Length of the shortest interval with mass `alpha`.
    pub fn partial_diameter(&self, alpha: f64) -> Result<f64, CauchyError> {
        let (a, b) = self.shortest_interval(alpha)?;
        Ok(b - a)
    }

    /// Prokhorov distance to the Dirac mass at `0`: the `ε` solving
    /// `P(T > ε) = ε`.
    pub fn prokhorov_to_origin(&self) -> Result<f64, CauchyError> {
        Ok(crate::numeric::bisect(
            |e| self.sf(e).unwrap_or(f64::NAN) - e,
            0.0,
            1.0,
            QUANTILE_TOL,
        )?)
    }

    /// Total mass by quadrature.
    pub fn normalization(&self) -> Result<f64, CauchyError> {
        Ok(self.head(self.pivot)? + self.tail(self.pivot)?)
    }

    /// Whether the total mass is within [`NORMALIZATION_TOL`] of 1.
    pub fn is_normalized(&self) -> Result<bool, CauchyError> {
        Ok((self.normalization()? - 1.0).abs() <= NORMALIZATION_TOL)
    }
}
