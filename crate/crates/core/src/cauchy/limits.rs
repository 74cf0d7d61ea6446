//! Closed-form moments, the truncation pair and Muckenhoupt products.

use serde::Serialize;
use statrs::function::gamma::{gamma, ln_gamma};

use super::{nu_beta, radial_law, CauchyError, CauchyParams, Density1D};
use crate::numeric::{integrate, quad};

/// Mean of the half-line limit law; finite for `β > 1`.
pub fn limit_mean(beta: f64) -> Result<f64, CauchyError> {
    if !(beta > 1.0) {
        return Err(CauchyError::MomentDiverges {
            beta,
            moment: "limit mean",
        });
    }
    let ratio = if beta < 300.0 {
        gamma(0.5 * (beta - 1.0)) / gamma(0.5 * beta)
    } else {
        (ln_gamma(0.5 * (beta - 1.0)) - ln_gamma(0.5 * beta)).exp()
    };
    Ok(ratio / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    /// `E‖x‖²/n` for the unscaled law, equal to `1/(β-2)` for every `n`.
    pub second_moment_over_n: f64,
    pub limit_mean: f64,
    pub limit_variance: f64,
}

/// Second-order moments; all of them need `β > 2`.
pub fn moments(beta: f64) -> Result<Moments, CauchyError> {
    if !(beta > 2.0) {
        return Err(CauchyError::MomentDiverges {
            beta,
            moment: "second moment",
        });
    }
    let second = 1.0 / (beta - 2.0);
    let mean = limit_mean(beta)?;
    Ok(Moments {
        second_moment_over_n: second,
        limit_mean: mean,
        limit_variance: second - mean * mean,
    })
}

/// The radius `R` with `ν_β([0, R]) = 1/3` and the clamps onto `[0, R]`
/// and the closed `R`-ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPair {
    pub beta: f64,
    pub radius: f64,
}

impl TruncationPair {
    pub fn new(beta: f64) -> Result<Self, CauchyError> {
        let radius = nu_beta(beta)?.quantile(1.0 / 3.0)?;
        Ok(TruncationPair { beta, radius })
    }

    /// Scalar clamp `min(r, R)`.
    pub fn phi(&self, r: f64) -> f64 {
        r.min(self.radius)
    }

    /// Radial clamp of `x` onto the closed `R`-ball, in place.
    pub fn phi_n(&self, x: &mut [f64]) {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > self.radius {
            let s = self.radius / norm;
            x.iter_mut().for_each(|v| *v *= s);
        }
    }

    /// Mass that the clamp moves onto the sphere of radius `R`.
    pub fn atom_mass(&self) -> Result<f64, CauchyError> {
        nu_beta(self.beta)?.sf(self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Muckenhoupt {
    /// One-dimensional Cauchy law on the line.
    Cauchy1,
    /// The half-line limit law.
    NuBeta,
}

fn inverse_density_integral(law: &Density1D, from: f64, to: f64) -> Result<f64, CauchyError> {
    let v = integrate(|t| (-law.ln_pdf(t)).exp(), from, to, quad::REL_TOL, 0.0)?;
    Ok(v.value)
}

/// Tail mass beyond `x` times the integral of the inverse density from
/// `from` to `x`.
pub fn muckenhoupt_product_from(which: Muckenhoupt, beta: f64, from: f64, x: f64) -> Result<f64, CauchyError> {
    if !(x > from) {
        return Err(CauchyError::InvalidArgument(x));
    }
    match which {
        Muckenhoupt::Cauchy1 => {
            // The line density is half the density of |X|.
            let abs = radial_law(&CauchyParams::new(1, beta)?);
            let tail = 0.5 * abs.sf(x)?;
            let inv = 2.0 * inverse_density_integral(&abs, from, x)?;
            Ok(tail * inv)
        }
        Muckenhoupt::NuBeta => {
            let law = nu_beta(beta)?;
            Ok(law.sf(x)? * inverse_density_integral(&law, from, x)?)
        }
    }
}

/// The product with the inner integral started at the centre of the law:
/// `0` for the line and `1` for the half-line. Needs `x > 1`.
pub fn muckenhoupt_product(which: Muckenhoupt, beta: f64, x: f64) -> Result<f64, CauchyError> {
    if !(x > 1.0) {
        return Err(CauchyError::InvalidArgument(x));
    }
    let from = match which {
        Muckenhoupt::Cauchy1 => 0.0,
        Muckenhoupt::NuBeta => 1.0,
    };
    muckenhoupt_product_from(which, beta, from, x)
}

/// The half-line product with the inner integral started at the median.
pub fn muckenhoupt_product_from_median(beta: f64, x: f64) -> Result<f64, CauchyError> {
    let median = nu_beta(beta)?.quantile(0.5)?;
    muckenhoupt_product_from(Muckenhoupt::NuBeta, beta, median, x)
}

/// Explicit lower bounds for the products: `1/2 + x²/6` for the line
/// (`β = 1`) and `e^{-1/(2x²)} (x² - x^{-β}) / (β(β+2))` for the half-line.
pub fn muckenhoupt_bound(which: Muckenhoupt, beta: f64, x: f64) -> f64 {
    match which {
        Muckenhoupt::Cauchy1 => 0.5 + x * x / 6.0,
        Muckenhoupt::NuBeta => {
            (-1.0 / (2.0 * x * x)).exp() * (x * x - x.powf(-beta)) / (beta * (beta + 2.0))
        }
    }
}
