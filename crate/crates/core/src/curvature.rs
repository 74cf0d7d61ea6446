//! Weighted Ricci curvature of radially symmetric densities on Euclidean
//! space.
//!
//! For `ρ = exp(ψ(‖x‖²))` the `N`-weighted Ricci tensor is
//! `-2ψ' Id - (4ψ'' + 4ψ'²/(N-n)) x xᵀ`, so it has one eigenvalue along
//! `x` and one of multiplicity `n-1` orthogonal to it.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

/// Relative tolerance of the step-halving consistency check.
pub const RICHARDSON_TOL: f64 = 1e-4;
/// Eigenvalues above `-CD_TOL` count as nonnegative.
pub const CD_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("weight exponent equals the dimension {0}")]
    NEqualsDimension(usize),
    #[error("density is singular at the evaluation point")]
    EvaluationAtSingularity,
    #[error("point has {got} coordinates, model dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("finite differences at h and h/2 disagree by {rel:e} (relative)")]
    StepTooLarge { rel: f64 },
    #[error("parameter {0} is outside the model's domain")]
    InvalidParameter(f64),
}

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Log-density profile `ψ` as a function of `s = ‖x‖²`.
#[derive(Clone)]
pub enum LogProfile {
    /// `ψ(s) = -s/2`.
    Gaussian,
    /// `ψ ≡ 0`.
    Constant,
    /// `ψ(s) = -((n+β)/2) log(1 + c s)`; `c = n` for the normalized law.
    Cauchy { beta: f64, c: f64 },
    /// Half-line limit law in the variable `t = √s`:
    /// `ψ(s) = -((β+1)/2) log s - 1/(2s)`.
    NuBeta { beta: f64 },
    /// Any smooth profile; derivatives by central differences in `s`.
    Numeric(Profile),
}

impl fmt::Debug for LogProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogProfile::Gaussian => write!(f, "Gaussian"),
            LogProfile::Constant => write!(f, "Constant"),
            LogProfile::Cauchy { beta, c } => write!(f, "Cauchy {{ beta: {beta}, c: {c} }}"),
            LogProfile::NuBeta { beta } => write!(f, "NuBeta {{ beta: {beta} }}"),
            LogProfile::Numeric(_) => write!(f, "Numeric(..)"),
        }
    }
}

/// A radial density on `ℝⁿ` together with the weight exponent `N`.
#[derive(Debug, Clone)]
pub struct RadialDensityModel {
    pub n: usize,
    pub weight_exponent: f64,
    pub profile: LogProfile,
}

impl RadialDensityModel {
    pub fn gaussian(n: usize, weight_exponent: f64) -> Self {
        RadialDensityModel {
            n,
            weight_exponent,
            profile: LogProfile::Gaussian,
        }
    }

    pub fn constant(n: usize, weight_exponent: f64) -> Self {
        RadialDensityModel {
            n,
            weight_exponent,
            profile: LogProfile::Constant,
        }
    }

    /// The `1/√n`-scaled generalized Cauchy law with `N = -β`.
    pub fn scaled_cauchy(n: usize, beta: f64) -> Self {
        RadialDensityModel {
            n,
            weight_exponent: -beta,
            profile: LogProfile::Cauchy {
                beta,
                c: n as f64,
            },
        }
    }

    /// The unscaled generalized Cauchy law with `N = -β`.
    pub fn cauchy(n: usize, beta: f64) -> Self {
        RadialDensityModel {
            n,
            weight_exponent: -beta,
            profile: LogProfile::Cauchy { beta, c: 1.0 },
        }
    }

    /// The half-line limit law, `n = 1`, `N = -β`.
    pub fn nu_beta(beta: f64) -> Self {
        RadialDensityModel {
            n: 1,
            weight_exponent: -beta,
            profile: LogProfile::NuBeta { beta },
        }
    }

    /// `(ψ'(s), ψ''(s))`.
    fn derivatives(&self, s: f64) -> Result<(f64, f64), CurvatureError> {
        let n = self.n as f64;
        Ok(match &self.profile {
            LogProfile::Gaussian => (-0.5, 0.0),
            LogProfile::Constant => (0.0, 0.0),
            LogProfile::Cauchy { beta, c } => {
                let a = 0.5 * (n + beta);
                let q = 1.0 + c * s;
                (-a * c / q, a * c * c / (q * q))
            }
            LogProfile::NuBeta { beta } => {
                if s <= 0.0 {
                    return Err(CurvatureError::EvaluationAtSingularity);
                }
                (
                    -0.5 * (beta + 1.0) / s + 0.5 / (s * s),
                    0.5 * (beta + 1.0) / (s * s) - 1.0 / (s * s * s),
                )
            }
            LogProfile::Numeric(psi) => {
                let h = 1e-4 * s.abs().max(1.0);
                let (fp, f0, fm) = (psi(s + h), psi(s), psi(s - h));
                if !(fp.is_finite() && f0.is_finite() && fm.is_finite()) {
                    return Err(CurvatureError::EvaluationAtSingularity);
                }
                ((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h))
            }
        })
    }
}

/// Weighted Ricci tensor at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RicciEval {
    pub point: Vec<f64>,
    #[serde(skip)]
    pub tensor: DMatrix<f64>,
    /// Eigenvalue along `x` (the Rayleigh quotient in that direction).
    pub radial: f64,
    /// Eigenvalue on the orthogonal complement of `x`; `None` when `n = 1`.
    pub tangential: Option<f64>,
    pub tangential_multiplicity: usize,
}

impl RicciEval {
    fn from_tensor(point: &[f64], tensor: DMatrix<f64>) -> Self {
        let n = point.len();
        let norm = point.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dir = if norm > 0.0 {
            DVector::from_iterator(n, point.iter().map(|v| v / norm))
        } else {
            let mut e = DVector::zeros(n);
            e[0] = 1.0;
            e
        };
        let radial = (dir.transpose() * &tensor * &dir)[(0, 0)];
        let tangential = (n > 1).then(|| (tensor.trace() - radial) / (n - 1) as f64);
        RicciEval {
            point: point.to_vec(),
            tensor,
            radial,
            tangential,
            tangential_multiplicity: n - 1,
        }
    }

    /// The smaller of the two eigenvalues.
    pub fn min_eigenvalue(&self) -> f64 {
        self.tangential.map_or(self.radial, |t| t.min(self.radial))
    }
}

fn check_exponent(n: usize, weight_exponent: f64) -> Result<(), CurvatureError> {
    if weight_exponent == n as f64 {
        return Err(CurvatureError::NEqualsDimension(n));
    }
    Ok(())
}

/// `N`-weighted Ricci tensor of `model` at `x`.
pub fn weighted_ricci(model: &RadialDensityModel, x: &[f64]) -> Result<RicciEval, CurvatureError> {
    if x.len() != model.n {
        return Err(CurvatureError::DimensionMismatch {
            expected: model.n,
            got: x.len(),
        });
    }
    check_exponent(model.n, model.weight_exponent)?;
    let s: f64 = x.iter().map(|v| v * v).sum();
    let (d1, d2) = model.derivatives(s)?;
    let iso = -2.0 * d1;
    let rank_one = 4.0 * d2 + 4.0 * d1 * d1 / (model.weight_exponent - model.n as f64);
    let v = DVector::from_column_slice(x);
    let tensor = DMatrix::identity(model.n, model.n) * iso - (&v * v.transpose()) * rank_one;
    Ok(RicciEval {
        point: x.to_vec(),
        tensor,
        radial: iso - rank_one * s,
        tangential: (model.n > 1).then_some(iso),
        tangential_multiplicity: model.n - 1,
    })
}

/// Closed form for the normalized generalized Cauchy space with `N = -β`.
pub fn cauchy_ricci(n: usize, beta: f64, x: &[f64]) -> Result<RicciEval, CurvatureError> {
    if x.len() != n {
        return Err(CurvatureError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if !(beta > 0.0) {
        return Err(CurvatureError::InvalidParameter(beta));
    }
    let nf = n as f64;
    let s: f64 = x.iter().map(|v| v * v).sum();
    let q = 1.0 + nf * s;
    let pre = nf * (nf + beta) / (q * q);
    let v = DVector::from_column_slice(x);
    let tensor = (DMatrix::identity(n, n) * q - (&v * v.transpose()) * nf) * pre;
    Ok(RicciEval {
        point: x.to_vec(),
        tensor,
        radial: pre,
        tangential: (n > 1).then_some(pre * q),
        tangential_multiplicity: n - 1,
    })
}

/// Closed form `1/t⁴ + 1/((β+1) t⁶)` for the half-line limit law.
pub fn nu_beta_ricci(beta: f64, t: f64) -> Result<f64, CurvatureError> {
    if t <= 0.0 {
        return Err(CurvatureError::EvaluationAtSingularity);
    }
    let t2 = t * t;
    Ok(1.0 / (t2 * t2) + 1.0 / ((beta + 1.0) * t2 * t2 * t2))
}

fn fd_derivatives(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    h: f64,
) -> Result<(DVector<f64>, DMatrix<f64>), CurvatureError> {
    let n = x.len();
    let mut p = x.to_vec();
    let eval = |p: &[f64]| {
        let v = f(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CurvatureError::EvaluationAtSingularity)
        }
    };
    let f0 = eval(&p)?;
    let mut grad = DVector::zeros(n);
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        p[i] = x[i] + h;
        let fp = eval(&p)?;
        p[i] = x[i] - h;
        let fm = eval(&p)?;
        p[i] = x[i];
        grad[i] = (fp - fm) / (2.0 * h);
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                p[i] = x[i] + si * h;
                p[j] = x[j] + sj * h;
                let v = eval(&p);
                p[i] = x[i];
                p[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?)
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok((grad, hess))
}

/// Finite-difference weighted Ricci tensor of an arbitrary log-density.
///
/// Derivatives are taken at steps `h` and `h/2` (default
/// `h = 1e-4·max(1, ‖x‖)`); if the two tensors differ by more than
/// [`RICHARDSON_TOL`] relative, the step is rejected. The returned tensor is
/// the Richardson extrapolation of the pair.
pub fn fd_ricci(
    log_density: &dyn Fn(&[f64]) -> f64,
    weight_exponent: f64,
    x: &[f64],
    h: Option<f64>,
) -> Result<RicciEval, CurvatureError> {
    let n = x.len();
    check_exponent(n, weight_exponent)?;
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = h.unwrap_or(1e-4 * norm.max(1.0));
    let assemble = |step: f64| -> Result<DMatrix<f64>, CurvatureError> {
        let (g, hess) = fd_derivatives(log_density, x, step)?;
        Ok(-hess - (&g * g.transpose()) / (weight_exponent - n as f64))
    };
    let coarse = assemble(h)?;
    let fine = assemble(0.5 * h)?;
    let scale = fine.amax().max(f64::MIN_POSITIVE);
    let rel = (&coarse - &fine).amax() / scale;
    if rel > RICHARDSON_TOL {
        return Err(CurvatureError::StepTooLarge { rel });
    }
    let mut tensor = (&fine * 4.0 - &coarse) / 3.0;
    tensor = (&tensor + tensor.transpose()) * 0.5;
    Ok(RicciEval::from_tensor(x, tensor))
}

/// Outcome of a nonnegativity check over sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdCheck {
    pub nonnegative: bool,
    pub min_eigenvalue: f64,
    pub argmin: usize,
    /// Whether the minimum was attained by the radial eigenvalue.
    pub min_is_radial: bool,
}

/// Checks that both closed-form eigenvalues of the normalized Cauchy space
/// are `≥ -CD_TOL` at every point.
pub fn cd_zero_check(n: usize, beta: f64, points: &[Vec<f64>]) -> Result<CdCheck, CurvatureError> {
    let mut out = CdCheck {
        nonnegative: true,
        min_eigenvalue: f64::INFINITY,
        argmin: 0,
        min_is_radial: true,
    };
    for (i, p) in points.iter().enumerate() {
        let r = cauchy_ricci(n, beta, p)?;
        let m = r.min_eigenvalue();
        if m < out.min_eigenvalue {
            out.min_eigenvalue = m;
            out.argmin = i;
            out.min_is_radial = r.tangential.is_none_or(|t| r.radial <= t);
        }
    }
    out.nonnegative = out.min_eigenvalue >= -CD_TOL;
    Ok(out)
}

/// One row of the eigenvalue asymptotics table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub n: usize,
    pub beta: f64,
    pub norm_x: f64,
    pub radial_eig: f64,
    pub tangential_eig: f64,
}

/// Closed-form eigenvalues at `x = norm_x · e₁` for each dimension.
pub fn eigenvalue_asymptotics(beta: f64, dims: &[usize], norm_x: f64) -> Result<Vec<AsymptoticRow>, CurvatureError> {
    dims.iter()
        .map(|&n| {
            let mut x = vec![0.0; n];
            x[0] = norm_x;
            let r = cauchy_ricci(n, beta, &x)?;
            Ok(AsymptoticRow {
                n,
                beta,
                norm_x,
                radial_eig: r.radial,
                tangential_eig: r.tangential.unwrap_or(f64::NAN),
            })
        })
        .collect()
}
