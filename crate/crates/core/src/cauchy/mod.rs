//! Generalized Cauchy laws on `ℝⁿ`, their radial laws and half-line limits.

mod law;
mod limits;
mod sampling;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::numeric::{QuadError, RootError};

pub use law::{nu_beta, nu_beta_lambda, radial_law, Density1D, LawKind};
pub use limits::{
    limit_mean, moments, muckenhoupt_bound, muckenhoupt_product, muckenhoupt_product_from,
    muckenhoupt_product_from_median, Moments, Muckenhoupt, TruncationPair,
};
pub use sampling::{
    exchangeable_sequence, projection_consistency, sample, sample_map, sample_radii, SampleBatch,
    SampleMeta,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CauchyError {
    #[error("dimension must be at least 1")]
    InvalidDimension,
    #[error("exponent {0} must be positive and finite")]
    InvalidBeta(f64),
    #[error("scale {0} must be positive and finite")]
    InvalidScale(f64),
    #[error("argument {0} is outside the domain")]
    InvalidArgument(f64),
    #[error("{moment} diverges for beta = {beta}")]
    MomentDiverges { beta: f64, moment: &'static str },
    #[error("projection to {k} coordinates needs 1 <= k < n = {n}")]
    InvalidProjection { k: usize, n: usize },
    #[error("sample size must be at least 1")]
    EmptyBatch,
    #[error("root finding failed: {0}")]
    RootFindFailure(#[from] RootError),
    #[error("quadrature failed: {0}")]
    QuadratureNonConvergence(#[from] QuadError),
    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("i/o: {0}")]
    Io(String),
    #[error("malformed batch: {0}")]
    Format(String),
}

/// Dimension, exponent and an optional scale factor applied to the
/// standard law (`1/√n` gives the normalized space).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyParams {
    pub n: usize,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl CauchyParams {
    pub fn new(n: usize, beta: f64) -> Result<Self, CauchyError> {
        if n == 0 {
            return Err(CauchyError::InvalidDimension);
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(CauchyError::InvalidBeta(beta));
        }
        Ok(CauchyParams {
            n,
            beta,
            scale: None,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self, CauchyError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(CauchyError::InvalidScale(scale));
        }
        self.scale = Some(scale);
        Ok(self)
    }

    /// The `1/√n`-scaled law.
    pub fn normalized(n: usize, beta: f64) -> Result<Self, CauchyError> {
        Self::new(n, beta)?.with_scale(1.0 / (n as f64).sqrt())
    }

    pub fn factor(&self) -> f64 {
        self.scale.unwrap_or(1.0)
    }
}

fn ln_prefactor(n: usize, beta: f64) -> f64 {
    let n = n as f64;
    ln_gamma(0.5 * (n + beta)) - 0.5 * n * std::f64::consts::PI.ln() - ln_gamma(0.5 * beta)
}

/// Log-density of the law of `factor · X` at `x`.
pub fn log_density(params: &CauchyParams, x: &[f64]) -> Result<f64, CauchyError> {
    if x.len() != params.n {
        return Err(CauchyError::DimensionMismatch {
            expected: params.n,
            got: x.len(),
        });
    }
    let c = params.factor();
    let n = params.n as f64;
    let s: f64 = x.iter().map(|v| (v / c) * (v / c)).sum();
    Ok(ln_prefactor(params.n, params.beta) - n * c.ln() - 0.5 * (n + params.beta) * s.ln_1p())
}

/// Density of the generalized Cauchy law at `x`.
pub fn density(params: &CauchyParams, x: &[f64]) -> Result<f64, CauchyError> {
    log_density(params, x).map(f64::exp)
}

/// Unscaled density `∝ (1 + ‖x‖²)^{-(n+β)/2}`.
pub fn cauchy_density(n: usize, beta: f64, x: &[f64]) -> Result<f64, CauchyError> {
    density(&CauchyParams::new(n, beta)?, x)
}

/// Density of the `1/√n`-scaled law.
pub fn scaled_cauchy_density(n: usize, beta: f64, x: &[f64]) -> Result<f64, CauchyError> {
    density(&CauchyParams::normalized(n, beta)?, x)
}

/// Density of `‖factor · X‖` at `t`.
pub fn radial_density(params: &CauchyParams, t: f64) -> f64 {
    radial_law(params).pdf(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn standard_cauchy_at_origin() {
        assert_relative_eq!(cauchy_density(1, 1.0, &[0.0]).unwrap(), 1.0 / PI, epsilon = 1e-15);
    }

    #[test]
    fn prefactor_at_origin() {
        let (n, beta) = (5, 2.5);
        let expect = statrs::function::gamma::gamma((n as f64 + beta) / 2.0)
            / (PI.powf(n as f64 / 2.0) * statrs::function::gamma::gamma(beta / 2.0));
        assert_relative_eq!(cauchy_density(n, beta, &[0.0; 5]).unwrap(), expect, max_relative = 1e-13);
    }

    #[test]
    fn scaled_density_by_substitution() {
        let (n, beta) = (3, 1.7);
        let x = [0.3, -0.2, 0.9];
        let sx: Vec<f64> = x.iter().map(|v| v * (n as f64).sqrt()).collect();
        let expect = (n as f64).powf(n as f64 / 2.0) * cauchy_density(n, beta, &sx).unwrap();
        assert_relative_eq!(scaled_cauchy_density(n, beta, &x).unwrap(), expect, max_relative = 1e-13);
    }

    #[test]
    fn large_dimension_is_finite() {
        let x = vec![0.01; 400];
        assert!(log_density(&CauchyParams::normalized(400, 3.0).unwrap(), &x).unwrap().is_finite());
    }

    #[test]
    fn params_validation() {
        assert_eq!(CauchyParams::new(0, 1.0), Err(CauchyError::InvalidDimension));
        assert_eq!(CauchyParams::new(2, -1.0), Err(CauchyError::InvalidBeta(-1.0)));
        assert!(CauchyParams::new(2, 1.0).unwrap().with_scale(0.0).is_err());
    }
}
