//! ε-mm-isomorphism certificates and box-distance bounds.

use serde::Serialize;

use super::partial_diameter::partial_diameter;
use super::prokhorov::prokhorov;
use super::{InvariantError, Mode};
use crate::mm::{pushforward_weights, FiniteMmSpace, PointMap, WEIGHT_SUM_TOL};

/// A candidate ε-mm-isomorphism: a map, its non-exceptional domain and the
/// claimed ε.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsMmIsomCert {
    pub map: PointMap,
    pub domain: Vec<usize>,
    pub epsilon: f64,
}

impl EpsMmIsomCert {
    pub fn identity(n: usize) -> Self {
        EpsMmIsomCert {
            map: PointMap::identity(n),
            domain: (0..n).collect(),
            epsilon: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsBreakdown {
    pub mass_term: f64,
    pub distortion: f64,
    pub prokhorov_term: f64,
    pub epsilon: f64,
}

impl EpsBreakdown {
    /// Whether the claimed ε of a certificate is confirmed.
    pub fn confirms(&self, claimed: f64) -> bool {
        self.epsilon <= claimed + 1e-12
    }
}

/// The smallest ε for which `cert` is an ε-mm-isomorphism from `x` to `y`.
pub fn verify_eps_mm_isom(
    x: &FiniteMmSpace,
    y: &FiniteMmSpace,
    cert: &EpsMmIsomCert,
) -> Result<EpsBreakdown, InvariantError> {
    if cert.map.source_len() != x.len() || cert.map.target_len() != y.len() {
        return Err(InvariantError::DimensionMismatch {
            expected: x.len(),
            got: cert.map.source_len(),
        });
    }
    let mut seen = vec![false; x.len()];
    let domain: Vec<usize> = cert
        .domain
        .iter()
        .copied()
        .filter(|&i| !std::mem::replace(&mut seen[i], true))
        .collect();
    let missing = 1.0 - x.mass_of(&domain);
    let mass_term = if missing < WEIGHT_SUM_TOL { 0.0 } else { missing };
    let mut distortion = 0.0f64;
    for (a, &i) in domain.iter().enumerate() {
        for &j in &domain[a + 1..] {
            let dy = y.d(cert.map.apply(i), cert.map.apply(j));
            distortion = distortion.max((x.d(i, j) - dy).abs());
        }
    }
    let pushed = pushforward_weights(x.weights(), &cert.map)?;
    let prokhorov_term = prokhorov(y, &pushed, y.weights())?;
    Ok(EpsBreakdown {
        mass_term,
        distortion,
        prokhorov_term,
        epsilon: mass_term.max(distortion).max(prokhorov_term),
    })
}

/// Evidence from which a box-distance upper bound can be read off.
#[derive(Debug, Clone, Copy)]
pub enum BoxWitness<'a> {
    /// A certificate between two spaces: `□ ≤ 3ε`.
    Certificate {
        x: &'a FiniteMmSpace,
        y: &'a FiniteMmSpace,
        cert: &'a EpsMmIsomCert,
    },
    /// Two measures on one metric: `□ ≤ 2 d_P`.
    CommonMetric {
        space: &'a FiniteMmSpace,
        mu: &'a [f64],
        nu: &'a [f64],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxBound {
    pub value: f64,
    pub mode: Mode,
}

/// Smallest box-distance upper bound over the applicable witnesses.
pub fn box_ub(witnesses: &[BoxWitness<'_>]) -> Result<BoxBound, InvariantError> {
    if witnesses.is_empty() {
        return Err(InvariantError::NoCertificateApplicable);
    }
    let mut best = f64::INFINITY;
    for w in witnesses {
        let v = match *w {
            BoxWitness::Certificate { x, y, cert } => 3.0 * verify_eps_mm_isom(x, y, cert)?.epsilon,
            BoxWitness::CommonMetric { space, mu, nu } => 2.0 * prokhorov(space, mu, nu)?,
        };
        best = best.min(v);
    }
    Ok(BoxBound {
        value: best.min(1.0),
        mode: Mode::UpperBound,
    })
}

/// Largest gap `|diam(X; α) - diam(Y; α)|` over the grid: spaces that are
/// close in the box distance cannot differ much here, so a large value
/// witnesses an obstruction. Not a certified lower bound.
pub fn box_lb_partial_diam(
    x: &FiniteMmSpace,
    y: &FiniteMmSpace,
    alpha_grid: &[f64],
) -> Result<f64, InvariantError> {
    alpha_grid.iter().try_fold(0.0f64, |acc, &a| {
        if !(a > 0.0 && a < 1.0) {
            return Err(InvariantError::AlphaOutOfRange(a));
        }
        let dx = partial_diameter(x, a)?.value;
        let dy = partial_diameter(y, a)?.value;
        Ok(acc.max((dx - dy).abs()))
    })
}
