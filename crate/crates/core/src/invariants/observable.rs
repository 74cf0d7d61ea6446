//! Lower bounds on observable diameter and the concentration function from
//! explicit families of 1-Lipschitz functions and half-mass sets.

use super::functional::median_interval;
use super::partial_diameter::partial_diameter_1d;
use super::InvariantError;
use crate::mm::FiniteMmSpace;

/// Slack allowed when certifying the Lipschitz condition.
pub const LIPSCHITZ_TOL: f64 = 1e-12;

/// Real functions on the points of a space, each certified 1-Lipschitz.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzFamily {
    members: Vec<Vec<f64>>,
}

impl LipschitzFamily {
    /// Certifies every member against the metric of `space`.
    pub fn new(space: &FiniteMmSpace, members: Vec<Vec<f64>>) -> Result<Self, InvariantError> {
        let n = space.len();
        for (member, f) in members.iter().enumerate() {
            if f.len() != n {
                return Err(InvariantError::DimensionMismatch {
                    expected: n,
                    got: f.len(),
                });
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if (f[i] - f[j]).abs() > space.d(i, j) + LIPSCHITZ_TOL {
                        return Err(InvariantError::NotLipschitz { member, i, j });
                    }
                }
            }
        }
        Ok(LipschitzFamily { members })
    }

    /// Distance functions to each of the given anchor points.
    pub fn distance_functions(space: &FiniteMmSpace, anchors: &[usize]) -> Self {
        LipschitzFamily {
            members: anchors.iter().map(|&a| space.row(a).to_vec()).collect(),
        }
    }

    pub fn members(&self) -> &[Vec<f64>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Largest `(1 - κ)`-partial diameter of the pushforward of `weights`
/// through any of the given functions.
pub fn observable_diameter_lb_values(
    weights: &[f64],
    values: &[Vec<f64>],
    kappa: f64,
) -> Result<f64, InvariantError> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(InvariantError::KappaOutOfRange(kappa));
    }
    if values.is_empty() {
        return Err(InvariantError::EmptyFamily);
    }
    values.iter().try_fold(0.0f64, |acc, f| {
        Ok(acc.max(partial_diameter_1d(f, weights, 1.0 - kappa)?))
    })
}

/// Lower bound on the observable diameter at level `κ` from `family`.
pub fn observable_diameter_lb(
    space: &FiniteMmSpace,
    kappa: f64,
    family: &LipschitzFamily,
) -> Result<f64, InvariantError> {
    observable_diameter_lb_values(space.weights(), family.members(), kappa)
}

/// Points whose value under `f` is at most the upper median: a set of
/// mass at least one half.
pub fn sublevel_halfmass_set(weights: &[f64], f: &[f64]) -> Result<Vec<usize>, InvariantError> {
    let (_, upper) = median_interval(weights, f)?;
    Ok((0..f.len()).filter(|&i| f[i] <= upper).collect())
}

/// Smallest closed ball around `center` with mass at least one half.
pub fn ball_halfmass_set(space: &FiniteMmSpace, center: usize) -> Vec<usize> {
    let row = space.row(center);
    sublevel_halfmass_set(space.weights(), row).expect("row length matches weights")
}

/// `max_A (1 - m(U_r(A)))` over the supplied sets, each of mass `≥ 1/2`,
/// with `U_r` the open `r`-neighbourhood.
pub fn concentration_function_lb(
    space: &FiniteMmSpace,
    r: f64,
    halfmass_sets: &[Vec<usize>],
) -> Result<f64, InvariantError> {
    let n = space.len();
    let mut best = 0.0f64;
    for (index, set) in halfmass_sets.iter().enumerate() {
        let mass = space.mass_of(set);
        if mass < 0.5 - 1e-12 {
            return Err(InvariantError::SetMassBelowHalf { index, mass });
        }
        let covered: f64 = (0..n)
            .filter(|&y| set.iter().any(|&a| space.d(y, a) < r))
            .map(|y| space.weights()[y])
            .sum();
        best = best.max(1.0 - covered);
    }
    Ok(best.max(0.0))
}
