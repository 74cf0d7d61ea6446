//! Partial diameters: the least diameter of a set carrying a given mass.

use serde::Serialize;

use super::{InvariantError, Mode};
use crate::mm::FiniteMmSpace;

/// Slack on mass comparisons against `alpha`.
pub const PARTIAL_MASS_TOL: f64 = 1e-10;
/// Largest space solved by exhaustive subset search.
pub const EXACT_CUTOFF: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialDiameter {
    pub value: f64,
    pub mode: Mode,
}

fn check_alpha(alpha: f64) -> Result<(), InvariantError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(InvariantError::AlphaOutOfRange(alpha));
    }
    Ok(())
}

/// Exact partial diameter of a weighted point set on the real line, by a
/// sliding window over the sorted values.
pub fn partial_diameter_1d(values: &[f64], weights: &[f64], alpha: f64) -> Result<f64, InvariantError> {
    check_alpha(alpha)?;
    if values.len() != weights.len() {
        return Err(InvariantError::DimensionMismatch {
            expected: values.len(),
            got: weights.len(),
        });
    }
    if values.is_empty() {
        return Err(InvariantError::EmptyMeasure);
    }
    let atoms = super::functional::sorted_atoms(weights, values);
    Ok(window_diameter(&atoms, alpha))
}

/// Same as [`partial_diameter_1d`] for an already sorted sample with equal
/// weights `1 / len`.
pub fn partial_diameter_sorted_uniform(sorted: &[f64], alpha: f64) -> Result<f64, InvariantError> {
    check_alpha(alpha)?;
    let n = sorted.len();
    if n == 0 {
        return Err(InvariantError::EmptyMeasure);
    }
    // Smallest count k with k/n >= alpha - tol.
    let k = (((alpha - PARTIAL_MASS_TOL) * n as f64).ceil().max(1.0) as usize).min(n);
    Ok((0..=n - k)
        .map(|i| sorted[i + k - 1] - sorted[i])
        .fold(f64::INFINITY, f64::min))
}

fn window_diameter(atoms: &[(f64, f64)], alpha: f64) -> f64 {
    let target = alpha - PARTIAL_MASS_TOL;
    let mut best = f64::INFINITY;
    let mut hi = 0;
    let mut mass = 0.0;
    for lo in 0..atoms.len() {
        while hi < atoms.len() && mass < target {
            mass += atoms[hi].1;
            hi += 1;
        }
        if mass < target {
            break;
        }
        best = best.min(atoms[hi - 1].0 - atoms[lo].0);
        mass -= atoms[lo].1;
    }
    best
}

/// Coordinates realizing `space` isometrically on the line, if they exist.
pub fn line_embedding(space: &FiniteMmSpace) -> Option<Vec<f64>> {
    let n = space.len();
    let far = (0..n).max_by(|&a, &b| space.d(0, a).total_cmp(&space.d(0, b)))?;
    let coords: Vec<f64> = (0..n).map(|i| space.d(far, i)).collect();
    let tol = 1e-9 * space.diameter().max(1.0);
    let ok = (0..n).all(|i| ((i + 1)..n).all(|j| ((coords[i] - coords[j]).abs() - space.d(i, j)).abs() <= tol));
    ok.then_some(coords)
}

/// Exact partial diameter by enumeration of all subsets; `n ≤ 20`.
pub fn partial_diameter_exhaustive(space: &FiniteMmSpace, alpha: f64) -> Result<f64, InvariantError> {
    check_alpha(alpha)?;
    let n = space.len();
    assert!(n <= 20, "exhaustive search is limited to 20 points");
    let target = alpha - PARTIAL_MASS_TOL;
    let w = space.weights();
    let size = 1usize << n;
    let mut diam = vec![0.0f64; size];
    let mut mass = vec![0.0f64; size];
    let mut best = f64::INFINITY;
    for s in 1..size {
        let low = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        let mut d = diam[rest];
        let mut bits = rest;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            d = d.max(space.d(low, j));
            bits &= bits - 1;
        }
        diam[s] = d;
        mass[s] = mass[rest] + w[low];
        if mass[s] >= target && d < best {
            best = d;
        }
    }
    Ok(best)
}

/// Smallest diameter among nearest-neighbour balls with enough mass; an
/// upper bound on the partial diameter.
fn ball_upper_bound(space: &FiniteMmSpace, alpha: f64) -> f64 {
    let n = space.len();
    let target = alpha - PARTIAL_MASS_TOL;
    let w = space.weights();
    let mut best = f64::INFINITY;
    for c in 0..n {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| space.d(c, a).total_cmp(&space.d(c, b)));
        let mut mass = 0.0;
        let mut taken = Vec::new();
        for &i in &order {
            if mass >= target {
                break;
            }
            mass += w[i];
            taken.push(i);
        }
        if 2.0 * space.d(c, *taken.last().unwrap()) < best {
            let d = taken
                .iter()
                .flat_map(|&i| taken.iter().map(move |&j| (i, j)))
                .map(|(i, j)| space.d(i, j))
                .fold(0.0, f64::max);
            best = best.min(d);
        }
    }
    best
}

/// Partial diameter at mass level `alpha`.
///
/// Exact for spaces that embed in the line and for spaces of at most
/// [`EXACT_CUTOFF`] points; otherwise a flagged upper bound.
pub fn partial_diameter(space: &FiniteMmSpace, alpha: f64) -> Result<PartialDiameter, InvariantError> {
    check_alpha(alpha)?;
    let exact = |value| PartialDiameter {
        value,
        mode: Mode::Exact,
    };
    if alpha <= space.max_weight() + PARTIAL_MASS_TOL {
        return Ok(exact(0.0));
    }
    if let Some(coords) = line_embedding(space) {
        return partial_diameter_1d(&coords, space.weights(), alpha).map(exact);
    }
    if space.len() <= EXACT_CUTOFF {
        return partial_diameter_exhaustive(space, alpha).map(exact);
    }
    Ok(PartialDiameter {
        value: ball_upper_bound(space, alpha),
        mode: Mode::UpperBound,
    })
}
