//! Invariants of real functions on a weighted point set: Ky Fan distance
//! and Lévy mean.

use super::InvariantError;

/// Mass tolerance for median and quantile comparisons.
pub const MEDIAN_TOL: f64 = 1e-12;

fn check_len(weights: &[f64], f: &[f64]) -> Result<(), InvariantError> {
    if weights.len() != f.len() {
        return Err(InvariantError::DimensionMismatch {
            expected: weights.len(),
            got: f.len(),
        });
    }
    Ok(())
}

/// `(value, weight)` pairs sorted by value with equal values merged.
pub(crate) fn sorted_atoms(weights: &[f64], f: &[f64]) -> Vec<(f64, f64)> {
    let mut atoms: Vec<(f64, f64)> = f.iter().copied().zip(weights.iter().copied()).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, w) in atoms {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => merged.push((v, w)),
        }
    }
    merged
}

/// Smallest `ε ≥ 0` with `mass{|f - g| > ε} ≤ ε`.
pub fn ky_fan(weights: &[f64], f: &[f64], g: &[f64]) -> Result<f64, InvariantError> {
    check_len(weights, f)?;
    check_len(weights, g)?;
    let gaps: Vec<f64> = f.iter().zip(g).map(|(a, b)| (a - b).abs()).collect();
    let atoms = sorted_atoms(weights, &gaps);
    let total: f64 = weights.iter().sum();
    // On [a_j, a_{j+1}) the excess mass is constant.
    let mut above = total;
    let mut start = 0.0;
    for &(v, w) in &atoms {
        if v > start {
            let candidate = start.max(above);
            if candidate < v {
                return Ok(candidate);
            }
            start = v;
        }
        above -= w;
    }
    Ok(start.max(above.max(0.0)))
}

/// `[m̲, m̄]`: the smallest and largest medians of `f` under `weights`.
pub fn median_interval(weights: &[f64], f: &[f64]) -> Result<(f64, f64), InvariantError> {
    check_len(weights, f)?;
    if f.is_empty() {
        return Err(InvariantError::EmptyMeasure);
    }
    let atoms = sorted_atoms(weights, f);
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let half = 0.5 * total - MEDIAN_TOL;
    let mut acc = 0.0;
    let mut lower = atoms.last().unwrap().0;
    for &(v, w) in &atoms {
        acc += w;
        if acc >= half {
            lower = v;
            break;
        }
    }
    acc = 0.0;
    let mut upper = atoms[0].0;
    for &(v, w) in atoms.iter().rev() {
        acc += w;
        if acc >= half {
            upper = v;
            break;
        }
    }
    Ok((lower, upper))
}

/// Midpoint of the median interval.
pub fn levy_mean(weights: &[f64], f: &[f64]) -> Result<f64, InvariantError> {
    let (lo, hi) = median_interval(weights, f)?;
    Ok(0.5 * (lo + hi))
}
