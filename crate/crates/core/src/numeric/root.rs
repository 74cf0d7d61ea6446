//! Bracketing root finding for monotone functions.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("could not bracket a root starting from [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("function returned a non-finite value at {at}")]
    NonFinite { at: f64 },
}

/// Bisects `f` on `[lo, hi]`, which must bracket a sign change, until the
/// bracket is narrower than `tol` (relative to `max(1, |x|)`).
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64, RootError> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if !flo.is_finite() {
        return Err(RootError::NonFinite { at: lo });
    }
    if !fhi.is_finite() {
        return Err(RootError::NonFinite { at: hi });
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NoBracket { lo, hi });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol * mid.abs().max(1.0) || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(RootError::NonFinite { at: mid });
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves `g(t) = target` for a nondecreasing `g` on `(0, ∞)`, growing the
/// bracket geometrically from `[guess/2, 2 guess]`.
pub fn solve_increasing_positive<F: FnMut(f64) -> f64>(
    mut g: F,
    target: f64,
    guess: f64,
    tol: f64,
) -> Result<f64, RootError> {
    let mut lo = guess.max(f64::MIN_POSITIVE) * 0.5;
    let mut hi = guess.max(f64::MIN_POSITIVE) * 2.0;
    let mut steps = 0;
    while g(lo) > target {
        lo *= 0.25;
        steps += 1;
        if steps > 200 || lo == 0.0 {
            return Err(RootError::NoBracket { lo, hi });
        }
    }
    steps = 0;
    while g(hi) < target {
        hi *= 4.0;
        steps += 1;
        if steps > 200 || !hi.is_finite() {
            return Err(RootError::NoBracket { lo, hi });
        }
    }
    bisect(|t| g(t) - target, lo, hi, tol)
}
