//! Exact Prokhorov distance between finitely supported measures.
//!
//! `D(ε) = 1 - maxflow(ε)`, the mass that cannot be coupled within distance
//! `ε`, is a right-continuous step function of `ε` that only jumps at the
//! pairwise distances `b_0 = 0 < b_1 < …`. On `[b_k, b_{k+1})` the smallest
//! feasible `ε` is `max(b_k, D_k)` whenever that is below `b_{k+1}`, and the
//! condition `D_k ≤ b_{k+1}` is monotone in `k`, so a galloping search over
//! the breakpoints returns the exact infimum.

use rayon::prelude::*;

use super::flow::FlowNetwork;
use super::InvariantError;
use crate::mm::FiniteMmSpace;

/// Uncoupled mass below this is flow roundoff and counts as zero.
pub const DEFICIT_TOL: f64 = 1e-12;

/// Prokhorov distance between two measures on the points of `space`.
pub fn prokhorov(space: &FiniteMmSpace, mu: &[f64], nu: &[f64]) -> Result<f64, InvariantError> {
    for w in [mu, nu] {
        if w.len() != space.len() {
            return Err(InvariantError::DimensionMismatch {
                expected: space.len(),
                got: w.len(),
            });
        }
    }
    prokhorov_bipartite(mu, nu, |i, j| space.d(i, j))
}

/// Prokhorov distance between `mu` on points `0..mu.len()` and `nu` on
/// points `0..nu.len()` of a common metric space, `d(i, j)` being the
/// distance from the `i`-th point of the first support to the `j`-th point
/// of the second.
pub fn prokhorov_bipartite<D>(mu: &[f64], nu: &[f64], d: D) -> Result<f64, InvariantError>
where
    D: Fn(usize, usize) -> f64 + Sync,
{
    let left: Vec<usize> = (0..mu.len()).filter(|&i| mu[i] > 0.0).collect();
    let right: Vec<usize> = (0..nu.len()).filter(|&j| nu[j] > 0.0).collect();
    if left.is_empty() || right.is_empty() {
        return Err(InvariantError::EmptyMeasure);
    }
    let lw: Vec<f64> = left.iter().map(|&i| mu[i]).collect();
    let rw: Vec<f64> = right.iter().map(|&j| nu[j]).collect();
    // Couplings within distance >= 1 are never needed: ε = 1 is always
    // feasible. Large instances first look for the answer below a smaller
    // cap, which is exact as soon as the search succeeds under it.
    let mut cap = if left.len() * right.len() > 4096 { 0.125 } else { 1.0 };
    loop {
        let mut pairs: Vec<(f64, u32, u32)> = left
            .par_iter()
            .enumerate()
            .flat_map_iter(|(a, &i)| {
                let d = &d;
                right.iter().enumerate().filter_map(move |(b, &j)| {
                    let v = d(i, j);
                    (v < cap).then_some((v, a as u32, b as u32))
                })
            })
            .collect();
        pairs.par_sort_unstable_by(|x, y| x.0.total_cmp(&y.0));
        if let Some(eps) = search(&lw, &rw, &pairs, cap) {
            return Ok(eps);
        }
        cap = (2.0 * cap).min(1.0);
    }
}

/// Breakpoint search over `pairs` (sorted, all closer than `cap`). Returns
/// `None` when the infimum is not below `cap`.
fn search(lw: &[f64], rw: &[f64], pairs: &[(f64, u32, u32)], cap: f64) -> Option<f64> {
    // ends[k] = number of pairs with distance <= breaks[k].
    let mut breaks = vec![0.0];
    let mut ends = vec![0usize];
    for (idx, p) in pairs.iter().enumerate() {
        if p.0 > *breaks.last().unwrap() {
            breaks.push(p.0);
            ends.push(idx + 1);
        } else {
            *ends.last_mut().unwrap() = idx + 1;
        }
    }
    let deficit = |k: usize| -> f64 {
        let (nl, nr) = (lw.len(), rw.len());
        let (s, t) = (nl + nr, nl + nr + 1);
        let mut g = FlowNetwork::new(nl + nr + 2);
        for (a, &w) in lw.iter().enumerate() {
            g.add_edge(s, a, w);
        }
        for (b, &w) in rw.iter().enumerate() {
            g.add_edge(nl + b, t, w);
        }
        for &(_, a, b) in &pairs[..ends[k]] {
            g.add_edge(a as usize, nl + b as usize, f64::INFINITY);
        }
        let d = 1.0 - g.max_flow(s, t);
        if d < DEFICIT_TOL {
            0.0
        } else {
            d
        }
    };
    let bound = if cap >= 1.0 { f64::INFINITY } else { cap };
    let next = |k: usize| breaks.get(k + 1).copied().unwrap_or(bound);
    let last = breaks.len() - 1;

    // Gallop from the small breakpoints, where the networks are sparse.
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut d_hi;
    loop {
        let probe = hi.min(last);
        let dp = deficit(probe);
        if dp <= next(probe) {
            hi = probe;
            d_hi = dp;
            break;
        }
        if probe == last {
            return None;
        }
        lo = probe + 1;
        hi = 2 * probe + 1;
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        let dm = deficit(mid);
        if dm <= next(mid) {
            hi = mid;
            d_hi = dm;
        } else {
            lo = mid + 1;
        }
    }
    Some(breaks[hi].max(d_hi).min(1.0))
}
