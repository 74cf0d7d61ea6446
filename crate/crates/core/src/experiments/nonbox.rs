//! Half-mass diameter of the truncated normalized Cauchy cloud against the
//! 2/3-partial diameter of the truncated limit law.
//!
//! The cloud side is certified: if fewer than half the points lie strictly
//! inside the radius-`R` sphere, every set `A` of mass `≥ 1/2` contains a
//! sphere point `a`, and `diam A < D ≤ R` forces each `x ∈ A` into the
//! region `⟨x, a/R⟩ > g(x) = (‖x‖² + R² - D²) / (2R)`. By Markov's
//! inequality that region has mass at most `λ_max(E[x xᵀ / g(x)²])`, so
//! whenever that is below `1/2` every half-mass set has diameter `≥ D`.
//! Interior points are grouped by radius and charged the weight of their
//! innermost member, which only enlarges the matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::{
    check_experiment, run, Cell, ExperimentConfig, ExperimentError, ExperimentId, ExperimentReport, Table, Verdict,
};
use crate::cauchy::{nu_beta, sample, CauchyParams, TruncationPair};
use crate::invariants::partial_diameter_1d;
use crate::rng::derive_seed;

/// Fraction of `R` the half-mass witness must reach.
pub const WITNESS_FRACTION: f64 = 0.9;
const INTERIOR_GROUPS: usize = 256;
const LIMIT_CELLS: usize = 1000;
const BISECTION_STEPS: usize = 50;

/// Rows `(n, radius, witness, witness_over_radius, interior_mass,
/// lambda_max, limit_partial_diameter, atom_mass, quantile_residual)`.
pub fn exp_nonbox_obstruction(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    check_experiment(config, ExperimentId::NonboxObstruction)?;
    run(config)
}

/// Second-moment sums `Σ x xᵀ / N` of the sphere points and of radius
/// groups of interior points (with the smallest radius of each group).
struct Moments {
    radius: f64,
    sphere: DMatrix<f64>,
    groups: Vec<(f64, DMatrix<f64>)>,
    interior_mass: f64,
}

/// Lower triangle of `scale · Σ x xᵀ`.
fn outer_sum(rows: &[&[f64]], n: usize, scale: f64) -> DMatrix<f64> {
    rows.par_chunks(256)
        .map(|chunk| {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for x in chunk {
                for j in 0..n {
                    let xj = x[j] * scale;
                    for i in j..n {
                        m[(i, j)] += x[i] * xj;
                    }
                }
            }
            m
        })
        .reduce(|| DMatrix::zeros(n, n), |a, b| a + b)
}

fn symmetric_outer_sum(rows: &[&[f64]], n: usize, scale: f64) -> DMatrix<f64> {
    let lower = outer_sum(rows, n, scale);
    let mut full = lower.clone();
    for j in 0..n {
        for i in j + 1..n {
            full[(j, i)] = lower[(i, j)];
        }
    }
    full
}

impl Moments {
    fn new(data: &[f64], n: usize, radius: f64) -> Self {
        let total = data.len() / n;
        let scale = 1.0 / total as f64;
        let mut sphere_rows: Vec<&[f64]> = Vec::new();
        let mut interior: Vec<(f64, &[f64])> = Vec::new();
        for x in data.chunks(n) {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r >= radius {
                sphere_rows.push(x);
            } else {
                interior.push((r, x));
            }
        }
        interior.sort_by(|a, b| a.0.total_cmp(&b.0));
        let groups = (0..INTERIOR_GROUPS)
            .map(|g| {
                let (s, e) = (g * interior.len() / INTERIOR_GROUPS, (g + 1) * interior.len() / INTERIOR_GROUPS);
                (s, e)
            })
            .filter(|(s, e)| e > s)
            .map(|(s, e)| {
                let rows: Vec<&[f64]> = interior[s..e].iter().map(|p| p.1).collect();
                (interior[s].0, symmetric_outer_sum(&rows, n, scale))
            })
            .collect();
        // Clamped sphere points have norm exactly R: rescale on the fly.
        let sphere_rows_scaled: Vec<Vec<f64>> = sphere_rows
            .par_iter()
            .map(|x| {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter().map(|v| v * radius / r).collect()
            })
            .collect();
        let refs: Vec<&[f64]> = sphere_rows_scaled.iter().map(|v| v.as_slice()).collect();
        Moments {
            radius,
            sphere: symmetric_outer_sum(&refs, n, scale),
            groups,
            interior_mass: interior.len() as f64 * scale,
        }
    }

    /// Upper bound on `λ_max(E[x xᵀ / g(x)²])` at diameter `d`; infinite
    /// when `g` can vanish.
    fn lambda_max(&self, d: f64) -> f64 {
        let r = self.radius;
        let g = |rho: f64| (rho * rho + r * r - d * d) / (2.0 * r);
        let gs = g(r);
        let mut m = &self.sphere / (gs * gs);
        for (rho, s) in &self.groups {
            let gi = g(*rho);
            if gi <= 0.0 {
                return f64::INFINITY;
            }
            m += s / (gi * gi);
        }
        SymmetricEigen::new(m).eigenvalues.max()
    }

    /// Largest certified `D ∈ [0, R]` and the matrix bound at it.
    fn witness(&self) -> (f64, f64) {
        if self.interior_mass >= 0.5 {
            return (0.0, f64::NAN);
        }
        let r = self.radius;
        let at_r = self.lambda_max(r);
        if at_r < 0.5 {
            return (r, at_r);
        }
        let at_0 = self.lambda_max(0.0);
        if at_0 >= 0.5 {
            return (0.0, at_0);
        }
        let (mut lo, mut hi, mut lam) = (0.0, r, at_0);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            let l = self.lambda_max(mid);
            if l < 0.5 {
                lo = mid;
                lam = l;
            } else {
                hi = mid;
            }
        }
        (lo, lam)
    }
}

/// `diam(φ_#ν_β; 2/3)` on a quantile discretization of the part below `R`
/// plus the atom at `R`; returns the diameter, the atom mass and
/// `|ν_β([0, R]) - 1/3|`.
fn limit_side(pair: &TruncationPair) -> Result<(f64, f64, f64), ExperimentError> {
    let law = nu_beta(pair.beta)?;
    let below = law.cdf(pair.radius)?;
    let atom = pair.atom_mass()?;
    let mut values = Vec::with_capacity(LIMIT_CELLS + 1);
    let mut weights = Vec::with_capacity(LIMIT_CELLS + 1);
    for k in 0..LIMIT_CELLS {
        values.push(law.quantile(below * (k as f64 + 0.5) / LIMIT_CELLS as f64)?);
        weights.push(below / LIMIT_CELLS as f64);
    }
    values.push(pair.radius);
    weights.push(atom);
    let diam = partial_diameter_1d(&values, &weights, 2.0 / 3.0)?;
    Ok((diam, atom, (below - 1.0 / 3.0).abs()))
}

pub(super) fn rows(config: &ExperimentConfig) -> Result<Table, ExperimentError> {
    let pair = TruncationPair::new(config.beta)?;
    let (limit_diam, atom, residual) = limit_side(&pair)?;
    let mut table = Table::new(&[
        "n",
        "radius",
        "witness",
        "witness_over_radius",
        "interior_mass",
        "lambda_max",
        "limit_partial_diameter",
        "atom_mass",
        "quantile_residual",
    ]);
    for &n in &config.dims {
        let params = CauchyParams::normalized(n, config.beta)?;
        let batch = sample(&params, config.samples, derive_seed(config.seed, n as u64))?;
        let moments = Moments::new(batch.data(), n, pair.radius);
        let (witness, lambda) = moments.witness();
        table.push(vec![
            n.into(),
            pair.radius.into(),
            witness.into(),
            (witness / pair.radius).into(),
            moments.interior_mass.into(),
            Cell::Num(if lambda.is_finite() { lambda } else { -1.0 }),
            limit_diam.into(),
            atom.into(),
            residual.into(),
        ]);
    }
    Ok(table)
}

pub(super) fn verdicts(_config: &ExperimentConfig, table: &Table) -> Vec<Verdict> {
    let all = table.select(|_| true);
    let ratio = table.column_of(&all, "witness_over_radius");
    let limit = table.column_of(&all, "limit_partial_diameter");
    vec![
        Verdict::new(
            "half_mass_witness_at_least_0.9R",
            ratio.iter().all(|&r| r >= WITNESS_FRACTION),
            format!("witness / R {ratio:?}"),
        ),
        Verdict::new(
            "limit_two_thirds_diameter_zero",
            limit.iter().all(|&d| d == 0.0),
            format!("limit partial diameters {limit:?}"),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_is_a_true_lower_bound_on_small_clouds() {
        // For a tiny cloud the half-mass diameter can be found by brute force.
        let n = 3;
        let params = CauchyParams::normalized(n, 1.0).unwrap();
        let pair = TruncationPair::new(1.0).unwrap();
        let batch = sample(&params, 12, 4).unwrap();
        let mut pts: Vec<Vec<f64>> = (0..12).map(|i| batch.row(i).to_vec()).collect();
        pts.iter_mut().for_each(|p| pair.phi_n(p));
        let flat: Vec<f64> = pts.concat();
        let (witness, _) = Moments::new(&flat, n, pair.radius).witness();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << 12) {
            if mask.count_ones() < 6 {
                continue;
            }
            let idx: Vec<usize> = (0..12).filter(|&i| mask >> i & 1 == 1).collect();
            let mut d = 0.0f64;
            for (a, &i) in idx.iter().enumerate() {
                for &j in &idx[a + 1..] {
                    let dij = pts[i].iter().zip(&pts[j]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                    d = d.max(dij);
                }
            }
            best = best.min(d);
        }
        assert!(witness <= best + 1e-12, "witness {witness} exceeds {best}");
    }

    #[test]
    fn limit_side_is_a_single_atom() {
        let (d, atom, residual) = limit_side(&TruncationPair::new(1.0).unwrap()).unwrap();
        assert_eq!(d, 0.0);
        assert!((atom - 2.0 / 3.0).abs() < 1e-10);
        assert!(residual < 1e-10);
    }
}
