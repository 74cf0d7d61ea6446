//! Finite metric measure spaces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::neumaier_sum;

/// Relative tolerance for triangle-inequality violations.
pub const TRIANGLE_TOL: f64 = 1e-9;
/// Absolute tolerance on the total weight before renormalization.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MmError {
    #[error("space has no points")]
    Empty,
    #[error("distance matrix row {row} has length {len}, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("{weights} weights supplied for {n} points")]
    LengthMismatch { n: usize, weights: usize },
    #[error("d({i},{j}) = {dij} but d({j},{i}) = {dji}")]
    AsymmetricDistance { i: usize, j: usize, dij: f64, dji: f64 },
    #[error("d({i},{i}) = {value} is not zero")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("d({i},{j}) = {value} is negative or not finite")]
    InvalidDistance { i: usize, j: usize, value: f64 },
    #[error("d({i},{j}) exceeds d({i},{k}) + d({k},{j}) by {excess}")]
    TriangleViolation { i: usize, j: usize, k: usize, excess: f64 },
    #[error("weight {index} = {value} is not strictly positive")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, not 1")]
    WeightSumError { sum: f64 },
    #[error("scale factor {0} is not positive")]
    NonPositiveScale(f64),
    #[error("map sends point {source_index} to {target}, but the target has {len} points")]
    MapOutOfRange { source_index: usize, target: usize, len: usize },
    #[error("map has {map_len} entries for {n} source points")]
    MapNotTotal { map_len: usize, n: usize },
    #[error("sample batch is empty")]
    EmptyBatch,
    #[error("{labels} labels supplied for {n} points")]
    LabelMismatch { n: usize, labels: usize },
}

/// A finite metric space with a fully supported probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MmSpaceJson", into = "MmSpaceJson")]
pub struct FiniteMmSpace {
    n: usize,
    dist: Vec<f64>,
    weights: Vec<f64>,
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct MmSpaceJson {
    n: usize,
    dist: Vec<Vec<f64>>,
    weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<MmSpaceJson> for FiniteMmSpace {
    type Error = MmError;

    fn try_from(j: MmSpaceJson) -> Result<Self, MmError> {
        if j.dist.len() != j.n {
            return Err(MmError::NotSquare {
                row: j.dist.len(),
                len: j.dist.len(),
                n: j.n,
            });
        }
        let space = FiniteMmSpace::validate(&j.dist, &j.weights)?;
        match j.labels {
            Some(l) => space.with_labels(l),
            None => Ok(space),
        }
    }
}

impl From<FiniteMmSpace> for MmSpaceJson {
    fn from(s: FiniteMmSpace) -> Self {
        MmSpaceJson {
            n: s.n,
            dist: s.dist.chunks(s.n).map(<[f64]>::to_vec).collect(),
            weights: s.weights,
            labels: s.labels,
        }
    }
}

fn flatten(dist: &[Vec<f64>], n: usize) -> Result<Vec<f64>, MmError> {
    let mut flat = Vec::with_capacity(n * n);
    for (row, r) in dist.iter().enumerate() {
        if r.len() != n {
            return Err(MmError::NotSquare {
                row,
                len: r.len(),
                n,
            });
        }
        flat.extend_from_slice(r);
    }
    Ok(flat)
}

fn check_weights(weights: &[f64]) -> Result<Vec<f64>, MmError> {
    for (index, &value) in weights.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(MmError::NonPositiveWeight { index, value });
        }
    }
    let sum = neumaier_sum(weights.iter().copied());
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(MmError::WeightSumError { sum });
    }
    Ok(weights.iter().map(|w| w / sum).collect())
}

fn check_pairs(n: usize, dist: &[f64]) -> Result<(), MmError> {
    for i in 0..n {
        let dii = dist[i * n + i];
        if dii != 0.0 {
            return Err(MmError::NonzeroDiagonal { i, value: dii });
        }
        for j in (i + 1)..n {
            let (dij, dji) = (dist[i * n + j], dist[j * n + i]);
            for (a, b, v) in [(i, j, dij), (j, i, dji)] {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(MmError::InvalidDistance { i: a, j: b, value: v });
                }
            }
            if dij != dji {
                return Err(MmError::AsymmetricDistance { i, j, dij, dji });
            }
        }
    }
    Ok(())
}

fn max_entry(dist: &[f64]) -> f64 {
    dist.iter().copied().fold(0.0, f64::max)
}

impl FiniteMmSpace {
    /// Checks every axiom and returns the space with renormalized weights.
    pub fn validate(dist: &[Vec<f64>], weights: &[f64]) -> Result<Self, MmError> {
        let n = dist.len();
        let flat = flatten(dist, n)?;
        Self::from_flat(n, flat, weights.to_vec())
    }

    /// Same as [`validate`](Self::validate) for a row-major `n × n` buffer.
    pub fn from_flat(n: usize, dist: Vec<f64>, weights: Vec<f64>) -> Result<Self, MmError> {
        let space = Self::from_flat_unchecked_triangle(n, dist, weights)?;
        space.check_triangle()?;
        Ok(space)
    }

    /// Checks shape, symmetry, diagonal and weights but not the triangle
    /// inequality. For matrices that are metric by construction (Euclidean,
    /// cone), where the cubic check would dominate the runtime.
    pub fn from_flat_unchecked_triangle(
        n: usize,
        dist: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self, MmError> {
        if n == 0 {
            return Err(MmError::Empty);
        }
        if dist.len() != n * n {
            return Err(MmError::NotSquare {
                row: 0,
                len: dist.len(),
                n: n * n,
            });
        }
        if weights.len() != n {
            return Err(MmError::LengthMismatch {
                n,
                weights: weights.len(),
            });
        }
        check_pairs(n, &dist)?;
        let weights = check_weights(&weights)?;
        Ok(FiniteMmSpace {
            n,
            dist,
            weights,
            labels: None,
        })
    }

    /// The one-point space.
    pub fn point() -> Self {
        FiniteMmSpace {
            n: 1,
            dist: vec![0.0],
            weights: vec![1.0],
            labels: None,
        }
    }

    /// Uniform measure on the given matrix.
    pub fn uniform(dist: &[Vec<f64>]) -> Result<Self, MmError> {
        let n = dist.len();
        Self::validate(dist, &vec![1.0 / n as f64; n])
    }

    /// Points on the real line with the given weights.
    pub fn on_line(points: &[f64], weights: &[f64]) -> Result<Self, MmError> {
        let n = points.len();
        let dist = points
            .iter()
            .flat_map(|a| points.iter().map(move |b| (a - b).abs()))
            .collect();
        Self::from_flat_unchecked_triangle(n, dist, weights.to_vec())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, MmError> {
        if labels.len() != self.n {
            return Err(MmError::LabelMismatch {
                n: self.n,
                labels: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Returns the first triple violating the triangle inequality beyond
    /// `TRIANGLE_TOL` times the largest distance.
    pub fn check_triangle(&self) -> Result<(), MmError> {
        let n = self.n;
        let tol = TRIANGLE_TOL * max_entry(&self.dist).max(1.0);
        for k in 0..n {
            let row_k = &self.dist[k * n..(k + 1) * n];
            for i in 0..n {
                let dik = row_k[i];
                let row_i = &self.dist[i * n..(i + 1) * n];
                for j in (i + 1)..n {
                    let excess = row_i[j] - (dik + row_k[j]);
                    if excess > tol {
                        return Err(MmError::TriangleViolation { i, j, k, excess });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn dist_flat(&self) -> &[f64] {
        &self.dist
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn diameter(&self) -> f64 {
        max_entry(&self.dist)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn mass_of(&self, indices: &[usize]) -> f64 {
        neumaier_sum(indices.iter().map(|&i| self.weights[i]))
    }

    /// Distances multiplied by `t`.
    pub fn scale(&self, t: f64) -> Result<Self, MmError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(MmError::NonPositiveScale(t));
        }
        let mut out = self.clone();
        out.dist.iter_mut().for_each(|d| *d *= t);
        Ok(out)
    }

    /// Same points and metric, different measure.
    pub fn reweighted(&self, weights: &[f64]) -> Result<Self, MmError> {
        if weights.len() != self.n {
            return Err(MmError::LengthMismatch {
                n: self.n,
                weights: weights.len(),
            });
        }
        let mut out = self.clone();
        out.weights = check_weights(weights)?;
        Ok(out)
    }

    /// The subspace on `keep`, restricted metric, weights renormalized.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self, MmError> {
        let m = keep.len();
        let mut dist = Vec::with_capacity(m * m);
        for &i in keep {
            dist.extend(keep.iter().map(|&j| self.d(i, j)));
        }
        let mass = self.mass_of(keep);
        let weights = keep.iter().map(|&i| self.weights[i] / mass).collect();
        let mut out = Self::from_flat_unchecked_triangle(m, dist, weights)?;
        if let Some(l) = &self.labels {
            out.labels = Some(keep.iter().map(|&i| l[i].clone()).collect());
        }
        Ok(out)
    }
}

/// A total map from source point indices to target point indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointMap {
    targets: Vec<usize>,
    target_len: usize,
}

impl PointMap {
    pub fn new(targets: Vec<usize>, target_len: usize) -> Result<Self, MmError> {
        if let Some((source_index, &target)) =
            targets.iter().enumerate().find(|(_, &t)| t >= target_len)
        {
            return Err(MmError::MapOutOfRange {
                source_index,
                target,
                len: target_len,
            });
        }
        Ok(PointMap {
            targets,
            target_len,
        })
    }

    pub fn identity(n: usize) -> Self {
        PointMap {
            targets: (0..n).collect(),
            target_len: n,
        }
    }

    pub fn constant(n: usize, target: usize, target_len: usize) -> Result<Self, MmError> {
        Self::new(vec![target; n], target_len)
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.targets[i]
    }

    pub fn source_len(&self) -> usize {
        self.targets.len()
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.targets
    }

    fn check_total(&self, n: usize) -> Result<(), MmError> {
        if self.targets.len() != n {
            return Err(MmError::MapNotTotal {
                map_len: self.targets.len(),
                n,
            });
        }
        Ok(())
    }
}

/// Pushforward of `weights` through `map`, indexed by target point
/// (zero where a target has no preimage).
pub fn pushforward_weights(weights: &[f64], map: &PointMap) -> Result<Vec<f64>, MmError> {
    map.check_total(weights.len())?;
    let mut out = vec![0.0; map.target_len];
    for (i, &w) in weights.iter().enumerate() {
        out[map.apply(i)] += w;
    }
    Ok(out)
}

/// The image space: `y_dist` restricted to the support of `f_# m_X`.
pub fn pushforward(
    x: &FiniteMmSpace,
    y_dist: &[Vec<f64>],
    map: &PointMap,
) -> Result<FiniteMmSpace, MmError> {
    let full = FiniteMmSpace::validate(y_dist, &vec![1.0 / y_dist.len() as f64; y_dist.len()])?;
    if map.target_len != full.len() {
        return Err(MmError::LengthMismatch {
            n: full.len(),
            weights: map.target_len,
        });
    }
    let w = pushforward_weights(x.weights(), map)?;
    let keep: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 0.0).collect();
    let m = keep.len();
    let mut dist = Vec::with_capacity(m * m);
    for &i in &keep {
        dist.extend(keep.iter().map(|&j| full.d(i, j)));
    }
    FiniteMmSpace::from_flat_unchecked_triangle(m, dist, keep.iter().map(|&j| w[j]).collect())
}

/// True iff `d_Y(f(i), f(j)) ≤ L d_X(i, j)` for every pair.
pub fn certify_lipschitz(x: &FiniteMmSpace, y: &FiniteMmSpace, map: &PointMap, l: f64) -> bool {
    if map.source_len() != x.len() || map.target_len() != y.len() {
        return false;
    }
    let slack = 1e-12 * x.diameter().max(y.diameter()).max(1.0);
    (0..x.len()).all(|i| {
        ((i + 1)..x.len()).all(|j| y.d(map.apply(i), map.apply(j)) <= l * x.d(i, j) + slack)
    })
}

fn euclidean_matrix(rows: &[&[f64]]) -> Vec<f64> {
    let m = rows.len();
    let mut dist = vec![0.0; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d = rows[i]
                .iter()
                .zip(rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            dist[i * m + j] = d;
            dist[j * m + i] = d;
        }
    }
    dist
}

/// Rows of an `N × dim` matrix in their given order, Euclidean metric,
/// uniform weights. Rows must be pairwise distinct.
pub fn euclidean(samples: &[f64], dim: usize) -> Result<FiniteMmSpace, MmError> {
    if samples.is_empty() || dim == 0 {
        return Err(MmError::EmptyBatch);
    }
    let rows: Vec<&[f64]> = samples.chunks(dim).collect();
    let n = rows.len();
    FiniteMmSpace::from_flat_unchecked_triangle(n, euclidean_matrix(&rows), vec![1.0 / n as f64; n])
}

/// Uniform empirical measure on the rows of an `N × dim` row-major matrix,
/// with exactly equal rows merged.
pub fn empirical(samples: &[f64], dim: usize) -> Result<FiniteMmSpace, MmError> {
    if samples.is_empty() || dim == 0 {
        return Err(MmError::EmptyBatch);
    }
    let rows: Vec<&[f64]> = samples.chunks(dim).collect();
    let n_rows = rows.len();
    let mut order: Vec<usize> = (0..n_rows).collect();
    let key = |r: &[f64]| r.iter().map(|v| v.to_bits()).collect::<Vec<u64>>();
    order.sort_by_key(|&i| key(rows[i]));
    let mut unique: Vec<&[f64]> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for i in order {
        match unique.last() {
            Some(last) if key(last) == key(rows[i]) => *counts.last_mut().unwrap() += 1,
            _ => {
                unique.push(rows[i]);
                counts.push(1);
            }
        }
    }
    let m = unique.len();
    let dist = euclidean_matrix(&unique);
    let weights = counts.iter().map(|&c| c as f64 / n_rows as f64).collect();
    FiniteMmSpace::from_flat_unchecked_triangle(m, dist, weights)
}
