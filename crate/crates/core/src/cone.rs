//! κ-cones over finite metric measure spaces.
//!
//! Distances use the half-angle (haversine) form of the constant-curvature
//! law of cosines, which keeps full relative accuracy when two cone points
//! are close.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::invariants::{prokhorov_bipartite, InvariantError};
use crate::mm::{FiniteMmSpace, MmError, PointMap};
use crate::numeric::neumaier_sum;

/// Band outside `[0, 1]` inside which the haversine argument is clamped.
pub const INVERSION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("radius {r} lies outside the interval for kappa = {kappa}")]
    ArgumentOutOfInterval { kappa: f64, r: f64 },
    #[error("cosine-law argument {value} is outside the valid domain")]
    InversionDomain { value: f64 },
    #[error("base distance {0} is negative or not finite")]
    InvalidBaseDistance(f64),
    #[error("radial measure is empty")]
    EmptyRadialMeasure,
    #[error("radial weight {index} = {value} is not strictly positive")]
    NonPositiveRadialWeight { index: usize, value: f64 },
    #[error("radial weights sum to {0}, not 1")]
    RadialWeightSum(f64),
    #[error("non-exceptional domain has zero mass")]
    DomainEmpty,
    #[error(transparent)]
    Mm(#[from] MmError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

/// Generalized sine `s_κ`.
pub fn s_kappa(kappa: f64, r: f64) -> f64 {
    if kappa > 0.0 {
        let k = kappa.sqrt();
        (k * r).sin() / k
    } else if kappa < 0.0 {
        let k = (-kappa).sqrt();
        (k * r).sinh() / k
    } else {
        r
    }
}

/// Generalized cosine `c_κ`.
pub fn c_kappa(kappa: f64, r: f64) -> f64 {
    if kappa > 0.0 {
        (kappa.sqrt() * r).cos()
    } else if kappa < 0.0 {
        ((-kappa).sqrt() * r).cosh()
    } else {
        1.0
    }
}

/// `s_{min(κ, 0)}`: the flat sine for positive curvature.
pub fn s_tilde(kappa: f64, r: f64) -> f64 {
    s_kappa(kappa.min(0.0), r)
}

/// Right end of the radial interval; `∞` unless `κ > 0`.
pub fn radial_limit(kappa: f64) -> f64 {
    if kappa > 0.0 {
        PI / kappa.sqrt()
    } else {
        f64::INFINITY
    }
}

fn check_radius(kappa: f64, r: f64) -> Result<(), ConeError> {
    if !(r >= 0.0 && r.is_finite() && r <= radial_limit(kappa)) {
        return Err(ConeError::ArgumentOutOfInterval { kappa, r });
    }
    Ok(())
}

/// Whether `r` is an endpoint of the radial interval (an apex radius).
pub fn is_boundary_radius(kappa: f64, r: f64) -> bool {
    r == 0.0 || (kappa > 0.0 && r == radial_limit(kappa))
}

/// Distance in the κ-cone between `(r, x)` and `(rp, x')` with
/// `d(x, x') = base_distance`; base distances are truncated at `π`.
pub fn cone_distance(kappa: f64, r: f64, rp: f64, base_distance: f64) -> Result<f64, ConeError> {
    check_radius(kappa, r)?;
    check_radius(kappa, rp)?;
    if !(base_distance >= 0.0 && !base_distance.is_nan()) {
        return Err(ConeError::InvalidBaseDistance(base_distance));
    }
    let theta = if is_boundary_radius(kappa, r) || is_boundary_radius(kappa, rp) {
        0.0
    } else {
        base_distance.min(PI)
    };
    let half = (0.5 * theta).sin();
    let ang = half * half;
    if kappa == 0.0 {
        let diff = r - rp;
        return Ok((diff * diff + 4.0 * r * rp * ang).sqrt());
    }
    if kappa > 0.0 {
        let k = kappa.sqrt();
        let (a, b) = (k * r, k * rp);
        let sd = (0.5 * (a - b)).sin();
        let mut h = sd * sd + a.sin() * b.sin() * ang;
        if h > 1.0 {
            if h > 1.0 + INVERSION_TOL {
                return Err(ConeError::InversionDomain { value: h });
            }
            h = 1.0;
        }
        if h < 0.0 {
            if h < -INVERSION_TOL {
                return Err(ConeError::InversionDomain { value: h });
            }
            h = 0.0;
        }
        Ok(2.0 * h.sqrt().asin() / k)
    } else {
        let k = (-kappa).sqrt();
        let (a, b) = (k * r, k * rp);
        let sd = (0.5 * (a - b)).sinh();
        let h = sd * sd + a.sinh() * b.sinh() * ang;
        Ok(2.0 * h.max(0.0).sqrt().asinh() / k)
    }
}

/// Curvature together with a finitely supported radial measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConeSpecJson", into = "ConeSpecJson")]
pub struct ConeSpec {
    kappa: f64,
    radial: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct ConeSpecJson {
    kappa: f64,
    radial: Vec<[f64; 2]>,
}

impl TryFrom<ConeSpecJson> for ConeSpec {
    type Error = ConeError;
    fn try_from(j: ConeSpecJson) -> Result<Self, ConeError> {
        ConeSpec::new(j.kappa, j.radial.into_iter().map(|[r, w]| (r, w)).collect())
    }
}

impl From<ConeSpec> for ConeSpecJson {
    fn from(s: ConeSpec) -> Self {
        ConeSpecJson {
            kappa: s.kappa,
            radial: s.radial.into_iter().map(|(r, w)| [r, w]).collect(),
        }
    }
}

impl ConeSpec {
    /// Sorts the atoms by radius, merges equal radii and renormalizes.
    pub fn new(kappa: f64, mut radial: Vec<(f64, f64)>) -> Result<Self, ConeError> {
        if radial.is_empty() {
            return Err(ConeError::EmptyRadialMeasure);
        }
        for (index, &(r, w)) in radial.iter().enumerate() {
            check_radius(kappa, r)?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(ConeError::NonPositiveRadialWeight { index, value: w });
            }
        }
        let sum = neumaier_sum(radial.iter().map(|p| p.1));
        if (sum - 1.0).abs() > crate::mm::WEIGHT_SUM_TOL {
            return Err(ConeError::RadialWeightSum(sum));
        }
        radial.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(radial.len());
        for (r, w) in radial {
            match merged.last_mut() {
                Some(last) if last.0 == r => last.1 += w,
                _ => merged.push((r, w)),
            }
        }
        merged.iter_mut().for_each(|p| p.1 /= sum);
        Ok(ConeSpec {
            kappa,
            radial: merged,
        })
    }

    /// Equal-weight atoms at the given radii.
    pub fn uniform(kappa: f64, radii: &[f64]) -> Result<Self, ConeError> {
        let w = 1.0 / radii.len() as f64;
        Self::new(kappa, radii.iter().map(|&r| (r, w)).collect())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn radial(&self) -> &[(f64, f64)] {
        &self.radial
    }

    pub fn max_radius(&self) -> f64 {
        self.radial.last().map_or(0.0, |p| p.0)
    }

    /// Mass sitting at the apex radii.
    pub fn apex_mass(&self) -> f64 {
        self.radial
            .iter()
            .filter(|(r, _)| is_boundary_radius(self.kappa, *r))
            .map(|p| p.1)
            .sum()
    }
}

/// A point `r x` of the cone; the base index is zeroed at apex radii so
/// that equality respects the quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConePoint {
    pub r: f64,
    pub base_index: usize,
}

impl ConePoint {
    pub fn new(kappa: f64, r: f64, base_index: usize) -> Result<Self, ConeError> {
        check_radius(kappa, r)?;
        let base_index = if is_boundary_radius(kappa, r) {
            0
        } else {
            base_index
        };
        Ok(ConePoint { r, base_index })
    }

    pub fn is_apex(&self, kappa: f64) -> bool {
        is_boundary_radius(kappa, self.r)
    }

    pub fn distance(&self, other: &ConePoint, kappa: f64, base: &FiniteMmSpace) -> f64 {
        cone_distance(kappa, self.r, other.r, base.d(self.base_index, other.base_index))
            .expect("cone points carry validated radii")
    }
}

/// Points and weights of the cone measure, in order of increasing radius
/// then base index.
pub fn cone_points(spec: &ConeSpec, base: &FiniteMmSpace) -> (Vec<ConePoint>, Vec<f64>) {
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for &(r, w) in &spec.radial {
        if is_boundary_radius(spec.kappa, r) {
            pts.push(ConePoint { r, base_index: 0 });
            wts.push(w);
        } else {
            for (j, &m) in base.weights().iter().enumerate() {
                pts.push(ConePoint { r, base_index: j });
                wts.push(w * m);
            }
        }
    }
    (pts, wts)
}

fn distance_matrix(kappa: f64, pts: &[ConePoint], base: &FiniteMmSpace) -> Vec<f64> {
    let n = pts.len();
    let mut dist = vec![0.0; n * n];
    dist.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, slot) in row.iter_mut().enumerate() {
            if i != j {
                *slot = pts[i].distance(&pts[j], kappa, base);
            }
        }
    });
    // Enforce exact symmetry regardless of rounding order.
    for i in 0..n {
        for j in (i + 1)..n {
            dist[j * n + i] = dist[i * n + j];
        }
    }
    dist
}

/// The κ-cone of `base` with respect to the radial measure of `spec`.
pub fn cone_space(spec: &ConeSpec, base: &FiniteMmSpace) -> Result<FiniteMmSpace, ConeError> {
    let (pts, wts) = cone_points(spec, base);
    let dist = distance_matrix(spec.kappa, &pts, base);
    let labels = pts
        .iter()
        .map(|p| format!("({}, {})", p.r, p.base_index))
        .collect();
    Ok(FiniteMmSpace::from_flat_unchecked_triangle(pts.len(), dist, wts)?.with_labels(labels)?)
}

/// Breakdown of the verified defect of the radially extended map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeDefect {
    /// `1 - mass` of the lifted non-exceptional domain.
    pub mass_term: f64,
    /// Largest metric distortion over lifted domain pairs.
    pub distortion: f64,
    /// Prokhorov distance between the pushed-forward and target cone measures.
    pub prokhorov_term: f64,
    /// Maximum of the three terms.
    pub epsilon: f64,
    /// Base distortion times `s̃_κ(R)`, `R` the largest source radius.
    pub distortion_cap: f64,
    pub within_cap: bool,
}

/// Verifies `g(r x) = r f(x)` between the cone over `source_base` (radial
/// measure `source`) and the cone over `target_base` (radial measure
/// `target`), both with curvature `source.kappa()`.
///
/// Radii of the two specs need not agree, so the Prokhorov term is
/// evaluated in the ambient cone over `target_base`, which carries both
/// measures. `base_epsilon` is the base-level distortion that the cap is
/// computed from.
pub fn cone_map_defect(
    source: &ConeSpec,
    source_base: &FiniteMmSpace,
    target: &ConeSpec,
    target_base: &FiniteMmSpace,
    map: &PointMap,
    domain: &[usize],
    base_epsilon: f64,
) -> Result<ConeDefect, ConeError> {
    let kappa = source.kappa;
    if map.source_len() != source_base.len() || map.target_len() != target_base.len() {
        return Err(MmError::MapNotTotal {
            map_len: map.source_len(),
            n: source_base.len(),
        }
        .into());
    }
    let base_mass = source_base.mass_of(domain);
    if base_mass <= 0.0 {
        return Err(ConeError::DomainEmpty);
    }
    let mut in_domain = vec![false; source_base.len()];
    domain.iter().for_each(|&j| in_domain[j] = true);

    let (src_pts, src_w) = cone_points(source, source_base);
    let lifted: Vec<usize> = (0..src_pts.len())
        .filter(|&i| src_pts[i].is_apex(kappa) || in_domain[src_pts[i].base_index])
        .collect();
    let mass_term = (1.0 - neumaier_sum(lifted.iter().map(|&i| src_w[i]))).max(0.0);

    let image = |p: &ConePoint| ConePoint {
        r: p.r,
        base_index: if p.is_apex(kappa) {
            0
        } else {
            map.apply(p.base_index)
        },
    };
    let distortion = lifted
        .par_iter()
        .enumerate()
        .map(|(a, &i)| {
            let (p, gp) = (&src_pts[i], image(&src_pts[i]));
            lifted[a + 1..]
                .iter()
                .map(|&j| {
                    let q = &src_pts[j];
                    let ds = p.distance(q, kappa, source_base);
                    let dt = gp.distance(&image(q), kappa, target_base);
                    (ds - dt).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    // Pushforward of the source cone measure, keyed by image point.
    let mut pushed: Vec<(ConePoint, f64)> = Vec::new();
    for (p, &w) in src_pts.iter().zip(&src_w) {
        let g = image(p);
        match pushed.iter_mut().find(|(q, _)| *q == g) {
            Some(slot) => slot.1 += w,
            None => pushed.push((g, w)),
        }
    }
    let (tgt_pts, tgt_w) = cone_points(target, target_base);
    let mu: Vec<f64> = pushed.iter().map(|p| p.1).collect();
    let prokhorov_term = prokhorov_bipartite(&mu, &tgt_w, |i, j| {
        pushed[i].0.distance(&tgt_pts[j], kappa, target_base)
    })?;

    let distortion_cap = s_tilde(kappa, source.max_radius()) * base_epsilon;
    Ok(ConeDefect {
        mass_term,
        distortion,
        prokhorov_term,
        epsilon: mass_term.max(distortion).max(prokhorov_term),
        distortion_cap,
        within_cap: distortion <= distortion_cap + 1e-12 * (1.0 + distortion_cap),
    })
}
