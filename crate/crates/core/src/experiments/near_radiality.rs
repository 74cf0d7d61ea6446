//! Near-radiality of Lipschitz functions on the normalized Cauchy space.
//!
//! For each member `f` of a generated 1-Lipschitz family, `f̄(r)` is the
//! Lévy mean of `f` over an equal-mass radial shell, interpolated linearly
//! between shell centres and held flat beyond the outermost centres. The
//! defect is the fraction of samples with `|f(x) - f̄(‖x‖)| ≥ ε`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{
    check_experiment, decreasing_with_tolerance, fraction_se, run, ExperimentConfig, ExperimentError,
    ExperimentId, ExperimentReport, Table, Verdict,
};
use crate::cauchy::{nu_beta, sample_map, CauchyParams};
use crate::invariants::levy_mean;
use crate::rng::{derive_seed, stream_rng};

/// Fewest samples a radial shell may hold.
pub const MIN_SHELL_SAMPLES: usize = 30;

const DEFAULT_EPS: f64 = 0.25;
/// Multiplier of a median's standard error allowed in the Lipschitz check.
const LIPSCHITZ_SE: f64 = 3.0;
const FAMILY_LABEL: u64 = 0x4e52;

/// Rows `(n, f_id, eps, fraction, se, lipschitz_margin)`, one per family
/// member and dimension, plus an `f_id = "max"` row per dimension holding
/// the worst member.
pub fn exp_near_radiality(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    check_experiment(config, ExperimentId::NearRadiality)?;
    run(config)
}

/// A 1-Lipschitz test function on `ℝⁿ`.
enum Member {
    Linear(Vec<f64>),
    Anchor(Vec<f64>),
    Max(usize, usize),
    Min(usize, usize),
    Constant,
    Radial,
}

struct Family {
    ids: Vec<String>,
    members: Vec<Member>,
}

fn unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Four linear functionals, two distance-to-anchor functions with anchors
/// at the median radius, three max/min combinations, the constant and the
/// radial function.
fn family(n: usize, anchor_radius: f64, seed: u64) -> Family {
    let mut rng = stream_rng(derive_seed(seed, FAMILY_LABEL), n as u64);
    let mut ids = Vec::new();
    let mut members = Vec::new();
    for k in 0..4 {
        ids.push(format!("linear_{k}"));
        members.push(Member::Linear(unit_vector(&mut rng, n)));
    }
    for k in 0..2 {
        ids.push(format!("anchor_{k}"));
        let a = unit_vector(&mut rng, n).into_iter().map(|v| v * anchor_radius).collect();
        members.push(Member::Anchor(a));
    }
    for (id, m) in [
        ("max_linear_0_anchor_0", Member::Max(0, 4)),
        ("min_linear_1_anchor_1", Member::Min(1, 5)),
        ("max_linear_2_linear_3", Member::Max(2, 3)),
        ("constant", Member::Constant),
        ("radial", Member::Radial),
    ] {
        ids.push(id.to_owned());
        members.push(m);
    }
    Family { ids, members }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Family {
    /// `[‖x‖, f_0(x), f_1(x), …]`.
    fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.members.len() + 1);
        out.push(dot(x, x).sqrt());
        for m in &self.members {
            let v = match m {
                Member::Linear(u) => dot(u, x),
                Member::Anchor(a) => x.iter().zip(a).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt(),
                Member::Max(i, j) => out[i + 1].max(out[j + 1]),
                Member::Min(i, j) => out[i + 1].min(out[j + 1]),
                Member::Constant => 0.0,
                Member::Radial => out[0],
            };
            out.push(v);
        }
        out
    }
}

/// Equal-count shells over samples sorted by radius.
struct Shells {
    /// `(start, end)` row ranges into the sorted order.
    ranges: Vec<(usize, usize)>,
    centers: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn shells(sorted_radii: &[f64], bins: usize) -> Result<Shells, ExperimentError> {
    let n = sorted_radii.len();
    let mut s = Shells {
        ranges: Vec::with_capacity(bins),
        centers: Vec::with_capacity(bins),
        lo: Vec::with_capacity(bins),
        hi: Vec::with_capacity(bins),
    };
    for b in 0..bins {
        let (start, end) = (b * n / bins, (b + 1) * n / bins);
        if end - start < MIN_SHELL_SAMPLES {
            return Err(ExperimentError::BinTooCoarse {
                shell: b,
                count: end - start,
            });
        }
        s.ranges.push((start, end));
        s.centers.push(sorted_radii[(start + end) / 2]);
        s.lo.push(sorted_radii[start]);
        s.hi.push(sorted_radii[end - 1]);
    }
    Ok(s)
}

/// Piecewise-linear interpolation through `(xs, ys)`, flat outside.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&c| c <= x);
    if k == 0 {
        return ys[0];
    }
    if k == xs.len() {
        return ys[k - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    if x1 == x0 {
        return ys[k];
    }
    ys[k - 1] + (ys[k] - ys[k - 1]) * (x - x0) / (x1 - x0)
}

/// Defect fraction of one member and the smallest slack of the
/// shell-to-shell Lipschitz check.
fn member_stats(values: &[f64], radii: &[f64], shells: &Shells, eps: f64) -> Result<(f64, f64), ExperimentError> {
    let mut means = Vec::with_capacity(shells.ranges.len());
    let mut median_se = Vec::with_capacity(shells.ranges.len());
    for &(start, end) in &shells.ranges {
        let v = &values[start..end];
        let m = v.len() as f64;
        means.push(levy_mean(&vec![1.0 / m; v.len()], v)?);
        let mean = v.iter().sum::<f64>() / m;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
        // Asymptotic standard error of a sample median, normal reference.
        median_se.push(1.2533 * var.sqrt() / m.sqrt());
    }
    let bad = values
        .iter()
        .zip(radii)
        .filter(|(f, r)| (**f - interpolate(&shells.centers, &means, **r)).abs() >= eps)
        .count();
    let margin = (1..means.len())
        .map(|b| {
            let slack = (shells.hi[b] - shells.lo[b - 1]) + LIPSCHITZ_SE * median_se[b].hypot(median_se[b - 1]);
            slack - (means[b] - means[b - 1]).abs()
        })
        .fold(f64::INFINITY, f64::min);
    Ok((bad as f64 / values.len() as f64, margin))
}

pub(super) fn rows(config: &ExperimentConfig) -> Result<Table, ExperimentError> {
    let eps = config.eps.unwrap_or(DEFAULT_EPS);
    let anchor_radius = nu_beta(config.beta)?.quantile(0.5)?;
    let mut table = Table::new(&["n", "f_id", "eps", "fraction", "se", "lipschitz_margin"]);
    for &n in &config.dims {
        if config.samples / config.bins < MIN_SHELL_SAMPLES {
            return Err(ExperimentError::BinTooCoarse {
                shell: 0,
                count: config.samples / config.bins,
            });
        }
        let fam = family(n, anchor_radius, config.seed);
        let params = CauchyParams::normalized(n, config.beta)?;
        let mut evals = sample_map(&params, config.samples, derive_seed(config.seed, n as u64), |x| {
            fam.evaluate(x)
        })?;
        evals.sort_by(|a, b| a[0].total_cmp(&b[0]));
        let radii: Vec<f64> = evals.iter().map(|e| e[0]).collect();
        let sh = shells(&radii, config.bins)?;
        let mut worst = (0.0f64, f64::INFINITY);
        for (k, id) in fam.ids.iter().enumerate() {
            let values: Vec<f64> = evals.iter().map(|e| e[k + 1]).collect();
            let (fraction, margin) = member_stats(&values, &radii, &sh, eps)?;
            worst = (worst.0.max(fraction), worst.1.min(margin));
            table.push(vec![
                n.into(),
                id.as_str().into(),
                eps.into(),
                fraction.into(),
                fraction_se(fraction, config.samples).into(),
                margin.into(),
            ]);
        }
        table.push(vec![
            n.into(),
            "max".into(),
            eps.into(),
            worst.0.into(),
            fraction_se(worst.0, config.samples).into(),
            worst.1.into(),
        ]);
    }
    Ok(table)
}

pub(super) fn verdicts(config: &ExperimentConfig, table: &Table) -> Vec<Verdict> {
    let eps = config.eps.unwrap_or(DEFAULT_EPS);
    let worst = table.select(|r| table.text(r, "f_id") == Some("max"));
    let fractions = table.column_of(&worst, "fraction");
    let se = table.column_of(&worst, "se");
    let mut out = Vec::new();
    if fractions.len() >= 2 {
        out.push(Verdict::new(
            "defect_fraction_decreasing",
            decreasing_with_tolerance(&fractions, &se),
            format!("worst-member fractions {fractions:?}"),
        ));
    }
    if let Some(&last) = fractions.last() {
        out.push(Verdict::new(
            "defect_fraction_below_eps_at_top_n",
            last < eps,
            format!("{last} vs eps {eps}"),
        ));
    }
    let margins = table.column_of(&worst, "lipschitz_margin");
    out.push(Verdict::new(
        "binned_mean_lipschitz_across_shells",
        margins.iter().all(|&m| m >= 0.0),
        format!("smallest margins {margins:?}"),
    ));
    out
}
