//! Muckenhoupt products and non-ergodicity of the exchangeable sequence.

use super::{
    check_experiment, decreasing_with_tolerance, run, strictly_increasing, Cell, ExperimentConfig, ExperimentError,
    ExperimentId, ExperimentReport, Table, Verdict,
};
use crate::cauchy::{
    exchangeable_sequence, muckenhoupt_bound, muckenhoupt_product, muckenhoupt_product_from_median, Muckenhoupt,
};

/// Accepted band for the ratio of across-path standard deviations.
pub const SD_RATIO_BAND: (f64, f64) = (0.8, 1.25);
/// Standard errors allowed between the path-average mean and `1/(β-2)`.
pub const MEAN_SE_MULTIPLE: f64 = 4.0;

/// Rows `(x, cauchy1_product, cauchy1_bound, nu_beta_product,
/// nu_beta_bound, nu_beta_from_median)` over the grid `x ∈ dims`. The line
/// bound is only asserted for `β = 1`.
pub fn exp_muckenhoupt(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    check_experiment(config, ExperimentId::Muckenhoupt)?;
    run(config)
}

/// Rows `(n_terms, mean, sd, se, increment, increment_se, prediction)`
/// over the checkpoints `dims`, with `samples` paths. `increment` is the
/// mean over paths of `|A_{2n} - A_n|`, `A_n` the running average.
pub fn exp_ergodicity(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    check_experiment(config, ExperimentId::Ergodicity)?;
    run(config)
}

pub(super) fn muckenhoupt_rows(config: &ExperimentConfig) -> Result<Table, ExperimentError> {
    let beta = config.beta;
    let mut table = Table::new(&[
        "x",
        "cauchy1_product",
        "cauchy1_bound",
        "nu_beta_product",
        "nu_beta_bound",
        "nu_beta_from_median",
    ]);
    for &xi in &config.dims {
        let x = xi as f64;
        if x <= 1.0 {
            return Err(ExperimentError::Config(format!("grid point {x} must exceed 1")));
        }
        table.push(vec![
            xi.into(),
            muckenhoupt_product(Muckenhoupt::Cauchy1, beta, x)?.into(),
            muckenhoupt_bound(Muckenhoupt::Cauchy1, beta, x).into(),
            muckenhoupt_product(Muckenhoupt::NuBeta, beta, x)?.into(),
            muckenhoupt_bound(Muckenhoupt::NuBeta, beta, x).into(),
            muckenhoupt_product_from_median(beta, x)?.into(),
        ]);
    }
    Ok(table)
}

pub(super) fn muckenhoupt_verdicts(config: &ExperimentConfig, table: &Table) -> Vec<Verdict> {
    let all = table.select(|_| true);
    let mut out = Vec::new();
    let mut curve = |name: &str, product: &str, bound: &str| {
        let p = table.column_of(&all, product);
        let b = table.column_of(&all, bound);
        out.push(Verdict::new(
            &format!("{name}_exceeds_bound"),
            p.iter().zip(&b).all(|(p, b)| p > b),
            format!("products {p:?} vs bounds {b:?}"),
        ));
        out.push(Verdict::new(
            &format!("{name}_increasing"),
            strictly_increasing(&p),
            format!("products {p:?}"),
        ));
    };
    curve("nu_beta", "nu_beta_product", "nu_beta_bound");
    if config.beta == 1.0 {
        curve("cauchy1", "cauchy1_product", "cauchy1_bound");
    }
    out
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub(super) fn ergodicity_rows(config: &ExperimentConfig) -> Result<Table, ExperimentError> {
    let mut checkpoints: Vec<usize> = config.dims.iter().flat_map(|&n| [n, 2 * n]).collect();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let paths = exchangeable_sequence(config.beta, &checkpoints, config.samples, config.seed)?;
    let at = |n: usize| checkpoints.binary_search(&n).expect("checkpoint present");
    let prediction = 1.0 / (config.beta - 2.0);
    let root = (config.samples as f64).sqrt();
    let mut table = Table::new(&["n_terms", "mean", "sd", "se", "increment", "increment_se", "prediction"]);
    for &n in &config.dims {
        let (i, j) = (at(n), at(2 * n));
        let averages: Vec<f64> = paths.iter().map(|p| p[i]).collect();
        let increments: Vec<f64> = paths.iter().map(|p| (p[j] - p[i]).abs()).collect();
        let (mean, sd) = mean_sd(&averages);
        let (inc, inc_sd) = mean_sd(&increments);
        table.push(vec![
            n.into(),
            mean.into(),
            sd.into(),
            (sd / root).into(),
            inc.into(),
            (inc_sd / root).into(),
            Cell::Num(prediction),
        ]);
    }
    Ok(table)
}

pub(super) fn ergodicity_verdicts(_config: &ExperimentConfig, table: &Table) -> Vec<Verdict> {
    let all = table.select(|_| true);
    let mut out = Vec::new();
    let Some(&last) = all.last() else {
        return out;
    };
    let (mean, se, pred) = (table.num(last, "mean"), table.num(last, "se"), table.num(last, "prediction"));
    out.push(Verdict::new(
        "path_average_mean_matches_prediction",
        (mean - pred).abs() <= MEAN_SE_MULTIPLE * se,
        format!("mean {mean}, prediction {pred}, se {se}"),
    ));
    if all.len() >= 2 {
        let ratio = table.num(last, "sd") / table.num(all[0], "sd");
        out.push(Verdict::new(
            "across_path_sd_does_not_shrink",
            ratio >= SD_RATIO_BAND.0 && ratio <= SD_RATIO_BAND.1,
            format!("sd ratio {ratio}"),
        ));
        let inc = table.column_of(&all, "increment");
        let inc_se = table.column_of(&all, "increment_se");
        out.push(Verdict::new(
            "within_path_increment_shrinks",
            decreasing_with_tolerance(&inc, &inc_se) && inc[inc.len() - 1] < inc[0],
            format!("increments {inc:?}"),
        ));
    }
    out
}
