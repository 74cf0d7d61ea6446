//! Convergence of the normalized radial law to the half-line limit law.

use rayon::prelude::*;

use super::{
    check_experiment, run, strictly_decreasing, sup_cdf_gap, Cell, ExperimentConfig, ExperimentError,
    ExperimentId, ExperimentReport, Table, Verdict,
};
use crate::cauchy::{nu_beta, radial_law, sample_radii, CauchyParams};
use crate::numeric::{ks_critical_99, ks_from_sorted_cdf};
use crate::rng::derive_seed;

/// Rows `(n, ks_empirical, ks_exact, ks_sampler, ks_critical)`: the KS
/// distance of sampled radii to the limit law, the exact sup-CDF gap
/// between the radial law and the limit law, and the KS distance of the
/// same sample to its own exact law.
pub fn exp_radial_law(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    check_experiment(config, ExperimentId::RadialLaw)?;
    run(config)
}

pub(super) fn rows(config: &ExperimentConfig) -> Result<Table, ExperimentError> {
    let limit = nu_beta(config.beta)?;
    let cells: Vec<Vec<Cell>> = config
        .dims
        .par_iter()
        .map(|&n| -> Result<Vec<Cell>, ExperimentError> {
            let params = CauchyParams::normalized(n, config.beta)?;
            let law = radial_law(&params);
            let mut radii = sample_radii(&params, config.samples, derive_seed(config.seed, n as u64))?;
            radii.sort_by(f64::total_cmp);
            let ks_empirical = ks_from_sorted_cdf(&limit.cdf_sorted(&radii)?);
            let ks_sampler = ks_from_sorted_cdf(&law.cdf_sorted(&radii)?);
            let ks_exact = sup_cdf_gap(&law, &limit)?;
            Ok(vec![
                n.into(),
                ks_empirical.into(),
                ks_exact.into(),
                ks_sampler.into(),
                ks_critical_99(config.samples).into(),
            ])
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["n", "ks_empirical", "ks_exact", "ks_sampler", "ks_critical"]);
    cells.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

pub(super) fn verdicts(_config: &ExperimentConfig, table: &Table) -> Vec<Verdict> {
    if table.rows.len() < 2 {
        return Vec::new();
    }
    let all = table.select(|_| true);
    let exact = table.column_of(&all, "ks_exact");
    vec![Verdict::new(
        "exact_gap_strictly_decreasing",
        strictly_decreasing(&exact),
        format!("exact gaps {exact:?}"),
    )]
}
