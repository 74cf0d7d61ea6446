//! Box convergence of cones over refining circle discretizations.
//!
//! The base `X_m` is `m` equally spaced points on a circle of circumference
//! `2π` with the arc-length metric and uniform weights. The radial measure
//! is the uniform law on `[0, 1]` discretized at `K_m = max(1, m/8)`
//! midpoint quantiles. Level `m` maps into the finest level `M` by
//! `i ↦ i M/m`, lifted radially.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::{
    check_experiment, run, strictly_decreasing, Cell, ExperimentConfig, ExperimentError, ExperimentId,
    ExperimentReport, Table, Verdict,
};
use crate::cone::{cone_map_defect, ConeSpec};
use crate::invariants::{verify_eps_mm_isom, EpsMmIsomCert};
use crate::mm::{FiniteMmSpace, PointMap};

const DEFAULT_KAPPAS: [f64; 3] = [-1.0, 0.0, 1.0];

/// Rows `(kappa, m, finest, radial_atoms, base_epsilon, epsilon,
/// mass_term, distortion, prokhorov_term, distortion_cap, within_cap,
/// floor)`, one per level `m` in `dims` (the last entry is the finest
/// level `M` and maps to itself). `floor = max(2π/M, 1/K_M)` is the finest
/// grid spacing.
pub fn exp_cone_convergence(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    check_experiment(config, ExperimentId::ConeConvergence)?;
    run(config)
}

/// `m` equally spaced points on the circle of circumference `2π`.
pub fn circle(m: usize) -> Result<FiniteMmSpace, ExperimentError> {
    let step = 2.0 * PI / m as f64;
    let dist: Vec<f64> = (0..m * m)
        .map(|k| {
            let gap = (k / m).abs_diff(k % m);
            gap.min(m - gap) as f64 * step
        })
        .collect();
    Ok(FiniteMmSpace::from_flat(m, dist, vec![1.0 / m as f64; m])?)
}

fn radial_atoms(m: usize) -> usize {
    (m / 8).max(1)
}

fn radial_spec(kappa: f64, m: usize) -> Result<ConeSpec, ExperimentError> {
    let k = radial_atoms(m);
    let radii: Vec<f64> = (0..k).map(|i| (i as f64 + 0.5) / k as f64).collect();
    Ok(ConeSpec::uniform(kappa, &radii)?)
}

fn kappas(config: &ExperimentConfig) -> Vec<f64> {
    config.kappa.map_or(DEFAULT_KAPPAS.to_vec(), |k| vec![k])
}

pub(super) fn rows(config: &ExperimentConfig) -> Result<Table, ExperimentError> {
    let finest = *config.dims.last().expect("validated schedule");
    if let Some(&m) = config.dims.iter().find(|&&m| !finest.is_multiple_of(m)) {
        return Err(ExperimentError::Config(format!(
            "level {m} does not divide the finest level {finest}"
        )));
    }
    let target_base = circle(finest)?;
    let floor = (2.0 * PI / finest as f64).max(1.0 / radial_atoms(finest) as f64);
    let mut table = Table::new(&[
        "kappa",
        "m",
        "finest",
        "radial_atoms",
        "base_epsilon",
        "epsilon",
        "mass_term",
        "distortion",
        "prokhorov_term",
        "distortion_cap",
        "within_cap",
        "floor",
    ]);
    for kappa in kappas(config) {
        let target = radial_spec(kappa, finest)?;
        let cells: Vec<Vec<Cell>> = config
            .dims
            .par_iter()
            .map(|&m| -> Result<Vec<Cell>, ExperimentError> {
                let base = circle(m)?;
                let map = PointMap::new((0..m).map(|i| i * (finest / m)).collect(), finest)?;
                let domain: Vec<usize> = (0..m).collect();
                let base_cert = EpsMmIsomCert {
                    map: map.clone(),
                    domain: domain.clone(),
                    epsilon: 0.0,
                };
                let base_eps = verify_eps_mm_isom(&base, &target_base, &base_cert)?.epsilon;
                let source = radial_spec(kappa, m)?;
                let defect = cone_map_defect(&source, &base, &target, &target_base, &map, &domain, base_eps)?;
                Ok(vec![
                    kappa.into(),
                    m.into(),
                    finest.into(),
                    radial_atoms(m).into(),
                    base_eps.into(),
                    defect.epsilon.into(),
                    defect.mass_term.into(),
                    defect.distortion.into(),
                    defect.prokhorov_term.into(),
                    defect.distortion_cap.into(),
                    defect.within_cap.into(),
                    floor.into(),
                ])
            })
            .collect::<Result<_, _>>()?;
        cells.into_iter().for_each(|r| table.push(r));
    }
    Ok(table)
}

pub(super) fn verdicts(config: &ExperimentConfig, table: &Table) -> Vec<Verdict> {
    let mut out = Vec::new();
    for kappa in kappas(config) {
        let rows = table.select(|r| table.num(r, "kappa") == kappa);
        let eps = table.column_of(&rows, "epsilon");
        let caps = table.column_of(&rows, "within_cap");
        out.push(Verdict::new(
            &format!("kappa_{kappa}_distortion_within_cap"),
            caps.iter().all(|&c| c == 1.0),
            format!("within-cap flags {caps:?}"),
        ));
        if let Some(&last) = rows.last() {
            let e = table.num(last, "epsilon");
            out.push(Verdict::new(
                &format!("kappa_{kappa}_finest_level_exact"),
                e == 0.0,
                format!("self-map epsilon {e}"),
            ));
        }
        if rows.len() >= 2 {
            let coarse = &eps[..eps.len() - 1];
            out.push(Verdict::new(
                &format!("kappa_{kappa}_epsilon_decreasing"),
                strictly_decreasing(coarse),
                format!("epsilon {coarse:?}"),
            ));
            let r = rows[rows.len() - 2];
            let (e, floor) = (table.num(r, "epsilon"), table.num(r, "floor"));
            out.push(Verdict::new(
                &format!("kappa_{kappa}_reaches_floor"),
                e < 2.0 * floor,
                format!("{e} vs 2 x floor = {}", 2.0 * floor),
            ));
        }
    }
    out
}
