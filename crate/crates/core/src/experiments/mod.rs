//! Seed-pinned reproductions that wire the other modules together and emit
//! row tables with pass/fail verdicts.
//!
//! Every experiment is split into a runner, which produces the rows, and a
//! verdict function that reads nothing but the config and the rows.

mod cone_convergence;
mod dispersion;
mod limits;
mod near_radiality;
mod nonbox;
mod radial;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cauchy::{CauchyError, Density1D};
use crate::cone::ConeError;
use crate::invariants::InvariantError;
use crate::mm::MmError;
use crate::rng::GENERATOR_ID;

pub use cone_convergence::{circle, exp_cone_convergence};
pub use dispersion::{exp_observable_diameter, exp_phase_transition};
pub use limits::{exp_ergodicity, exp_muckenhoupt};
pub use near_radiality::{exp_near_radiality, MIN_SHELL_SAMPLES};
pub use nonbox::exp_nonbox_obstruction;
pub use radial::exp_radial_law;

/// Smallest admissible sample size.
pub const MIN_SAMPLES: usize = 100;
/// Largest admissible sample size.
pub const MAX_SAMPLES: usize = 1_000_000;
/// Largest admissible ambient dimension.
pub const MAX_DIM: usize = 1024;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("radial shell {shell} holds {count} samples, fewer than {MIN_SHELL_SAMPLES}")]
    BinTooCoarse { shell: usize, count: usize },
    #[error(transparent)]
    Cauchy(#[from] CauchyError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Mm(#[from] MmError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    RadialLaw,
    NearRadiality,
    PhaseTransition,
    ObservableDiameter,
    NonboxObstruction,
    ConeConvergence,
    Muckenhoupt,
    Ergodicity,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::RadialLaw,
        ExperimentId::NearRadiality,
        ExperimentId::PhaseTransition,
        ExperimentId::ObservableDiameter,
        ExperimentId::NonboxObstruction,
        ExperimentId::ConeConvergence,
        ExperimentId::Muckenhoupt,
        ExperimentId::Ergodicity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::RadialLaw => "radial-law",
            ExperimentId::NearRadiality => "near-radiality",
            ExperimentId::PhaseTransition => "phase-transition",
            ExperimentId::ObservableDiameter => "observable-diameter",
            ExperimentId::NonboxObstruction => "nonbox-obstruction",
            ExperimentId::ConeConvergence => "cone-convergence",
            ExperimentId::Muckenhoupt => "muckenhoupt",
            ExperimentId::Ergodicity => "ergodicity",
        }
    }

    /// Whether `dims` lists ambient dimensions (and so is capped at
    /// [`MAX_DIM`]).
    fn dims_are_dimensions(self) -> bool {
        !matches!(
            self,
            ExperimentId::ConeConvergence | ExperimentId::Muckenhoupt | ExperimentId::Ergodicity
        )
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown experiment '{s}'")))
    }
}

/// Inputs of one experiment run.
///
/// `dims` is the schedule the experiment walks: ambient dimensions for the
/// sampling experiments, base levels `m` (finest last) for
/// `cone-convergence`, the `x` grid for `muckenhoupt` and the `n_terms`
/// checkpoints for `ergodicity`. For `ergodicity`, `samples` counts paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub beta: f64,
    pub dims: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub gamma: Option<f64>,
    pub c: Option<f64>,
    pub kappa: Option<f64>,
    pub eps: Option<f64>,
    pub bins: usize,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId, beta: f64, dims: Vec<usize>, samples: usize, seed: u64) -> Self {
        ExperimentConfig {
            experiment,
            beta,
            dims,
            samples,
            seed,
            gamma: None,
            c: None,
            kappa: None,
            eps: None,
            bins: 50,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.dims.is_empty() {
            return bad("dimension schedule is empty".into());
        }
        if self.dims.contains(&0) {
            return bad("schedule entries must be positive".into());
        }
        if self.dims.windows(2).any(|w| w[0] >= w[1]) {
            return bad("schedule must be strictly increasing".into());
        }
        if self.experiment.dims_are_dimensions() && self.dims.iter().any(|&n| n > MAX_DIM) {
            return bad(format!("dimensions are capped at {MAX_DIM}"));
        }
        if !(MIN_SAMPLES..=MAX_SAMPLES).contains(&self.samples) {
            return bad(format!("sample size must lie in [{MIN_SAMPLES}, {MAX_SAMPLES}]"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta = {} must be positive", self.beta));
        }
        if self.bins == 0 {
            return bad("bins must be positive".into());
        }
        if let Some(k) = self.kappa {
            let ok = if self.experiment == ExperimentId::ConeConvergence {
                k.is_finite()
            } else {
                k > 0.0 && k < 1.0
            };
            if !ok {
                return bad(format!("kappa = {k} is out of range"));
            }
        }
        for (name, v) in [("gamma", self.gamma), ("c", self.c), ("eps", self.eps)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} = {v} must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v:?}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Named columns and rows of cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn index(&self, column: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == column)
    }

    /// Numeric value of `column` in row `row`; NaN if absent.
    pub fn num(&self, row: usize, column: &str) -> f64 {
        self.index(column)
            .and_then(|c| self.rows.get(row)?.get(c)?.as_f64())
            .unwrap_or(f64::NAN)
    }

    pub fn text(&self, row: usize, column: &str) -> Option<&str> {
        match self.rows.get(row)?.get(self.index(column)?)? {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Indices of the rows satisfying `pred`, in table order.
    pub fn select<P: Fn(usize) -> bool>(&self, pred: P) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| pred(i)).collect()
    }

    /// Values of `column` over `rows`.
    pub fn column_of(&self, rows: &[usize], column: &str) -> Vec<f64> {
        rows.iter().map(|&r| self.num(r, column)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.to_owned(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    pub version: String,
    pub threads: usize,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    #[serde(flatten)]
    pub table: Table,
    pub verdicts: Vec<Verdict>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(ExperimentError::Config(format!("unknown format '{other}'"))),
        }
    }
}

impl ExperimentReport {
    fn assemble(config: &ExperimentConfig, table: Table, started: Instant) -> Self {
        let verdicts = verdicts(config, &table);
        ExperimentReport {
            config: config.clone(),
            table,
            verdicts,
            provenance: Provenance {
                generator: GENERATOR_ID.to_owned(),
                seed: config.seed,
                version: env!("CARGO_PKG_VERSION").to_owned(),
                threads: rayon::current_num_threads(),
                wall_clock_seconds: started.elapsed().as_secs_f64(),
            },
        }
    }

    /// All verdicts passed (vacuously true when there are none).
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    /// Verdicts recomputed from the stored config and rows.
    pub fn recompute_verdicts(&self) -> Vec<Verdict> {
        verdicts(&self.config, &self.table)
    }

    pub fn to_json(&self) -> Result<String, ExperimentError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String, ExperimentError> {
        match format {
            OutputFormat::Csv => Ok(self.table.to_csv()),
            OutputFormat::Json => self.to_json(),
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<(), ExperimentError> {
        fs::write(path, self.render(format)?)?;
        Ok(())
    }
}

/// Runs the experiment named in `config`.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let started = Instant::now();
    let table = match config.experiment {
        ExperimentId::RadialLaw => radial::rows(config)?,
        ExperimentId::NearRadiality => near_radiality::rows(config)?,
        ExperimentId::PhaseTransition => dispersion::phase_rows(config)?,
        ExperimentId::ObservableDiameter => dispersion::observable_rows(config)?,
        ExperimentId::NonboxObstruction => nonbox::rows(config)?,
        ExperimentId::ConeConvergence => cone_convergence::rows(config)?,
        ExperimentId::Muckenhoupt => limits::muckenhoupt_rows(config)?,
        ExperimentId::Ergodicity => limits::ergodicity_rows(config)?,
    };
    Ok(ExperimentReport::assemble(config, table, started))
}

/// Verdicts of the experiment named in `config`, computed from `table`.
pub fn verdicts(config: &ExperimentConfig, table: &Table) -> Vec<Verdict> {
    match config.experiment {
        ExperimentId::RadialLaw => radial::verdicts(config, table),
        ExperimentId::NearRadiality => near_radiality::verdicts(config, table),
        ExperimentId::PhaseTransition => dispersion::phase_verdicts(config, table),
        ExperimentId::ObservableDiameter => dispersion::observable_verdicts(config, table),
        ExperimentId::NonboxObstruction => nonbox::verdicts(config, table),
        ExperimentId::ConeConvergence => cone_convergence::verdicts(config, table),
        ExperimentId::Muckenhoupt => limits::muckenhoupt_verdicts(config, table),
        ExperimentId::Ergodicity => limits::ergodicity_verdicts(config, table),
    }
}

fn check_experiment(config: &ExperimentConfig, id: ExperimentId) -> Result<(), ExperimentError> {
    if config.experiment != id {
        return Err(ExperimentError::Config(format!(
            "config is for '{}', not '{id}'",
            config.experiment
        )));
    }
    Ok(())
}

/// True when `values` decreases along its index with at most one inversion,
/// and that inversion rises by no more than the combined standard error of
/// its two endpoints.
pub fn decreasing_with_tolerance(values: &[f64], se: &[f64]) -> bool {
    let mut inversions = 0;
    for i in 1..values.len() {
        let rise = values[i] - values[i - 1];
        if rise >= 0.0 {
            let tol = se[i].hypot(se[i - 1]);
            if rise > tol {
                return false;
            }
            inversions += 1;
        }
    }
    inversions <= 1
}

pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

pub fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

/// `sup_t |F(t) - G(t)|` over a logarithmic grid spanning seven decades
/// around the median of `g`, refined by golden-section search around the
/// largest grid gap.
pub fn sup_cdf_gap(f: &Density1D, g: &Density1D) -> Result<f64, ExperimentError> {
    const GRID: usize = 4000;
    let median = g.quantile(0.5)?;
    let grid: Vec<f64> = (0..GRID)
        .map(|i| median * 10f64.powf(-3.0 + 7.0 * i as f64 / (GRID - 1) as f64))
        .collect();
    let fv = f.cdf_sorted(&grid)?;
    let gv = g.cdf_sorted(&grid)?;
    let (imax, mut best) = fv
        .iter()
        .zip(&gv)
        .map(|(a, b)| (a - b).abs())
        .enumerate()
        .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let gap = |t: f64| -> Result<f64, ExperimentError> { Ok((f.cdf(t)? - g.cdf(t)?).abs()) };
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (grid[imax.saturating_sub(1)], grid[(imax + 1).min(GRID - 1)]);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut g1, mut g2) = (gap(x1)?, gap(x2)?);
    for _ in 0..60 {
        if g1 >= g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = gap(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = gap(x2)?;
        }
    }
    best = best.max(g1).max(g2);
    Ok(best)
}

/// Binomial standard error of a fraction estimated from `n` samples.
pub fn fraction_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
