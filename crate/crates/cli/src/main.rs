//! `mmlab`: runs the seed-pinned experiments and exposes the core
//! computations on files.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mmlab_core::cauchy::{nu_beta, radial_law, sample};
use mmlab_core::curvature::eigenvalue_asymptotics;
use mmlab_core::experiments::{self, ExperimentConfig, ExperimentId, OutputFormat};
use mmlab_core::invariants::{
    observable_diameter_lb, partial_diameter, prokhorov, InvariantRow, LipschitzFamily, Mode,
};
use mmlab_core::{cone_space, CauchyParams, ConeSpec, FiniteMmSpace};
use serde_json::json;

#[derive(Parser)]
#[command(name = "mmlab", version, about = "Metric measure geometry laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radial law of the normalized space against the half-line limit law.
    RadialLaw(ExperimentArgs),
    /// Defect of Lipschitz functions from their radial Lévy means.
    NearRadiality(ExperimentArgs),
    /// The three scaling regimes of r_n = c n^-gamma.
    PhaseTransition(ExperimentArgs),
    /// Observable-diameter lower bounds against the limit target.
    ObservableDiameter(ExperimentArgs),
    /// Half-mass witness of the truncated cloud against the truncated limit.
    NonboxObstruction(ExperimentArgs),
    /// Cones over refining circle discretizations.
    ConeConvergence(ExperimentArgs),
    /// Muckenhoupt products against their lower bounds.
    Muckenhoupt(ExperimentArgs),
    /// Time averages of the exchangeable sequence across paths.
    Ergodicity(ExperimentArgs),
    /// Draws a sample batch to a little-endian f64 file with a JSON sidecar.
    Sample(SampleArgs),
    /// Radial density of the n-dimensional law next to the limit density.
    RadialDensity(RadialDensityArgs),
    /// Closed-form weighted Ricci eigenvalues at a fixed norm.
    CurvatureAsymptotics(CurvatureArgs),
    /// Invariants of a finite mm-space given as JSON.
    Invariants(InvariantArgs),
    /// Builds the finite cone over a base space.
    Cone(ConeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    beta: f64,
    /// Comma-separated schedule.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    /// Output file; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    seed: u64,
    /// Scale by 1/sqrt(n).
    #[arg(long)]
    normalized: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RadialDensityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    beta: f64,
    /// Comma-separated evaluation points.
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurvatureArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    norm_x: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InvariantArgs {
    /// Space JSON: {"n", "dist", "weights"}.
    #[arg(long)]
    space: PathBuf,
    /// Mass levels for partial diameters.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Levels for observable-diameter lower bounds.
    #[arg(long, value_delimiter = ',')]
    kappa: Vec<f64>,
    /// JSON array of weights compared with the space's own by Prokhorov distance.
    #[arg(long)]
    nu: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConeArgs {
    /// Cone spec JSON: {"kappa", "radial": [[r, w], ...]}.
    #[arg(long)]
    spec: PathBuf,
    /// Base space JSON.
    #[arg(long)]
    base: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Runs an experiment; `Ok(false)` when a verdict failed.
fn run_experiment(id: ExperimentId, args: ExperimentArgs) -> Result<bool> {
    let config = ExperimentConfig {
        gamma: args.gamma,
        c: args.c,
        kappa: args.kappa,
        eps: args.eps,
        bins: args.bins,
        out: args.out.clone(),
        ..ExperimentConfig::new(id, args.beta, args.dims, args.samples, args.seed)
    };
    let report = experiments::run(&config)?;
    emit(args.out.as_ref(), &report.render(args.format.into())?)?;
    for v in &report.verdicts {
        eprintln!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    Ok(report.passed())
}

fn run_sample(args: SampleArgs) -> Result<()> {
    let params = if args.normalized {
        CauchyParams::normalized(args.n, args.beta)?
    } else {
        CauchyParams::new(args.n, args.beta)?
    };
    sample(&params, args.rows, args.seed)?.write(&args.out)?;
    Ok(())
}

fn run_radial_density(args: RadialDensityArgs) -> Result<()> {
    let law = radial_law(&CauchyParams::normalized(args.n, args.beta)?);
    let limit = nu_beta(args.beta)?;
    let mut csv = String::from("n,beta,t,density_n,density_limit\n");
    for &t in &args.t {
        if !(t >= 0.0) {
            bail!("evaluation point {t} must be nonnegative");
        }
        csv.push_str(&format!("{},{},{},{},{}\n", args.n, args.beta, t, law.pdf(t), limit.pdf(t)));
    }
    emit(args.out.as_ref(), &csv)
}

fn run_curvature(args: CurvatureArgs) -> Result<()> {
    let mut csv = String::from("n,beta,norm_x,radial_eig,tangential_eig\n");
    for r in eigenvalue_asymptotics(args.beta, &args.dims, args.norm_x)? {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n, r.beta, r.norm_x, r.radial_eig, r.tangential_eig
        ));
    }
    emit(args.out.as_ref(), &csv)
}

fn run_invariants(args: InvariantArgs) -> Result<()> {
    let space: FiniteMmSpace = read_json(&args.space)?;
    let mut rows = vec![InvariantRow::new("diameter", json!({}), space.diameter(), Mode::Exact)];
    for &alpha in &args.alpha {
        let pd = partial_diameter(&space, alpha)?;
        rows.push(InvariantRow::new("partial_diameter", json!({ "alpha": alpha }), pd.value, pd.mode));
    }
    if !args.kappa.is_empty() {
        let anchors: Vec<usize> = (0..space.len()).collect();
        let family = LipschitzFamily::distance_functions(&space, &anchors);
        for &kappa in &args.kappa {
            let v = observable_diameter_lb(&space, kappa, &family)?;
            rows.push(InvariantRow::new(
                "observable_diameter",
                json!({ "kappa": kappa, "family": "distance_functions" }),
                v,
                Mode::LowerBound,
            ));
        }
    }
    if let Some(path) = &args.nu {
        let nu: Vec<f64> = read_json(path)?;
        let v = prokhorov(&space, space.weights(), &nu)?;
        rows.push(InvariantRow::new("prokhorov", json!({ "nu": nu }), v, Mode::Exact));
    }
    emit(args.out.as_ref(), &(serde_json::to_string_pretty(&rows)? + "\n"))
}

fn run_cone(args: ConeArgs) -> Result<()> {
    let spec: ConeSpec = read_json(&args.spec)?;
    let base: FiniteMmSpace = read_json(&args.base)?;
    let cone = cone_space(&spec, &base)?;
    emit(args.out.as_ref(), &(serde_json::to_string_pretty(&cone)? + "\n"))
}

fn dispatch(command: Command) -> Result<bool> {
    let experiment = |id, args| run_experiment(id, args);
    match command {
        Command::RadialLaw(a) => experiment(ExperimentId::RadialLaw, a),
        Command::NearRadiality(a) => experiment(ExperimentId::NearRadiality, a),
        Command::PhaseTransition(a) => experiment(ExperimentId::PhaseTransition, a),
        Command::ObservableDiameter(a) => experiment(ExperimentId::ObservableDiameter, a),
        Command::NonboxObstruction(a) => experiment(ExperimentId::NonboxObstruction, a),
        Command::ConeConvergence(a) => experiment(ExperimentId::ConeConvergence, a),
        Command::Muckenhoupt(a) => experiment(ExperimentId::Muckenhoupt, a),
        Command::Ergodicity(a) => experiment(ExperimentId::Ergodicity, a),
        Command::Sample(a) => run_sample(a).map(|_| true),
        Command::RadialDensity(a) => run_radial_density(a).map(|_| true),
        Command::CurvatureAsymptotics(a) => run_curvature(a).map(|_| true),
        Command::Invariants(a) => run_invariants(a).map(|_| true),
        Command::Cone(a) => run_cone(a).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
