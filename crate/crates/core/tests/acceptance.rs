//! End-to-end acceptance criteria. Runs as a plain binary so every
//! criterion prints a PASS/FAIL line regardless of the others.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mmlab_core::cauchy::{moments, muckenhoupt_bound, sample_map, sample_radii, CauchyParams, Muckenhoupt};
use mmlab_core::cone::s_tilde;
use mmlab_core::curvature::{cauchy_ricci, cd_zero_check, eigenvalue_asymptotics, fd_ricci, nu_beta_ricci};
use mmlab_core::experiments::{self, ExperimentConfig, ExperimentId, ExperimentReport};
use mmlab_core::invariants::prokhorov;
use mmlab_core::rng::derive_seed;
use mmlab_core::{cone_distance, FiniteMmSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    format!("error: {e}")
}

fn report_all_pass(report: &ExperimentReport) -> Result<(), String> {
    match report.verdicts.iter().find(|v| !v.passed) {
        Some(v) => Err(format!("verdict {} failed: {}", v.name, v.detail)),
        None if report.verdicts.is_empty() => Err("report carries no verdicts".into()),
        None => Ok(()),
    }
}

fn run_report(config: &ExperimentConfig) -> Result<ExperimentReport, String> {
    let report = experiments::run(config).map_err(err)?;
    report_all_pass(&report)?;
    // verdicts must be recomputable from the rows alone
    let again = experiments::verdicts(config, &report.table);
    ensure(again == report.verdicts, "verdicts differ when recomputed from rows")?;
    Ok(report)
}

fn config(id: ExperimentId, beta: f64, dims: &[usize], samples: usize) -> ExperimentConfig {
    ExperimentConfig::new(id, beta, dims.to_vec(), samples, 7)
}

// ---------------------------------------------------------------------------
// 1. Prokhorov against subset enumeration

/// `inf {ε : μ(U_ε(A)) ≥ ν(A) − ε for all A}` by walking the distinct
/// distances from every nonempty subset `A`.
fn prokhorov_oracle(dist: &[Vec<f64>], mu: &[f64], nu: &[f64]) -> f64 {
    let n = mu.len();
    let mut worst: f64 = 0.0;
    for mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let nu_a: f64 = members.iter().map(|&i| nu[i]).sum();
        let mut to_a: Vec<(f64, usize)> = (0..n)
            .map(|j| (members.iter().map(|&i| dist[i][j]).fold(f64::INFINITY, f64::min), j))
            .collect();
        to_a.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut eps_a = 1.0;
        let mut mass = 0.0;
        let mut k = 0;
        while k < n {
            let t = to_a[k].0;
            while k < n && to_a[k].0 == t {
                mass += mu[to_a[k].1];
                k += 1;
            }
            let next = if k < n { to_a[k].0 } else { f64::INFINITY };
            // on (t, next] the open neighbourhood has mass `mass`
            let candidate = t.max(nu_a - mass);
            if candidate <= next {
                eps_a = candidate;
                break;
            }
        }
        worst = worst.max(eps_a.min(1.0));
    }
    worst
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[0] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    if rng.random_bool(0.5) {
        let scale = rng.random_range(0.05..2.0);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>() * scale, rng.random::<f64>() * scale)).collect();
        pts.iter()
            .map(|a| pts.iter().map(|b| (a.0 - b.0).hypot(a.1 - b.1)).collect())
            .collect()
    } else {
        // shortest paths over random edge lengths on a 0.1 grid: many ties
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for i in 0..n {
            d[i][i] = 0.0;
            for j in 0..i {
                let w = rng.random_range(1..=8) as f64 / 10.0;
                d[i][j] = w;
                d[j][i] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }
}

fn criterion_prokhorov() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst: f64 = 0.0;
    for instance in 0..200 {
        let n = rng.random_range(1..=12);
        let dist = random_metric(&mut rng, n);
        let (mu, nu) = (random_weights(&mut rng, n), random_weights(&mut rng, n));
        let space = FiniteMmSpace::uniform(&dist).map_err(err)?;
        let flow = prokhorov(&space, &mu, &nu).map_err(err)?;
        let oracle = prokhorov_oracle(&dist, &mu, &nu);
        let gap = (flow - oracle).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-9, format!("instance {instance} (n={n}): flow {flow} vs oracle {oracle}"))?;
    }
    Ok(format!("200 instances, max deviation {worst:.2e}"))
}

// ---------------------------------------------------------------------------
// 2. Cone metric laws

fn radius(rng: &mut ChaCha8Rng, kappa: f64) -> f64 {
    if kappa > 0.0 {
        rng.random::<f64>() * PI / kappa.sqrt()
    } else {
        rng.random::<f64>() * 3.0
    }
}

fn criterion_cone() -> Check {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for kappa in [-1.0, 0.0, 1.0] {
        for _ in 0..100_000 {
            let (r, rp) = (radius(&mut rng, kappa), radius(&mut rng, kappa));
            let theta = rng.random::<f64>() * 5.0;
            let d = |a: f64, b: f64, t: f64| cone_distance(kappa, a, b, t).map_err(err);

            let same_ray = d(r, rp, 0.0)?;
            ensure(
                (same_ray - (r - rp).abs()).abs() <= TOL,
                format!("κ={kappa}: d({r}x, {rp}x) = {same_ray}"),
            )?;

            let circle = d(r, r, theta)?;
            let cap = s_tilde(kappa, r) * theta.min(PI);
            ensure(circle <= cap + TOL, format!("κ={kappa}: d({r}x, {r}x') = {circle} > {cap}"))?;

            let full = d(r, rp, theta)?;
            let combined = (r - rp).abs() + s_tilde(kappa, r).min(s_tilde(kappa, rp)) * theta.min(PI);
            ensure(full <= combined + TOL, format!("κ={kappa}: combined bound {full} > {combined}"))?;

            let eps = rng.random::<f64>() * 0.5;
            let theta2 = (theta + rng.random_range(-eps..=eps)).max(0.0);
            let big_r = r.max(rp);
            let shift = (full - d(r, rp, theta2)?).abs();
            let allowed = s_tilde(kappa, big_r) * eps;
            ensure(
                shift <= allowed + TOL,
                format!("κ={kappa}: base shift {eps} moved cone distance by {shift} > {allowed}"),
            )?;
        }
        for _ in 0..100_000 {
            let (a, b) = (rng.random::<f64>() * 4.0, rng.random::<f64>() * 4.0);
            let c = rng.random_range((a - b).abs()..=a + b);
            let r: Vec<f64> = (0..3).map(|_| radius(&mut rng, kappa)).collect();
            let d01 = cone_distance(kappa, r[0], r[1], a).map_err(err)?;
            let d12 = cone_distance(kappa, r[1], r[2], b).map_err(err)?;
            let d02 = cone_distance(kappa, r[0], r[2], c).map_err(err)?;
            ensure(
                d02 <= d01 + d12 + TOL,
                format!("κ={kappa}: triangle {d02} > {d01} + {d12} (radii {r:?}, base {a}, {b}, {c})"),
            )?;
        }
    }
    Ok("1e5 law checks and 1e5 triangles per curvature".into())
}

// ---------------------------------------------------------------------------
// 3. Radial law convergence

/// Midpoint nodes `W_j` of the chi-square(β) law in probability space.
fn chi_nodes(beta: f64, count: usize) -> Vec<f64> {
    let chi = ChiSquared::new(beta).unwrap();
    (0..count)
        .map(|j| chi.inverse_cdf((j as f64 + 0.5) / count as f64))
        .collect()
}

/// `P(‖x‖/√n ≤ t) = E[F_{χ²_n}(n t² W)]` minus `P(1/√W ≤ t)`.
fn radial_gap_at(n: usize, beta: f64, nodes: &[f64], t: f64) -> f64 {
    let chi_n = ChiSquared::new(n as f64).unwrap();
    let chi_b = ChiSquared::new(beta).unwrap();
    let law = nodes.iter().map(|&w| chi_n.cdf(n as f64 * t * t * w)).sum::<f64>() / nodes.len() as f64;
    (law - chi_b.sf(1.0 / (t * t))).abs()
}

fn radial_gap_oracle(n: usize, beta: f64, nodes: &[f64]) -> f64 {
    let grid: Vec<f64> = (0..600).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 599.0)).collect();
    let values: Vec<f64> = grid.iter().map(|&t| radial_gap_at(n, beta, nodes, t)).collect();
    let best = (0..grid.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let mut peak = values[best];
    for _ in 0..60 {
        let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        let (f1, f2) = (radial_gap_at(n, beta, nodes, m1), radial_gap_at(n, beta, nodes, m2));
        peak = peak.max(f1).max(f2);
        if f1 < f2 {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    peak
}

fn criterion_radial() -> Check {
    let dims = [2, 8, 32, 128];
    let mut summary = Vec::new();
    for beta in [1.0, 3.0] {
        let report = run_report(&config(ExperimentId::RadialLaw, beta, &dims, 100_000))?;
        let rows = report.table.select(|_| true);
        let exact = report.table.column_of(&rows, "ks_exact");
        let nodes = chi_nodes(beta, 2000);
        for (&n, &gap) in dims.iter().zip(&exact) {
            let oracle = radial_gap_oracle(n, beta, &nodes);
            ensure(
                (gap - oracle).abs() <= 1e-3 * oracle + 1e-7,
                format!("β={beta}, n={n}: quadrature gap {gap} vs oracle {oracle}"),
            )?;
        }
        ensure(
            exact.windows(2).all(|w| w[1] < w[0]),
            format!("β={beta}: gaps not decreasing {exact:?}"),
        )?;
        ensure(exact[0] >= 10.0 * exact[3], format!("β={beta}: ratio {}", exact[0] / exact[3]))?;

        let ks_lib = report.table.num(rows[3], "ks_empirical");
        let params = CauchyParams::normalized(128, beta).map_err(err)?;
        let mut radii = sample_radii(&params, 100_000, derive_seed(7, 128)).map_err(err)?;
        radii.sort_by(f64::total_cmp);
        let chi_b = ChiSquared::new(beta).unwrap();
        let m = radii.len() as f64;
        let ks = radii
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let f = chi_b.sf(1.0 / (t * t));
                (f - i as f64 / m).max((i + 1) as f64 / m - f)
            })
            .fold(0.0, f64::max);
        ensure((ks - ks_lib).abs() <= 1e-8, format!("β={beta}: KS {ks_lib} vs oracle {ks}"))?;
        ensure(ks < 0.02, format!("β={beta}: KS at n=128 is {ks}"))?;
        summary.push(format!("β={beta}: ratio {:.1}, KS {ks:.4}", exact[0] / exact[3]));
    }
    Ok(summary.join("; "))
}

// ---------------------------------------------------------------------------
// 4. Moment identities

fn criterion_moments() -> Check {
    let (n, beta, count) = (64, 4.0, 1_000_000);
    let params = CauchyParams::new(n, beta).map_err(err)?;
    let values = sample_map(&params, count, 7, |row| row.iter().map(|v| v * v).sum::<f64>() / n as f64)
        .map_err(err)?;
    let mean = values.iter().sum::<f64>() / count as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64;
    let se = (var / count as f64).sqrt();
    let target = 1.0 / (beta - 2.0);
    ensure(
        (mean - target).abs() <= 4.0 * se,
        format!("mean {mean} vs {target}, se {se}"),
    )?;
    let lv = moments(beta).map_err(err)?.limit_variance;
    ensure((lv - (0.5 - PI / 8.0)).abs() <= 1e-12, format!("limit variance {lv}"))?;
    Ok(format!("mean {mean:.5} ({:.2} SE), limit variance {lv}", (mean - target) / se))
}

// ---------------------------------------------------------------------------
// 5. Curvature closed forms

/// Balances the `h⁴` Richardson remainder against `ε/h²` roundoff, which
/// matters where the Hessian and gradient terms nearly cancel.
fn oracle_step(norm: f64) -> f64 {
    1e-3 * norm.max(1.0)
}

fn criterion_curvature() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut points = Vec::new();
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let beta = rng.random_range(0.5..6.0);
        let norm = rng.random_range(0.05..3.0);
        let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let s = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3);
        x.iter_mut().for_each(|v| *v *= norm / s);
        let nf = n as f64;
        let log_density = move |p: &[f64]| -0.5 * (nf + beta) * (1.0 + nf * p.iter().map(|v| v * v).sum::<f64>()).ln();
        let fd = fd_ricci(&log_density, -beta, &x, Some(oracle_step(norm))).map_err(err)?;
        let closed = cauchy_ricci(n, beta, &x).map_err(err)?;
        let rel = (&fd.tensor - &closed.tensor).amax() / closed.tensor.amax();
        worst = worst.max(rel);
        ensure(rel <= 1e-5, format!("cauchy n={n}, β={beta}, x={x:?}: relative error {rel}"))?;
        points.push((n, beta, x));
    }
    for _ in 0..100 {
        let beta = rng.random_range(0.5..6.0);
        let t = rng.random_range(0.2..4.0);
        let log_density = move |p: &[f64]| -(beta + 1.0) * p[0].ln() - 0.5 / (p[0] * p[0]);
        let fd = fd_ricci(&log_density, -beta, &[t], Some(oracle_step(t))).map_err(err)?.tensor[(0, 0)];
        let closed = nu_beta_ricci(beta, t).map_err(err)?;
        let rel = ((fd - closed) / closed).abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-5, format!("ν_β β={beta}, t={t}: relative error {rel}"))?;
    }
    for (n, beta, x) in &points {
        let cd = cd_zero_check(*n, *beta, std::slice::from_ref(x)).map_err(err)?;
        ensure(
            cd.nonnegative && cd.min_eigenvalue >= -1e-12,
            format!("negative eigenvalue {} at n={n}", cd.min_eigenvalue),
        )?;
    }
    let rows = eigenvalue_asymptotics(1.0, &[4, 16, 64, 256], 1.0).map_err(err)?;
    let dev: Vec<f64> = rows.iter().map(|r| (r.radial_eig - 1.0).abs()).collect();
    ensure(dev.windows(2).all(|w| w[1] < w[0]), format!("radial deviations {dev:?}"))?;
    let tangential = rows[3].tangential_eig;
    ensure(
        tangential > 1e3,
        format!(
            "finite differences agree (max {worst:.1e}) and radial eigenvalue → 1 {dev:?}, \
             but tangential eigenvalue at n=256 is {tangential}, not > 1000"
        ),
    )?;
    Ok(format!("max FD deviation {worst:.1e}, tangential at 256 = {tangential}"))
}

// ---------------------------------------------------------------------------
// 6-11. Experiments

fn criterion_near_radiality() -> Check {
    let mut c = config(ExperimentId::NearRadiality, 1.0, &[4, 16, 64, 256], 100_000);
    c.eps = Some(0.25);
    let report = run_report(&c)?;
    let max_rows = report.table.select(|r| report.table.text(r, "f_id") == Some("max"));
    let fractions = report.table.column_of(&max_rows, "fraction");
    Ok(format!("max defect fractions {fractions:?}"))
}

fn criterion_phase_transition() -> Check {
    let dims = [16, 64, 256];
    let mut one = config(ExperimentId::PhaseTransition, 1.0, &dims, 100_000);
    one.gamma = Some(1.0);
    one.c = Some(1.0);
    let mut two = config(ExperimentId::PhaseTransition, 3.0, &dims, 100_000);
    two.gamma = Some(0.5);
    two.c = Some(2.0);
    let mut three = config(ExperimentId::PhaseTransition, 1.0, &dims, 100_000);
    three.gamma = Some(0.25);
    three.kappa = Some(0.1);
    let mut names = Vec::new();
    for c in [one, two, three] {
        let report = run_report(&c)?;
        names.extend(report.verdicts.iter().map(|v| v.name.clone()));
    }
    ensure(
        ["regime1", "regime2", "regime3"]
            .iter()
            .all(|r| names.iter().any(|n| n.starts_with(r))),
        format!("missing a regime verdict among {names:?}"),
    )?;
    Ok(format!("{} verdicts", names.len()))
}

fn criterion_nonbox() -> Check {
    let report = run_report(&config(ExperimentId::NonboxObstruction, 1.0, &[16, 64], 100_000))?;
    let rows = report.table.select(|_| true);
    let radius = report.table.num(rows[0], "radius");
    // ν_1 is the law of 1/|z|, so ν_1([0, R]) = erfc(1/(R√2))
    let mass = libm::erfc(1.0 / (radius * std::f64::consts::SQRT_2));
    ensure((mass - 1.0 / 3.0).abs() <= 1e-10, format!("ν([0, R]) = {mass}"))?;
    for &r in &rows {
        let residual = report.table.num(r, "quantile_residual");
        ensure(residual.abs() <= 1e-10, format!("quantile residual {residual}"))?;
        let ratio = report.table.num(r, "witness_over_radius");
        ensure(ratio >= 0.9, format!("witness ratio {ratio}"))?;
        ensure(report.table.num(r, "limit_partial_diameter") == 0.0, "limit diameter is not 0")?;
    }
    let ratios = report.table.column_of(&rows, "witness_over_radius");
    Ok(format!("R = {radius}, witness/R {ratios:?}"))
}

fn criterion_cone_convergence() -> Check {
    let report = run_report(&config(ExperimentId::ConeConvergence, 1.0, &[8, 16, 32, 64, 128], 100))?;
    let mut out = Vec::new();
    for kappa in [-1.0, 0.0, 1.0] {
        let rows = report.table.select(|r| report.table.num(r, "kappa") == kappa);
        ensure(rows.len() == 5, format!("κ={kappa}: {} rows", rows.len()))?;
        let eps = report.table.column_of(&rows, "epsilon");
        out.push(format!("κ={kappa}: {:.3?}", &eps[..4]));
    }
    Ok(out.join("; "))
}

fn criterion_muckenhoupt() -> Check {
    ensure(
        (muckenhoupt_bound(Muckenhoupt::Cauchy1, 1.0, 4.0) - (0.5 + 16.0 / 6.0)).abs() < 1e-15,
        "line bound at x = 4",
    )?;
    let report = run_report(&config(ExperimentId::Muckenhoupt, 1.0, &[2, 4, 8, 16], 100))?;
    for name in ["cauchy1_exceeds_bound", "cauchy1_increasing", "nu_beta_exceeds_bound", "nu_beta_increasing"] {
        ensure(report.verdict(name).is_some(), format!("missing verdict {name}"))?;
    }
    let rows = report.table.select(|_| true);
    Ok(format!(
        "products at x=16: {:.3} / {:.3}",
        report.table.num(rows[3], "cauchy1_product"),
        report.table.num(rows[3], "nu_beta_product")
    ))
}

fn criterion_ergodicity() -> Check {
    let report = run_report(&config(ExperimentId::Ergodicity, 4.0, &[1000, 10_000], 1000))?;
    let rows = report.table.select(|_| true);
    let sd = report.table.column_of(&rows, "sd");
    let mean = report.table.num(rows[1], "mean");
    Ok(format!("sd ratio {:.3}, mean {mean:.4}", sd[1] / sd[0]))
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> Check,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { id: 1, name: "prokhorov oracle equivalence", limit: secs(30), check: criterion_prokhorov },
        Criterion { id: 2, name: "cone metric laws", limit: secs(60), check: criterion_cone },
        Criterion { id: 3, name: "radial law convergence", limit: secs(60), check: criterion_radial },
        Criterion { id: 4, name: "moment identities", limit: None, check: criterion_moments },
        Criterion { id: 5, name: "curvature closed forms", limit: secs(10), check: criterion_curvature },
        Criterion { id: 6, name: "near-radiality", limit: secs(180), check: criterion_near_radiality },
        Criterion { id: 7, name: "phase transition", limit: secs(300), check: criterion_phase_transition },
        Criterion { id: 8, name: "non-box obstruction", limit: None, check: criterion_nonbox },
        Criterion { id: 9, name: "cone box-convergence", limit: secs(120), check: criterion_cone_convergence },
        Criterion { id: 10, name: "muckenhoupt divergence", limit: None, check: criterion_muckenhoupt },
        Criterion { id: 11, name: "non-ergodicity", limit: None, check: criterion_ergodicity },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut outcome = (c.check)();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, c.limit) {
            if elapsed > limit {
                outcome = Err(format!("took {elapsed:.1?}, limit {limit:?}"));
            }
        }
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {:>2} {} [{:.2?}]: {detail}", c.id, c.name, elapsed);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
