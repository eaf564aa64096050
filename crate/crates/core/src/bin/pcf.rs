use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use pcf_harmonic::harness::{verify_suite, Status, Suite, SuiteConfig, SuiteReport, DEFAULT_BATCH, DEFAULT_SEED};
use pcf_harmonic::prelude::*;

#[derive(Parser)]
#[command(name = "pcf", version, about = "Kernels and harmonic functions on p.c.f. self-similar sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the level-m graph and export vertices and cells.
    Build(Common),
    /// Eigenvalues per boundary condition with Weyl and growth fits.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Comma-separated levels; overrides --level.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
    },
    /// Heat and Poisson kernels on sampled vertex pairs, series against quadrature.
    Kernel {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [0.3, 1.0])]
        t_grid: Vec<f64>,
        /// Number of sampled vertices.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Sum every computed mode instead of truncating at --tol.
        #[arg(long)]
        full: bool,
    },
    /// Run a verification suite and write its JSON report.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Tube diagnostics of a seeded batch of Dirichlet Poisson integrals,
    /// using every computed mode.
    Fatou {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.6, 1.0])]
        t_grid: Vec<f64>,
    },
    /// Every suite plus a flat CSV summary.
    Report(Common),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value = "interval")]
    preset: String,
    /// JSON structure description; replaces --preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    level: usize,
    #[arg(long, value_enum, default_value_t = BcArg::Both)]
    bc: BcArg,
    /// Tail tolerance tau.
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tol: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Cap on |W_m| |V_0|.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Dirichlet,
    Neumann,
    Both,
}

impl BcArg {
    fn list(self) -> Vec<BoundaryCondition> {
        match self {
            BcArg::Dirichlet => vec![BoundaryCondition::Dirichlet],
            BcArg::Neumann => vec![BoundaryCondition::Neumann],
            BcArg::Both => vec![BoundaryCondition::Dirichlet, BoundaryCondition::Neumann],
        }
    }
}

enum Failure {
    Usage(String),
    Config(String),
    Budget(String),
    Run(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Config(_) | Error::Harmonic(_) | Error::IdentificationViolated { .. } => Failure::Config(msg),
            Error::BudgetExceeded { .. } => Failure::Budget(msg),
            _ => Failure::Run(msg),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(c) => build(&c),
        Command::Spectrum { common, levels } => spectrum(&common, &levels),
        Command::Kernel { common, t_grid, samples, full } => kernel(&common, &t_grid, samples, full),
        Command::Verify { common, suite } => verify(&common, &suite),
        Command::Fatou { common, t_grid } => fatou(&common, &t_grid),
        Command::Report(c) => report(&c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("budget exceeded: {m}");
            ExitCode::from(4)
        }
    }
}

fn structure(c: &Common) -> std::result::Result<SelfSimilarStructure, Failure> {
    match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            Ok(load_structure(&text)?)
        }
        None => Ok(SelfSimilarStructure::preset(&c.preset)?),
    }
}

fn out_dir(c: &Common) -> std::result::Result<&Path, Failure> {
    fs::create_dir_all(&c.out).map_err(|e| Failure::Run(format!("{}: {e}", c.out.display())))?;
    Ok(&c.out)
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Outcome {
    let text = serde_json::to_string_pretty(v).map_err(Error::from)?;
    fs::write(path, text + "\n").map_err(Error::from)?;
    Ok(())
}

fn check_tol(c: &Common) -> Outcome {
    if c.tol > 0.0 && c.tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--tol must be positive, got {}", c.tol)))
    }
}

fn check_times(ts: &[f64]) -> Outcome {
    if ts.is_empty() {
        return Err(Failure::Usage("--t-grid is empty".into()));
    }
    match ts.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        Some(t) => Err(Failure::Usage(format!("--t-grid entries must be positive, got {t}"))),
        None => Ok(()),
    }
}

struct Level {
    s: SelfSimilarStructure,
    g: VertexGraph,
    e: EnergyForm,
}

fn level(c: &Common, m: usize) -> std::result::Result<Level, Failure> {
    let s = structure(c)?;
    let g = build_level_with_budget(&s, m, c.budget)?;
    let e = energy_matrix(&g, s.harmonic());
    Ok(Level { s, g, e })
}

fn build(c: &Common) -> Outcome {
    let l = level(c, c.level)?;
    let out = out_dir(c)?;
    l.g.export_csv(out)?;
    let dedup = l.g.coordinate_dedup_count(&l.s, GLUE_TOL);
    let summary = json!({
        "preset": l.s.name(),
        "level": c.level,
        "vertices": l.g.num_vertices(),
        "cells": l.g.num_cells(),
        "boundary_size": l.g.boundary_size(),
        "dimension": l.s.dimension(),
        "coordinate_dedup_vertices": dedup,
        "affine_nested": l.s.is_affine_nested(),
    });
    write_json(&out.join("build.json"), &summary)?;
    println!(
        "{} level {}: {} vertices, {} cells, d = {}",
        l.s.name(),
        c.level,
        l.g.num_vertices(),
        l.g.num_cells(),
        l.s.dimension()
    );
    if dedup != l.g.num_vertices() {
        eprintln!("gluing mismatch: {dedup} distinct coordinates");
        return Err(Failure::Checks);
    }
    Ok(())
}

fn fit_json<T: Serialize>(r: Result<T>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).unwrap_or(Value::Null),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn spectrum(c: &Common, levels: &[usize]) -> Outcome {
    let levels = if levels.is_empty() { vec![c.level] } else { levels.to_vec() };
    let out = out_dir(c)?;
    let mut rows = Vec::new();
    for &m in &levels {
        let l = level(c, m)?;
        let d = l.s.dimension();
        let bases = c
            .bc
            .list()
            .into_iter()
            .map(|bc| eigensystem(&l.e, &l.g, d, bc))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&EigenBasis> = bases.iter().collect();
        let name = if levels.len() == 1 { "spectrum.csv".to_string() } else { format!("spectrum_m{m}.csv") };
        export_spectrum_csv(&refs, &out.join(name))?;
        for b in &bases {
            let weyl = weyl_exponent(b, SpectralWindow::default());
            if let Ok(fit) = &weyl {
                println!(
                    "{} m={m} {}: {} eigenvalues, Weyl slope {:.4} (d/(d+1) = {:.4})",
                    l.s.name(),
                    b.bc(),
                    b.len(),
                    fit.slope,
                    d / (d + 1.0)
                );
            }
            rows.push(json!({
                "level": m,
                "bc": b.bc(),
                "eigenvalues": b.len(),
                "lambda_1": b.values().iter().copied().find(|&v| v > 0.0),
                "expected_weyl_slope": d / (d + 1.0),
                "weyl": fit_json(weyl),
                "growth": fit_json(eigen_growth_constants(b, SpectralWindow::default())),
                "supnorm": supnorm_ratio(b, SpectralWindow::default().hi),
            }));
        }
    }
    write_json(&out.join("spectrum.json"), &json!({ "preset": structure(c)?.name(), "spectra": rows }))
}

fn sample_ids(n: usize, k: usize) -> Vec<usize> {
    let k = k.clamp(1, n);
    let mut ids: Vec<usize> = (0..k).map(|i| i * (n - 1) / (k - 1).max(1)).collect();
    ids.dedup();
    ids
}

fn kernel(c: &Common, ts: &[f64], samples: usize, full: bool) -> Outcome {
    check_tol(c)?;
    check_times(ts)?;
    let l = level(c, c.level)?;
    let out = out_dir(c)?;
    let quad_tol = (0.1 * c.tol).max(1e-10);
    let ids = sample_ids(l.g.num_vertices(), samples);
    let mut w = csv::Writer::from_path(out.join("kernel.csv")).map_err(Error::from)?;
    w.write_record(["t", "x_id", "y_id", "H", "P_series", "P_quadrature", "bc"]).map_err(Error::from)?;
    let mut summary = Vec::new();
    let mut failed = false;
    for bc in c.bc.list() {
        let b = eigensystem(&l.e, &l.g, l.s.dimension(), bc)?;
        let truncation = if full { Truncation::Full } else { Truncation::Tail { tau: c.tol, cap: None } };
        let ev = KernelEvaluator::new(&b, truncation);
        for &t in ts {
            let modes = match ev.modes_for(KernelKind::Poisson, t) {
                Ok(n) => n,
                Err(e) => {
                    eprintln!("{bc} t={t}: {e}");
                    summary.push(json!({ "bc": bc, "t": t, "error": e.to_string() }));
                    failed = true;
                    continue;
                }
            };
            let mut gap = 0.0_f64;
            let mut low = f64::INFINITY;
            for &x in &ids {
                for &y in &ids {
                    let h = ev.heat_kernel(t, x, y).ok();
                    let p = ev.poisson_kernel(t, x, y)?;
                    let q = ev.poisson_via_subordination(t, x, y, quad_tol)?;
                    gap = gap.max((p - q).abs());
                    low = low.min(p);
                    w.write_record([
                        t.to_string(),
                        x.to_string(),
                        y.to_string(),
                        h.map_or(String::new(), |v| v.to_string()),
                        p.to_string(),
                        q.to_string(),
                        bc.to_string(),
                    ])
                    .map_err(Error::from)?;
                }
            }
            let agree = (10.0 * c.tol).max(1e-6);
            failed |= gap > agree || low < -c.tol;
            println!("{bc} t={t}: {modes} modes, max |series - quadrature| = {gap:e}, min P = {low:e}");
            summary.push(json!({
                "bc": bc,
                "t": t,
                "modes": modes,
                "tail_bound": ev.tail_bound(KernelKind::Poisson, t)?,
                "max_series_quadrature_gap": gap,
                "min_poisson": low,
            }));
        }
    }
    w.flush().map_err(Error::from)?;
    write_json(&out.join("kernel.json"), &json!({ "tau": c.tol, "vertices": ids, "times": summary }))?;
    if failed {
        Err(Failure::Checks)
    } else {
        Ok(())
    }
}

fn suite_config(c: &Common) -> std::result::Result<SuiteConfig, Failure> {
    check_tol(c)?;
    let mut cfg = SuiteConfig::new(structure(c)?, c.level);
    cfg.tau = c.tol;
    cfg.seed = c.seed;
    cfg.budget = c.budget;
    Ok(cfg)
}

fn print_report(r: &SuiteReport) {
    for rec in &r.records {
        let status = match rec.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skip => "skip",
        };
        let detail = match (&rec.value, &rec.reason) {
            (_, Some(reason)) => reason.clone(),
            (Some(v), None) => format!("{v:e}"),
            (None, None) => String::new(),
        };
        println!("{status:4} {:30} {detail}", rec.id);
    }
    println!(
        "{}: {} pass, {} fail, {} skip",
        r.suite,
        r.count(Status::Pass),
        r.count(Status::Fail),
        r.count(Status::Skip)
    );
}

fn verify(c: &Common, suite: &str) -> Outcome {
    let suite: Suite = suite.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let cfg = suite_config(c)?;
    let report = verify_suite(suite, &cfg)?;
    let out = out_dir(c)?;
    write_json(&out.join(format!("report_{suite}.json")), &report)?;
    print_report(&report);
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn fatou(c: &Common, ts: &[f64]) -> Outcome {
    check_tol(c)?;
    check_times(ts)?;
    let l = level(c, c.level)?;
    let out = out_dir(c)?;
    let mut grid = ts.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let b = eigensystem(&l.e, &l.g, l.s.dimension(), BoundaryCondition::Dirichlet)?;
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let (a, top) = (grid[0], grid[grid.len() - 1]);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(c.seed);
    let mut all = Vec::new();
    let mut failed = false;
    for i in 0..DEFAULT_BATCH {
        let f = random_nonnegative(&l.g, 2, &mut rng);
        let u = tube_sample(&ev, &BoundaryData::Function(f), &format!("random {i}"), &grid)?;
        if i == 0 {
            u.export_csv(&out.join("tube.csv"))?;
        }
        let mut defects = Vec::new();
        for (j, &s) in grid.iter().enumerate() {
            for &t in &grid[j..] {
                if u.time_index(s + t).is_some() {
                    let defect = fatou_consistency(&ev, &u, s, t)?;
                    failed |= defect > 1e-6;
                    defects.push(FatouDefect { s, t, defect });
                }
            }
        }
        let extrema = max_principle_check(&u, a, top)?;
        failed |= !extrema.holds();
        let diag = TubeDiagnostics {
            provenance: u.provenance().to_string(),
            max_residual: harmonic_residual(&u, &l.e, b.mass()).ok(),
            extrema_locations: Some(extrema),
            defects,
            norm_profiles: [LpExponent::One, LpExponent::Two, LpExponent::Infinity]
                .into_iter()
                .map(|p| lp_profile(&u, b.mass(), p))
                .collect(),
        };
        all.push(diag);
    }
    let worst = all
        .iter()
        .flat_map(|d| d.defects.iter().map(|x| x.defect))
        .fold(0.0, f64::max);
    println!("{} fields, max Fatou defect {worst:e}", all.len());
    write_json(&out.join("fatou.json"), &all)?;
    if failed {
        Err(Failure::Checks)
    } else {
        Ok(())
    }
}

fn report(c: &Common) -> Outcome {
    let cfg = suite_config(c)?;
    let report = verify_suite(Suite::All, &cfg)?;
    let out = out_dir(c)?;
    write_json(&out.join("report.json"), &report)?;
    let mut w = csv::Writer::from_path(out.join("summary.csv")).map_err(Error::from)?;
    w.write_record(["id", "reference", "status", "value", "tolerance", "runtime_s", "reason"])
        .map_err(Error::from)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in &report.records {
        let status = serde_json::to_value(r.status).map_err(Error::from)?;
        w.write_record([
            r.id.clone(),
            r.reference.to_string(),
            status.as_str().unwrap_or_default().to_string(),
            opt(r.value),
            opt(r.tolerance),
            r.runtime_s.to_string(),
            r.reason.clone().unwrap_or_default(),
        ])
        .map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    print_report(&report);
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}
