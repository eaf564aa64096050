//! Verification suites bundling the invariant checks of each module into a
//! versioned JSON report.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::{
    classical_cone_check, cone_cover_check, cone_sup, maximal_measure, nontangential_error, weak11_check,
    BoundarySet, Cone, CoverHeight, MaximalOperator, NestedSetting,
};
use crate::error::{Error, Result};
use crate::kernels::{
    approx_identity_error, bound_constant, kernel_mass, preset_functions, quadrature::subordinate,
    random_nonnegative, semigroup_defect, BoundaryData, KernelEvaluator, KernelKind, TestFunction,
    Truncation, DEFAULT_TAU,
};
use crate::pcf::{
    build_level, build_level_with_budget, scaling_constants, similarity_dimension, ResistanceMetric, SelfSimilarStructure,
    StructureConfig, Word, DEFAULT_BUDGET, GLUE_TOL,
};
use crate::spectral::{
    counting_function, eigen_growth_constants, eigensystem, energy_matrix, supnorm_ratio, weyl_exponent,
    BoundaryCondition, EigenBasis, EnergyForm, SpectralWindow, RESIDUAL_TOL,
};
use crate::tube::{
    fatou_consistency, geometric_ladder, harmonic_residual, lp_profile, max_principle_check,
    positivity_violations, tube_sample, LpExponent, TubeField,
};

pub const REPORT_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_BATCH: usize = 16;
/// Above this tau a kernel positivity check no longer says anything.
pub const POSITIVITY_MAX_TAU: f64 = 1e-3;

/// Largest graph used for the mesh-convergence sweep.
const CAUCHY_MAX_VERTICES: usize = 700;
const KERNEL_TIMES: [f64; 4] = [0.1, 0.2, 0.4, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Core,
    Spectral,
    Kernels,
    Boundary,
    Tube,
    All,
}

impl Suite {
    pub const MODULES: [Suite; 5] = [Suite::Core, Suite::Spectral, Suite::Kernels, Suite::Boundary, Suite::Tube];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Spectral => "spectral",
            Suite::Kernels => "kernels",
            Suite::Boundary => "boundary",
            Suite::Tube => "tube",
            Suite::All => "all",
        }
    }

    fn modules(self) -> Vec<Suite> {
        match self {
            Suite::All => Self::MODULES.to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::MODULES
            .into_iter()
            .chain([Suite::All])
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// One check: `reference` names the operation it exercises.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub reference: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub preset: String,
    pub level: usize,
    pub vertices: usize,
    pub modes_dirichlet: usize,
    pub modes_neumann: usize,
    pub tau: f64,
    pub seed: u64,
    pub batch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub report_version: u32,
    pub suite: String,
    pub environment: Environment,
    pub records: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn count(&self, status: Status) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }

    /// No check failed; skips do not count against the run.
    pub fn passed(&self) -> bool {
        self.count(Status::Fail) == 0
    }

    /// The report with runtimes zeroed, for run-to-run comparison.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.records {
            r.runtime_s = 0.0;
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// What a suite runs on.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub structure: SelfSimilarStructure,
    pub level: usize,
    pub tau: f64,
    pub seed: u64,
    pub batch: usize,
    pub budget: usize,
}

impl SuiteConfig {
    pub fn preset(name: &str, level: usize) -> Result<Self> {
        Ok(Self::new(SelfSimilarStructure::preset(name)?, level))
    }

    pub fn new(structure: SelfSimilarStructure, level: usize) -> Self {
        Self {
            structure,
            level,
            tau: DEFAULT_TAU,
            seed: DEFAULT_SEED,
            batch: DEFAULT_BATCH,
            budget: DEFAULT_BUDGET,
        }
    }
}

enum Outcome {
    Measured { value: f64, pass: bool },
    Skipped(String),
}

fn measured(value: f64, pass: bool) -> Outcome {
    Outcome::Measured { value, pass }
}

struct Recorder {
    records: Vec<CheckRecord>,
}

impl Recorder {
    fn check(
        &mut self,
        id: &str,
        reference: &'static str,
        tolerance: Option<f64>,
        f: impl FnOnce() -> Result<Outcome>,
    ) {
        let start = Instant::now();
        let outcome = f();
        let runtime_s = start.elapsed().as_secs_f64();
        let (status, value, reason) = match outcome {
            Ok(Outcome::Measured { value, pass }) => {
                let status = if pass && !value.is_nan() { Status::Pass } else { Status::Fail };
                (status, Some(value), None)
            }
            Ok(Outcome::Skipped(why)) => (Status::Skip, None, Some(why)),
            Err(e) => (Status::Fail, None, Some(e.to_string())),
        };
        self.records.push(CheckRecord {
            id: id.to_string(),
            reference,
            status,
            reason,
            value,
            tolerance,
            runtime_s,
        });
    }
}

/// Everything a suite needs at one level.
struct Context {
    s: SelfSimilarStructure,
    g: crate::pcf::VertexGraph,
    e: EnergyForm,
    metric: ResistanceMetric,
    dirichlet: EigenBasis,
    neumann: EigenBasis,
    tau: f64,
    seed: u64,
    batch: usize,
}

impl Context {
    fn new(cfg: &SuiteConfig) -> Result<Self> {
        let s = cfg.structure.clone();
        let g = build_level_with_budget(&s, cfg.level, cfg.budget)?;
        let e = energy_matrix(&g, s.harmonic());
        let metric = ResistanceMetric::new(&e)?;
        let dirichlet = eigensystem(&e, &g, s.dimension(), BoundaryCondition::Dirichlet)?;
        let neumann = eigensystem(&e, &g, s.dimension(), BoundaryCondition::Neumann)?;
        Ok(Self {
            s,
            g,
            e,
            metric,
            dirichlet,
            neumann,
            tau: cfg.tau,
            seed: cfg.seed,
            batch: cfg.batch,
        })
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn basis(&self, bc: BoundaryCondition) -> &EigenBasis {
        match bc {
            BoundaryCondition::Dirichlet => &self.dirichlet,
            BoundaryCondition::Neumann => &self.neumann,
        }
    }

    fn sample_vertices(&self, k: usize, stream: u64) -> Vec<usize> {
        let mut all: Vec<usize> = (0..self.g.num_vertices()).collect();
        all.shuffle(&mut self.rng(stream));
        all.truncate(k);
        all.sort_unstable();
        all
    }

    /// The kernel times at or above the resolution time of the level.
    fn times(&self, ev: &KernelEvaluator, grid: &[f64]) -> Vec<f64> {
        let floor = ev.resolution_time();
        grid.iter().copied().filter(|&t| t >= floor).collect()
    }

    /// Nearest vertex to the centre of the level-1 cell `i`.
    fn cell_centre(&self, i: usize) -> usize {
        let nb = self.s.boundary_size();
        let dim = self.s.embedding_dim();
        let mut c = vec![0.0; dim];
        for p in 0..nb {
            for (a, b) in c.iter_mut().zip(self.s.map_point(&[i], p)) {
                *a += b / nb as f64;
            }
        }
        self.g.nearest_vertex(&c)
    }

    /// Seeded Dirichlet boundary data of mixed sign.
    fn random_batch(&self, stream: u64) -> Vec<Vec<f64>> {
        let mut rng = self.rng(stream);
        (0..self.batch)
            .map(|_| {
                let a = random_nonnegative(&self.g, 2, &mut rng);
                let b = random_nonnegative(&self.g, 1, &mut rng);
                let w: f64 = rng.gen_range(0.0..1.0);
                a.iter().zip(&b).map(|(x, y)| x - w * y).collect()
            })
            .collect()
    }
}

fn skip(reason: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome::Skipped(reason.into()))
}

pub fn verify_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let ctx = Context::new(cfg)?;
    let mut rec = Recorder { records: Vec::new() };
    for m in suite.modules() {
        match m {
            Suite::Core => core_checks(&ctx, &mut rec),
            Suite::Spectral => spectral_checks(&ctx, &mut rec),
            Suite::Kernels => kernel_checks(&ctx, &mut rec),
            Suite::Boundary => boundary_checks(&ctx, &mut rec),
            Suite::Tube => tube_checks(&ctx, &mut rec),
            Suite::All => unreachable!("expanded by modules()"),
        }
    }
    Ok(SuiteReport {
        report_version: REPORT_VERSION,
        suite: suite.name().to_string(),
        environment: Environment {
            preset: ctx.s.name().to_string(),
            level: cfg.level,
            vertices: ctx.g.num_vertices(),
            modes_dirichlet: ctx.dirichlet.len(),
            modes_neumann: ctx.neumann.len(),
            tau: cfg.tau,
            seed: cfg.seed,
            batch: cfg.batch,
        },
        records: rec.records,
    })
}

fn core_checks(ctx: &Context, rec: &mut Recorder) {
    let s = &ctx.s;
    let g = &ctx.g;

    rec.check("core.load_structure", "load_structure", None, || {
        let Ok(again) = StructureConfig::preset(s.name()).into_structure() else {
            return skip(format!("{} is not a preset", s.name()));
        };
        Ok(measured(again.symbols() as f64, again.symbols() == s.symbols()))
    });

    rec.check("core.gluing", "build_level", Some(0.0), || {
        let mut worst = 0usize;
        for m in 0..=ctx.g.level().min(7) {
            let gm = match build_level(s, m) {
                Ok(gm) => gm,
                Err(Error::BudgetExceeded { .. }) => break,
                Err(e) => return Err(e),
            };
            worst = worst.max(gm.num_vertices().abs_diff(gm.coordinate_dedup_count(s, GLUE_TOL)));
        }
        Ok(measured(worst as f64, worst == 0))
    });

    rec.check("core.measure", "build_level", Some(1e-12), || {
        let cells: f64 = g.cell_measures().iter().sum();
        let vertices: f64 = g.vertex_mass().iter().sum();
        // Cell-by-cell quadrature of a coordinate, grouped by first-level cell.
        let f: Vec<f64> = g.all_coords().iter().map(|c| c[0]).collect();
        let nb = g.boundary_size() as f64;
        let by_cell: f64 = (0..s.symbols())
            .map(|i| {
                g.cells_under(&Word(vec![i]))
                    .map(|c| g.cell_measures()[c] * g.cell(c).iter().map(|&v| f[v]).sum::<f64>() / nb)
                    .sum::<f64>()
            })
            .sum();
        let worst = (cells - 1.0)
            .abs()
            .max((vertices - 1.0).abs())
            .max((by_cell - g.integrate(&f)).abs());
        Ok(measured(worst, worst <= 1e-12))
    });

    rec.check("core.contraction", "resistance", Some(1e-9), || {
        let nb = g.boundary_size();
        let mut top = 0.0_f64;
        for p in 0..nb {
            for q in 0..nb {
                top = top.max(ctx.metric.get(p, q));
            }
        }
        let mut excess = f64::NEG_INFINITY;
        for c in 0..g.num_cells() {
            let v = g.cell(c);
            let r = g.cell_resistances()[c];
            for &a in v {
                for &b in v {
                    excess = excess.max(ctx.metric.get(a, b) - r * top);
                }
            }
        }
        Ok(measured(excess, excess <= 1e-9))
    });

    rec.check("core.dimension_root", "similarity_dimension", None, || {
        let r = &s.harmonic().r;
        let d = similarity_dimension(r);
        let h = |x: f64| r.iter().map(|v| v.powf(x)).sum::<f64>() - 1.0;
        Ok(measured(d, h(d - 1e-6) > 0.0 && h(d + 1e-6) < 0.0))
    });

    rec.check("core.scaling", "scaling_constants", None, || {
        let lo = 2.0 * ctx.metric.min_positive();
        let hi = 0.5 * ctx.metric.diameter();
        if !(lo < hi) {
            return skip("level too coarse for a radius ladder");
        }
        let eps = geometric_ladder(lo, hi, 10)?;
        let xs = ctx.sample_vertices(32, 1);
        let sc = scaling_constants(&ctx.metric, g.vertex_mass(), s.dimension(), &eps, &xs)?;
        let ratio = sc.a2 / sc.a1;
        Ok(measured(ratio, sc.a1 > 0.0 && ratio.is_finite()))
    });

    rec.check("core.ball", "ball", Some(0.0), || {
        let mass = g.vertex_mass();
        let mut bad = 0usize;
        for x in ctx.sample_vertices(16, 2) {
            for y in ctx.sample_vertices(16, 3) {
                let b = ctx.metric.ball(x, ctx.metric.get(x, y), mass);
                let sum: f64 = b.vertices.iter().map(|&v| mass[v]).sum();
                if (x != y && b.vertices.contains(&y)) || sum != b.mass {
                    bad += 1;
                }
            }
        }
        Ok(measured(bad as f64, bad == 0))
    });
}

fn spectral_checks(ctx: &Context, rec: &mut Recorder) {
    let bcs = [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann];

    rec.check("spectral.residual", "eigensystem", Some(RESIDUAL_TOL), || {
        let r = bcs.iter().map(|&bc| ctx.basis(bc).max_residual(&ctx.e)).fold(0.0, f64::max);
        Ok(measured(r, r <= RESIDUAL_TOL))
    });

    rec.check("spectral.orthonormality", "eigensystem", Some(RESIDUAL_TOL), || {
        let r = bcs.iter().map(|&bc| ctx.basis(bc).gram_deviation()).fold(0.0, f64::max);
        Ok(measured(r, r <= RESIDUAL_TOL))
    });

    rec.check("spectral.interlacing", "eigensystem", Some(1e-10), || {
        let worst = ctx
            .dirichlet
            .values()
            .iter()
            .zip(ctx.neumann.values())
            .map(|(d, n)| (n - d) / d.max(1.0))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(measured(worst, worst <= 1e-10))
    });

    rec.check("spectral.mesh_convergence", "eigensystem", None, || {
        let mut first = Vec::new();
        for m in 1..=ctx.g.level() {
            let g = build_level(&ctx.s, m)?;
            if g.num_vertices() > CAUCHY_MAX_VERTICES {
                break;
            }
            let e = energy_matrix(&g, ctx.s.harmonic());
            let b = eigensystem(&e, &g, ctx.s.dimension(), BoundaryCondition::Dirichlet)?;
            first.push(b.value(0));
        }
        let steps: Vec<f64> = first.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        if steps.len() < 2 {
            return skip("fewer than three levels fit the sweep");
        }
        let pass = steps.windows(2).all(|w| w[1] < w[0]);
        Ok(measured(*steps.last().unwrap(), pass))
    });

    rec.check("spectral.counting", "counting_function", Some(0.0), || {
        let b = &ctx.dirichlet;
        let bad = (0..b.len()).filter(|&k| counting_function(b, b.value(k)) < k + 1).count();
        Ok(measured(bad as f64, bad == 0 && counting_function(b, -1.0) == 0))
    });

    rec.check("spectral.weyl", "weyl_exponent", Some(0.05), || {
        let d = ctx.s.dimension();
        match weyl_exponent(&ctx.dirichlet, SpectralWindow::default()) {
            Ok(fit) => Ok(measured(fit.slope, (fit.slope - d / (d + 1.0)).abs() <= 0.05)),
            Err(e @ Error::WindowTooSmall { .. }) => skip(e.to_string()),
            Err(e) => Err(e),
        }
    });

    rec.check("spectral.growth", "eigen_growth_constants", None, || {
        match eigen_growth_constants(&ctx.dirichlet, SpectralWindow::default()) {
            Ok(c) => {
                let ratio = c.c2 / c.c1;
                Ok(measured(ratio, c.c1 > 0.0 && ratio.is_finite()))
            }
            Err(e @ Error::WindowTooSmall { .. }) => skip(e.to_string()),
            Err(e) => Err(e),
        }
    });

    rec.check("spectral.supnorm", "supnorm_ratio", None, || {
        let c = bcs
            .iter()
            .map(|&bc| supnorm_ratio(ctx.basis(bc), SpectralWindow::default().hi).c)
            .fold(0.0, f64::max);
        Ok(measured(c, c > 0.0 && c.is_finite()))
    });
}

fn kernel_checks(ctx: &Context, rec: &mut Recorder) {
    let evd = KernelEvaluator::new(&ctx.dirichlet, Truncation::Full);
    let evn = KernelEvaluator::new(&ctx.neumann, Truncation::Full);
    let evs = [&evd, &evn];
    let n = ctx.g.num_vertices();
    let agree = (10.0 * ctx.tau).max(1e-6);

    rec.check("kernels.subordination", "poisson_via_subordination", Some(agree), || {
        let mut rng = ctx.rng(10);
        let mut worst = 0.0_f64;
        for ev in evs {
            for _ in 0..20 {
                let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let t = [0.1, 0.3, 1.0][rng.gen_range(0..3)];
                let series = ev.poisson_kernel(t, x, y)?;
                let quad = ev.poisson_via_subordination(t, x, y, 1e-9)?;
                worst = worst.max((series - quad).abs());
            }
        }
        Ok(measured(worst, worst <= agree))
    });

    rec.check("kernels.scalar_subordination", "poisson_via_subordination", Some(1e-10), || {
        let mut worst = 0.0_f64;
        for beta in [1.0_f64, 5.0, 20.0] {
            for t in [0.05, 0.3, 1.0] {
                let v = subordinate(|s| (-beta * beta * s).exp(), t, 0.0, 1.0, 1e-12)?;
                worst = worst.max((v - (-beta * t).exp()).abs());
            }
        }
        Ok(measured(worst, worst <= 1e-10))
    });

    rec.check("kernels.semigroup", "semigroup_defect", Some(1e-6), || {
        let xs = ctx.sample_vertices(16, 11);
        let mut worst = 0.0_f64;
        for ev in evs {
            for kind in [KernelKind::Heat, KernelKind::Poisson] {
                worst = worst.max(semigroup_defect(ev, kind, 0.2, 0.2, Some(&xs))?);
            }
        }
        Ok(measured(worst, worst <= 1e-6))
    });

    rec.check("kernels.neumann_mass", "kernel_mass", Some(1e-8), || {
        let mut worst = 0.0_f64;
        for t in ctx.times(&evn, &KERNEL_TIMES) {
            for x in 0..n {
                worst = worst.max((kernel_mass(&evn, t, x)? - 1.0).abs());
            }
        }
        Ok(measured(worst, worst <= 1e-8))
    });

    rec.check("kernels.dirichlet_mass", "kernel_mass", None, || {
        let ladder = ctx.times(&evd, &[0.05, 0.1, 0.2, 0.4]);
        if ladder.len() < 2 {
            return skip("fewer than two resolvable times");
        }
        let mut monotone = true;
        let mut smallest = f64::INFINITY;
        for x in ctx.g.interior_ids() {
            let masses = ladder.iter().map(|&t| kernel_mass(&evd, t, x)).collect::<Result<Vec<_>>>()?;
            monotone &= masses.windows(2).all(|w| w[0] >= w[1] - 1e-12);
            smallest = smallest.min(masses[0]);
        }
        Ok(measured(smallest, monotone && smallest <= 1.0 + 1e-8))
    });

    rec.check("kernels.positivity", "poisson_kernel", Some(ctx.tau), || {
        if ctx.tau > POSITIVITY_MAX_TAU {
            return skip(format!(
                "tau = {:e} exceeds {POSITIVITY_MAX_TAU:e}; a lower bound of -tau does not test positivity",
                ctx.tau
            ));
        }
        let mut low = f64::INFINITY;
        for ev in evs {
            for t in ctx.times(ev, &KERNEL_TIMES) {
                for x in 0..n {
                    let row = ev.kernel_row(KernelKind::Poisson, t, x)?;
                    low = row.iter().copied().fold(low, f64::min);
                }
            }
        }
        Ok(measured(low, low >= -ctx.tau))
    });

    rec.check("kernels.time_harmonicity", "poisson_kernel", Some(1e-4), || {
        let mut rng = ctx.rng(12);
        let (t, h) = (0.3, 1e-3);
        let mut worst = 0.0_f64;
        for ev in evs {
            let b = ev.basis();
            for _ in 0..8 {
                let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let p = |s: f64| ev.poisson_kernel(s, x, y);
                let second = (p(t + h)? - 2.0 * p(t)? + p(t - h)?) / (h * h);
                let lap: f64 = (0..b.len())
                    .map(|k| b.value(k) * (-b.value(k).sqrt() * t).exp() * b.mode(k)[x] * b.mode(k)[y])
                    .sum();
                worst = worst.max((second - lap).abs() / lap.abs().max(1.0));
            }
        }
        Ok(measured(worst, worst <= 1e-4 + ctx.tau))
    });

    rec.check("kernels.maximal_domination", "poisson_integral", None, || {
        let op = MaximalOperator::new(&ctx.metric, ctx.g.vertex_mass());
        let mut a = 0.0_f64;
        for ev in evs {
            for f in preset_functions(&ctx.g, ev.basis()) {
                a = a.max(domination_ratio(ev, &op, &f, &ctx.times(ev, &KERNEL_TIMES))?);
            }
        }
        Ok(measured(a, a.is_finite()))
    });

    rec.check("kernels.bound_constant", "bound_constant", None, || {
        let xs = ctx.sample_vertices(16, 13);
        let mut c = 0.0_f64;
        for ev in evs {
            let b = bound_constant(ev, &ctx.metric, &ctx.times(ev, &KERNEL_TIMES), &xs)?;
            c = c.max(b.c).max(b.c_prime);
        }
        Ok(measured(c, c > 0.0 && c.is_finite()))
    });

    rec.check("kernels.approx_identity", "approx_identity_error", None, || {
        let ladder = ctx.times(&evn, &[0.2, 0.1, 0.05, 0.02]);
        if ladder.len() < 2 {
            return skip("fewer than two resolvable times");
        }
        let f: Vec<f64> = ctx.g.all_coords().iter().map(|c| c[0]).collect();
        let errors = ladder
            .iter()
            .map(|&t| approx_identity_error(&evn, &f, t).map(|e| e.sup))
            .collect::<Result<Vec<_>>>()?;
        let pass = errors.windows(2).all(|w| w[1] < w[0]);
        Ok(measured(*errors.last().unwrap(), pass))
    });
}

/// max over times and vertices of |P_t f(x)| / Mf(x).
fn domination_ratio(ev: &KernelEvaluator, op: &MaximalOperator, f: &TestFunction, times: &[f64]) -> Result<f64> {
    let mf = op.apply(&f.values);
    let data = BoundaryData::Function(f.values.clone());
    let mut a = 0.0_f64;
    for &t in times {
        let u = ev.poisson_integral(&data, t)?;
        for (v, m) in u.iter().zip(&mf) {
            let r = if *m > 0.0 {
                v.abs() / m
            } else if v.abs() <= 1e-14 {
                0.0
            } else {
                f64::INFINITY
            };
            a = a.max(r);
        }
    }
    Ok(a)
}

fn boundary_checks(ctx: &Context, rec: &mut Recorder) {
    let g = &ctx.g;
    let n = g.num_vertices();
    let mass = g.vertex_mass();
    let d = ctx.s.dimension();
    let op = MaximalOperator::new(&ctx.metric, mass);
    let evn = KernelEvaluator::new(&ctx.neumann, Truncation::Full);
    let times = ctx.times(&evn, &KERNEL_TIMES);

    rec.check("boundary.sublinearity", "maximal_function", Some(1e-12), || {
        let mut rng = ctx.rng(20);
        let mut worst = 0.0_f64;
        for _ in 0..ctx.batch {
            let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c: f64 = rng.gen_range(-3.0..3.0);
            let sum: Vec<f64> = f.iter().zip(&h).map(|(a, b)| a + b).collect();
            let scaled: Vec<f64> = f.iter().map(|a| c * a).collect();
            let (mf, mh, ms, mc) = (op.apply(&f), op.apply(&h), op.apply(&sum), op.apply(&scaled));
            for x in 0..n {
                worst = worst.max(ms[x] - mf[x] - mh[x]);
                worst = worst.max((mc[x] - c.abs() * mf[x]).abs() / (1.0 + mc[x]));
            }
        }
        Ok(measured(worst, worst <= 1e-12))
    });

    rec.check("boundary.maximal_lower", "maximal_function", Some(1e-12), || {
        let mut worst = 0.0_f64;
        for f in preset_functions(g, &ctx.neumann).into_iter().filter(|f| f.continuous) {
            let mf = op.apply(&f.values);
            for (v, m) in f.values.iter().zip(&mf) {
                worst = worst.max(v.abs() - m);
            }
        }
        Ok(measured(worst, worst <= 1e-12))
    });

    rec.check("boundary.weak11", "weak11_check", None, || {
        let mut c = 0.0_f64;
        for f in preset_functions(g, &ctx.neumann) {
            c = c.max(weak11_check(&op, &f.values, None)?.constant);
        }
        Ok(measured(c, c > 0.0 && c.is_finite()))
    });

    rec.check("boundary.measure_domination", "maximal_measure", None, || {
        let mut rng = ctx.rng(21);
        let mut a = 0.0_f64;
        for _ in 0..ctx.batch.min(4) {
            let atoms: Vec<(usize, f64)> = (0..3).map(|_| (rng.gen_range(0..n), rng.gen_range(0.1..1.0))).collect();
            let mnu = maximal_measure(&ctx.metric, mass, &atoms);
            for &t in &times {
                let u = evn.poisson_integral(&BoundaryData::Atoms(atoms.clone()), t)?;
                for (v, m) in u.iter().zip(&mnu) {
                    a = a.max(v.abs() / m);
                }
            }
        }
        Ok(measured(a, a.is_finite()))
    });

    rec.check("boundary.cone_nesting", "cone_sup", Some(0.0), || {
        let alphas = [0.5, 1.0, 2.0];
        let heights = [0.5, 1.0, f64::INFINITY];
        let mut bad = 0usize;
        for x in ctx.sample_vertices(8, 22) {
            for &t in &times {
                for y in 0..n {
                    for (i, &a) in alphas.iter().enumerate() {
                        for (j, &h) in heights.iter().enumerate() {
                            if !Cone::truncated(x, a, h).contains(&ctx.metric, d, t, y) {
                                continue;
                            }
                            for &a2 in &alphas[i..] {
                                for &h2 in &heights[j..] {
                                    if !Cone::truncated(x, a2, h2).contains(&ctx.metric, d, t, y) {
                                        bad += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(measured(bad as f64, bad == 0))
    });

    rec.check("boundary.cone_domination", "cone_sup", None, || {
        let mut a = 0.0_f64;
        let apexes = ctx.sample_vertices(8, 23);
        for f in preset_functions(g, &ctx.neumann) {
            let mf = op.apply(&f.values);
            let u = tube_sample(&evn, &BoundaryData::Function(f.values.clone()), &f.name, &times)?;
            for &x in &apexes {
                for alpha in [0.5, 1.0, 2.0] {
                    match cone_sup(&u, &Cone::new(x, alpha), &ctx.metric, &mf) {
                        Ok(c) => a = a.max(c.ratio),
                        Err(Error::EmptyCone { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        Ok(measured(a, a.is_finite()))
    });

    rec.check("boundary.nontangential", "nontangential_error", None, || {
        let chi = BoundarySet::new(g, vec![Word(vec![0])])?;
        let ladder = geometric_ladder(evn.resolution_time().max(0.02), 0.5, 6)?;
        let mut last = 0.0_f64;
        let mut pass = true;
        for x in [ctx.cell_centre(0), ctx.cell_centre(ctx.s.symbols() - 1)] {
            let p = nontangential_error(&evn, chi.indicator(), &Cone::new(x, 1.0), &ladder, &ctx.metric)?;
            pass &= p.is_monotone() && p.final_error() < *p.error.last().unwrap();
            last = last.max(p.final_error());
        }
        Ok(measured(last, pass))
    });

    rec.check("boundary.classical_cone", "cone_sup", Some(0.0), || {
        if d <= 1.0 {
            return skip(format!("classical cone containment needs d > 1, d = {d}"));
        }
        let grid = geometric_ladder(0.01, 2.0, 10)?;
        let mut bad = 0usize;
        for x in ctx.sample_vertices(8, 24) {
            for alpha in [0.5, 1.0, 2.0] {
                bad += classical_cone_check(&ctx.metric, d, &Cone::new(x, alpha), &grid)?.violations.len();
            }
        }
        Ok(measured(bad as f64, bad == 0))
    });

    let nested = NestedSetting::new(&ctx.s, &evn, &ctx.metric);
    let not_nested = || format!("{} is not affine nested", ctx.s.name());

    rec.check("boundary.ball_mass_lower", "ball_mass_lower", Some(2.0), || {
        let Ok(nested) = &nested else { return skip(not_nested()) };
        let xs = ctx.sample_vertices(32, 25);
        let fit = nested.fit_c_alpha(&xs, &[0.4, 0.2, 0.1], &[0.25, 0.5, 1.0, 2.0, 4.0])?;
        let positive = fit.c_alpha.iter().all(|&c| c > 0.0);
        Ok(measured(fit.spread, positive && fit.spread <= 2.0))
    });

    let e_set = BoundarySet::new(g, vec![Word(vec![0])]);
    let barrier = match (&nested, &e_set) {
        (Ok(nested), Ok(e)) => Some(
            geometric_ladder(evn.resolution_time(), 1.0, 16).and_then(|grid| nested.barrier(e, 1.0, &grid)),
        ),
        _ => None,
    };

    rec.check("boundary.barrier", "barrier", None, || {
        let Some(w) = &barrier else { return skip(not_nested()) };
        let w = w.as_ref().map_err(|e| Error::Precondition(e.to_string()))?;
        let decays = w
            .decay_ladder
            .as_ref()
            .is_some_and(|p| p.is_monotone() && p.final_error() < *p.error.last().unwrap());
        Ok(measured(w.min_boundary_integral, w.min_boundary_integral > 0.0 && decays))
    });

    rec.check("boundary.barrier_comparison", "barrier", Some(1e-9), || {
        let (Some(w), Ok(nested), Ok(e)) = (&barrier, &nested, &e_set) else {
            return skip(not_nested());
        };
        let w = w.as_ref().map_err(|e| Error::Precondition(e.to_string()))?;
        let data: Vec<f64> = g.all_coords().iter().map(|c| (6.0 * c[0]).cos()).collect();
        let mut margin = f64::INFINITY;
        let mut holds = true;
        for k in [4, 10] {
            let cmp = nested.barrier_comparison(w, e, &data, k)?;
            holds &= cmp.holds();
            margin = margin.min(cmp.min_margin);
        }
        Ok(measured(margin, holds))
    });

    rec.check("boundary.cone_cover", "cone_cover_check", None, || {
        if !ctx.s.is_affine_nested() {
            return skip(not_nested());
        }
        let e = BoundarySet::new(g, vec![Word(vec![0])])?;
        let x = ctx.cell_centre(0);
        let lo = 2.0 * ctx.metric.min_positive();
        let eps = geometric_ladder(lo, ctx.metric.diameter().max(2.0 * lo), 12)?;
        let all: Vec<usize> = (0..n).collect();
        let scaling = scaling_constants(&ctx.metric, mass, d, &eps, &all)?;
        let ladder = geometric_ladder(1e-3, 1.0, 20)?;
        let r = cone_cover_check(&ctx.metric, mass, d, &e, x, 4.0, 1, &scaling, CoverHeight::Recipe, &ladder)?;
        Ok(measured(r.uncovered.len() as f64, r.covered()))
    });
}

fn tube_checks(ctx: &Context, rec: &mut Recorder) {
    let evd = KernelEvaluator::new(&ctx.dirichlet, Truncation::Full);
    let mass = ctx.g.vertex_mass();
    let (a, b) = (evd.resolution_time().max(0.1), 1.0);
    let grid = match geometric_ladder(a, b, 7) {
        Ok(grid) => grid,
        Err(e) => {
            rec.check("tube.setup", "tube_sample", None, || Err(e));
            return;
        }
    };
    let batch = ctx.random_batch(30);
    let fields: Result<Vec<TubeField>> = batch
        .iter()
        .enumerate()
        .map(|(i, f)| tube_sample(&evd, &BoundaryData::Function(f.clone()), &format!("random {i}"), &grid))
        .collect();
    let fields = fields.map_err(|e| e.to_string());

    rec.check("tube.boundary_columns", "tube_sample", Some(0.0), || {
        let fields = fields.as_ref().map_err(|e| Error::Precondition(e.clone()))?;
        let worst = fields.iter().map(TubeField::boundary_defect).fold(0.0, f64::max);
        Ok(measured(worst, worst == 0.0))
    });

    rec.check("tube.max_principle", "max_principle_check", Some(0.0), || {
        let fields = fields.as_ref().map_err(|e| Error::Precondition(e.clone()))?;
        let mut bad = 0usize;
        for u in fields {
            bad += max_principle_check(u, a, b)?.violations.len();
        }
        Ok(measured(bad as f64, bad == 0))
    });

    rec.check("tube.positivity", "max_principle_check", Some(0.0), || {
        let mut rng = ctx.rng(31);
        let mut bad = 0usize;
        for i in 0..ctx.batch {
            let f = random_nonnegative(&ctx.g, 2, &mut rng);
            let u = tube_sample(&evd, &BoundaryData::Function(f), &format!("nonnegative {i}"), &grid)?;
            bad += positivity_violations(&u, a, b)?.map_or(0, |v| v.len());
        }
        Ok(measured(bad as f64, bad == 0))
    });

    rec.check("tube.smoothness", "harmonic_residual", None, || {
        let mode = BoundaryData::Function(ctx.dirichlet.mode(0).to_vec());
        let coarse = tube_sample(&evd, &mode, "phi_1", &geometric_ladder(0.1, 1.0, 9)?)?;
        let fine = tube_sample(&evd, &mode, "phi_1", &geometric_ladder(0.1, 1.0, 17)?)?;
        let rc = harmonic_residual(&coarse, &ctx.e, mass)?.max;
        let rf = harmonic_residual(&fine, &ctx.e, mass)?.max;
        let ratio = rc / rf;
        Ok(measured(ratio, (3.3..4.7).contains(&ratio)))
    });

    rec.check("tube.l2_decay", "lp_profile", Some(1e-14), || {
        let fields = fields.as_ref().map_err(|e| Error::Precondition(e.clone()))?;
        let mut worst = f64::NEG_INFINITY;
        for u in fields {
            let p = lp_profile(u, mass, LpExponent::Two);
            for w in p.norms.windows(2) {
                worst = worst.max(w[1] - w[0]);
            }
        }
        Ok(measured(worst, worst <= 1e-14))
    });

    rec.check("tube.fatou", "fatou_consistency", Some(1e-6), || {
        let mut worst = 0.0_f64;
        for (i, f) in batch.iter().enumerate() {
            let u = tube_sample(&evd, &BoundaryData::Function(f.clone()), &format!("random {i}"), &[0.1, 0.2, 0.3])?;
            worst = worst.max(fatou_consistency(&evd, &u, 0.1, 0.2)?);
        }
        Ok(measured(worst, worst <= 1e-6))
    });

    rec.check("tube.lp_contraction", "lp_profile", Some(1e-9), || {
        let fields = fields.as_ref().map_err(|e| Error::Precondition(e.clone()))?;
        let mut worst = 0.0_f64;
        for (u, f) in fields.iter().zip(&batch) {
            for p in [LpExponent::One, LpExponent::Two, LpExponent::Infinity] {
                let base = p.norm(f, mass);
                if base > 0.0 {
                    worst = worst.max(lp_profile(u, mass, p).sup / base);
                }
            }
        }
        Ok(measured(worst, worst <= 1.0 + 1e-9))
    });

    rec.check("tube.atomic_l1", "lp_profile", Some(1e-9), || {
        let mut rng = ctx.rng(32);
        let interior: Vec<usize> = ctx.g.interior_ids().collect();
        if interior.is_empty() {
            return skip("no interior vertices");
        }
        let mut worst = 0.0_f64;
        for i in 0..ctx.batch.min(4) {
            let atoms: Vec<(usize, f64)> = (0..3)
                .map(|_| (*interior.choose(&mut rng).unwrap(), rng.gen_range(0.1..1.0)))
                .collect();
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let u = tube_sample(&evd, &BoundaryData::Atoms(atoms), &format!("atoms {i}"), &grid)?;
            worst = worst.max(lp_profile(&u, mass, LpExponent::One).sup / total);
        }
        Ok(measured(worst, worst <= 1.0 + 1e-9))
    });
}
