use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pcf_harmonic::kernels::quadrature::subordinate;
use pcf_harmonic::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

struct Level {
    s: SelfSimilarStructure,
    g: VertexGraph,
    e: EnergyForm,
}

impl Level {
    fn new(name: &str, m: usize) -> Self {
        let s = SelfSimilarStructure::preset(name).unwrap();
        let g = build_level(&s, m).unwrap();
        let e = energy_matrix(&g, s.harmonic());
        Self { s, g, e }
    }

    fn basis(&self, bc: BoundaryCondition) -> EigenBasis {
        eigensystem(&self.e, &self.g, self.s.dimension(), bc).unwrap()
    }

    fn metric(&self) -> ResistanceMetric {
        ResistanceMetric::new(&self.e).unwrap()
    }
}

const BCS: [BoundaryCondition; 2] = [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann];
const PRESETS: [(&str, usize); 2] = [("interval", 8), ("sierpinski", 5)];

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_budget(start: Instant, limit: Duration) -> std::result::Result<(), String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(())
    } else {
        Err(format!("took {took:.2?}, limit {limit:?}"))
    }
}

fn eigenvalues() -> Check {
    let start = Instant::now();
    let l = Level::new("interval", 8);
    let b = l.basis(BoundaryCondition::Dirichlet);
    let first = (b.value(0) - PI * PI).abs() / (PI * PI);
    let worst = (1..=10)
        .map(|k| {
            let exact = (k * k) as f64 * PI * PI;
            (b.value(k - 1) - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    within_budget(start, Duration::from_secs(10))?;
    ensure(
        first <= 1e-3 && worst <= 1e-2,
        format!("lambda_1 rel err {first:.2e}, max over k <= 10 {worst:.2e}"),
    )
}

fn interval_poisson(t: f64, x: f64, y: f64) -> f64 {
    (1..=4000)
        .map(|n| {
            let n = n as f64;
            2.0 * (-n * PI * t).exp() * (n * PI * x).sin() * (n * PI * y).sin()
        })
        .sum()
}

fn poisson_oracle() -> Check {
    let start = Instant::now();
    let l = Level::new("interval", 10);
    let b = l.basis(BoundaryCondition::Dirichlet);
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let points: Vec<usize> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|&x| l.g.nearest_vertex(&[x])).collect();
    let mut worst = 0.0_f64;
    for t in [0.1, 0.3, 1.0] {
        for &x in &points {
            for &y in &points {
                let exact = interval_poisson(t, l.g.coords(x)[0], l.g.coords(y)[0]);
                let p = ev.poisson_kernel(t, x, y).map_err(|e| e.to_string())?;
                worst = worst.max((p - exact).abs());
            }
        }
    }
    within_budget(start, Duration::from_secs(5))?;
    ensure(worst <= 1e-4, format!("max |P - series| = {worst:.2e} on 75 points at m = 10"))
}

fn subordination() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for (name, m) in PRESETS {
        let l = Level::new(name, m);
        let n = l.g.num_vertices();
        for bc in BCS {
            let b = l.basis(bc);
            let ev = KernelEvaluator::new(&b, Truncation::Full);
            for _ in 0..20 {
                let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let t = [0.1, 0.3, 1.0][rng.gen_range(0..3)];
                let series = ev.poisson_kernel(t, x, y).map_err(|e| e.to_string())?;
                let quad = ev.poisson_via_subordination(t, x, y, 1e-9).map_err(|e| e.to_string())?;
                worst = worst.max((series - quad).abs());
            }
        }
    }
    let mut scalar = 0.0_f64;
    for beta in [1.0_f64, 5.0, 20.0] {
        for t in [0.05, 0.3, 1.0] {
            let v = subordinate(|s| (-beta * beta * s).exp(), t, 0.0, 1.0, 1e-12).map_err(|e| e.to_string())?;
            scalar = scalar.max((v - (-beta * t).exp()).abs());
        }
    }
    ensure(
        worst <= 1e-6 && scalar <= 1e-10,
        format!("series vs quadrature {worst:.2e}, scalar identity {scalar:.2e}"),
    )
}

fn semigroup() -> Check {
    let mut worst = 0.0_f64;
    for (name, m) in PRESETS {
        let l = Level::new(name, m);
        for bc in BCS {
            let b = l.basis(bc);
            let ev = KernelEvaluator::new(&b, Truncation::Full);
            for kind in [KernelKind::Heat, KernelKind::Poisson] {
                worst = worst.max(semigroup_defect(&ev, kind, 0.2, 0.2, None).map_err(|e| e.to_string())?);
            }
        }
    }
    ensure(worst <= 1e-6, format!("max defect {worst:.2e}"))
}

fn masses() -> Check {
    let ladder = [0.05, 0.1, 0.2, 0.4, 1.0];
    let mut neumann = 0.0_f64;
    for (name, m) in PRESETS {
        let l = Level::new(name, m);
        let b = l.basis(BoundaryCondition::Neumann);
        let ev = KernelEvaluator::new(&b, Truncation::Full);
        for t in ladder {
            for x in 0..l.g.num_vertices() {
                neumann = neumann.max((kernel_mass(&ev, t, x).map_err(|e| e.to_string())? - 1.0).abs());
            }
        }
    }
    let l = Level::new("interval", 8);
    let b = l.basis(BoundaryCondition::Dirichlet);
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let t_min = ev.resolution_time();
    let mut monotone = true;
    let mut smallest = f64::INFINITY;
    for x in [0.25, 0.5, 0.75].map(|x| l.g.nearest_vertex(&[x])) {
        let mass = |t: f64| kernel_mass(&ev, t, x).map_err(|e| e.to_string());
        let seq = [0.4, 0.2, 0.1, 0.05].map(mass);
        let seq: Vec<f64> = seq.into_iter().collect::<std::result::Result<_, _>>()?;
        monotone &= seq.windows(2).all(|w| w[1] > w[0]);
        smallest = smallest.min(mass(t_min)?);
    }
    ensure(
        neumann <= 1e-8 && monotone && smallest > 0.9,
        format!(
            "Neumann |mass - 1| <= {neumann:.2e}; Dirichlet mass increasing: {monotone}, {smallest:.4} at t = {t_min:.4}"
        ),
    )
}

fn weyl() -> Check {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, m, target) in [("interval", 8, 0.5), ("sierpinski", 5, 3f64.ln() / 5f64.ln())] {
        let b = Level::new(name, m).basis(BoundaryCondition::Dirichlet);
        let fit = weyl_exponent(&b, SpectralWindow::default()).map_err(|e| e.to_string())?;
        ok &= (fit.slope - target).abs() <= 0.05;
        detail.push(format!("{name} {:.4} vs {target:.4}", fit.slope));
    }
    within_budget(start, Duration::from_secs(60))?;
    ensure(ok, detail.join(", "))
}

/// A and A_alpha for alpha in {0.5, 1, 2} over the preset family and both conditions.
fn domination_constants(name: &str, m: usize) -> Result<[f64; 4]> {
    let l = Level::new(name, m);
    let metric = l.metric();
    let op = MaximalOperator::new(&metric, l.g.vertex_mass());
    let ladder = geometric_ladder(0.1, 1.0, 6)?;
    let mut out = [0.0_f64; 4];
    for bc in BCS {
        let b = l.basis(bc);
        let ev = KernelEvaluator::new(&b, Truncation::Full);
        for f in preset_functions(&l.g, &b) {
            let mf = op.apply(&f.values);
            let u = tube_sample(&ev, &BoundaryData::Function(f.values.clone()), &f.name, &ladder)?;
            for i in 0..ladder.len() {
                for (x, m) in mf.iter().enumerate() {
                    out[0] = out[0].max(u.value(i, x).abs() / m);
                }
            }
            for (k, alpha) in [0.5, 1.0, 2.0].into_iter().enumerate() {
                for x in 0..l.g.num_vertices() {
                    match cone_sup(&u, &Cone::new(x, alpha), &metric, &mf) {
                        Ok(c) => out[k + 1] = out[k + 1].max(c.ratio),
                        Err(Error::EmptyCone { .. }) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    Ok(out)
}

fn maximal_domination() -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, m) in [("interval", 7), ("sierpinski", 4)] {
        let a = domination_constants(name, m).map_err(|e| e.to_string())?;
        let b = domination_constants(name, m + 1).map_err(|e| e.to_string())?;
        let drift = a.iter().zip(&b).map(|(x, y)| (y / x - 1.0).abs()).fold(0.0, f64::max);
        ok &= a.iter().chain(&b).all(|v| v.is_finite()) && drift <= 0.3;
        detail.push(format!("{name} A, A_alpha = {b:.3?} at m = {}, drift {drift:.3}", m + 1));
    }
    ensure(ok, detail.join("; "))
}

fn nontangential() -> Check {
    let l = Level::new("interval", 8);
    let metric = l.metric();
    let chi = BoundarySet::new(&l.g, vec![Word(vec![0])]).map_err(|e| e.to_string())?;
    let ladder = geometric_ladder(0.01, 0.5, 8).map_err(|e| e.to_string())?;
    let proxies = [0.125, 0.25, 0.375, 0.625, 0.75, 0.875].map(|x| l.g.nearest_vertex(&[x]));
    let mut worst = 0.0_f64;
    let mut monotone = true;
    for bc in BCS {
        let b = l.basis(bc);
        let ev = KernelEvaluator::new(&b, Truncation::Full);
        for x in proxies {
            let p = nontangential_error(&ev, chi.indicator(), &Cone::new(x, 1.0), &ladder, &metric)
                .map_err(|e| e.to_string())?;
            monotone &= p.is_monotone();
            worst = worst.max(p.final_error());
        }
    }
    ensure(
        monotone && worst <= 0.1,
        format!("6 proxy points, both conditions: non-increasing {monotone}, e(0.01) <= {worst:.4}"),
    )
}

fn random_fields(l: &Level, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..16)
        .map(|_| {
            let a = random_nonnegative(&l.g, 2, &mut rng);
            let b = random_nonnegative(&l.g, 1, &mut rng);
            let w: f64 = rng.gen();
            a.iter().zip(&b).map(|(x, y)| x - w * y).collect()
        })
        .collect()
}

fn maximum_principle() -> Check {
    let grid = geometric_ladder(0.1, 1.0, 7).map_err(|e| e.to_string())?;
    let mut violations = 0;
    let mut fields = 0;
    for (name, m) in PRESETS {
        let l = Level::new(name, m);
        let b = l.basis(BoundaryCondition::Dirichlet);
        let ev = KernelEvaluator::new(&b, Truncation::Full);
        for (i, f) in random_fields(&l, 9).into_iter().enumerate() {
            let u = tube_sample(&ev, &BoundaryData::Function(f), &format!("random {i}"), &grid)
                .map_err(|e| e.to_string())?;
            violations += max_principle_check(&u, 0.1, 1.0).map_err(|e| e.to_string())?.violations.len();
            fields += 1;
        }
    }
    ensure(violations == 0, format!("{fields} fields, {violations} violations"))
}

fn fatou() -> Check {
    let grid = [0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0];
    let mut defect = 0.0_f64;
    let mut lp = 0.0_f64;
    let mut atomic = 0.0_f64;
    for (name, m) in PRESETS {
        let l = Level::new(name, m);
        let b = l.basis(BoundaryCondition::Dirichlet);
        let ev = KernelEvaluator::new(&b, Truncation::Full);
        let mass = b.mass();
        for (i, f) in random_fields(&l, 10).into_iter().enumerate() {
            let u = tube_sample(&ev, &BoundaryData::Function(f.clone()), &format!("random {i}"), &grid)
                .map_err(|e| e.to_string())?;
            for (s, t) in [(0.1, 0.1), (0.1, 0.2), (0.2, 0.2), (0.2, 0.4), (0.4, 0.6)] {
                defect = defect.max(fatou_consistency(&ev, &u, s, t).map_err(|e| e.to_string())?);
            }
            for p in [LpExponent::One, LpExponent::Two, LpExponent::Infinity] {
                lp = lp.max(lp_profile(&u, mass, p).sup / p.norm(&f, mass));
            }
        }
        let interior: Vec<usize> = l.g.interior_ids().collect();
        let atoms = vec![(interior[0], 0.5), (interior[interior.len() / 2], 1.0), (interior[interior.len() - 1], 0.25)];
        let u = tube_sample(&ev, &BoundaryData::Atoms(atoms), "atoms", &grid).map_err(|e| e.to_string())?;
        atomic = atomic.max(lp_profile(&u, mass, LpExponent::One).sup / 1.75);
    }
    ensure(
        defect <= 1e-6 && lp <= 1.0 + 1e-9 && atomic <= 1.0 + 1e-9,
        format!("defect {defect:.2e}, sup_t ||u||_p / ||f||_p = {lp:.4}, atomic L1 ratio {atomic:.4}"),
    )
}

fn lower_bound() -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, m) in PRESETS {
        let l = Level::new(name, m);
        let metric = l.metric();
        let b = l.basis(BoundaryCondition::Neumann);
        let ev = KernelEvaluator::new(&b, Truncation::Full);
        let nested = NestedSetting::new(&l.s, &ev, &metric).map_err(|e| e.to_string())?;
        let xs: Vec<usize> = (0..l.g.num_vertices()).collect();
        let fit = nested
            .fit_c_alpha(&xs, &[0.4, 0.2, 0.1], &[0.25, 0.5, 1.0, 2.0, 4.0])
            .map_err(|e| e.to_string())?;
        let min = fit.c_alpha.iter().copied().fold(f64::INFINITY, f64::min);
        ok &= min > 0.0 && fit.spread <= 2.0;
        detail.push(format!("{name} min c_alpha {min:.3}, spread of c_alpha/sqrt(alpha) {:.3}", fit.spread));
    }
    ensure(ok, detail.join("; "))
}

fn barrier() -> Check {
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, m) in [("interval", 8), ("sierpinski", 6)] {
        let l = Level::new(name, m);
        let metric = l.metric();
        let b = l.basis(BoundaryCondition::Neumann);
        let ev = KernelEvaluator::new(&b, Truncation::Full);
        let nested = NestedSetting::new(&l.s, &ev, &metric).map_err(|e| e.to_string())?;
        let e = BoundarySet::new(&l.g, vec![Word(vec![0])]).map_err(|e| e.to_string())?;
        let grid = geometric_ladder(ev.resolution_time(), 1.0, 16).map_err(|e| e.to_string())?;
        let w = nested.barrier(&e, 1.0, &grid).map_err(|e| e.to_string())?;
        let decay = w.decay_ladder.as_ref().ok_or("no interior vertex in E")?;
        ok &= w.min_boundary_value > 0.0 && decay.is_monotone() && decay.final_error() <= 0.05;
        detail.push(format!(
            "{name} m={m}: boundary min {:.3}, decay {:.4} at t = {:.4}",
            w.min_boundary_value,
            decay.final_error(),
            decay.t[0]
        ));
    }
    ensure(ok, detail.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("interval eigenvalues", eigenvalues),
        ("interval Poisson kernel", poisson_oracle),
        ("subordination", subordination),
        ("semigroup identities", semigroup),
        ("kernel mass", masses),
        ("Weyl exponent", weyl),
        ("maximal domination", maximal_domination),
        ("nontangential decay", nontangential),
        ("maximum principle", maximum_principle),
        ("Fatou consistency", fatou),
        ("nested lower bound", lower_bound),
        ("barrier", barrier),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:2} {tag} {name}: {detail} ({took:.2?})", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
