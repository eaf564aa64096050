use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::error::Error;
use crate::kernels::{KernelEvaluator, Truncation};
use crate::pcf::{
    build_level, load_structure, scaling_constants, ResistanceMetric, SelfSimilarStructure, VertexGraph, Word,
};
use crate::spectral::{eigensystem, energy_matrix, BoundaryCondition, EigenBasis};
use crate::tube::{geometric_ladder, tube_sample};
use crate::kernels::BoundaryData;

struct Level {
    s: SelfSimilarStructure,
    g: VertexGraph,
    metric: ResistanceMetric,
}

fn level(name: &str, m: usize) -> Level {
    let s = SelfSimilarStructure::preset(name).unwrap();
    let g = build_level(&s, m).unwrap();
    let metric = ResistanceMetric::new(&energy_matrix(&g, s.harmonic())).unwrap();
    Level { s, g, metric }
}

fn basis(l: &Level, bc: BoundaryCondition) -> EigenBasis {
    let e = energy_matrix(&l.g, l.s.harmonic());
    eigensystem(&e, &l.g, l.s.dimension(), bc).unwrap()
}

fn word(w: &[usize]) -> Word {
    Word(w.to_vec())
}

/// sup over every radius of the ball average, straight from the definition.
fn brute_maximal(l: &Level, f: &[f64], x: usize) -> f64 {
    let mass = l.g.vertex_mass();
    let mut radii: Vec<f64> = l.metric.row(x).to_vec();
    radii.push(l.metric.diameter() * 2.0);
    let mut best = 0.0_f64;
    for r in radii {
        let ball = l.metric.ball(x, r * (1.0 + 1e-9) + 1e-13, mass);
        let avg: f64 = ball.vertices.iter().map(|&y| mass[y] * f[y].abs()).sum::<f64>() / ball.mass;
        best = best.max(avg);
    }
    best
}

#[test]
fn maximal_of_constant_is_constant() {
    let l = level("sierpinski", 3);
    let mf = maximal_function(&l.metric, l.g.vertex_mass(), &vec![1.0; l.g.num_vertices()]);
    assert!(mf.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn maximal_of_half_indicator() {
    let l = level("interval", 6);
    let chi = BoundarySet::new(&l.g, vec![word(&[0])]).unwrap();
    let mf = maximal_function(&l.metric, l.g.vertex_mass(), chi.indicator());
    let x = l.g.nearest_vertex(&[0.75]);
    assert!((mf[x] - 0.5).abs() < 1.0 / 64.0, "{}", mf[x]);
    assert!((mf[x] - brute_maximal(&l, chi.indicator(), x)).abs() < 1e-12);
}

#[test]
fn maximal_matches_brute_force_on_presets() {
    for (name, m) in [("interval", 5), ("sierpinski", 3), ("vicsek", 2)] {
        let l = level(name, m);
        let f: Vec<f64> = (0..l.g.num_vertices()).map(|v| ((v * 7919) % 13) as f64 - 6.0).collect();
        let mf = maximal_function(&l.metric, l.g.vertex_mass(), &f);
        for x in 0..l.g.num_vertices() {
            assert!((mf[x] - brute_maximal(&l, &f, x)).abs() < 1e-12, "{name} x={x}");
            assert!(mf[x] >= f[x].abs() - 1e-12);
        }
    }
}

#[test]
fn maximal_measure_examples() {
    let l = level("sierpinski", 3);
    let mass = l.g.vertex_mass();
    let x = 10;
    let one = maximal_measure(&l.metric, mass, &[(x, 1.0)]);
    assert!((one[x] - 1.0 / mass[x]).abs() < 1e-9);
    let atoms: Vec<(usize, f64)> = mass.iter().copied().enumerate().collect();
    let all = maximal_measure(&l.metric, mass, &atoms);
    assert!(all.iter().all(|v| (v - 1.0).abs() < 1e-12));
    // Two atoms: brute force with the atoms spread into a density.
    let (a, b) = (0, 1);
    let two = maximal_measure(&l.metric, mass, &[(a, 0.5), (b, 0.5)]);
    let mut density = vec![0.0; mass.len()];
    density[a] = 0.5 / mass[a];
    density[b] = 0.5 / mass[b];
    for y in 0..mass.len() {
        assert!((two[y] - brute_maximal(&l, &density, y)).abs() < 1e-9);
    }
    assert!(two[a] >= 0.5 / mass[a] - 1e-9);
}

#[test]
fn weak_type_constants() {
    let l = level("sierpinski", 4);
    let op = MaximalOperator::new(&l.metric, l.g.vertex_mass());
    let one = vec![1.0; l.g.num_vertices()];
    let w = weak11_check(&op, &one, Some(&[0.5])).unwrap();
    assert!((w.constant - 0.5).abs() < 1e-12);
    let bump = BoundarySet::new(&l.g, vec![word(&[0, 1, 2])]).unwrap();
    let w = weak11_check(&op, bump.indicator(), None).unwrap();
    assert!(w.constant.is_finite() && w.constant > 0.0);
    let a2 = maximal_l2_ratio(&op, bump.indicator()).unwrap();
    assert!(a2 >= 1.0 && a2.is_finite());
    assert!(weak11_check(&op, &vec![0.0; l.g.num_vertices()], None).is_err());
    assert!(matches!(weak11_check(&op, &one, Some(&[])), Err(Error::EmptyGrid(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn maximal_is_sublinear_and_homogeneous(
        f in prop::collection::vec(-5.0f64..5.0, 15),
        g in prop::collection::vec(-5.0f64..5.0, 15),
        c in -3.0f64..3.0,
    ) {
        let l = level("sierpinski", 2);
        let op = MaximalOperator::new(&l.metric, l.g.vertex_mass());
        let mf = op.apply(&f);
        let mg = op.apply(&g);
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let msum = op.apply(&sum);
        let scaled: Vec<f64> = f.iter().map(|a| c * a).collect();
        let mscaled = op.apply(&scaled);
        for x in 0..f.len() {
            prop_assert!(msum[x] <= mf[x] + mg[x] + 1e-10);
            prop_assert!((mscaled[x] - c.abs() * mf[x]).abs() <= 1e-10 * (1.0 + mf[x]));
            prop_assert!(mf[x] >= f[x].abs() - 1e-12);
        }
    }

    #[test]
    fn cones_are_nested(
        apex in 0usize..15,
        alpha in 0.05f64..5.0,
        grow in 1.0f64..3.0,
        h in 0.05f64..2.0,
        t in 0.01f64..2.0,
    ) {
        let l = level("sierpinski", 2);
        let d = l.s.dimension();
        let small = Cone::truncated(apex, alpha, h);
        let big = Cone::truncated(apex, alpha * grow, h * grow);
        for y in 0..15 {
            if small.contains(&l.metric, d, t, y) {
                prop_assert!(big.contains(&l.metric, d, t, y));
                prop_assert!(Cone::new(apex, alpha).contains(&l.metric, d, t, y));
            }
        }
    }
}

#[test]
fn cone_sup_of_constant() {
    let l = level("sierpinski", 3);
    let b = basis(&l, BoundaryCondition::Neumann);
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let one = vec![1.0; l.g.num_vertices()];
    let grid = geometric_ladder(0.1, 1.0, 4).unwrap();
    let u = tube_sample(&ev, &BoundaryData::Function(one.clone()), "one", &grid).unwrap();
    let mf = maximal_function(&l.metric, l.g.vertex_mass(), &one);
    let s = cone_sup(&u, &Cone::new(7, 1.0), &l.metric, &mf).unwrap();
    assert!((s.sup - 1.0).abs() < 1e-10 && (s.ratio - 1.0).abs() < 1e-10);
    assert!(matches!(
        cone_sup(&u, &Cone::truncated(7, 1.0, 0.05), &l.metric, &mf),
        Err(Error::EmptyCone { apex: 7 })
    ));
}

#[test]
fn thin_cone_is_the_vertical_ray() {
    let l = level("interval", 6);
    let b = basis(&l, BoundaryCondition::Neumann);
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let chi = BoundarySet::new(&l.g, vec![word(&[0])]).unwrap();
    let grid = geometric_ladder(0.05, 1.0, 6).unwrap();
    let u = tube_sample(&ev, &BoundaryData::Function(chi.indicator().to_vec()), "half", &grid).unwrap();
    let mf = maximal_function(&l.metric, l.g.vertex_mass(), chi.indicator());
    let x = l.g.nearest_vertex(&[0.25]);
    let s = cone_sup(&u, &Cone::new(x, 1e-9), &l.metric, &mf).unwrap();
    let ray = (0..grid.len()).map(|i| u.value(i, x).abs()).fold(0.0, f64::max);
    assert_eq!(s.members, grid.len());
    assert!((s.sup - ray).abs() < 1e-15);
    let wide = cone_sup(&u, &Cone::new(x, 1.0), &l.metric, &mf).unwrap();
    assert!(wide.sup >= s.sup && wide.ratio.is_finite() && wide.ratio <= 2.0);
}

#[test]
fn nontangential_decay_for_a_mode() {
    let l = level("sierpinski", 4);
    let b = basis(&l, BoundaryCondition::Dirichlet);
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let f = b.mode(1).to_vec();
    let x = 20;
    let ladder = geometric_ladder(0.1, 1.0, 6).unwrap();
    let p = nontangential_error(&ev, &f, &Cone::new(x, 1.0), &ladder, &l.metric).unwrap();
    assert!(p.is_monotone());
    assert!(p.final_error() < p.error[p.error.len() - 1]);
    assert!(matches!(
        nontangential_error(&ev, &f, &Cone::new(0, 1.0), &ladder, &l.metric),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn nontangential_decay_interval_indicator() {
    let l = level("interval", 8);
    let b = basis(&l, BoundaryCondition::Neumann);
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let chi = BoundarySet::new(&l.g, vec![word(&[0])]).unwrap();
    let x = l.g.nearest_vertex(&[0.25]);
    let ladder = geometric_ladder(0.02, 0.5, 6).unwrap();
    let p = nontangential_error(&ev, chi.indicator(), &Cone::new(x, 1.0), &ladder, &l.metric).unwrap();
    assert!(p.is_monotone());
    assert_eq!(p.t[0], 0.02);
    assert!(p.final_error() <= 0.1, "{}", p.final_error());
}

#[test]
fn shifted_kernel_constant_is_finite() {
    let l = level("sierpinski", 3);
    let b = basis(&l, BoundaryCondition::Neumann);
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let c = shifted_kernel_constant(&ev, &l.metric, 1.0, &[0.1, 0.3, 1.0], &[5, 20]).unwrap();
    assert!(c.c_alpha.is_finite() && c.c_alpha > 0.0 && c.samples > 0);
}

#[test]
fn classical_cone_sits_inside() {
    let l = level("sierpinski", 4);
    let d = l.s.dimension();
    let grid = geometric_ladder(0.01, 2.0, 10).unwrap();
    for alpha in [0.5, 1.0, 2.0] {
        let c = classical_cone_check(&l.metric, d, &Cone::new(30, alpha), &grid).unwrap();
        assert!(c.checked > 0 && c.violations.is_empty());
    }
    let i = level("interval", 3);
    assert!(classical_cone_check(&i.metric, 1.0, &Cone::new(1, 1.0), &grid).is_err());
}

#[test]
fn boundary_set_measure() {
    let l = level("sierpinski", 3);
    let e = BoundarySet::new(&l.g, vec![word(&[0]), word(&[1, 1])]).unwrap();
    assert!((e.measure() - (1.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-12);
    assert!((l.g.integrate(e.indicator()) - e.measure()).abs() < 1e-12);
    assert!(BoundarySet::new(&l.g, vec![word(&[0]), word(&[0, 2])]).is_err());
    assert!(BoundarySet::new(&l.g, vec![word(&[0, 0, 0, 0])]).is_err());
    assert!(BoundarySet::new(&l.g, vec![word(&[3])]).is_err());
}

/// int_{|y - x| < rho} of the Neumann Poisson kernel of [0, 1] by images.
fn interval_ball_mass(t: f64, x: f64, rho: f64) -> f64 {
    let antiderivative = |z: f64| (z / t).atan() / PI;
    let (a, b) = ((x - rho).max(0.0), (x + rho).min(1.0));
    (-50..=50)
        .map(|k| {
            let shift = 2.0 * k as f64;
            antiderivative(b - x + shift) - antiderivative(a - x + shift)
                + antiderivative(b + x + shift)
                - antiderivative(a + x + shift)
        })
        .sum()
}

#[test]
fn interval_ball_mass_matches_images() {
    let l = level("interval", 8);
    let b = basis(&l, BoundaryCondition::Neumann);
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let nested = NestedSetting::new(&l.s, &ev, &l.metric).unwrap();
    for xf in [0.5, 0.25, 0.1] {
        let x = l.g.nearest_vertex(&[xf]);
        for t in [0.4, 0.2, 0.1] {
            let v = nested.ball_mass_lower(t, x, 1.0).unwrap();
            let exact = interval_ball_mass(t, xf, t);
            assert!((v - exact).abs() < 0.02, "x={xf} t={t}: {v} vs {exact}");
            assert!(v > 0.4);
        }
    }
    let whole = nested.ball_mass_lower(0.5, 3, 100.0).unwrap();
    assert!((whole - 1.0).abs() < 1e-8);
    assert!(matches!(
        nested.ball_mass_lower(1e-4, 3, 1.0),
        Err(Error::BelowResolution { .. })
    ));
}

#[test]
fn gasket_ball_mass_is_bounded_below() {
    let l = level("sierpinski", 4);
    let b = basis(&l, BoundaryCondition::Neumann);
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let nested = NestedSetting::new(&l.s, &ev, &l.metric).unwrap();
    let xs: Vec<usize> = (0..l.g.num_vertices()).step_by(7).collect();
    let c = nested.c_alpha(&xs, &[1.0, 0.5, 0.3], 1.0).unwrap();
    assert!(c > 0.0);
    let fit = nested.fit_c_alpha(&xs, &[1.0, 0.5, 0.3], &[0.25, 1.0, 4.0]).unwrap();
    assert!(fit.c_alpha.windows(2).all(|w| w[0] <= w[1]));
    assert!(fit.spread.is_finite());
}

#[test]
fn nested_setting_preconditions() {
    let l = level("interval", 4);
    let dir = basis(&l, BoundaryCondition::Dirichlet);
    let ev = KernelEvaluator::new(&dir, Truncation::Full);
    assert!(NestedSetting::new(&l.s, &ev, &l.metric).is_err());
    let plain = load_structure(
        r#"{"maps":[{"scale":0.5,"translation":[0.0]},{"scale":0.5,"translation":[0.5]}],
            "boundary":[[0.0],[1.0]],"identifications":[[0,1,1,0]],
            "D":[[-1.0,1.0],[1.0,-1.0]],"r":[0.5,0.5]}"#,
    )
    .unwrap();
    let neu = basis(&l, BoundaryCondition::Neumann);
    let ev = KernelEvaluator::new(&neu, Truncation::Full);
    assert!(NestedSetting::new(&plain, &ev, &l.metric).is_err());
}

#[test]
fn empty_set_barrier_is_one_plus_t() {
    let l = level("sierpinski", 3);
    let b = basis(&l, BoundaryCondition::Neumann);
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let nested = NestedSetting::new(&l.s, &ev, &l.metric).unwrap();
    let empty = BoundarySet::new(&l.g, vec![]).unwrap();
    let grid = [0.1, 0.3, 0.6];
    let w = nested.barrier(&empty, 1.0, &grid).unwrap();
    for (i, t) in w.field.t_grid().iter().enumerate() {
        assert!(w.field.slice(i).iter().all(|v| (v - 1.0 - t).abs() < 1e-10));
    }
    assert!(w.decay_ladder.is_none());
    let all = BoundarySet::new(&l.g, vec![word(&[0]), word(&[1]), word(&[2])]).unwrap();
    assert!(matches!(nested.barrier(&all, 1.0, &grid), Err(Error::Precondition(_))));
}

#[test]
fn interval_half_barrier() {
    let l = level("interval", 8);
    let b = basis(&l, BoundaryCondition::Neumann);
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let nested = NestedSetting::new(&l.s, &ev, &l.metric).unwrap();
    let e = BoundarySet::new(&l.g, vec![word(&[0])]).unwrap();
    let grid = geometric_ladder(0.01, 1.0, 12).unwrap();
    let w = nested.barrier(&e, 1.0, &grid).unwrap();
    assert!(w.shell_samples > 0 && w.cap_samples == l.g.num_vertices());
    assert!(w.min_boundary_value > 0.0);
    assert!(w.min_boundary_integral > 0.0);
    let ladder = w.decay_ladder.as_ref().unwrap();
    assert!(ladder.is_monotone());
    assert!(ladder.final_error() <= 0.05, "{}", ladder.final_error());
    assert!(w.field.t_grid().iter().all(|&t| t <= 1.0));

    let g: Vec<f64> = l.g.all_coords().iter().map(|c| (6.0 * c[0]).cos()).collect();
    for n in [4, 10] {
        let cmp = nested.barrier_comparison(&w, &e, &g, n).unwrap();
        assert!(cmp.holds(), "n={n}: {cmp:?}");
    }
    assert!(nested.barrier_comparison(&w, &e, &vec![2.0; l.g.num_vertices()], 4).is_err());
    let json = serde_json::to_value(&w).unwrap();
    assert!(json.get("min_boundary_value").is_some() && json.get("decay_ladder").is_some());
}

#[test]
fn cover_check_examples() {
    let l = level("interval", 7);
    let mass = l.g.vertex_mass();
    let eps: Vec<f64> = geometric_ladder(0.02, 1.0, 12).unwrap();
    let all: Vec<usize> = (0..l.g.num_vertices()).collect();
    let scaling = scaling_constants(&l.metric, mass, 1.0, &eps, &all).unwrap();
    let ladder = geometric_ladder(1e-3, 1.0, 20).unwrap();

    let whole = BoundarySet::new(&l.g, vec![word(&[0]), word(&[1])]).unwrap();
    let r = cone_cover_check(&l.metric, mass, 1.0, &whole, 40, 4.0, 1, &scaling, CoverHeight::Recipe, &ladder).unwrap();
    assert!(r.covered());

    let middle = BoundarySet::new(&l.g, vec![word(&[0, 1]), word(&[1, 0])]).unwrap();
    let x = l.g.nearest_vertex(&[0.5]);
    let r = cone_cover_check(&l.metric, mass, 1.0, &middle, x, 4.0, 1, &scaling, CoverHeight::Recipe, &ladder).unwrap();
    assert!(r.covered() && r.samples > 0 && r.h > 0.0);
    let delta = r.delta.unwrap();
    assert!(delta > 0.0 && delta <= 0.5);

    let edge = l.g.nearest_vertex(&[0.25 + 1.0 / 128.0]);
    let r = cone_cover_check(&l.metric, mass, 1.0, &middle, edge, 1e4, 1, &scaling, CoverHeight::Fixed(1.0), &ladder).unwrap();
    assert!(!r.covered());

    let outside = l.g.nearest_vertex(&[0.1]);
    assert!(matches!(
        cone_cover_check(&l.metric, mass, 1.0, &middle, outside, 4.0, 1, &scaling, CoverHeight::Recipe, &ladder),
        Err(Error::NoDensityPoint(_))
    ));
}
