//! Lower ball-mass bounds, barriers and the cone cover on nested structures.

use pcf_harmonic::prelude::*;

fn main() -> Result<()> {
    for (name, m) in [("interval", 7), ("sierpinski", 5)] {
        let s = SelfSimilarStructure::preset(name)?;
        let g = build_level(&s, m)?;
        let e = energy_matrix(&g, s.harmonic());
        let d = s.dimension();
        let metric = ResistanceMetric::new(&e)?;
        let b = eigensystem(&e, &g, d, BoundaryCondition::Neumann)?;
        let ev = KernelEvaluator::new(&b, Truncation::Full);
        let nested = NestedSetting::new(&s, &ev, &metric)?;
        println!("{name} m={m}");

        let xs: Vec<usize> = (0..g.num_vertices()).collect();
        let fit = nested.fit_c_alpha(&xs, &[0.4, 0.2, 0.1], &[0.25, 1.0, 4.0])?;
        println!("  c_alpha {:.3?}, spread of c_alpha/sqrt(alpha) {:.3}", fit.c_alpha, fit.spread);

        let set = BoundarySet::new(&g, vec![Word(vec![0])])?;
        let grid = geometric_ladder(ev.resolution_time(), 1.0, 12)?;
        let w = nested.barrier(&set, 1.0, &grid)?;
        println!("  barrier on E = cell 0: min on closure {:.4} at t = {:.4}", w.min_boundary_value, w.min_at.0);
        if let Some(decay) = &w.decay_ladder {
            println!("  decay inside E: {:.4} at t = {:.4}", decay.final_error(), decay.t[0]);
        }
        let data: Vec<f64> = g.all_coords().iter().map(|c| (6.0 * c[0]).cos()).collect();
        let cmp = nested.barrier_comparison(&w, &set, &data, 4)?;
        println!("  comparison with n = 4: margin {:.3e} over {} samples", cmp.min_margin, cmp.samples);

        let lo = 2.0 * metric.min_positive();
        let eps = geometric_ladder(lo, metric.diameter().max(2.0 * lo), 12)?;
        let scaling = scaling_constants(&metric, g.vertex_mass(), d, &eps, &xs)?;
        let apex = g.cells_under(&Word(vec![0])).start;
        let x = g.cell(apex)[g.cell(apex).len() - 1];
        let ladder = geometric_ladder(1e-3, 1.0, 20)?;
        let cover = cone_cover_check(&metric, g.vertex_mass(), d, &set, x, 4.0, 1, &scaling, CoverHeight::Recipe, &ladder)?;
        println!("  cone cover: h {:.4}, threshold {:.3}, uncovered {}", cover.h, cover.threshold, cover.uncovered.len());
    }

    let s = SelfSimilarStructure::interval()?;
    let g = build_level(&s, 5)?;
    let e = energy_matrix(&g, s.harmonic());
    let metric = ResistanceMetric::new(&e)?;
    let b = eigensystem(&e, &g, 1.0, BoundaryCondition::Dirichlet)?;
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    if let Err(err) = NestedSetting::new(&s, &ev, &metric) {
        println!("dirichlet basis: {err}");
    }
    Ok(())
}
