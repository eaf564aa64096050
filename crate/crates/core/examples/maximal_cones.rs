//! Maximal functions, weak (1,1) and cone-restricted suprema on the gasket.

use pcf_harmonic::prelude::*;

fn main() -> Result<()> {
    let s = SelfSimilarStructure::sierpinski()?;
    let g = build_level(&s, 4)?;
    let e = energy_matrix(&g, s.harmonic());
    let d = s.dimension();
    let metric = ResistanceMetric::new(&e)?;
    let mass = g.vertex_mass();
    println!("resistance diameter {:.4}, R(q0, q1) = {:.4}", metric.diameter(), metric.get(0, 1));

    let op = MaximalOperator::new(&metric, mass);
    let f = cell_indicator(&g, &[Word(vec![1, 2])]);
    let mf = op.apply(&f);
    let weak = weak11_check(&op, &f, None)?;
    println!("weak (1,1) constant {:.3} at alpha {:.3}, L2 ratio {:.3}", weak.constant, weak.at_alpha, maximal_l2_ratio(&op, &f)?);

    let atoms = [(g.nearest_vertex(&[0.5, 0.3]), 1.0)];
    let m_mu = op.apply_measure(&atoms);
    println!("M mu ranges over [{:.3}, {:.3}]", m_mu.iter().copied().fold(f64::INFINITY, f64::min), m_mu.iter().copied().fold(0.0, f64::max));

    let b = eigensystem(&e, &g, d, BoundaryCondition::Neumann)?;
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let ladder = geometric_ladder(0.05, 1.0, 8)?;
    let u = tube_sample(&ev, &BoundaryData::Function(f.clone()), "cell indicator", &ladder)?;
    let inside = g.cells_under(&Word(vec![1, 2]));
    let apex = g.cell(inside.start + inside.len() / 2)[0];
    for alpha in [0.5, 1.0, 2.0] {
        let c = cone_sup(&u, &Cone::new(apex, alpha), &metric, &mf)?;
        println!("alpha {alpha}: cone sup {:.4} over {} points, Mf(x) {:.4}, ratio {:.3}", c.sup, c.members, c.maximal, c.ratio);
    }

    let smooth: Vec<f64> = g.all_coords().iter().map(|c| (4.0 * c[0]).cos() + c[1]).collect();
    let p = nontangential_error(&ev, &smooth, &Cone::new(apex, 1.0), &geometric_ladder(ev.resolution_time(), 0.5, 6)?, &metric)?;
    for (t, err) in p.t.iter().zip(&p.error) {
        println!("  e({t:.3}) = {err:.4}");
    }

    let classical = classical_cone_check(&metric, d, &Cone::new(apex, 1.0), &ladder)?;
    println!("classical cone: {} points, {} outside", classical.checked, classical.violations.len());
    let shifted = shifted_kernel_constant(&ev, &metric, 1.0, &[0.1, 0.3], &[apex])?;
    println!("shifted kernel constant {:.3}", shifted.c_alpha);
    Ok(())
}
