//! Heat and Poisson kernels on the interval against their closed forms.

use std::f64::consts::PI;

use pcf_harmonic::prelude::*;

fn dirichlet_series(t: f64, x: f64, y: f64, heat: bool) -> f64 {
    (1..2000)
        .map(|n| {
            let n = n as f64;
            let w = if heat { (-n * n * PI * PI * t).exp() } else { (-n * PI * t).exp() };
            2.0 * w * (n * PI * x).sin() * (n * PI * y).sin()
        })
        .sum()
}

fn main() -> Result<()> {
    let s = SelfSimilarStructure::interval()?;
    let g = build_level(&s, 9)?;
    let e = energy_matrix(&g, s.harmonic());
    let b = eigensystem(&e, &g, 1.0, BoundaryCondition::Dirichlet)?;

    for truncation in [Truncation::Full, Truncation::Fixed(40), Truncation::default()] {
        let ev = KernelEvaluator::new(&b, truncation);
        println!("{truncation:?}: resolution time {:.4}", ev.resolution_time());
        let (x, y) = (g.nearest_vertex(&[0.5]), g.nearest_vertex(&[0.25]));
        for t in [0.3, 0.6, 1.0] {
            let h = ev.heat_kernel(t, x, y)?;
            let p = ev.poisson_kernel(t, x, y)?;
            println!(
                "  t={t}: H {h:.8} (series {:.8}), P {p:.8} (series {:.8}), N_P = {}",
                dirichlet_series(t, 0.5, 0.25, true),
                dirichlet_series(t, 0.5, 0.25, false),
                ev.modes_for(KernelKind::Poisson, t)?
            );
        }
    }

    let ev = KernelEvaluator::new(&b, Truncation::default());
    if let Err(e) = ev.poisson_kernel(0.001, 10, 20) {
        println!("t=0.001: {e}");
    }

    let full = KernelEvaluator::new(&b, Truncation::Full);
    let x = g.nearest_vertex(&[0.5]);
    for t in [0.01, 0.1, 1.0] {
        println!("mass of P_t(x, .) at t={t}: {:.6}", kernel_mass(&full, t, x)?);
    }
    let metric = ResistanceMetric::new(&e)?;
    let xs: Vec<usize> = g.interior_ids().step_by(32).collect();
    let bounds = bound_constant(&full, &metric, &[0.05, 0.1, 0.2], &xs)?;
    println!("heat bound constants c = {:.4}, c' = {:.4}", bounds.c, bounds.c_prime);
    Ok(())
}
