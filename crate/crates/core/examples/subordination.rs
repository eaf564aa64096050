//! The Poisson kernel as a Gaussian mixture of heat kernels.

use pcf_harmonic::kernels::quadrature::subordinate;
use pcf_harmonic::prelude::*;

fn main() -> Result<()> {
    for lambda in [0.5, 10.0, 250.0] {
        let t = 0.4;
        let via = subordinate(|s| (-lambda * s).exp(), t, 0.0, 1.0, 1e-12)?;
        println!("lambda {lambda}: exp(-t sqrt(lambda)) = {:.12}, subordinated {via:.12}", (-t * lambda.sqrt()).exp());
    }

    let s = SelfSimilarStructure::sierpinski()?;
    let g = build_level(&s, 4)?;
    let e = energy_matrix(&g, s.harmonic());
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
        let b = eigensystem(&e, &g, s.dimension(), bc)?;
        let ev = KernelEvaluator::new(&b, Truncation::Full);
        let mut worst = 0.0_f64;
        for t in [0.2, 0.5, 1.0] {
            for (x, y) in [(3, 3), (5, 40), (17, 60)] {
                let series = ev.poisson_kernel(t, x, y)?;
                let quad = ev.poisson_via_subordination(t, x, y, 1e-10)?;
                worst = worst.max((series - quad).abs());
            }
        }
        println!("{bc}: max |series - quadrature| = {worst:.2e}");
        let defect = semigroup_defect(&ev, KernelKind::Poisson, 0.2, 0.3, Some(&[0, 5, 17, 40]))?;
        println!("{bc}: P_s P_t - P_(s+t) defect {defect:.2e}");
    }
    Ok(())
}
