//! Dirichlet and Neumann spectra with their asymptotic fits.

use pcf_harmonic::prelude::*;

fn main() -> Result<()> {
    for (name, m) in [("interval", 8), ("sierpinski", 5), ("vicsek", 3)] {
        let s = SelfSimilarStructure::preset(name)?;
        let g = build_level(&s, m)?;
        let e = energy_matrix(&g, s.harmonic());
        let d = s.dimension();
        println!("{name} m={m}: target exponent {:.4}", d / (d + 1.0));
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let b = eigensystem(&e, &g, d, bc)?;
            let w = SpectralWindow::default();
            let fit = weyl_exponent(&b, w)?;
            let growth = eigen_growth_constants(&b, w)?;
            let sup = supnorm_ratio(&b, 0.25);
            let first: Vec<String> = b.values().iter().take(5).map(|l| format!("{l:.3}")).collect();
            println!(
                "  {bc}: {} modes, first [{}], residual {:.1e}, gram {:.1e}",
                b.len(),
                first.join(", "),
                b.max_residual(&e),
                b.gram_deviation()
            );
            println!(
                "    weyl slope {:.4} over {} points, growth c1 {:.3} c2 {:.3}, sup ratio {:.4}, rho(100) = {}",
                fit.slope,
                fit.points,
                growth.c1,
                growth.c2,
                sup.c,
                counting_function(&b, 100.0)
            );
        }
    }
    Ok(())
}
