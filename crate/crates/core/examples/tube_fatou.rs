//! Poisson integrals in the tube K x (0, T] and their Fatou-type diagnostics.

use pcf_harmonic::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<()> {
    let s = SelfSimilarStructure::sierpinski()?;
    let g = build_level(&s, 5)?;
    let e = energy_matrix(&g, s.harmonic());
    let b = eigensystem(&e, &g, s.dimension(), BoundaryCondition::Dirichlet)?;
    let ev = KernelEvaluator::new(&b, Truncation::Full);
    let mass = b.mass();
    let grid = [0.05, 0.1, 0.2, 0.4, 0.8];

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = random_nonnegative(&g, 12, &mut rng);
    let u = tube_sample(&ev, &BoundaryData::Function(f.clone()), "random", &grid)?;
    println!("boundary defect {:.2e}", u.boundary_defect());

    for n in [9, 17, 33] {
        let fine = tube_sample(&ev, &BoundaryData::Function(f.clone()), "random", &geometric_ladder(0.1, 1.0, n)?)?;
        let r = harmonic_residual(&fine, &e, mass)?;
        println!("{n} time slices: |u_tt + Delta u| <= {:.3e} at t = {:.3}", r.max, r.at.0);
    }
    let mp = max_principle_check(&u, 0.05, 0.8)?;
    println!(
        "extrema {:.4} / {:.4} against boundary {:.4} / {:.4}, {} violations",
        mp.max.value,
        mp.min.value,
        mp.boundary_max,
        mp.boundary_min,
        mp.violations.len()
    );
    println!("negative points: {:?}", positivity_violations(&u, 0.05, 0.8)?.map(|v| v.len()));
    for (s, t) in [(0.1, 0.1), (0.4, 0.4)] {
        println!("P_s u_t - u_(s+t) at s={s}, t={t}: {:.2e}", fatou_consistency(&ev, &u, s, t)?);
    }
    for p in [LpExponent::One, LpExponent::Two, LpExponent::Infinity] {
        let profile = lp_profile(&u, mass, p);
        println!("p = {}: sup_t ||u_t|| = {:.4}, ||f|| = {:.4}", p.value(), profile.sup, p.norm(&f, mass));
    }

    if let Err(e) = LpExponent::from_f64(3.0) {
        println!("p = 3: {e}");
    }

    let atoms = vec![(g.nearest_vertex(&[0.5, 0.3]), 1.0)];
    let v = tube_sample(&ev, &BoundaryData::Atoms(atoms), "atom", &grid)?;
    let l1 = lp_profile(&v, mass, LpExponent::One);
    println!("atomic L1 norms {:.4?}, fitted exponent {:?}", l1.norms, l1.fit_exponent);

    let out = std::env::temp_dir().join("pcf_tube.csv");
    u.export_csv(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}
