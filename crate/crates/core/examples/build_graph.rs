//! Level-m graphs for the three presets and a structure loaded from JSON.

use pcf_harmonic::prelude::*;

const TERNARY: &str = r#"{
    "name": "ternary interval",
    "maps": [
        {"scale": 0.3333333333333333, "translation": [0.0]},
        {"scale": 0.3333333333333333, "translation": [0.3333333333333333]},
        {"scale": 0.3333333333333333, "translation": [0.6666666666666666]}
    ],
    "boundary": [[0.0], [1.0]],
    "identifications": [[0, 1, 1, 0], [1, 1, 2, 0]],
    "D": [[-1.0, 1.0], [1.0, -1.0]],
    "r": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333]
}"#;

fn main() -> Result<()> {
    for name in ["interval", "sierpinski", "vicsek"] {
        let s = SelfSimilarStructure::preset(name)?;
        println!("{name}: d = {:.4}, boundary {}", s.dimension(), s.boundary_size());
        for m in 0..=4 {
            let g = build_level(&s, m)?;
            let dedup = g.coordinate_dedup_count(&s, GLUE_TOL);
            println!(
                "  m={m}: {:5} vertices ({dedup} by coordinates), {:4} cells, total mass {:.12}",
                g.num_vertices(),
                g.num_cells(),
                g.vertex_mass().iter().sum::<f64>()
            );
        }
    }

    let ternary = load_structure(TERNARY)?;
    let g = build_level(&ternary, 3)?;
    println!("{}: d = {:.4}, m=3 has {} vertices", ternary.name(), ternary.dimension(), g.num_vertices());
    if let Err(e) = load_structure(r#"{"preset": "koch"}"#) {
        println!("rejected: {e}");
    }

    let s = SelfSimilarStructure::sierpinski()?;
    match build_level_with_budget(&s, 12, 100_000) {
        Err(e) => println!("level 12: {e}"),
        Ok(g) => println!("level 12: {} vertices", g.num_vertices()),
    }

    let dir = std::env::temp_dir().join("pcf_build_graph");
    std::fs::create_dir_all(&dir)?;
    build_level(&s, 3)?.export_csv(&dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
