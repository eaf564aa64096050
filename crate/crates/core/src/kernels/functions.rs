use rand::Rng;

use crate::pcf::{dist, VertexGraph, Word};
use crate::spectral::{BoundaryCondition, EigenBasis};

/// A named vertex function used as boundary data in experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub name: String,
    pub values: Vec<f64>,
    /// Continuous on K (as opposed to a cell indicator).
    pub continuous: bool,
}

impl TestFunction {
    pub fn new(name: impl Into<String>, values: Vec<f64>, continuous: bool) -> Self {
        Self {
            name: name.into(),
            values,
            continuous,
        }
    }
}

/// Product of Euclidean distances to the boundary points: continuous,
/// positive off V_0 and zero on it.
pub fn boundary_damping(g: &VertexGraph) -> Vec<f64> {
    let corners: Vec<Vec<f64>> = g.boundary_ids().map(|p| g.coords(p).to_vec()).collect();
    g.all_coords()
        .iter()
        .map(|x| corners.iter().map(|c| dist(x, c)).product())
        .collect()
}

/// Lumped indicator of the union of the given cells: vertex p gets the share
/// of its mass that comes from listed cells, so sum_p M(p) chi(p) = mu(E).
pub fn cell_indicator(g: &VertexGraph, words: &[Word]) -> Vec<f64> {
    let nb = g.boundary_size() as f64;
    let mut inside = vec![0.0; g.num_vertices()];
    for w in words {
        for c in g.cells_under(w) {
            let share = g.cell_measures()[c] / nb;
            for &v in g.cell(c) {
                inside[v] += share;
            }
        }
    }
    inside
        .iter()
        .zip(g.vertex_mass())
        .map(|(a, m)| (a / m).min(1.0))
        .collect()
}

/// The preset family: coordinate polynomials, eigenfunction combinations and
/// a level-1 cell indicator. Dirichlet data is multiplied by
/// [`boundary_damping`] so that it vanishes on V_0.
pub fn preset_functions(g: &VertexGraph, basis: &EigenBasis) -> Vec<TestFunction> {
    let coords = g.all_coords();
    let dim = coords.first().map_or(0, Vec::len);
    let centroid: Vec<f64> = (0..dim)
        .map(|i| g.boundary_ids().map(|p| g.coords(p)[i]).sum::<f64>() / g.boundary_size() as f64)
        .collect();
    let mut out = Vec::new();
    let x0: Vec<f64> = coords.iter().map(|c| c[0]).collect();
    out.push(TestFunction::new("x0", x0.clone(), true));
    out.push(TestFunction::new(
        "quadratic",
        coords.iter().map(|c| dist(c, &centroid).powi(2)).collect(),
        true,
    ));
    out.push(TestFunction::new(
        "cubic",
        x0.iter().map(|x| (x - 0.3).powi(3)).collect(),
        true,
    ));
    if dim > 1 {
        out.push(TestFunction::new(
            "x0x1",
            coords.iter().map(|c| c[0] * c[1]).collect(),
            true,
        ));
    }
    let first = match basis.bc() {
        BoundaryCondition::Dirichlet => 0,
        BoundaryCondition::Neumann => 1,
    };
    if basis.len() > first + 2 {
        out.push(TestFunction::new("phi_2", basis.mode(1).to_vec(), true));
        let combo: Vec<f64> = basis
            .mode(first)
            .iter()
            .zip(basis.mode(first + 2))
            .map(|(a, b)| a - 0.5 * b)
            .collect();
        out.push(TestFunction::new("mode_combination", combo, true));
    }
    out.push(TestFunction::new(
        "cell_indicator",
        cell_indicator(g, &[Word(vec![0])]),
        false,
    ));
    if basis.bc() == BoundaryCondition::Dirichlet {
        let damp = boundary_damping(g);
        for f in &mut out {
            for (v, d) in f.values.iter_mut().zip(&damp) {
                *v *= d;
            }
        }
    }
    out
}

/// Random nonnegative data: a weighted sum of level-`k` cell indicators plus
/// a smooth bump around a random vertex.
pub fn random_nonnegative<R: Rng>(g: &VertexGraph, k: usize, rng: &mut R) -> Vec<f64> {
    let symbols = g.symbols();
    let k = k.min(g.level());
    let count = symbols.pow(k as u32);
    let mut f = vec![0.0; g.num_vertices()];
    for idx in 0..count {
        let weight: f64 = rng.gen();
        if weight < 0.5 {
            continue;
        }
        let mut w = vec![0; k];
        let mut rest = idx;
        for slot in w.iter_mut().rev() {
            *slot = rest % symbols;
            rest /= symbols;
        }
        for (v, c) in f.iter_mut().zip(cell_indicator(g, &[Word(w)])) {
            *v += weight * c;
        }
    }
    let centre = g.coords(rng.gen_range(0..g.num_vertices())).to_vec();
    let width: f64 = rng.gen_range(0.1..0.4);
    let height: f64 = rng.gen_range(0.0..2.0);
    for (v, x) in f.iter_mut().zip(g.all_coords()) {
        *v += height * (-(dist(x, &centre) / width).powi(2)).exp();
    }
    f
}
