use crate::linalg::{Cholesky, Matrix};
use crate::pcf::{HarmonicStructure, VertexGraph};

/// Renormalised level-m energy: f^T E f = sum_w (1/r_w) E_0(f o F_w, f o F_w).
#[derive(Debug, Clone)]
pub struct EnergyForm {
    level: usize,
    matrix: Matrix,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

pub fn energy_matrix(g: &VertexGraph, h: &HarmonicStructure) -> EnergyForm {
    let n = g.num_vertices();
    let nb = g.boundary_size();
    let mut matrix = Matrix::zeros(n);
    for c in 0..g.num_cells() {
        let ids = g.cell(c);
        let scale = 1.0 / g.cell_resistances()[c];
        for p in 0..nb {
            for q in 0..nb {
                matrix[(ids[p], ids[q])] -= scale * h.d[p][q];
            }
        }
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for i in 0..n {
        for (j, &v) in matrix.row(i).iter().enumerate() {
            if v != 0.0 {
                cols.push(j);
                vals.push(v);
            }
        }
        row_ptr.push(cols.len());
    }
    EnergyForm {
        level: g.level(),
        matrix,
        row_ptr,
        cols,
        vals,
    }
}

impl EnergyForm {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// E f, using the sparsity of the cell structure.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
                self.cols[a..b]
                    .iter()
                    .zip(&self.vals[a..b])
                    .map(|(&j, v)| v * f[j])
                    .sum()
            })
            .collect()
    }

    pub fn energy(&self, f: &[f64]) -> f64 {
        crate::linalg::dot(f, &self.apply(f))
    }

    /// Vertices sharing a nonzero energy coupling with `v`, including `v`.
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.cols[self.row_ptr[v]..self.row_ptr[v + 1]]
    }

    /// Energy minimiser with the given values on the boundary ids `0..k`.
    pub fn harmonic_extension(&self, boundary_values: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let k = boundary_values.len();
        let interior: Vec<usize> = (k..n).collect();
        let mut u = boundary_values.to_vec();
        u.resize(n, 0.0);
        if interior.is_empty() {
            return u;
        }
        let rhs: Vec<f64> = interior
            .iter()
            .map(|&i| -(0..k).map(|b| self.matrix[(i, b)] * boundary_values[b]).sum::<f64>())
            .collect();
        let block = self.matrix.principal(&interior);
        let chol = Cholesky::factor(&block).expect("interior energy block is positive definite");
        for (slot, x) in interior.iter().zip(chol.solve(&rhs)) {
            u[*slot] = x;
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigen;
    use crate::pcf::{build_level, SelfSimilarStructure};

    fn form(name: &str, m: usize) -> (VertexGraph, EnergyForm, SelfSimilarStructure) {
        let s = SelfSimilarStructure::preset(name).unwrap();
        let g = build_level(&s, m).unwrap();
        let e = energy_matrix(&g, s.harmonic());
        (g, e, s)
    }

    #[test]
    fn interval_level_one_by_hand() {
        let (g, e, _) = form("interval", 1);
        let mid = g.nearest_vertex(&[0.5]);
        let f = |a: f64, b: f64, c: f64| {
            let mut v = vec![0.0; 3];
            v[0] = a;
            v[1] = c;
            v[mid] = b;
            v
        };
        let x = f(0.3, -1.2, 2.0);
        let expected = 2.0 * (0.3f64 + 1.2).powi(2) + 2.0 * (-1.2f64 - 2.0).powi(2);
        assert!((e.energy(&x) - expected).abs() < 1e-12);
    }

    #[test]
    fn constants_have_zero_energy() {
        for name in ["interval", "sierpinski", "vicsek"] {
            let (g, e, _) = form(name, 3);
            let one = vec![1.0; g.num_vertices()];
            assert!(e.apply(&one).iter().all(|v| v.abs() < 1e-9));
            assert!(e.matrix().max_asymmetry() == 0.0);
        }
    }

    #[test]
    fn linear_function_on_interval() {
        let (g, e, _) = form("interval", 3);
        let f: Vec<f64> = g.all_coords().iter().map(|c| c[0]).collect();
        assert!((e.energy(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_extension_preserves_energy() {
        for name in ["interval", "sierpinski", "vicsek"] {
            let (_, e, s) = form(name, 3);
            let b: Vec<f64> = (0..s.boundary_size()).map(|p| (p as f64 * 1.7).sin()).collect();
            let h = e.harmonic_extension(&b);
            let e0 = s.harmonic().boundary_energy(&b);
            assert!((e.energy(&h) - e0).abs() < 1e-9 * e0.max(1.0), "{name}");
        }
    }

    #[test]
    fn positive_semidefinite_with_constant_kernel() {
        let (_, e, _) = form("sierpinski", 2);
        let eig = symmetric_eigen(e.matrix()).unwrap();
        assert!(eig.values[0].abs() < 1e-10);
        assert!(eig.values[1] > 1e-6);
    }
}
