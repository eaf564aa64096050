use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EnergyForm;
use crate::error::{Error, Result};
use crate::linalg::{dot, symmetric_eigen, Matrix};
use crate::pcf::VertexGraph;

/// Relative gap below which neighbouring eigenvalues are treated as one cluster.
pub const CLUSTER_GAP: f64 = 1e-6;

/// Bound on ||E phi - lambda M phi||_inf relative to (1 + lambda).
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
        })
    }
}

/// Sorted eigenvalues and mass-orthonormal eigenvectors on V_m.
///
/// Dirichlet eigenvectors are stored on all of V_m and vanish on the boundary ids.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    bc: BoundaryCondition,
    level: usize,
    dimension: f64,
    values: Vec<f64>,
    /// Mode-major: mode k occupies `modes[k*n .. (k+1)*n]`.
    modes: Vec<f64>,
    n: usize,
    mass: Vec<f64>,
    boundary_size: usize,
    finest_resistance: f64,
}

/// Solves E phi = lambda M phi with M the lumped vertex mass.
pub fn eigensystem(
    e: &EnergyForm,
    g: &VertexGraph,
    dimension: f64,
    bc: BoundaryCondition,
) -> Result<EigenBasis> {
    let mass = g.vertex_mass();
    let n = mass.len();
    for (vertex, &m) in mass.iter().enumerate() {
        if !(m > 0.0) {
            return Err(Error::NonpositiveMass { vertex, mass: m });
        }
    }
    let active: Vec<usize> = match bc {
        BoundaryCondition::Dirichlet => g.interior_ids().collect(),
        BoundaryCondition::Neumann => (0..n).collect(),
    };
    let k = active.len();
    let inv_sqrt: Vec<f64> = active.iter().map(|&v| 1.0 / mass[v].sqrt()).collect();
    let mut a: Matrix = e.matrix().principal(&active);
    for i in 0..k {
        let row = a.row_mut(i);
        for j in 0..k {
            row[j] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let eig = symmetric_eigen(&a)?;

    let mut values = eig.values.clone();
    let mut modes = vec![0.0; k * n];
    for mode in 0..k {
        let psi = eig.vector(mode);
        let dst = &mut modes[mode * n..(mode + 1) * n];
        for (i, &v) in active.iter().enumerate() {
            dst[v] = psi[i] * inv_sqrt[i];
        }
    }
    let mut basis = EigenBasis {
        bc,
        level: g.level(),
        dimension,
        values: Vec::new(),
        modes,
        n,
        mass: mass.to_vec(),
        boundary_size: g.boundary_size(),
        finest_resistance: g.cell_resistances().iter().copied().fold(f64::INFINITY, f64::min),
    };

    if bc == BoundaryCondition::Neumann && k > 0 {
        // Constants span the kernel of E; with total mass one the unit constant is normalised.
        values[0] = 0.0;
        let total: f64 = mass.iter().sum();
        basis.modes[..n].fill(1.0 / total.sqrt());
    }
    basis.values = values;
    basis.reorthonormalise_clusters();
    basis.fix_signs();
    basis.check_residuals(e)?;
    Ok(basis)
}

impl EigenBasis {
    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }
    pub fn level(&self) -> usize {
        self.level
    }
    /// Smallest level-m cell resistance r_w.
    pub fn finest_resistance(&self) -> f64 {
        self.finest_resistance
    }
    /// Similarity dimension of the underlying structure.
    pub fn dimension(&self) -> f64 {
        self.dimension
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn num_vertices(&self) -> usize {
        self.n
    }
    pub fn boundary_size(&self) -> usize {
        self.boundary_size
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    /// lambda_n for the 0-based index k (lambda_{k+1} in 1-based numbering).
    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }
    pub fn mode(&self, k: usize) -> &[f64] {
        &self.modes[k * self.n..(k + 1) * self.n]
    }
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Mass-weighted inner product sum_p M(p) f(p) g(p).
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.mass).map(|((a, b), m)| a * b * m).sum()
    }

    /// Coefficients a_n = <phi_n, f>_M.
    pub fn coefficients(&self, f: &[f64]) -> Vec<f64> {
        let weighted: Vec<f64> = f.iter().zip(&self.mass).map(|(a, m)| a * m).collect();
        (0..self.len()).map(|k| dot(self.mode(k), &weighted)).collect()
    }

    /// max |Phi^T M Phi - I|.
    pub fn gram_deviation(&self) -> f64 {
        let k = self.len();
        let weighted: Vec<Vec<f64>> = (0..k)
            .map(|i| self.mode(i).iter().zip(&self.mass).map(|(a, m)| a * m).collect())
            .collect();
        let mut worst = 0.0_f64;
        for i in 0..k {
            for j in 0..=i {
                let g = dot(&weighted[i], self.mode(j));
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// Largest ||E phi - lambda M phi||_inf / (1 + lambda) over the active rows.
    pub fn max_residual(&self, e: &EnergyForm) -> f64 {
        (0..self.len())
            .map(|k| self.residual(e, k) / (1.0 + self.values[k]))
            .fold(0.0, f64::max)
    }

    fn residual(&self, e: &EnergyForm, k: usize) -> f64 {
        let phi = self.mode(k);
        let ephi = e.apply(phi);
        let lambda = self.values[k];
        let skip = match self.bc {
            BoundaryCondition::Dirichlet => self.boundary_size,
            BoundaryCondition::Neumann => 0,
        };
        (skip..self.n)
            .map(|v| (ephi[v] - lambda * self.mass[v] * phi[v]).abs())
            .fold(0.0, f64::max)
    }

    fn check_residuals(&self, e: &EnergyForm) -> Result<()> {
        for k in 0..self.len() {
            let bound = RESIDUAL_TOL * (1.0 + self.values[k]);
            let residual = self.residual(e, k);
            if !(residual <= bound) {
                return Err(Error::EigenResidual {
                    index: k,
                    residual,
                    bound,
                });
            }
        }
        Ok(())
    }

    /// Modified Gram-Schmidt in the mass inner product inside each cluster of
    /// nearly equal eigenvalues; Neumann modes are also made orthogonal to constants.
    fn reorthonormalise_clusters(&mut self) {
        let k = self.len();
        let first = match self.bc {
            BoundaryCondition::Neumann => 1,
            BoundaryCondition::Dirichlet => 0,
        };
        let mut start = first;
        while start < k {
            let mut end = start + 1;
            while end < k {
                let scale = self.values[end].abs().max(self.values[start].abs()).max(1.0);
                if (self.values[end] - self.values[start]).abs() > CLUSTER_GAP * scale {
                    break;
                }
                end += 1;
            }
            for j in start..end {
                if first == 1 {
                    self.project_out(0, j);
                }
                for i in start..j {
                    self.project_out(i, j);
                }
                self.normalise(j);
            }
            start = end;
        }
    }

    fn normalise(&mut self, j: usize) {
        let n = self.n;
        let norm = self.inner(self.mode(j), self.mode(j)).sqrt();
        for v in &mut self.modes[j * n..(j + 1) * n] {
            *v /= norm;
        }
    }

    fn project_out(&mut self, i: usize, j: usize) {
        let n = self.n;
        let c = self.inner(self.mode(i), self.mode(j));
        let (head, tail) = self.modes.split_at_mut(j * n);
        let src = &head[i * n..(i + 1) * n];
        for (dst, s) in tail[..n].iter_mut().zip(src) {
            *dst -= c * s;
        }
    }

    fn fix_signs(&mut self) {
        let n = self.n;
        for k in 0..self.len() {
            let phi = &mut self.modes[k * n..(k + 1) * n];
            let mut best = 0;
            for (i, v) in phi.iter().enumerate() {
                if v.abs() > phi[best].abs() * (1.0 + 1e-9) {
                    best = i;
                }
            }
            if phi[best] < 0.0 {
                phi.iter_mut().for_each(|v| *v = -*v);
            }
        }
    }

    /// Writes (n, lambda, bc) rows, n 1-based.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        export_spectrum_csv(&[self], path)
    }
}

pub fn export_spectrum_csv(bases: &[&EigenBasis], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["n", "lambda", "bc"])?;
    for b in bases {
        for (k, v) in b.values.iter().enumerate() {
            w.write_record([(k + 1).to_string(), format!("{v:?}"), b.bc.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
