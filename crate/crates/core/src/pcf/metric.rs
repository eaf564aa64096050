use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::spectral::EnergyForm;

/// Effective resistance between two vertices of the level-m network.
///
/// Grounds `a` and solves E x = e_b on the remaining vertices; R(a, b) = x_b.
pub fn resistance(e: &EnergyForm, a: usize, b: usize) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let keep: Vec<usize> = (0..e.dim()).filter(|&v| v != a).collect();
    let chol = Cholesky::factor(&e.matrix().principal(&keep)).ok_or(Error::Disconnected)?;
    let mut rhs = vec![0.0; keep.len()];
    let bi = keep.iter().position(|&v| v == b).expect("b is not grounded");
    rhs[bi] = 1.0;
    Ok(chol.solve(&rhs)[bi])
}

const BALL_GUARD: f64 = 1e-12;

/// All pairwise effective resistances of a level-m network.
#[derive(Debug, Clone)]
pub struct ResistanceMetric {
    n: usize,
    r: Vec<f64>,
}

/// Open resistance ball {y : R(x, y) < eps} and its lumped measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub vertices: Vec<usize>,
    pub mass: f64,
}

impl ResistanceMetric {
    /// Builds the full table from the inverse of the grounded energy matrix:
    /// R(a, b) = G_aa + G_bb - 2 G_ab with vertex 0 grounded.
    pub fn new(e: &EnergyForm) -> Result<Self> {
        let n = e.dim();
        let keep: Vec<usize> = (1..n).collect();
        let mut g = vec![0.0; n * n];
        if n > 1 {
            let chol = Cholesky::factor(&e.matrix().principal(&keep)).ok_or(Error::Disconnected)?;
            let inv = chol.inverse();
            for i in 1..n {
                for j in 1..n {
                    g[i * n + j] = inv[(i - 1, j - 1)];
                }
            }
        }
        let mut r = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..a {
                let v = (g[a * n + a] + g[b * n + b] - 2.0 * g[a * n + b]).max(0.0);
                r[a * n + b] = v;
                r[b * n + a] = v;
            }
        }
        Ok(Self { n, r })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.r[a * self.n + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.r[a * self.n..(a + 1) * self.n]
    }

    pub fn diameter(&self) -> f64 {
        self.r.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest positive resistance from `x`: balls below it are {x}.
    pub fn resolution(&self, x: usize) -> f64 {
        self.row(x)
            .iter()
            .copied()
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest positive resistance over all vertices.
    pub fn min_positive(&self) -> f64 {
        (0..self.n).map(|x| self.resolution(x)).fold(f64::INFINITY, f64::min)
    }

    /// Radii are shrunk by a relative 1e-12 so that vertices at distance
    /// exactly eps stay outside despite roundoff in the table.
    pub fn ball(&self, x: usize, eps: f64, mass: &[f64]) -> Ball {
        let eps = eps * (1.0 - BALL_GUARD);
        let vertices: Vec<usize> = (0..self.n).filter(|&y| self.get(x, y) < eps).collect();
        let mass = vertices.iter().map(|&y| mass[y]).sum();
        Ball { vertices, mass }
    }

    /// Vertices ordered by distance from `x` (ties by id).
    pub fn sorted_from(&self, x: usize) -> Vec<usize> {
        let row = self.row(x);
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        order
    }
}

/// Empirical constants in A_1 eps^d <= mu(B_eps(x)) <= A_2 eps^d.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingConstants {
    pub a1: f64,
    pub a1_at: (usize, f64),
    pub a2: f64,
    pub a2_at: (usize, f64),
    /// Some sampled ball was all of K, where the ratio says nothing about scaling.
    pub whole_space_ball: bool,
}

pub fn scaling_constants(
    metric: &ResistanceMetric,
    mass: &[f64],
    d: f64,
    eps_grid: &[f64],
    samples: &[usize],
) -> Result<ScalingConstants> {
    if eps_grid.is_empty() {
        return Err(Error::EmptyGrid("eps_grid"));
    }
    if samples.is_empty() {
        return Err(Error::EmptyGrid("sample_vertices"));
    }
    let mut out = ScalingConstants {
        a1: f64::INFINITY,
        a1_at: (0, 0.0),
        a2: 0.0,
        a2_at: (0, 0.0),
        whole_space_ball: false,
    };
    for &x in samples {
        for &eps in eps_grid {
            let ball = metric.ball(x, eps, mass);
            if ball.vertices.len() == metric.len() {
                out.whole_space_ball = true;
            }
            let ratio = ball.mass / eps.powf(d);
            if ratio < out.a1 {
                out.a1 = ratio;
                out.a1_at = (x, eps);
            }
            if ratio > out.a2 {
                out.a2 = ratio;
                out.a2_at = (x, eps);
            }
        }
    }
    Ok(out)
}
