use std::cell::RefCell;
use std::collections::HashMap;

use serde::Serialize;

use super::quadrature::subordinate;
use crate::error::{Error, Result};
use crate::spectral::{
    eigen_growth_constants, supnorm_ratio, BoundaryCondition, EigenBasis, SpectralWindow,
};

/// Default tail tolerance.
pub const DEFAULT_TAU: f64 = 1e-8;

/// Values below -NEGATIVITY_FLOOR are never attributed to roundoff.
pub const NEGATIVITY_FLOOR: f64 = 1e-9;

/// How many eigenpairs enter the kernel series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Truncation {
    /// Every computed mode: the exact kernel of the level-m operator.
    Full,
    /// The first N modes.
    Fixed(usize),
    /// The fewest modes whose extrapolated tail bound is at most `tau`, never
    /// more than `cap` (default: the upper edge of the reliable window).
    Tail { tau: f64, cap: Option<usize> },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Tail {
            tau: DEFAULT_TAU,
            cap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Heat,
    Poisson,
}

impl KernelKind {
    fn weight(self, lambda: f64, t: f64) -> f64 {
        match self {
            KernelKind::Heat => (-lambda * t).exp(),
            KernelKind::Poisson => (-lambda.max(0.0).sqrt() * t).exp(),
        }
    }
}

/// Boundary data for a Poisson integral: a vertex function or a finite atomic measure.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryData {
    Function(Vec<f64>),
    Atoms(Vec<(usize, f64)>),
}

/// Heat and Poisson kernels by truncated eigen-expansion.
#[derive(Debug, Clone)]
pub struct KernelEvaluator<'a> {
    basis: &'a EigenBasis,
    truncation: Truncation,
    /// Vertex-major copy of the modes: phi_k(x) at `by_vertex[x * len + k]`.
    by_vertex: Vec<f64>,
    tail: TailModel,
    plan_cache: RefCell<HashMap<(KernelKind, u64), (usize, f64)>>,
}

/// lambda_n ~ c1 n^{(d+1)/d} and |phi_n| <= C lambda_n^{d/(2(d+1))}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailModel {
    pub c1: f64,
    pub growth_exponent: f64,
    pub sup_constant: f64,
    pub dimension: f64,
}

impl TailModel {
    fn from_basis(basis: &EigenBasis) -> Self {
        let d = basis.dimension();
        let window = SpectralWindow::default();
        let c1 = eigen_growth_constants(basis, window)
            .map(|g| g.c1)
            .unwrap_or_else(|_| {
                // Too few modes for the window: fall back to the largest nonzero eigenvalue.
                let n = basis.len();
                basis.value(n - 1).max(1e-12) / (n as f64).powf((d + 1.0) / d)
            });
        let sup = supnorm_ratio(basis, window.hi).c.max(1e-12);
        TailModel {
            c1,
            growth_exponent: (d + 1.0) / d,
            sup_constant: sup,
            dimension: d,
        }
    }

    fn lambda(&self, n: usize) -> f64 {
        self.c1 * (n as f64).powf(self.growth_exponent)
    }

    /// Upper bound on sum_{n > big_n} w(lambda_n, t) |phi_n(x) phi_n(y)|.
    pub fn bound(&self, kind: KernelKind, t: f64, big_n: usize, tau: f64) -> f64 {
        let p = self.dimension / (self.dimension + 1.0);
        let c2 = self.sup_constant * self.sup_constant;
        let mut sum = 0.0;
        let mut n = big_n + 1;
        loop {
            let lambda = self.lambda(n);
            let term = kind.weight(lambda, t) * c2 * lambda.powf(p);
            sum += term;
            // Terms decrease once lambda exceeds the weight's turning point.
            let past_peak = match kind {
                KernelKind::Heat => lambda * t > p,
                KernelKind::Poisson => lambda.sqrt() * t > 2.0 * p,
            };
            if (past_peak && term < 1e-6 * tau.max(1e-300) / (n as f64)) || n > big_n + 50_000_000 {
                break;
            }
            n += 1;
        }
        sum
    }
}

impl<'a> KernelEvaluator<'a> {
    pub fn new(basis: &'a EigenBasis, truncation: Truncation) -> Self {
        let len = basis.len();
        let n = basis.num_vertices();
        let mut by_vertex = vec![0.0; n * len];
        for k in 0..len {
            for (x, v) in basis.mode(k).iter().enumerate() {
                by_vertex[x * len + k] = *v;
            }
        }
        let tail = TailModel::from_basis(basis);
        Self {
            basis,
            truncation,
            by_vertex,
            tail,
            plan_cache: RefCell::default(),
        }
    }

    pub fn basis(&self) -> &'a EigenBasis {
        self.basis
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn tail_model(&self) -> TailModel {
        self.tail
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.basis.bc()
    }

    pub fn num_vertices(&self) -> usize {
        self.basis.num_vertices()
    }

    fn cap(&self, cap: Option<usize>) -> usize {
        let len = self.basis.len();
        cap.unwrap_or_else(|| SpectralWindow::default().indices(self.basis).end().to_owned())
            .clamp(1, len)
    }

    /// Number of modes used at time t.
    pub fn modes_for(&self, kind: KernelKind, t: f64) -> Result<usize> {
        Ok(self.plan(kind, t)?.0)
    }

    /// Guaranteed bound on the discarded part of the series at time t.
    pub fn tail_bound(&self, kind: KernelKind, t: f64) -> Result<f64> {
        Ok(self.plan(kind, t)?.1)
    }

    fn plan(&self, kind: KernelKind, t: f64) -> Result<(usize, f64)> {
        if !(t > 0.0) {
            return Err(Error::InvalidTime(t));
        }
        if let Some(&hit) = self.plan_cache.borrow().get(&(kind, t.to_bits())) {
            return Ok(hit);
        }
        let len = self.basis.len();
        let tail_after = |n: usize, tau: f64| {
            if n >= len {
                0.0
            } else {
                self.tail.bound(kind, t, n, tau)
            }
        };
        let plan = match self.truncation {
            Truncation::Full => (len, 0.0),
            Truncation::Fixed(n) => {
                let n = n.clamp(1, len);
                (n, tail_after(n, DEFAULT_TAU))
            }
            Truncation::Tail { tau, cap } => {
                let cap = self.cap(cap);
                let achievable = self.tail.bound(kind, t, cap, tau);
                if achievable > tau {
                    return Err(Error::TruncationUnachievable { t, achievable });
                }
                // Smallest N <= cap meeting the bound: the tail is decreasing in N.
                let (mut lo, mut hi) = (1usize, cap);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if self.tail.bound(kind, t, mid, tau) <= tau {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                (lo, self.tail.bound(kind, t, lo, tau))
            }
        };
        self.plan_cache.borrow_mut().insert((kind, t.to_bits()), plan);
        Ok(plan)
    }

    /// Tolerance below zero tolerated before a kernel value counts as negative.
    pub fn negativity_tolerance(&self, kind: KernelKind, t: f64) -> Result<f64> {
        Ok(self.tail_bound(kind, t)?.max(NEGATIVITY_FLOOR))
    }

    /// Series weights w(lambda_k, t) for the modes in use.
    pub fn weights(&self, kind: KernelKind, t: f64) -> Result<Vec<f64>> {
        let n = self.modes_for(kind, t)?;
        Ok(self.basis.values()[..n]
            .iter()
            .map(|&l| kind.weight(l, t))
            .collect())
    }

    fn phi_at(&self, x: usize) -> &[f64] {
        let len = self.basis.len();
        &self.by_vertex[x * len..(x + 1) * len]
    }

    fn series(&self, w: &[f64], x: usize, y: usize) -> f64 {
        let (px, py) = (self.phi_at(x), self.phi_at(y));
        w.iter().zip(px).zip(py).map(|((w, a), b)| w * a * b).sum()
    }

    pub fn kernel(&self, kind: KernelKind, t: f64, x: usize, y: usize) -> Result<f64> {
        let w = self.weights(kind, t)?;
        let value = self.series(&w, x, y);
        let tol = self.negativity_tolerance(kind, t)?;
        if value < -tol {
            return Err(Error::NegativeKernel {
                t,
                x,
                y,
                value,
                tol,
            });
        }
        Ok(value)
    }

    /// H(t, x, y) = sum_n e^{-lambda_n t} phi_n(x) phi_n(y).
    pub fn heat_kernel(&self, t: f64, x: usize, y: usize) -> Result<f64> {
        self.kernel(KernelKind::Heat, t, x, y)
    }

    /// P(t, x, y) = sum_n e^{-sqrt(lambda_n) t} phi_n(x) phi_n(y).
    pub fn poisson_kernel(&self, t: f64, x: usize, y: usize) -> Result<f64> {
        self.kernel(KernelKind::Poisson, t, x, y)
    }

    /// K(t, x, .) on every vertex; negativity is not checked here.
    pub fn kernel_row(&self, kind: KernelKind, t: f64, x: usize) -> Result<Vec<f64>> {
        let w = self.weights(kind, t)?;
        let c: Vec<f64> = w.iter().zip(self.phi_at(x)).map(|(w, p)| w * p).collect();
        Ok((0..self.num_vertices())
            .map(|y| c.iter().zip(self.phi_at(y)).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Poisson kernel through the subordination integral of the heat kernel,
    /// using the same modes as the series at time t.
    pub fn poisson_via_subordination(&self, t: f64, x: usize, y: usize, quad_tol: f64) -> Result<f64> {
        let n = self.modes_for(KernelKind::Poisson, t)?;
        let lambdas = &self.basis.values()[..n];
        let prod: Vec<f64> = self.phi_at(x)[..n]
            .iter()
            .zip(&self.phi_at(y)[..n])
            .map(|(a, b)| a * b)
            .collect();
        let g_inf: f64 = lambdas
            .iter()
            .zip(&prod)
            .filter(|(l, _)| **l == 0.0)
            .map(|(_, p)| p)
            .sum();
        let g_bound: f64 = prod.iter().map(|p| p.abs()).sum();
        let heat = |s: f64| -> f64 {
            lambdas
                .iter()
                .zip(&prod)
                .map(|(l, p)| (-l * s).exp() * p)
                .sum()
        };
        let scale = self.series(&self.weights(KernelKind::Poisson, t)?, x, y).abs().max(1.0);
        subordinate(heat, t, g_inf, g_bound, quad_tol * scale)
    }

    /// Coefficients a_n of the boundary data against the modes.
    pub fn coefficients(&self, data: &BoundaryData) -> Vec<f64> {
        match data {
            BoundaryData::Function(f) => self.basis.coefficients(f),
            BoundaryData::Atoms(atoms) => {
                let mut a = vec![0.0; self.basis.len()];
                for &(y, c) in atoms {
                    for (ak, p) in a.iter_mut().zip(self.phi_at(y)) {
                        *ak += c * p;
                    }
                }
                a
            }
        }
    }

    /// u(t, .) = sum_n a_n e^{-sqrt(lambda_n) t} phi_n.
    pub fn poisson_from_coefficients(&self, coeffs: &[f64], t: f64) -> Result<Vec<f64>> {
        let w = self.weights(KernelKind::Poisson, t)?;
        let c: Vec<f64> = w.iter().zip(coeffs).map(|(w, a)| w * a).collect();
        Ok((0..self.num_vertices())
            .map(|x| c.iter().zip(self.phi_at(x)).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Poisson integral P_t f (or P_t nu for atoms) on every vertex.
    pub fn poisson_integral(&self, data: &BoundaryData, t: f64) -> Result<Vec<f64>> {
        if !(t > 0.0) {
            return Err(Error::InvalidTime(t));
        }
        self.poisson_from_coefficients(&self.coefficients(data), t)
    }

    /// Smallest time at which the configured truncation is trustworthy.
    ///
    /// For the full basis this is the time scale (r_min)^{(d+1)/2} of the
    /// finest cells; for truncated series it is ln(1/tau)/sqrt(lambda_N).
    pub fn resolution_time(&self) -> f64 {
        let d = self.basis.dimension();
        match self.truncation {
            Truncation::Full => self.basis.finest_resistance().powf((d + 1.0) / 2.0),
            Truncation::Fixed(n) => {
                let n = n.clamp(1, self.basis.len());
                DEFAULT_TAU.recip().ln() / self.basis.value(n - 1).max(1e-300).sqrt()
            }
            Truncation::Tail { tau, cap } => {
                let n = self.cap(cap);
                tau.recip().ln() / self.basis.value(n - 1).max(1e-300).sqrt()
            }
        }
    }
}
