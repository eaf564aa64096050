use serde::Serialize;

use super::{BoundaryData, KernelEvaluator, KernelKind};
use crate::error::{Error, Result};
use crate::pcf::ResistanceMetric;
use crate::spectral::BoundaryCondition;

/// max over sampled (x, y) of |int K(t,x,z) K(s,z,y) dmu(z) - K(t+s,x,y)|.
///
/// The composition is a mass-weighted sum over all vertices z; `samples`
/// restricts x (all vertices when `None`), y always ranges over V_m.
pub fn semigroup_defect(
    ev: &KernelEvaluator,
    kind: KernelKind,
    t: f64,
    s: f64,
    samples: Option<&[usize]>,
) -> Result<f64> {
    let n = ev.num_vertices();
    let mass = ev.basis().mass();
    let all: Vec<usize> = (0..n).collect();
    let xs = samples.unwrap_or(&all);
    // K(s, z, y) for every z, weighted by M(z).
    let mut ks = vec![0.0; n * n];
    for z in 0..n {
        let row = ev.kernel_row(kind, s, z)?;
        for (y, v) in row.into_iter().enumerate() {
            ks[z * n + y] = mass[z] * v;
        }
    }
    let mut worst = 0.0_f64;
    for &x in xs {
        let kt = ev.kernel_row(kind, t, x)?;
        let kts = ev.kernel_row(kind, t + s, x)?;
        let mut comp = vec![0.0; n];
        for z in 0..n {
            let a = kt[z];
            for (c, b) in comp.iter_mut().zip(&ks[z * n..(z + 1) * n]) {
                *c += a * b;
            }
        }
        for y in 0..n {
            worst = worst.max((comp[y] - kts[y]).abs());
        }
    }
    Ok(worst)
}

/// int_K P(t, x, y) dmu(y).
pub fn kernel_mass(ev: &KernelEvaluator, t: f64, x: usize) -> Result<f64> {
    let row = ev.kernel_row(KernelKind::Poisson, t, x)?;
    Ok(row.iter().zip(ev.basis().mass()).map(|(p, m)| p * m).sum())
}

/// Empirical constants of the off-diagonal Poisson kernel bounds.
#[derive(Debug, Clone, Serialize)]
pub struct BoundConstants {
    /// max P / min{t^{-2d/(d+1)}, t / R^{(3d+1)/2}} over x != y.
    pub c: f64,
    pub c_at: (f64, usize, usize),
    /// max P (t^2 + R^{d+1})^{(3d+1)/(2(d+1))} / t over x != y.
    pub c_prime: f64,
    pub c_prime_at: (f64, usize, usize),
    /// max P(t, x, x) / t^{-2d/(d+1)}.
    pub diagonal: f64,
}

pub fn bound_constant(
    ev: &KernelEvaluator,
    metric: &ResistanceMetric,
    t_grid: &[f64],
    xs: &[usize],
) -> Result<BoundConstants> {
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid("t_grid"));
    }
    if xs.is_empty() {
        return Err(Error::EmptyGrid("vertices"));
    }
    let d = ev.basis().dimension();
    let on_diag = -2.0 * d / (d + 1.0);
    let off_exp = (3.0 * d + 1.0) / 2.0;
    let combined = (3.0 * d + 1.0) / (2.0 * (d + 1.0));
    let mut out = BoundConstants {
        c: 0.0,
        c_at: (0.0, 0, 0),
        c_prime: 0.0,
        c_prime_at: (0.0, 0, 0),
        diagonal: 0.0,
    };
    for &t in t_grid {
        let diag_bound = t.powf(on_diag);
        for &x in xs {
            let row = ev.kernel_row(KernelKind::Poisson, t, x)?;
            for (y, &p) in row.iter().enumerate() {
                if y == x {
                    out.diagonal = out.diagonal.max(p / diag_bound);
                    continue;
                }
                let r = metric.get(x, y);
                let c = p / diag_bound.min(t / r.powf(off_exp));
                if c > out.c {
                    out.c = c;
                    out.c_at = (t, x, y);
                }
                let cp = p * (t * t + r.powf(d + 1.0)).powf(combined) / t;
                if cp > out.c_prime {
                    out.c_prime = cp;
                    out.c_prime_at = (t, x, y);
                }
            }
        }
    }
    Ok(out)
}

/// ||P_t f - f|| in sup, L^1 and L^2 norms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ApproxError {
    pub t: f64,
    pub sup: f64,
    pub l1: f64,
    pub l2: f64,
}

/// Boundary values of Dirichlet data must vanish to this tolerance.
pub const BOUNDARY_ZERO_TOL: f64 = 1e-12;

pub fn approx_identity_error(ev: &KernelEvaluator, f: &[f64], t: f64) -> Result<ApproxError> {
    if ev.bc() == BoundaryCondition::Dirichlet {
        let nb = ev.basis().boundary_size();
        if let Some((p, v)) = f[..nb].iter().enumerate().find(|(_, v)| v.abs() > BOUNDARY_ZERO_TOL) {
            return Err(Error::Precondition(format!(
                "Dirichlet data must vanish on the boundary, f({p}) = {v}"
            )));
        }
    }
    let u = ev.poisson_integral(&BoundaryData::Function(f.to_vec()), t)?;
    let mass = ev.basis().mass();
    let mut out = ApproxError {
        t,
        sup: 0.0,
        l1: 0.0,
        l2: 0.0,
    };
    for ((a, b), m) in u.iter().zip(f).zip(mass) {
        let e = (a - b).abs();
        out.sup = out.sup.max(e);
        out.l1 += m * e;
        out.l2 += m * e * e;
    }
    out.l2 = out.l2.sqrt();
    Ok(out)
}
