use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{BoundaryData, KernelEvaluator, KernelKind};
use crate::pcf::ResistanceMetric;
use crate::spectral::BoundaryCondition;
use crate::tube::{tube_sample, TubeField};

/// Gamma_alpha^h(x) = {(t, y) : R(x, y)^{d+1} < alpha t^2, 0 < t < h}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cone {
    pub apex: usize,
    pub alpha: f64,
    /// `f64::INFINITY` for the untruncated cone.
    pub height: f64,
}

impl Cone {
    pub fn new(apex: usize, alpha: f64) -> Self {
        Self {
            apex,
            alpha,
            height: f64::INFINITY,
        }
    }

    pub fn truncated(apex: usize, alpha: f64, height: f64) -> Self {
        Self { apex, alpha, height }
    }

    pub fn contains(&self, metric: &ResistanceMetric, d: f64, t: f64, y: usize) -> bool {
        t > 0.0 && t < self.height && metric.get(self.apex, y).powf(d + 1.0) < self.alpha * t * t
    }

    /// Cone members on the slice at time t.
    pub fn members(&self, metric: &ResistanceMetric, d: f64, t: f64) -> Vec<usize> {
        (0..metric.len()).filter(|&y| self.contains(metric, d, t, y)).collect()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeSup {
    pub sup: f64,
    pub at: (f64, usize),
    pub members: usize,
    /// Mf at the apex.
    pub maximal: f64,
    /// sup / Mf(apex)
    pub ratio: f64,
}

/// sup |u| over the sampled members of the cone.
pub fn cone_sup(field: &TubeField, cone: &Cone, metric: &ResistanceMetric, maximal: &[f64]) -> Result<ConeSup> {
    let d = field.dimension();
    let mut out = ConeSup {
        sup: 0.0,
        at: (0.0, cone.apex),
        members: 0,
        maximal: maximal[cone.apex],
        ratio: 0.0,
    };
    for (i, &t) in field.t_grid().iter().enumerate() {
        for y in cone.members(metric, d, t) {
            out.members += 1;
            let v = field.value(i, y).abs();
            if v > out.sup || out.members == 1 {
                out.sup = v;
                out.at = (t, y);
            }
        }
    }
    if out.members == 0 {
        return Err(Error::EmptyCone { apex: cone.apex });
    }
    out.ratio = if out.maximal > 0.0 {
        out.sup / out.maximal
    } else if out.sup == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(out)
}

/// e(t) = sup over cone members (s, y) with s <= t of |u(s, y) - target|,
/// together with the error on each slice alone.
#[derive(Debug, Clone, Serialize)]
pub struct NontangentialProfile {
    pub apex: usize,
    pub t: Vec<f64>,
    pub error: Vec<f64>,
    pub slice_error: Vec<f64>,
}

impl NontangentialProfile {
    /// e(t) read from the top of the ladder down never increases.
    pub fn is_monotone(&self) -> bool {
        self.error.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn final_error(&self) -> f64 {
        self.error.first().copied().unwrap_or(f64::NAN)
    }
}

pub fn nontangential_error_field(
    field: &TubeField,
    target: f64,
    cone: &Cone,
    metric: &ResistanceMetric,
) -> Result<NontangentialProfile> {
    let d = field.dimension();
    let mut out = NontangentialProfile {
        apex: cone.apex,
        t: Vec::new(),
        error: Vec::new(),
        slice_error: Vec::new(),
    };
    let mut running = 0.0_f64;
    for (i, &t) in field.t_grid().iter().enumerate() {
        let members = cone.members(metric, d, t);
        if members.is_empty() {
            continue;
        }
        let e = members
            .iter()
            .map(|&y| (field.value(i, y) - target).abs())
            .fold(0.0, f64::max);
        running = running.max(e);
        out.t.push(t);
        out.error.push(running);
        out.slice_error.push(e);
    }
    if out.t.is_empty() {
        return Err(Error::EmptyCone { apex: cone.apex });
    }
    Ok(out)
}

/// Cone-restricted convergence of P_t f towards f(x) along a ladder.
pub fn nontangential_error(
    ev: &KernelEvaluator,
    f: &[f64],
    cone: &Cone,
    t_ladder: &[f64],
    metric: &ResistanceMetric,
) -> Result<NontangentialProfile> {
    if ev.bc() == BoundaryCondition::Dirichlet && cone.apex < ev.basis().boundary_size() {
        return Err(Error::Precondition(format!(
            "apex {} lies in V_0 under Dirichlet conditions",
            cone.apex
        )));
    }
    let mut ladder = t_ladder.to_vec();
    ladder.sort_by(f64::total_cmp);
    ladder.dedup();
    let field = tube_sample(ev, &BoundaryData::Function(f.to_vec()), "f", &ladder)?;
    nontangential_error_field(&field, f[cone.apex], cone, metric)
}

/// Empirical C_alpha in P(t, y, z) <= C_alpha min{t^{-2d/(d+1)}, t / R(x, z)^{(3d+1)/2}}
/// over (t, y) in Gamma_alpha(x).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShiftedKernel {
    pub c_alpha: f64,
    /// (t, x, y, z)
    pub at: (f64, usize, usize, usize),
    pub samples: usize,
}

pub fn shifted_kernel_constant(
    ev: &KernelEvaluator,
    metric: &ResistanceMetric,
    alpha: f64,
    t_grid: &[f64],
    apexes: &[usize],
) -> Result<ShiftedKernel> {
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid("t_grid"));
    }
    let d = ev.basis().dimension();
    let mut out = ShiftedKernel {
        c_alpha: 0.0,
        at: (0.0, 0, 0, 0),
        samples: 0,
    };
    for &t in t_grid {
        let near = t.powf(-2.0 * d / (d + 1.0));
        for &x in apexes {
            let cone = Cone::new(x, alpha);
            for y in cone.members(metric, d, t) {
                let row = ev.kernel_row(KernelKind::Poisson, t, y)?;
                for (z, &p) in row.iter().enumerate() {
                    let far = t / metric.get(x, z).powf((3.0 * d + 1.0) / 2.0);
                    let c = p / near.min(far);
                    out.samples += 1;
                    if c > out.c_alpha {
                        out.c_alpha = c;
                        out.at = (t, x, y, z);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Pointwise check that {R < sqrt(alpha) t} n {R < 1} lies inside Gamma_alpha(x) when d > 1.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalCone {
    pub checked: usize,
    pub violations: Vec<(f64, usize)>,
}

pub fn classical_cone_check(
    metric: &ResistanceMetric,
    d: f64,
    cone: &Cone,
    t_grid: &[f64],
) -> Result<ClassicalCone> {
    if d <= 1.0 {
        return Err(Error::Precondition(format!(
            "classical cone containment needs d > 1, got {d}"
        )));
    }
    let mut out = ClassicalCone {
        checked: 0,
        violations: Vec::new(),
    };
    for &t in t_grid {
        for y in 0..metric.len() {
            let r = metric.get(cone.apex, y);
            if r < 1.0 && r < cone.alpha.sqrt() * t && t < cone.height {
                out.checked += 1;
                if !cone.contains(metric, d, t, y) {
                    out.violations.push((t, y));
                }
            }
        }
    }
    Ok(out)
}

/// Rows (t, y_id, in_cone, u).
pub fn export_cone_csv(field: &TubeField, cone: &Cone, metric: &ResistanceMetric, path: &Path) -> Result<()> {
    let d = field.dimension();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "y_id", "in_cone", "u"])?;
    for (i, &t) in field.t_grid().iter().enumerate() {
        for y in 0..field.num_vertices() {
            let inside = cone.contains(metric, d, t, y);
            w.write_record([
                t.to_string(),
                y.to_string(),
                u8::from(inside).to_string(),
                field.value(i, y).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
