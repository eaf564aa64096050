use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::TubeField;
use crate::error::{Error, Result};
use crate::kernels::{BoundaryData, KernelEvaluator};
use crate::spectral::{least_squares, BoundaryCondition, EnergyForm};

/// Largest |u_tt + Delta u| over interior times and vertices off V_0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HarmonicResidual {
    pub max: f64,
    pub at: (f64, usize),
}

/// u_tt by three-point divided differences on the (non-uniform) ladder and
/// Delta u = -M^{-1} E u.
pub fn harmonic_residual(field: &TubeField, e: &EnergyForm, mass: &[f64]) -> Result<HarmonicResidual> {
    let t = field.t_grid();
    if t.len() < 3 {
        return Err(Error::GridTooShort {
            points: t.len(),
            required: 3,
        });
    }
    let nb = field.boundary_size();
    let mut out = HarmonicResidual {
        max: 0.0,
        at: (t[1], nb),
    };
    for i in 1..t.len() - 1 {
        let (hm, hp) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        let (um, u0, up) = (field.slice(i - 1), field.slice(i), field.slice(i + 1));
        let eu = e.apply(u0);
        for x in nb..field.num_vertices() {
            let utt = 2.0 * ((up[x] - u0[x]) / hp - (u0[x] - um[x]) / hm) / (hm + hp);
            let r = (utt - eu[x] / mass[x]).abs();
            if r > out.max {
                out.max = r;
                out.at = (t[i], x);
            }
        }
    }
    Ok(out)
}

/// A point of the sampled tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubePoint {
    pub t: f64,
    pub x: usize,
    pub value: f64,
}

/// Slab extrema against the extrema on the parabolic boundary
/// {t = a} u {t = b} u (V_0 columns).
#[derive(Debug, Clone, Serialize)]
pub struct MaxPrinciple {
    pub max: TubePoint,
    pub min: TubePoint,
    pub boundary_max: f64,
    pub boundary_min: f64,
    pub slack: f64,
    pub violations: Vec<TubePoint>,
}

impl MaxPrinciple {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const MAX_PRINCIPLE_SLACK: f64 = 1e-9;

pub fn max_principle_check(field: &TubeField, a: f64, b: f64) -> Result<MaxPrinciple> {
    if matches!(field.provenance(), super::Provenance::Custom { .. }) {
        return Err(Error::Precondition("maximum principle needs a harmonic field".into()));
    }
    let ia = field
        .time_index(a)
        .ok_or_else(|| Error::Precondition(format!("a = {a} is not on the ladder")))?;
    let ib = field
        .time_index(b)
        .ok_or_else(|| Error::Precondition(format!("b = {b} is not on the ladder")))?;
    if ia >= ib {
        return Err(Error::Precondition(format!("empty slab [{a}, {b}]")));
    }
    let t = field.t_grid();
    let nb = field.boundary_size();
    let point = |i: usize, x: usize| TubePoint {
        t: t[i],
        x,
        value: field.value(i, x),
    };
    let mut max = point(ia, 0);
    let mut min = max;
    let (mut bmax, mut bmin) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in ia..=ib {
        for x in 0..field.num_vertices() {
            let p = point(i, x);
            if p.value > max.value {
                max = p;
            }
            if p.value < min.value {
                min = p;
            }
            if i == ia || i == ib || x < nb {
                bmax = bmax.max(p.value);
                bmin = bmin.min(p.value);
            }
        }
    }
    let slack = MAX_PRINCIPLE_SLACK * (max.value - min.value);
    let mut violations = Vec::new();
    for i in ia + 1..ib {
        for x in nb..field.num_vertices() {
            let p = point(i, x);
            if p.value > bmax + slack || p.value < bmin - slack {
                violations.push(p);
            }
        }
    }
    Ok(MaxPrinciple {
        max,
        min,
        boundary_max: bmax,
        boundary_min: bmin,
        slack,
        violations,
    })
}

/// Interior samples below -slack for fields whose boundary data on the slab is
/// nonnegative. Returns `None` when the boundary data itself is negative.
pub fn positivity_violations(field: &TubeField, a: f64, b: f64) -> Result<Option<Vec<TubePoint>>> {
    let check = max_principle_check(field, a, b)?;
    if check.boundary_min < 0.0 {
        return Ok(None);
    }
    Ok(Some(
        check
            .violations
            .into_iter()
            .filter(|p| p.value < -MAX_PRINCIPLE_SLACK)
            .collect(),
    ))
}

/// ||u(t + s, .) - P^D_t [u(s, .)]||_inf for a Dirichlet field.
pub fn fatou_consistency(ev: &KernelEvaluator, field: &TubeField, s: f64, t: f64) -> Result<f64> {
    if !field.is_dirichlet() || ev.bc() != BoundaryCondition::Dirichlet {
        return Err(Error::Precondition(
            "Fatou consistency needs a Dirichlet field and a Dirichlet evaluator".into(),
        ));
    }
    let lookup = |time: f64| {
        field
            .time_index(time)
            .ok_or_else(|| Error::Precondition(format!("t = {time} is not on the ladder")))
    };
    let is = lookup(s)?;
    let ist = lookup(t + s)?;
    let rebuilt = ev.poisson_integral(&BoundaryData::Function(field.slice(is).to_vec()), t)?;
    Ok(rebuilt
        .iter()
        .zip(field.slice(ist))
        .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpExponent {
    One,
    Two,
    Infinity,
}

impl LpExponent {
    pub fn from_f64(p: f64) -> Result<Self> {
        match p {
            1.0 => Ok(LpExponent::One),
            2.0 => Ok(LpExponent::Two),
            f64::INFINITY => Ok(LpExponent::Infinity),
            _ => Err(Error::InvalidExponent(p)),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            LpExponent::One => 1.0,
            LpExponent::Two => 2.0,
            LpExponent::Infinity => f64::INFINITY,
        }
    }

    /// Mass-weighted norm.
    pub fn norm(self, f: &[f64], mass: &[f64]) -> f64 {
        match self {
            LpExponent::One => f.iter().zip(mass).map(|(v, m)| m * v.abs()).sum(),
            LpExponent::Two => f.iter().zip(mass).map(|(v, m)| m * v * v).sum::<f64>().sqrt(),
            LpExponent::Infinity => f.iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }
}

impl FromStr for LpExponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinity" => Ok(LpExponent::Infinity),
            _ => s
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad exponent {s:?}")))
                .and_then(LpExponent::from_f64),
        }
    }
}

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpExponent::Infinity => f.write_str("inf"),
            p => write!(f, "{}", p.value()),
        }
    }
}

/// ||u(t, .)||_p along the ladder together with the pointwise sup profile.
#[derive(Debug, Clone, Serialize)]
pub struct LpProfile {
    pub p: LpExponent,
    pub t: Vec<f64>,
    pub norms: Vec<f64>,
    pub sup: f64,
    pub pointwise_max: Vec<f64>,
    /// Least-squares slope of log max|u(t, .)| against log t.
    pub fit_exponent: Option<f64>,
    /// -2d / ((d + 1) p)
    pub envelope_exponent: f64,
}

pub fn lp_profile(field: &TubeField, mass: &[f64], p: LpExponent) -> LpProfile {
    let t = field.t_grid().to_vec();
    let norms: Vec<f64> = (0..t.len()).map(|i| p.norm(field.slice(i), mass)).collect();
    let pointwise_max: Vec<f64> = (0..t.len())
        .map(|i| LpExponent::Infinity.norm(field.slice(i), mass))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(&pointwise_max)
        .filter(|(_, m)| **m > 0.0)
        .map(|(t, m)| (t.ln(), m.ln()))
        .unzip();
    let fit_exponent = (xs.len() >= 2).then(|| least_squares(&xs, &ys).0);
    let d = field.dimension();
    LpProfile {
        p,
        sup: norms.iter().copied().fold(0.0, f64::max),
        t,
        norms,
        pointwise_max,
        fit_exponent,
        envelope_exponent: -2.0 * d / ((d + 1.0) * p.value()),
    }
}

/// The JSON diagnostics bundle for one field.
#[derive(Debug, Clone, Serialize)]
pub struct TubeDiagnostics {
    pub provenance: String,
    pub max_residual: Option<HarmonicResidual>,
    pub extrema_locations: Option<MaxPrinciple>,
    pub defects: Vec<FatouDefect>,
    pub norm_profiles: Vec<LpProfile>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FatouDefect {
    pub s: f64,
    pub t: f64,
    pub defect: f64,
}
