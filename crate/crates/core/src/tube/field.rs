use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{BoundaryData, KernelEvaluator};
use crate::spectral::BoundaryCondition;

/// How a tube field was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    PoissonIntegral { bc: BoundaryCondition, data: String },
    Barrier,
    Custom { label: String },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::PoissonIntegral { bc, data } => write!(f, "{bc} Poisson integral of {data}"),
            Provenance::Barrier => f.write_str("barrier"),
            Provenance::Custom { label } => f.write_str(label),
        }
    }
}

/// Samples u(t, x) on a time ladder times V_m, stored slice by slice.
#[derive(Debug, Clone)]
pub struct TubeField {
    t_grid: Vec<f64>,
    values: Vec<f64>,
    n: usize,
    boundary_size: usize,
    dimension: f64,
    provenance: Provenance,
}

impl TubeField {
    pub fn new(
        t_grid: Vec<f64>,
        slices: Vec<Vec<f64>>,
        boundary_size: usize,
        dimension: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        if t_grid.is_empty() {
            return Err(Error::EmptyGrid("t_grid"));
        }
        if t_grid.len() != slices.len() {
            return Err(Error::Precondition(format!(
                "{} times but {} slices",
                t_grid.len(),
                slices.len()
            )));
        }
        if let Some(&t) = t_grid.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidTime(t));
        }
        if t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("t_grid must be strictly increasing".into()));
        }
        let n = slices[0].len();
        if slices.iter().any(|s| s.len() != n) {
            return Err(Error::Precondition("slices differ in length".into()));
        }
        let values: Vec<f64> = slices.into_iter().flatten().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("field has non-finite values".into()));
        }
        Ok(Self {
            t_grid,
            values,
            n,
            boundary_size,
            dimension,
            provenance,
        })
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }
    pub fn num_vertices(&self) -> usize {
        self.n
    }
    pub fn boundary_size(&self) -> usize {
        self.boundary_size
    }
    pub fn dimension(&self) -> f64 {
        self.dimension
    }
    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(
            self.provenance,
            Provenance::PoissonIntegral {
                bc: BoundaryCondition::Dirichlet,
                ..
            }
        )
    }

    /// u(t_i, .)
    pub fn slice(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn value(&self, i: usize, x: usize) -> f64 {
        self.values[i * self.n + x]
    }

    /// Index of `t` in the ladder, matched to a relative 1e-12.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.t_grid
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * t.abs().max(s.abs()))
    }

    /// max |u| over the V_0 columns.
    pub fn boundary_defect(&self) -> f64 {
        (0..self.t_grid.len())
            .flat_map(|i| self.slice(i)[..self.boundary_size].iter())
            .fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Rows (t, x_id, value).
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "x_id", "value"])?;
        for (i, t) in self.t_grid.iter().enumerate() {
            for (x, v) in self.slice(i).iter().enumerate() {
                w.write_record([t.to_string(), x.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `n` geometrically spaced times from `t_min` to `t_max` inclusive.
pub fn geometric_ladder(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0) {
        return Err(Error::InvalidTime(t_min));
    }
    if !(t_max >= t_min) {
        return Err(Error::InvalidTime(t_max));
    }
    match n {
        0 => Err(Error::EmptyGrid("t_grid")),
        1 => Ok(vec![t_min]),
        _ => {
            let q = (t_max / t_min).ln() / (n - 1) as f64;
            let mut out: Vec<f64> = (0..n).map(|i| t_min * (q * i as f64).exp()).collect();
            out[n - 1] = t_max;
            Ok(out)
        }
    }
}

/// u(t, x) = P_t f(x) on the ladder.
pub fn tube_sample(ev: &KernelEvaluator, data: &BoundaryData, label: &str, t_grid: &[f64]) -> Result<TubeField> {
    let t_min = ev.resolution_time();
    if let Some(&t) = t_grid.iter().find(|&&t| t < t_min) {
        return Err(Error::Unresolvable { t, t_min });
    }
    let coeffs = ev.coefficients(data);
    let slices = t_grid
        .iter()
        .map(|&t| ev.poisson_from_coefficients(&coeffs, t))
        .collect::<Result<Vec<_>>>()?;
    TubeField::new(
        t_grid.to_vec(),
        slices,
        ev.basis().boundary_size(),
        ev.basis().dimension(),
        Provenance::PoissonIntegral {
            bc: ev.bc(),
            data: label.to_string(),
        },
    )
}
