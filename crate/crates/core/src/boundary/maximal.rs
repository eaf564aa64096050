use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pcf::ResistanceMetric;

/// Radii closer than this (relative) are the same sphere.
const TIE_TOL: f64 = 1e-12;

/// Ball averages over every achievable resistance ball.
///
/// For each centre the vertices are sorted by R(x, .); the open balls
/// B_eps(x) are exactly the prefixes ending at a change of radius, plus K.
#[derive(Debug, Clone)]
pub struct MaximalOperator {
    n: usize,
    order: Vec<u32>,
    /// Prefix lengths of the distinct balls at each centre.
    ends: Vec<Vec<u32>>,
    mass: Vec<f64>,
}

impl MaximalOperator {
    pub fn new(metric: &ResistanceMetric, mass: &[f64]) -> Self {
        let n = metric.len();
        let mut order = Vec::with_capacity(n * n);
        let mut ends = Vec::with_capacity(n);
        for x in 0..n {
            let sorted = metric.sorted_from(x);
            let row = metric.row(x);
            let mut e = Vec::new();
            for i in 1..=n {
                let last = i == n;
                if last || row[sorted[i]] - row[sorted[i - 1]] > TIE_TOL * row[sorted[i]].max(1.0) {
                    e.push(i as u32);
                }
            }
            order.extend(sorted.iter().map(|&v| v as u32));
            ends.push(e);
        }
        Self {
            n,
            order,
            ends,
            mass: mass.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    fn sup_average(&self, x: usize, numer: &[f64]) -> f64 {
        let order = &self.order[x * self.n..(x + 1) * self.n];
        let (mut top, mut bottom, mut best) = (0.0, 0.0, 0.0_f64);
        let mut i = 0;
        for &end in &self.ends[x] {
            while i < end as usize {
                let v = order[i] as usize;
                top += numer[v];
                bottom += self.mass[v];
                i += 1;
            }
            best = best.max(top / bottom);
        }
        best
    }

    /// Mf(x) = sup_eps (1/mu(B_eps(x))) int_{B_eps(x)} |f| dmu.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let numer: Vec<f64> = f.iter().zip(&self.mass).map(|(v, m)| v.abs() * m).collect();
        (0..self.n).map(|x| self.sup_average(x, &numer)).collect()
    }

    /// M nu for a finite atomic measure.
    pub fn apply_measure(&self, atoms: &[(usize, f64)]) -> Vec<f64> {
        let mut numer = vec![0.0; self.n];
        for &(y, w) in atoms {
            numer[y] += w.abs();
        }
        (0..self.n).map(|x| self.sup_average(x, &numer)).collect()
    }
}

pub fn maximal_function(metric: &ResistanceMetric, mass: &[f64], f: &[f64]) -> Vec<f64> {
    MaximalOperator::new(metric, mass).apply(f)
}

pub fn maximal_measure(metric: &ResistanceMetric, mass: &[f64], atoms: &[(usize, f64)]) -> Vec<f64> {
    MaximalOperator::new(metric, mass).apply_measure(atoms)
}

/// Empirical weak-(1,1) constant sup_alpha alpha mu{Mf > alpha} / ||f||_1.
#[derive(Debug, Clone, Serialize)]
pub struct Weak11 {
    pub constant: f64,
    pub at_alpha: f64,
    pub ratios: Vec<(f64, f64)>,
}

/// Without a grid, alpha runs just below every value taken by Mf, where the
/// level-set measure jumps.
pub fn weak11_check(op: &MaximalOperator, f: &[f64], alpha_grid: Option<&[f64]>) -> Result<Weak11> {
    let l1: f64 = f.iter().zip(op.mass()).map(|(v, m)| v.abs() * m).sum();
    if l1 == 0.0 {
        return Err(Error::Precondition("weak-(1,1) check needs f != 0".into()));
    }
    let mf = op.apply(f);
    let alphas: Vec<f64> = match alpha_grid {
        Some([]) => return Err(Error::EmptyGrid("alpha_grid")),
        Some(grid) => grid.to_vec(),
        None => {
            let mut a: Vec<f64> = mf.iter().filter(|v| **v > 0.0).map(|v| v * (1.0 - 1e-12)).collect();
            a.sort_by(f64::total_cmp);
            a.dedup();
            a
        }
    };
    let mut out = Weak11 {
        constant: 0.0,
        at_alpha: alphas.first().copied().unwrap_or(0.0),
        ratios: Vec::with_capacity(alphas.len()),
    };
    for &alpha in &alphas {
        let level: f64 = mf.iter().zip(op.mass()).filter(|(v, _)| **v > alpha).map(|(_, m)| m).sum();
        let ratio = alpha * level / l1;
        out.ratios.push((alpha, ratio));
        if ratio > out.constant {
            out.constant = ratio;
            out.at_alpha = alpha;
        }
    }
    Ok(out)
}

/// ||Mf||_2 / ||f||_2.
pub fn maximal_l2_ratio(op: &MaximalOperator, f: &[f64]) -> Result<f64> {
    let norm = |g: &[f64]| g.iter().zip(op.mass()).map(|(v, m)| m * v * v).sum::<f64>().sqrt();
    let base = norm(f);
    if base == 0.0 {
        return Err(Error::Precondition("L^2 ratio needs f != 0".into()));
    }
    Ok(norm(&op.apply(f)) / base)
}

/// Rows (x_id, Mf).
pub fn export_maximal_csv(mf: &[f64], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x_id", "Mf"])?;
    for (x, v) in mf.iter().enumerate() {
        w.write_record([x.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
