use serde::Serialize;

use super::{BoundaryCondition, EigenBasis, CLUSTER_GAP};
use crate::error::{Error, Result};

/// Fraction of the discrete spectrum used for asymptotic fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for SpectralWindow {
    fn default() -> Self {
        Self { lo: 0.05, hi: 0.25 }
    }
}

/// Fewest eigenvalues a fit may use.
pub const MIN_WINDOW_POINTS: usize = 10;

impl SpectralWindow {
    /// 1-based indices n with lo <= n/len <= hi, excluding the Neumann zero mode.
    pub fn indices(&self, basis: &EigenBasis) -> std::ops::RangeInclusive<usize> {
        let len = basis.len() as f64;
        let mut first = ((self.lo * len).ceil() as usize).max(1);
        if basis.bc() == BoundaryCondition::Neumann {
            first = first.max(2);
        }
        let last = ((self.hi * len).floor() as usize).min(basis.len());
        first..=last
    }
}

/// rho(x): eigenvalues <= x, multiplicity counted.
pub fn counting_function(basis: &EigenBasis, x: f64) -> usize {
    basis.values().partition_point(|&v| v <= x)
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    /// Root-mean-square residual of the log-log fit.
    pub rms_residual: f64,
    pub max_residual: f64,
}

/// Least-squares slope of log rho(lambda_n) against log lambda_n over the window.
pub fn weyl_exponent(basis: &EigenBasis, window: SpectralWindow) -> Result<WeylFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = window
        .indices(basis)
        .map(|n| {
            let lambda = basis.value(n - 1);
            // Count the whole cluster of lambda_n, not just its computed prefix.
            let rho = counting_function(basis, lambda * (1.0 + CLUSTER_GAP));
            (lambda.ln(), (rho as f64).ln())
        })
        .unzip();
    if xs.len() < MIN_WINDOW_POINTS {
        return Err(Error::WindowTooSmall {
            points: xs.len(),
            required: MIN_WINDOW_POINTS,
        });
    }
    let (slope, intercept) = least_squares(&xs, &ys);
    let residuals: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (slope * x + intercept))
        .collect();
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    let max = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok(WeylFit {
        slope,
        intercept,
        points: xs.len(),
        rms_residual: rms,
        max_residual: max,
    })
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// c_1 n^{(d+1)/d} <= lambda_n <= c_2 n^{(d+1)/d} over the window.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthConstants {
    pub c1: f64,
    pub c1_at: usize,
    pub c2: f64,
    pub c2_at: usize,
}

pub fn eigen_growth_constants(basis: &EigenBasis, window: SpectralWindow) -> Result<GrowthConstants> {
    let d = basis.dimension();
    let exponent = (d + 1.0) / d;
    let mut out = GrowthConstants {
        c1: f64::INFINITY,
        c1_at: 0,
        c2: 0.0,
        c2_at: 0,
    };
    for n in window.indices(basis) {
        let c = basis.value(n - 1) / (n as f64).powf(exponent);
        if c < out.c1 {
            out.c1 = c;
            out.c1_at = n;
        }
        if c > out.c2 {
            out.c2 = c;
            out.c2_at = n;
        }
    }
    if out.c1_at == 0 {
        return Err(Error::WindowTooSmall {
            points: 0,
            required: 1,
        });
    }
    Ok(out)
}

/// Empirical C in ||phi_n||_inf <= C lambda_n^{d/(2(d+1))}.
#[derive(Debug, Clone, Serialize)]
pub struct SupnormRatio {
    pub c: f64,
    /// 1-based index of the attaining mode.
    pub at: usize,
}

/// Maximum of ||phi_n||_inf / lambda_n^{d/(2(d+1))} from the first nonzero
/// mode up to the fraction `upto` of the spectrum.
pub fn supnorm_ratio(basis: &EigenBasis, upto: f64) -> SupnormRatio {
    let d = basis.dimension();
    let exponent = d / (2.0 * (d + 1.0));
    let last = ((upto * basis.len() as f64).floor() as usize).clamp(1, basis.len());
    let mut best = SupnormRatio { c: 0.0, at: 0 };
    for n in 1..=last {
        let lambda = basis.value(n - 1);
        if lambda <= 0.0 {
            continue;
        }
        let sup = basis.mode(n - 1).iter().map(|v| v.abs()).fold(0.0, f64::max);
        let ratio = sup / lambda.powf(exponent);
        if ratio > best.c {
            best = SupnormRatio { c: ratio, at: n };
        }
    }
    best
}
