use serde::Serialize;

use super::cone::{nontangential_error_field, Cone, NontangentialProfile};
use crate::error::{Error, Result};
use crate::kernels::{cell_indicator, BoundaryData, KernelEvaluator, KernelKind};
use crate::pcf::{ResistanceMetric, ScalingConstants, SelfSimilarStructure, VertexGraph, Word};
use crate::spectral::{least_squares, BoundaryCondition};
use crate::tube::{Provenance, TubeField};

/// Indicator values within this of 1 count as fully inside.
const INSIDE_TOL: f64 = 1e-12;

/// A union of cells E with its lumped indicator.
#[derive(Debug, Clone)]
pub struct BoundarySet {
    words: Vec<Word>,
    indicator: Vec<f64>,
    measure: f64,
}

impl BoundarySet {
    pub fn new(g: &VertexGraph, words: Vec<Word>) -> Result<Self> {
        for (i, a) in words.iter().enumerate() {
            if a.len() > g.level() || a.0.iter().any(|&s| s >= g.symbols()) {
                return Err(Error::Config(format!("cell {a} does not exist at level {}", g.level())));
            }
            if let Some(b) = words.iter().skip(i + 1).find(|b| a.starts_with(b) || b.starts_with(a)) {
                return Err(Error::Config(format!("cells {a} and {b} overlap")));
            }
        }
        let measure = words
            .iter()
            .map(|w| g.cells_under(w).map(|c| g.cell_measures()[c]).sum::<f64>())
            .sum();
        let indicator = cell_indicator(g, &words);
        Ok(Self {
            words,
            indicator,
            measure,
        })
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn indicator(&self) -> &[f64] {
        &self.indicator
    }

    /// mu(E)
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// Vertices of the closed set E.
    pub fn closure(&self) -> Vec<usize> {
        (0..self.indicator.len()).filter(|&v| self.indicator[v] > 0.0).collect()
    }

    /// Every cell at vertex v belongs to E: the density-point proxy.
    pub fn is_interior(&self, v: usize) -> bool {
        self.indicator[v] >= 1.0 - INSIDE_TOL
    }
}

/// min over the given vertices of R(x, y), for every y.
fn distance_to(metric: &ResistanceMetric, set: &[usize]) -> Vec<f64> {
    (0..metric.len())
        .map(|y| set.iter().map(|&x| metric.get(x, y)).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Neumann kernels on an affine nested structure.
#[derive(Debug, Clone, Copy)]
pub struct NestedSetting<'a> {
    ev: &'a KernelEvaluator<'a>,
    metric: &'a ResistanceMetric,
}

/// c_alpha over a range of apertures and how well c_alpha / alpha^{1/2} is constant.
#[derive(Debug, Clone, Serialize)]
pub struct CAlphaFit {
    pub alphas: Vec<f64>,
    pub c_alpha: Vec<f64>,
    /// c_alpha / sqrt(alpha)
    pub normalised: Vec<f64>,
    /// max / min of `normalised`.
    pub spread: f64,
    /// log-log slope of c_alpha against alpha.
    pub slope: f64,
}

/// Lemma-type barrier w(t, x) = int P^N(t, x, y) chi_{K \ E}(y) dmu(y) + t.
#[derive(Debug, Clone, Serialize)]
pub struct Barrier {
    #[serde(skip)]
    pub field: TubeField,
    pub alpha: f64,
    pub min_boundary_value: f64,
    /// The same minimum without the +t term.
    pub min_boundary_integral: f64,
    pub min_at: (f64, usize),
    pub shell_samples: usize,
    pub cap_samples: usize,
    pub decay_ladder: Option<NontangentialProfile>,
}

impl Barrier {
    /// max{1 / min_boundary_value, 1}: v = scale * w is at least 1 on the sampled boundary.
    pub fn scale(&self) -> f64 {
        (1.0 / self.min_boundary_value).max(1.0)
    }
}

/// Relative half-width of the sampled boundary shells.
pub const SHELL_WIDTH: f64 = 0.05;

/// min over sampled Omega of 2v - |u_n|.
#[derive(Debug, Clone, Serialize)]
pub struct BarrierComparison {
    pub n: usize,
    pub min_margin: f64,
    pub at: (f64, usize),
    pub samples: usize,
}

impl BarrierComparison {
    pub fn holds(&self) -> bool {
        self.samples > 0 && self.min_margin >= -1e-9
    }
}

impl<'a> NestedSetting<'a> {
    pub fn new(
        s: &SelfSimilarStructure,
        ev: &'a KernelEvaluator<'a>,
        metric: &'a ResistanceMetric,
    ) -> Result<Self> {
        if !s.is_affine_nested() {
            return Err(Error::Precondition(format!("{} is not affine nested", s.name())));
        }
        if ev.bc() != BoundaryCondition::Neumann {
            return Err(Error::Precondition("lower bounds need the Neumann kernel".into()));
        }
        Ok(Self { ev, metric })
    }

    fn d(&self) -> f64 {
        self.ev.basis().dimension()
    }

    /// int_B P^N(t, x, y) dmu(y) over B = B_{(alpha t^2)^{1/(d+1)}}(x).
    pub fn ball_mass_lower(&self, t: f64, x: usize, alpha: f64) -> Result<f64> {
        let radius = (alpha * t * t).powf(1.0 / (self.d() + 1.0));
        let resolution = self.metric.resolution(x);
        if radius <= resolution {
            return Err(Error::BelowResolution {
                vertex: x,
                radius,
                resolution,
            });
        }
        let mass = self.ev.basis().mass();
        let ball = self.metric.ball(x, radius, mass);
        let row = self.ev.kernel_row(KernelKind::Poisson, t, x)?;
        Ok(ball.vertices.iter().map(|&y| mass[y] * row[y]).sum())
    }

    /// min over apexes and the ladder of the ball mass.
    pub fn c_alpha(&self, xs: &[usize], t_ladder: &[f64], alpha: f64) -> Result<f64> {
        if xs.is_empty() || t_ladder.is_empty() {
            return Err(Error::EmptyGrid("c_alpha samples"));
        }
        let mut c = f64::INFINITY;
        for &t in t_ladder {
            for &x in xs {
                c = c.min(self.ball_mass_lower(t, x, alpha)?);
            }
        }
        Ok(c)
    }

    pub fn fit_c_alpha(&self, xs: &[usize], t_ladder: &[f64], alphas: &[f64]) -> Result<CAlphaFit> {
        if alphas.len() < 2 {
            return Err(Error::GridTooShort {
                points: alphas.len(),
                required: 2,
            });
        }
        let c_alpha = alphas
            .iter()
            .map(|&a| self.c_alpha(xs, t_ladder, a))
            .collect::<Result<Vec<_>>>()?;
        let normalised: Vec<f64> = c_alpha.iter().zip(alphas).map(|(c, a)| c / a.sqrt()).collect();
        let hi = normalised.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = normalised.iter().copied().fold(f64::INFINITY, f64::min);
        let lx: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
        let ly: Vec<f64> = c_alpha.iter().map(|c| c.ln()).collect();
        Ok(CAlphaFit {
            alphas: alphas.to_vec(),
            c_alpha,
            normalised,
            spread: hi / lo,
            slope: least_squares(&lx, &ly).0,
        })
    }

    /// Builds w on the ladder (1 is appended when missing), samples the lateral
    /// boundary of Omega = U_{x in E} Gamma_alpha^1(x) on the shells
    /// R^{d+1}/t^2 in [alpha(1 - eta), alpha(1 + eta)] plus the cap t = 1, and
    /// records the cone decay of w at the interior vertex of E off V_0 that is
    /// farthest from K \ E.
    pub fn barrier(&self, e: &BoundarySet, alpha: f64, t_grid: &[f64]) -> Result<Barrier> {
        if e.measure() >= 1.0 - INSIDE_TOL {
            return Err(Error::Precondition("barrier needs mu(E) < 1".into()));
        }
        let mut grid: Vec<f64> = t_grid.iter().copied().filter(|&t| t > 0.0 && t <= 1.0).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        if grid.last() != Some(&1.0) {
            grid.push(1.0);
        }
        let outside: Vec<f64> = e.indicator().iter().map(|c| 1.0 - c).collect();
        let coeffs = self.ev.coefficients(&BoundaryData::Function(outside));
        let slices = grid
            .iter()
            .map(|&t| {
                let mut u = self.ev.poisson_from_coefficients(&coeffs, t)?;
                u.iter_mut().for_each(|v| *v += t);
                Ok(u)
            })
            .collect::<Result<Vec<_>>>()?;
        let basis = self.ev.basis();
        let field = TubeField::new(grid.clone(), slices, basis.boundary_size(), basis.dimension(), Provenance::Barrier)?;

        let d = self.d();
        let closure = e.closure();
        let dist = distance_to(self.metric, &closure);
        let (lo, hi) = (alpha * (1.0 - SHELL_WIDTH), alpha * (1.0 + SHELL_WIDTH));
        let mut out = Barrier {
            field,
            alpha,
            min_boundary_value: f64::INFINITY,
            min_boundary_integral: f64::INFINITY,
            min_at: (1.0, 0),
            shell_samples: 0,
            cap_samples: 0,
            decay_ladder: None,
        };
        for (i, &t) in grid.iter().enumerate() {
            for y in 0..basis.num_vertices() {
                let cap = t == 1.0;
                let q = dist[y].powf(d + 1.0) / (t * t);
                if !(cap || (lo..=hi).contains(&q)) {
                    continue;
                }
                if cap {
                    out.cap_samples += 1;
                } else {
                    out.shell_samples += 1;
                }
                let w = out.field.value(i, y);
                if w < out.min_boundary_value {
                    out.min_boundary_value = w;
                    out.min_at = (t, y);
                }
                out.min_boundary_integral = out.min_boundary_integral.min(w - t);
            }
        }
        let complement: Vec<usize> = (0..basis.num_vertices()).filter(|&v| !e.is_interior(v)).collect();
        let depth = distance_to(self.metric, &complement);
        let deepest = (basis.boundary_size()..basis.num_vertices())
            .filter(|&v| e.is_interior(v))
            .max_by(|&a, &b| depth[a].total_cmp(&depth[b]));
        if let Some(x) = deepest {
            let below_cap = TubeField::new(
                grid[..grid.len() - 1].to_vec(),
                (0..grid.len() - 1).map(|i| out.field.slice(i).to_vec()).collect(),
                basis.boundary_size(),
                d,
                Provenance::Barrier,
            );
            if let Ok(f) = below_cap {
                out.decay_ladder = Some(nontangential_error_field(&f, 0.0, &Cone::new(x, alpha), self.metric)?);
            }
        }
        Ok(out)
    }

    /// Step-2 comparison: with u = P^N g (|g| <= 1), G_n the set within
    /// (alpha/n^2)^{1/(d+1)} of E, f_n = chi_{G_n} u(1/n, .) and
    /// u_n(t) = P_t f_n - u(t + 1/n), checks 2 v +- u_n >= 0 on sampled Omega
    /// with v = scale * w.
    pub fn barrier_comparison(&self, barrier: &Barrier, e: &BoundarySet, g: &[f64], n: usize) -> Result<BarrierComparison> {
        if g.iter().any(|v| v.abs() > 1.0) {
            return Err(Error::Precondition("comparison data must satisfy |g| <= 1".into()));
        }
        if n == 0 {
            return Err(Error::Precondition("n must be positive".into()));
        }
        let d = self.d();
        let alpha = barrier.alpha;
        let inv_n = 1.0 / n as f64;
        let dist = distance_to(self.metric, &e.closure());
        let g_coeffs = self.ev.coefficients(&BoundaryData::Function(g.to_vec()));
        let u_start = self.ev.poisson_from_coefficients(&g_coeffs, inv_n)?;
        let f_n: Vec<f64> = u_start
            .iter()
            .zip(&dist)
            .map(|(u, r)| if r.powf(d + 1.0) < alpha * inv_n * inv_n { *u } else { 0.0 })
            .collect();
        let f_coeffs = self.ev.coefficients(&BoundaryData::Function(f_n));
        let scale = barrier.scale();
        let mut out = BarrierComparison {
            n,
            min_margin: f64::INFINITY,
            at: (0.0, 0),
            samples: 0,
        };
        let field = &barrier.field;
        for (i, &t) in field.t_grid().iter().enumerate() {
            if t >= 1.0 {
                continue;
            }
            let pf = self.ev.poisson_from_coefficients(&f_coeffs, t)?;
            let shifted = self.ev.poisson_from_coefficients(&g_coeffs, t + inv_n)?;
            for y in 0..field.num_vertices() {
                if dist[y].powf(d + 1.0) >= alpha * t * t {
                    continue;
                }
                out.samples += 1;
                let margin = 2.0 * scale * field.value(i, y) - (pf[y] - shifted[y]).abs();
                if margin < out.min_margin {
                    out.min_margin = margin;
                    out.at = (t, y);
                }
            }
        }
        Ok(out)
    }
}

/// How the truncation height of the covering check is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CoverHeight {
    /// h = (delta / (2 alpha^{1/(d+1)}))^{(d+1)/2} with delta from the density estimate.
    Recipe,
    Fixed(f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    pub apex: usize,
    pub h: f64,
    pub delta: Option<f64>,
    /// 1 - (A1/A2) (k^{-1/(d+1)} / (alpha^{1/(d+1)} + k^{-1/(d+1)}))^d
    pub threshold: f64,
    pub samples: usize,
    pub uncovered: Vec<(f64, usize)>,
}

impl CoverReport {
    pub fn covered(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Checks Gamma_alpha^h(x) inside U_{z in E_k} Gamma_{1/k}^1(z) on sampled points.
#[allow(clippy::too_many_arguments)]
pub fn cone_cover_check(
    metric: &ResistanceMetric,
    mass: &[f64],
    d: f64,
    e_k: &BoundarySet,
    x: usize,
    alpha: f64,
    k: usize,
    scaling: &ScalingConstants,
    height: CoverHeight,
    t_ladder: &[f64],
) -> Result<CoverReport> {
    if k == 0 || !(alpha > 0.0) {
        return Err(Error::Precondition("cover check needs k >= 1 and alpha > 0".into()));
    }
    let kd = (k as f64).powf(-1.0 / (d + 1.0));
    let ad = alpha.powf(1.0 / (d + 1.0));
    let threshold = 1.0 - scaling.a1 / scaling.a2 * (kd / (ad + kd)).powf(d);
    let (h, delta) = match height {
        CoverHeight::Fixed(h) => (h, None),
        CoverHeight::Recipe => {
            if !e_k.is_interior(x) {
                return Err(Error::NoDensityPoint(format!("vertex {x} touches a cell outside E_k")));
            }
            let cap = metric.diameter().min(kd);
            let row = metric.row(x);
            let mut delta = cap;
            let (mut inside, mut total) = (0.0, 0.0);
            let order = metric.sorted_from(x);
            let mut i = 0;
            while i < order.len() {
                let r = row[order[i]];
                if r >= cap {
                    break;
                }
                // Balls with radius just above r contain the whole sphere at r.
                let mut j = i;
                while j < order.len() && row[order[j]] - r <= 1e-12 * r.max(1.0) {
                    inside += mass[order[j]] * e_k.indicator()[order[j]];
                    total += mass[order[j]];
                    j += 1;
                }
                if inside / total <= threshold {
                    delta = r;
                    break;
                }
                i = j;
            }
            if !(delta > 0.0) {
                return Err(Error::NoDensityPoint(format!("no admissible radius at vertex {x}")));
            }
            ((delta / (2.0 * ad)).powf((d + 1.0) / 2.0), Some(delta))
        }
    };
    let mut times: Vec<f64> = t_ladder.iter().copied().filter(|&t| t > 0.0 && t < h).collect();
    if times.is_empty() {
        times = (1..=12).map(|j| h * 0.5f64.powf(j as f64 / 2.0)).collect();
    }
    let closure = e_k.closure();
    let cone = Cone::truncated(x, alpha, h);
    let mut out = CoverReport {
        apex: x,
        h,
        delta,
        threshold,
        samples: 0,
        uncovered: Vec::new(),
    };
    for &t in &times {
        for y in cone.members(metric, d, t) {
            out.samples += 1;
            let hit = t < 1.0
                && closure
                    .iter()
                    .any(|&z| metric.get(z, y).powf(d + 1.0) < t * t / k as f64);
            if !hit {
                out.uncovered.push((t, y));
            }
        }
    }
    Ok(out)
}
