use crate::error::{Error, Result};

/// Initial uniform panels before adaptive refinement.
pub const INITIAL_PANELS: usize = 16;
const MAX_DEPTH: usize = 40;

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let h = (b - a) / INITIAL_PANELS as f64;
    let mut total = 0.0;
    let mut worst = 0.0_f64;
    let mut ok = true;
    for k in 0..INITIAL_PANELS {
        let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        let mut est = 0.0;
        ok &= refine(&f, lo, hi, flo, fmid, fhi, whole, tol / INITIAL_PANELS as f64, MAX_DEPTH, &mut est, &mut worst);
        total += est;
    }
    if ok {
        Ok(total)
    } else {
        Err(Error::QuadratureNonConvergence {
            tol,
            estimate: worst,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    out: &mut f64,
    worst: &mut f64,
) -> bool {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        *out += left + right + delta / 15.0;
        return true;
    }
    if depth == 0 {
        *worst = worst.max(delta.abs() / 15.0);
        *out += left + right + delta / 15.0;
        return false;
    }
    let l = refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out, worst);
    let r = refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out, worst);
    l && r
}

/// (t / (2 sqrt(pi))) int_0^inf e^{-t^2/4s} g(s) s^{-3/2} ds for bounded g.
///
/// With s = t^2/(4 v^2) the integral becomes (2/sqrt(pi)) int_0^inf e^{-v^2} g(t^2/(4v^2)) dv,
/// whose integrand is smooth and Gaussian-decaying. `g_inf` is the limit of g at
/// infinity (the v = 0 endpoint) and `g_bound` bounds |g|, which fixes the cutoff V
/// so that the discarded Gaussian tail stays below tol/10.
pub fn subordinate<G: Fn(f64) -> f64>(g: G, t: f64, g_inf: f64, g_bound: f64, tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidTime(t));
    }
    let coef = 2.0 / std::f64::consts::PI.sqrt();
    let tail_target = tol / 10.0;
    // coef * g_bound * int_V^inf e^{-v^2} dv <= coef * g_bound * e^{-V^2} / (2V)
    let mut v_max = 1.0_f64;
    while coef * g_bound.max(1e-300) * (-v_max * v_max).exp() / (2.0 * v_max) > tail_target {
        v_max += 0.5;
    }
    let integrand = |v: f64| {
        if v == 0.0 {
            g_inf
        } else {
            (-v * v).exp() * g(t * t / (4.0 * v * v))
        }
    };
    Ok(coef * adaptive_simpson(integrand, 0.0, v_max, tol / coef)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn simpson_polynomials_and_exponential() {
        let v = adaptive_simpson(|x| x * x * x - x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = adaptive_simpson(f64::exp, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn gamma_type_identity() {
        // int_0^inf e^{-t^2/4s} e^{-beta^2 s} s^{-3/2} ds = (2 sqrt(pi)/t) e^{-beta t}
        for beta in [1.0, 5.0, 20.0] {
            for t in [0.05, 0.3, 1.0] {
                let exact = 2.0 * PI.sqrt() / t * (-beta * t).exp();
                let tol = 1e-12 * (-beta * t).exp();
                let p = subordinate(|s| (-beta * beta * s).exp(), t, 0.0, 1.0, tol).unwrap();
                let raw = p * 2.0 * PI.sqrt() / t;
                assert!((raw - exact).abs() <= 1e-10 * exact, "beta={beta} t={t}");
            }
        }
    }

    #[test]
    fn constant_subordinates_to_constant() {
        let p = subordinate(|_| 1.0, 0.7, 1.0, 1.0, 1e-12).unwrap();
        assert!((p - 1.0).abs() < 1e-11);
    }

    #[test]
    fn rejects_nonpositive_time() {
        assert!(matches!(subordinate(|_| 1.0, 0.0, 1.0, 1.0, 1e-8), Err(Error::InvalidTime(_))));
    }

    #[test]
    fn non_convergence_is_reported() {
        let r = adaptive_simpson(|x: f64| if x < 0.3 { 0.0 } else { 1.0 / (x - 0.3).sqrt().max(1e-300) }, 0.0, 1.0, 1e-15);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }
}
