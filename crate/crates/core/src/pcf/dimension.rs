/// Unique root d of `g(d) = sum_i r_i^d - 1` for weights in (0,1).
///
/// `g` is strictly decreasing with g(0) = N - 1 > 0 and g -> -1, so a
/// bracketing bisection always converges; a few Newton steps polish the root.
pub fn similarity_dimension(r: &[f64]) -> f64 {
    debug_assert!(r.iter().all(|&x| x > 0.0 && x < 1.0));
    let g = |d: f64| r.iter().map(|ri| ri.powf(d)).sum::<f64>() - 1.0;
    let dg = |d: f64| r.iter().map(|ri| ri.powf(d) * ri.ln()).sum::<f64>();

    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.max(1.0) {
            break;
        }
    }
    let mut d = 0.5 * (lo + hi);
    for _ in 0..3 {
        let step = g(d) / dg(d);
        if !step.is_finite() {
            break;
        }
        let next = d - step;
        if next <= lo - 1e-12 || next >= hi + 1e-12 {
            break;
        }
        d = next;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bisect_oracle(r: &[f64]) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 64.0_f64);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            let g: f64 = r.iter().map(|x| x.powf(mid)).sum::<f64>() - 1.0;
            if g > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn known_dimensions() {
        assert!((similarity_dimension(&[0.5, 0.5]) - 1.0).abs() < 1e-14);
        assert!((similarity_dimension(&[0.25; 4]) - 1.0).abs() < 1e-14);
        let sg = similarity_dimension(&[0.6; 3]);
        let exact = 3f64.ln() / (5.0f64 / 3.0).ln();
        assert!((sg - exact).abs() < 1e-13);
        assert!((sg - 2.150663).abs() < 1e-5);
        assert!((sg - bisect_oracle(&[0.6; 3])).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn root_is_unique_and_tight(r in proptest::collection::vec(0.05f64..0.95, 2..7)) {
            let d = similarity_dimension(&r);
            let g = |d: f64| r.iter().map(|x| x.powf(d)).sum::<f64>() - 1.0;
            prop_assert!(g(d).abs() <= 1e-12);
            prop_assert!(g(d - 1e-6) > 0.0);
            prop_assert!(g(d + 1e-6) < 0.0);
        }
    }
}
