//! Marchenko–Pastur law.

use std::f64::consts::PI;

/// Support `[a, b]` for ratio `c` and scale `sigma_sq`.
pub fn mp_support(c: f64, sigma_sq: f64) -> (f64, f64) {
    let s = c.sqrt();
    (sigma_sq * (1.0 - s).powi(2), sigma_sq * (1.0 + s).powi(2))
}

/// Marchenko–Pastur CDF with ratio `c ∈ (0, 1)` and scale `sigma_sq`,
/// clamped to `[0, 1]`.
pub fn mp_cdf(x: f64, c: f64, sigma_sq: f64) -> f64 {
    let (a, b) = mp_support(c, sigma_sq);
    if x <= a {
        return 0.0;
    }
    if x >= b {
        return 1.0;
    }
    // Half-angle substitution x = (a+b)/2 − (b−a)/2·cos θ, t = tan(θ/2).
    let t = ((x - a) / (b - x)).sqrt();
    let root = ((x - a) * (b - x)).sqrt();
    let g = root + (a + b) * t.atan() - 2.0 * (a * b).sqrt() * ((b / a).sqrt() * t).atan();
    (g / (2.0 * PI * c * sigma_sq)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Adaptive Simpson integral of the density from `a` to `x`. With
    /// `x = (a+b)/2 − (b−a)/2·cos θ` the integrand is smooth in `θ`.
    fn integral(x: f64, c: f64, sigma_sq: f64) -> f64 {
        let (a, b) = mp_support(c, sigma_sq);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let theta_x = ((mid - x) / half).clamp(-1.0, 1.0).acos();
        let scale = half * half / (2.0 * PI * c * sigma_sq);
        let f = |t: f64| {
            let s = t.sin();
            scale * s * s / (mid - half * t.cos())
        };
        adaptive_simpson(&f, 0.0, theta_x, 1e-13, 40)
    }

    fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
    }

    #[allow(clippy::too_many_arguments)]
    fn simpson_step(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }

    /// Trapezoid rule directly on the density in `x`.
    fn trapezoid_cdf(x: f64, c: f64, s2: f64, steps: usize) -> f64 {
        let (a, b) = mp_support(c, s2);
        let pdf = |v: f64| ((b - v) * (v - a)).max(0.0).sqrt() / (2.0 * PI * c * s2 * v);
        let h = (x - a) / steps as f64;
        let mut sum = 0.5 * (pdf(a) + pdf(x));
        for i in 1..steps {
            sum += pdf(a + i as f64 * h);
        }
        sum * h
    }

    #[test]
    fn support_edges() {
        let (a, b) = mp_support(0.25, 1.0);
        assert_eq!((a, b), (0.25, 2.25));
        assert_eq!(mp_cdf(a, 0.25, 1.0), 0.0);
        assert_eq!(mp_cdf(b, 0.25, 1.0), 1.0);
        assert_eq!(mp_cdf(-1.0, 0.25, 1.0), 0.0);
        assert_eq!(mp_cdf(9.0, 0.25, 1.0), 1.0);
    }

    #[test]
    fn density_integrates_to_one() {
        for (c, s2) in [(0.25, 1.0), (0.125, 2.0), (0.9, 0.3), (0.01, 1.0)] {
            let (_, b) = mp_support(c, s2);
            let total = integral(b, c, s2);
            assert!((total - 1.0).abs() <= 1e-6, "c={c} total={total}");
        }
    }

    #[test]
    fn closed_form_matches_adaptive_integration() {
        for (c, s2) in [
            (0.25, 1.0),
            (0.125, 2.0),
            (0.9, 0.3),
            (0.01, 1.0),
            (0.64, 5.0),
        ] {
            let (a, b) = mp_support(c, s2);
            for i in 1..200 {
                let x = a + (b - a) * i as f64 / 200.0;
                let d = (mp_cdf(x, c, s2) - integral(x, c, s2)).abs();
                assert!(d < 1e-8, "c={c} x={x} diff={d}");
            }
        }
    }

    #[test]
    fn matches_trapezoid_oracle() {
        let oracle = trapezoid_cdf(1.0, 0.25, 1.0, 2_000_000);
        assert!((mp_cdf(1.0, 0.25, 1.0) - oracle).abs() < 1e-5, "{oracle}");
        let oracle = trapezoid_cdf(0.7, 0.125, 0.8, 2_000_000);
        assert!((mp_cdf(0.7, 0.125, 0.8) - oracle).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(c in 0.01f64..0.99, s2 in 0.1f64..10.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
            let (a, b) = mp_support(c, s2);
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            let x0 = a + lo * (b - a);
            let x1 = a + hi * (b - a);
            prop_assert!(mp_cdf(x0, c, s2) <= mp_cdf(x1, c, s2) + 1e-12);
        }
    }
}
