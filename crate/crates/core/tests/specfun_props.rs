use asianjump_core::quadrature::{integrate_1d, QuadConfig};
use asianjump_core::specfun::{arctanh, hyp2f1_restricted, log_integral, norm_cdf, norm_pdf};
use proptest::prelude::*;

/// Trapezoid rule for the Gaussian density on [-8, x] with a fixed step.
fn cdf_trapezoid(x: f64) -> f64 {
    let (a, n) = (-8.0, 1_000_000usize);
    let h = (x - a) / n as f64;
    let mut s = 0.5 * (norm_pdf(a) + norm_pdf(x));
    for i in 1..n {
        s += norm_pdf(a + h * i as f64);
    }
    // mass below -8 is 6.2e-16
    s * h
}

#[test]
fn norm_cdf_matches_trapezoid() {
    // fixed pseudo-random abscissae in [-8, 8]
    let mut u = 0.123_f64;
    for _ in 0..20 {
        u = (u * 9301.0 + 0.49297).fract();
        let x = -8.0 + 16.0 * u;
        let got = norm_cdf(x);
        let want = cdf_trapezoid(x);
        assert!((got - want).abs() < 1e-9, "x = {x}: {got} vs {want}");
    }
}

#[test]
fn norm_cdf_examples() {
    assert_eq!(norm_cdf(0.0), 0.5);
    assert!((norm_cdf(1.959964) - 0.975).abs() < 1e-6);
    for x in [0.1, 1.0, 3.0] {
        assert!((norm_cdf(x) + norm_cdf(-x) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn li_matches_defining_integral() {
    let cfg = QuadConfig::default();
    for i in 1..=9 {
        let z = i as f64 / 10.0;
        // 1/log t vanishes at 0 and is smooth on (0, z]
        let want = integrate_1d(|t| if t == 0.0 { 0.0 } else { 1.0 / t.ln() }, 0.0, z, &cfg)
            .unwrap()
            .value;
        let got = log_integral(z).unwrap();
        assert!(((got - want) / want).abs() < 1e-8, "z = {z}: {got} vs {want}");
    }
    assert!((log_integral(0.5).unwrap() + 0.378671).abs() < 1e-6);
    assert!(log_integral(0.9).unwrap() < log_integral(0.5).unwrap());
    assert!(log_integral(1.0).is_err() && log_integral(-0.1).is_err());
}

/// Partial sums of the hypergeometric series with compensated summation.
fn hyp2f1_partial_sum(b: f64, z: f64) -> f64 {
    let (mut sum, mut comp, mut term) = (1.0_f64, 0.0_f64, 1.0_f64);
    for n in 0..10_000 {
        let n = n as f64;
        term *= (b + n) / (b + 3.0 + n) * z;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

#[test]
fn hyp2f1_matches_partial_sums_on_grid() {
    for b in [1.0, 7.0, 15.0, 23.0, 30.0] {
        for z in [0.0, 0.3, 0.6, 0.9, 0.99] {
            let got = hyp2f1_restricted(b, z).unwrap();
            let want = hyp2f1_partial_sum(b, z);
            assert!(((got - want) / want).abs() < 1e-10, "b = {b}, z = {z}: {got} vs {want}");
        }
    }
}

#[test]
fn hyp2f1_matches_euler_integral() {
    // 2F1(1, b; b+3; z) = b(b+1)(b+2)/2 · ∫ t^{b-1} (1-t)^2 / (1 - z t) dt
    let cfg = QuadConfig::default();
    for (b, z) in [(24.0, 1.0 / 1.05), (7.5, 0.95), (25.0, 0.5)] {
        let pre = b * (b + 1.0) * (b + 2.0) / 2.0;
        let r = integrate_1d(
            |t: f64| t.powf(b - 1.0) * (1.0 - t).powi(2) / (1.0 - z * t),
            0.0,
            1.0,
            &cfg,
        )
        .unwrap();
        let got = hyp2f1_restricted(b, z).unwrap();
        assert!(((got - pre * r.value) / got).abs() < 1e-8, "b = {b}, z = {z}");
    }
    assert_eq!(hyp2f1_restricted(25.0, 0.0).unwrap(), 1.0);
    assert!(hyp2f1_restricted(3.0, 1.01).is_err());
    assert!(hyp2f1_restricted(3.0, -0.01).is_err());
}

#[test]
fn arctanh_examples() {
    assert_eq!(arctanh(0.0).unwrap(), 0.0);
    let x = 1.0 / (2.0 * 12.062 - 1.0);
    assert!((arctanh(x).unwrap() - ((1.0 + x) / (1.0 - x)).ln() / 2.0).abs() < 1e-16);
    assert_eq!(arctanh(-0.3).unwrap(), -arctanh(0.3).unwrap());
    assert!(arctanh(1.0).is_err());
}

proptest! {
    #[test]
    fn norm_cdf_is_monotone_probability(x in -30.0f64..30.0, dx in 0.0f64..1.0) {
        let (a, b) = (norm_cdf(x), norm_cdf(x + dx));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }

    #[test]
    fn li_negative_and_decreasing(z in 1e-6f64..0.999, dz in 0.0f64..0.0009) {
        let (a, b) = (log_integral(z).unwrap(), log_integral(z + dz).unwrap());
        prop_assert!(a < 0.0);
        prop_assert!(b <= a);
    }

    #[test]
    fn hyp2f1_at_least_one_and_below_gauss_sum(b in 0.1f64..40.0, z in 0.0f64..=1.0) {
        let v = hyp2f1_restricted(b, z).unwrap();
        prop_assert!(v >= 1.0);
        prop_assert!(v <= (b + 2.0) / 2.0 * (1.0 + 1e-12));
    }

    #[test]
    fn arctanh_inverts_tanh(x in -5.0f64..5.0) {
        let y = arctanh(x.tanh()).unwrap();
        prop_assert!((y - x).abs() < 1e-12 * (1.0 + x.abs()) / (1.0 - x.tanh().abs()).max(1e-4));
    }
}
