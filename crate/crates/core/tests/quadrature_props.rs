use asianjump_core::quadrature::{integrate_1d, integrate_2d_iterated, truncate_upper, QuadConfig};
use asianjump_core::Error;
use proptest::prelude::*;

#[test]
fn truncation_examples() {
    let y = truncate_upper(24.0, 1e-12).unwrap();
    assert!((y - (1.0_f64 / (24.0 * 1e-12)).ln() / 24.0).abs() < 1e-15);
    assert!((truncate_upper(1.0, (-10.0f64).exp()).unwrap() - 10.0).abs() < 1e-12);
    let y = truncate_upper(11.062, 1e-12).unwrap();
    assert!(y > 0.0 && y < 3.0);
    assert!(matches!(truncate_upper(0.0, 1e-12), Err(Error::Assumption(_))));
}

#[test]
fn exponential_tail_via_truncation() {
    let cfg = QuadConfig::default();
    let hi = truncate_upper(25.0, 1e-14).unwrap();
    let r = integrate_1d(|y| (-25.0 * y).exp(), 0.0, hi, &cfg).unwrap();
    assert!((r.value - 0.04).abs() < 1e-10);
}

#[test]
fn iterated_with_diverging_inner_limit() {
    // ∫_0^1 ∫_{y*(t)}^{Y} e^{-y} dy dt with y*(t) = -log(1 - t) → ∞ as t → 1,
    // clipped at Y: reduces to ∫ (1 - t) - e^{-Y} over t with y* < Y
    let cfg = QuadConfig::default();
    let big: f64 = 40.0;
    let t_max = 1.0 - (-big).exp();
    let r = integrate_2d_iterated(|_, y| (-y).exp(), (0.0, t_max), |t| (-(1.0 - t).ln(), big), &[], &cfg).unwrap();
    assert!((r.value - 0.5).abs() < 1e-10);
}

fn family(i: usize, x: f64) -> f64 {
    match i {
        0 => (3.0 * x).sin() * (-x).exp(),
        1 => 1.0 / (1.0 + 25.0 * x * x),
        2 => x.abs().sqrt(),
        _ => (x * x).exp() * x.cos(),
    }
}

proptest! {
    #[test]
    fn halving_tolerances_stays_within_error_estimates(i in 0usize..4, a in -2.0f64..0.0, w in 0.1f64..3.0) {
        let loose = QuadConfig { abs_tol: 1e-8, rel_tol: 1e-8, ..QuadConfig::default() };
        let tight = QuadConfig { abs_tol: 0.5e-8, rel_tol: 0.5e-8, ..QuadConfig::default() };
        let r1 = integrate_1d(|x| family(i, x), a, a + w, &loose).unwrap();
        let r2 = integrate_1d(|x| family(i, x), a, a + w, &tight).unwrap();
        prop_assert!((r1.value - r2.value).abs() <= r1.error + r2.error + 1e-15 * r1.value.abs());
    }

    #[test]
    fn reported_error_meets_target(i in 0usize..4, a in -2.0f64..0.0, w in 0.1f64..3.0) {
        let cfg = QuadConfig::default();
        let r = integrate_1d(|x| family(i, x), a, a + w, &cfg).unwrap();
        prop_assert!(r.error <= cfg.abs_tol.max(cfg.rel_tol * r.value.abs()) * (1.0 + 1e-12));
    }

    #[test]
    fn polynomial_exactness(c0 in -5.0f64..5.0, c1 in -5.0f64..5.0, c2 in -5.0f64..5.0, b in 0.1f64..4.0) {
        let cfg = QuadConfig::default();
        let r = integrate_1d(|x| c0 + c1 * x + c2 * x * x, 0.0, b, &cfg).unwrap();
        let exact = c0 * b + c1 * b * b / 2.0 + c2 * b * b * b / 3.0;
        prop_assert!((r.value - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }
}
