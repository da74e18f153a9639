use std::sync::Arc;

use asianjump_core::asymptotics::otm_call_coeff;
use asianjump_core::mc::{convergence_study, simulate_paths};
use asianjump_core::models::{CpDensity, GenericCp, JumpSpec, LocalVol, LocalVolFn};
use asianjump_core::{
    avg_forward, fixtures, mc_price, DiffusionSpec, Instrument, MCConfig, MarketSpec, MethodChoice, PutCall,
};
use proptest::prelude::*;

fn cfg(n_paths: usize, seed: u64) -> MCConfig {
    MCConfig {
        n_paths,
        seed,
        ..MCConfig::default()
    }
}

fn within(got: f64, se: f64, want: f64, want_se: f64) -> bool {
    (got - want).abs() <= 3.0 * (se * se + want_se * want_se).sqrt()
}

#[test]
fn deterministic_degenerate_paths() {
    let market = MarketSpec::new(1000.0, 0.05, 0.0).unwrap();
    let mut m = fixtures::mjd().with_constant_sigma(0.0).unwrap();
    m.market = market;
    m.jumps = JumpSpec::merton(0.0, 0.0, 0.1).unwrap();
    let t = 0.5;
    let c = MCConfig {
        n_paths: 1000,
        n_steps: 100,
        ..MCConfig::default()
    };
    let paths = simulate_paths(&m, t, &c).unwrap();
    assert_eq!(paths.len(), 1000);
    let a = avg_forward(&market, t);
    for p in &paths {
        assert!((p.terminal - 1000.0 * (0.05 * t).exp()).abs() < 1e-9);
        // trapezoid error (rT)²/(12N²)·S0 order
        assert!((p.average - a).abs() < 1e-3);
        assert_eq!(p.n_jumps, 0);
    }
}

#[test]
fn std_err_scales_with_paths() {
    let m = fixtures::mjd();
    let inst = Instrument::fixed(PutCall::Put, 980.0, 1.0 / 52.0).unwrap();
    let a = mc_price(&m, &inst, &cfg(20_000, 7)).unwrap();
    let b = mc_price(&m, &inst, &cfg(80_000, 7)).unwrap();
    let ratio = a.std_err / b.std_err;
    assert!(a.std_err > 0.0 && ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5, "{ratio}");
}

#[test]
fn jump_count_distribution() {
    let m = fixtures::kou(0.0);
    let t = 1.0 / 12.0;
    let n = 100_000;
    let paths = simulate_paths(
        &m,
        t,
        &MCConfig {
            n_paths: n,
            n_steps: 10,
            ..MCConfig::default()
        },
    )
    .unwrap();
    let lt: f64 = 3.0 * t;
    for (k, p) in [(0u32, (-lt).exp()), (1, lt * (-lt).exp())] {
        let freq = paths.iter().filter(|s| s.n_jumps == k).count() as f64 / n as f64;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((freq - p).abs() <= 3.0 * sd, "N = {k}: {freq} vs {p}");
    }
}

#[test]
fn reference_simulation_values() {
    let t = 1.0 / 52.0;
    let c = MCConfig::default();
    let r = mc_price(
        &fixtures::mjd(),
        &Instrument::fixed(PutCall::Call, 1020.0, t).unwrap(),
        &c,
    )
    .unwrap();
    assert!(within(r.price, r.std_err, 0.1449, 0.0096), "{r:?}");
    let r = mc_price(
        &fixtures::vg(),
        &Instrument::fixed(PutCall::Call, 1040.0, t).unwrap(),
        &c,
    )
    .unwrap();
    assert!(within(r.price / t, r.std_err / t, 103.3, 2.4), "{r:?}");
    let rows = convergence_study(
        &fixtures::mjd(),
        &Instrument::floating(PutCall::Put, 1.2, 1.0).unwrap(),
        &[1.0 / 252.0, 1.0 / 52.0, 1.0 / 12.0],
        &c,
    )
    .unwrap();
    // scaled by 1000/S0 = 1
    for (row, (want, se)) in rows.iter().zip([(13.77, 2.90), (13.60, 1.38), (13.87, 0.67)]) {
        assert!(within(row.scaled_price, row.scaled_std_err, want, se), "{row:?}");
    }
}

#[test]
fn vg_short_maturity_near_asymptote() {
    let m = fixtures::vg();
    let t = 1.0 / 252.0;
    let rows = convergence_study(
        &m,
        &Instrument::fixed(PutCall::Call, 1100.0, t).unwrap(),
        &[t],
        &MCConfig::default(),
    )
    .unwrap();
    assert!(within(rows[0].scaled_price, rows[0].scaled_std_err, 27.8, 3.2));
    let a = otm_call_coeff(&m, 1100.0, MethodChoice::Auto).unwrap().value;
    assert!((a - 28.36).abs() < 0.01);
    assert!(within(rows[0].scaled_price, rows[0].scaled_std_err, a, 0.0));
}

#[test]
fn merton_otm_convergence_trend() {
    let m = fixtures::mjd();
    let a = otm_call_coeff(&m, 1040.0, MethodChoice::Auto).unwrap().value;
    let rows = convergence_study(
        &m,
        &Instrument::fixed(PutCall::Call, 1040.0, 1.0).unwrap(),
        &[1.0 / 12.0, 1.0 / 52.0, 1.0 / 252.0],
        // at T = 1/252 only ~1e-4 of paths jump into the money, so the
        // sample needs millions of paths for a meaningful standard error
        &MCConfig {
            n_paths: 2_000_000,
            n_steps: 20,
            ..MCConfig::default()
        },
    )
    .unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| (r.scaled_price - a).abs()).collect();
    // each step either shrinks or stays inside the noise of the next row
    for (w, r) in gaps.windows(2).zip(rows.windows(2)) {
        let noise = 3.0 * r[0].scaled_std_err.hypot(r[1].scaled_std_err);
        assert!(w[1] < w[0] + noise, "{gaps:?} {rows:?}");
    }
    assert!(gaps[2] < gaps[0], "{gaps:?}");
}

#[test]
fn no_jumps_otm_call_vanishes() {
    let m = fixtures::mjd()
        .with_jumps(JumpSpec::merton(0.0, 0.0, 0.1).unwrap())
        .unwrap();
    let t = 1.0 / 252.0;
    let r = mc_price(
        &m,
        &Instrument::fixed(PutCall::Call, 1100.0, t).unwrap(),
        &cfg(20_000, 3),
    )
    .unwrap();
    assert_eq!(r.price, 0.0);
}

#[test]
fn local_vol_and_generic_jumps_are_martingales() {
    let lv = LocalVol::new(
        LocalVolFn::Tabulated {
            spots: vec![800.0, 1000.0, 1200.0],
            vols: vec![0.3, 0.2, 0.15],
        },
        0.05,
        1.0,
    )
    .unwrap();
    let mut m = fixtures::mjd();
    m.diffusion = DiffusionSpec::Local(lv);
    let dens = move |y: f64| {
        if y >= 0.0 {
            0.5 * 20.0 * (-20.0 * y).exp()
        } else {
            0.5 * 15.0 * (15.0 * y).exp()
        }
    };
    let g = GenericCp::new(2.0, CpDensity::Function(Arc::new(dens)), 20.0, 15.0)
        .unwrap()
        .with_breakpoints(vec![0.0]);
    m.jumps = JumpSpec::Generic(g);
    let t = 1.0 / 12.0;
    let paths = simulate_paths(&m, t, &cfg(50_000, 11)).unwrap();
    let n = paths.len() as f64;
    let mean = paths.iter().map(|p| p.terminal).sum::<f64>() / n;
    let var = paths.iter().map(|p| (p.terminal - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((mean - 1000.0).abs() <= 3.0 * (var / n).sqrt(), "{mean}");
    assert!(paths.iter().any(|p| p.n_jumps > 0));
}

#[test]
fn invalid_configs_rejected() {
    let m = fixtures::mjd();
    let inst = Instrument::fixed(PutCall::Call, 1020.0, 0.1).unwrap();
    assert!(mc_price(&m, &inst, &cfg(999, 1)).is_err());
    assert!(mc_price(
        &m,
        &inst,
        &MCConfig {
            n_steps: 1,
            ..MCConfig::default()
        }
    )
    .is_err());
    assert!(mc_price(
        &m,
        &inst,
        &MCConfig {
            batch_size: 0,
            ..MCConfig::default()
        }
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn reproducible_for_any_seed_and_thread_count(seed in any::<u64>(), threads in 1usize..5) {
        let m = fixtures::vg();
        let inst = Instrument::fixed(PutCall::Put, 990.0, 1.0 / 52.0).unwrap();
        let base = MCConfig { n_paths: 5000, n_steps: 20, seed, batch_size: 512, ..MCConfig::default() };
        let a = mc_price(&m, &inst, &base).unwrap();
        let b = mc_price(&m, &inst, &MCConfig { threads, ..base }).unwrap();
        prop_assert_eq!(a, b);
    }
}
