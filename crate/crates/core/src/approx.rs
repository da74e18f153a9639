//! Analytical approximation for fixed-strike Asian options: a Black-form
//! diffusive part evaluated with the equivalent log-normal volatility
//! `Σ_LN`, plus the jump coefficient times the maturity. Also the forward of
//! the average, put-call parity and implied-volatility inversion.

use serde::Serialize;

use crate::asymptotics::{atm_limit_coeff, otm_call_coeff, otm_put_coeff, MethodChoice};
use crate::error::{invalid, Error, Result};
use crate::models::{DiffusionSpec, Instrument, MarketSpec, ModelSpec, PutCall, Style};
use crate::specfun::norm_cdf;

/// Forward of the time average, `A(T) = S0 (e^{(r-q)T} - 1)/((r-q)T)`.
pub fn avg_forward(market: &MarketSpec, t: f64) -> f64 {
    let x = market.carry() * t;
    if x.abs() < 1e-12 {
        market.s0 * (1.0 + 0.5 * x)
    } else {
        market.s0 * x.exp_m1() / x
    }
}

/// Equivalent log-normal volatility from the cubic series in `log k`,
/// with `σ = σ(S0)` for local volatility.
pub fn sigma_ln(diffusion: &DiffusionSpec, s0: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Domain {
            function: "sigma_ln",
            detail: format!("moneyness k = {k} must be positive"),
        });
    }
    let l = k.ln();
    if l.abs() > 0.5 {
        log::warn!(
            "sigma_ln: |log k| = {:.3} > 0.5, cubic series may be inaccurate",
            l.abs()
        );
    }
    let sigma = diffusion.sigma_at(s0);
    let poly = 1.0 + l / 10.0 - 23.0 / 2100.0 * l * l + l * l * l / 3500.0;
    Ok(sigma / 3f64.sqrt() * poly)
}

/// Discounted Black price with forward `f`, total volatility `vol·√t`.
/// Zero volatility returns the discounted intrinsic value.
pub fn black_price(f: f64, strike: f64, t: f64, vol: f64, discount: f64, putcall: PutCall) -> f64 {
    let sd = vol * t.sqrt();
    let w = putcall.sign();
    if !(sd > 0.0) {
        return discount * (w * (f - strike)).max(0.0);
    }
    let d1 = ((f / strike).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    discount * w * (f * norm_cdf(w * d1) - strike * norm_cdf(w * d2))
}

fn black_vega(f: f64, strike: f64, t: f64, vol: f64, discount: f64) -> f64 {
    let sd = vol * t.sqrt();
    let d1 = ((f / strike).ln() + 0.5 * sd * sd) / sd;
    discount * f * crate::specfun::norm_pdf(d1) * t.sqrt()
}

/// Diffusive component `e^{-rT}[A(T)Φ(d1) - KΦ(d2)]` (or the put mirror)
/// with `Σ = Σ_LN(K/S0)`.
pub fn bs_asian_diffusive(
    market: &MarketSpec,
    diffusion: &DiffusionSpec,
    strike: f64,
    t: f64,
    putcall: PutCall,
) -> Result<f64> {
    if !(strike > 0.0) || !(t > 0.0) {
        return Err(invalid("strike/T", "must be positive"));
    }
    let sigma = sigma_ln(diffusion, market.s0, strike / market.s0)?;
    Ok(black_price(
        avg_forward(market, t),
        strike,
        t,
        sigma,
        (-market.r * t).exp(),
        putcall,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SideUsed {
    CallDirect,
    PutDirect,
    ViaParity,
}

/// Which jump coefficient feeds the approximation: the call formula
/// (`K ≥ S0`) or the put formula (`K ≤ S0`). Both apply at `K = S0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    CallSide,
    PutSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxPrice {
    pub total: f64,
    /// Diffusive part of the directly computed side.
    pub diffusive: f64,
    /// Coefficient times maturity on the directly computed side.
    pub jump_term: f64,
    pub side_used: SideUsed,
}

/// Approximate price on a chosen branch. `Branch::CallSide` needs `K ≥ S0`
/// and `Branch::PutSide` needs `K ≤ S0`; the other option type follows from
/// put-call parity `C - P = e^{-rT}(A(T) - K)`.
pub fn approx_price_branch(model: &ModelSpec, inst: &Instrument, branch: Branch) -> Result<ApproxPrice> {
    if inst.style != Style::Fixed {
        return Err(Error::Unsupported(
            "the analytical approximation covers fixed strikes only; use the floating coefficient directly".into(),
        ));
    }
    let s0 = model.s0();
    let (strike, t) = (inst.strike, inst.maturity);
    let direct = match branch {
        Branch::CallSide => PutCall::Call,
        Branch::PutSide => PutCall::Put,
    };
    let coeff = match (branch, strike.partial_cmp(&s0)) {
        (_, Some(std::cmp::Ordering::Equal)) => atm_limit_coeff(model, Style::Fixed, direct, MethodChoice::Auto)?,
        (Branch::CallSide, Some(std::cmp::Ordering::Greater)) => otm_call_coeff(model, strike, MethodChoice::Auto)?,
        (Branch::PutSide, Some(std::cmp::Ordering::Less)) => otm_put_coeff(model, strike, MethodChoice::Auto)?,
        _ => {
            return Err(Error::Regime(format!(
                "{branch:?} branch needs K on its OTM side of S0 = {s0}, got K = {strike}"
            )))
        }
    };
    let diffusive = bs_asian_diffusive(&model.market, &model.diffusion, strike, t, direct)?;
    let jump_term = coeff.value * t;
    let direct_total = diffusive + jump_term;
    if inst.putcall == direct {
        let side_used = match direct {
            PutCall::Call => SideUsed::CallDirect,
            PutCall::Put => SideUsed::PutDirect,
        };
        return Ok(ApproxPrice {
            total: direct_total,
            diffusive,
            jump_term,
            side_used,
        });
    }
    let parity = (-model.market.r * t).exp() * (avg_forward(&model.market, t) - strike);
    let total = match direct {
        PutCall::Call => direct_total - parity,
        PutCall::Put => direct_total + parity,
    };
    Ok(ApproxPrice {
        total,
        diffusive,
        jump_term,
        side_used: SideUsed::ViaParity,
    })
}

/// Approximate price: call formula for `K > S0`, put formula for `K < S0`,
/// and at `K = S0` the formula matching the requested option type.
pub fn approx_price(model: &ModelSpec, inst: &Instrument) -> Result<ApproxPrice> {
    let s0 = model.s0();
    let branch = if inst.strike > s0 {
        Branch::CallSide
    } else if inst.strike < s0 {
        Branch::PutSide
    } else {
        match inst.putcall {
            PutCall::Call => Branch::CallSide,
            PutCall::Put => Branch::PutSide,
        }
    };
    approx_price_branch(model, inst, branch)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SmileSource {
    Approx,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmilePoint {
    pub k: f64,
    pub implied_vol: Option<f64>,
    pub putcall: PutCall,
    pub source: SmileSource,
}

const VOL_LO: f64 = 1e-6;
const VOL_HI: f64 = 5.0;

/// Black-form implied volatility with forward `A(T)`, searched on
/// `[1e-6, 5]` by Newton steps safeguarded with bisection.
pub fn implied_vol(price: f64, market: &MarketSpec, strike: f64, t: f64, putcall: PutCall) -> Result<f64> {
    if !(strike > 0.0) || !(t > 0.0) {
        return Err(invalid("strike/T", "must be positive"));
    }
    let f = avg_forward(market, t);
    let disc = (-market.r * t).exp();
    let (lower, upper) = match putcall {
        PutCall::Call => (disc * (f - strike).max(0.0), disc * f),
        PutCall::Put => (disc * (strike - f).max(0.0), disc * strike),
    };
    if !price.is_finite() || price <= lower || price >= upper {
        return Err(Error::NoSolution(format!(
            "price {price} outside the no-arbitrage range ({lower}, {upper})"
        )));
    }
    let g = |v: f64| black_price(f, strike, t, v, disc, putcall) - price;
    let (mut lo, mut hi) = (VOL_LO, VOL_HI);
    let (g_lo, g_hi) = (g(lo), g(hi));
    if g_lo > 0.0 || g_hi < 0.0 {
        return Err(Error::NoSolution(format!(
            "price {price} not bracketed by volatilities [{VOL_LO}, {VOL_HI}]"
        )));
    }
    if g_lo == 0.0 {
        return Ok(lo);
    }
    let mut v = 0.5 * (lo + hi);
    for _ in 0..300 {
        let gv = g(v);
        if gv == 0.0 {
            return Ok(v);
        }
        if gv < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let vega = black_vega(f, strike, t, v, disc);
        let newton = v - gv / vega;
        let next = if vega > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - v).abs() <= 1e-15 * v || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        v = next;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn forward_examples() {
        let flat = MarketSpec::new(100.0, 0.03, 0.03).unwrap();
        assert_eq!(avg_forward(&flat, 1.0), 100.0);
        let up = MarketSpec::new(100.0, 0.05, 0.0).unwrap();
        assert!((avg_forward(&up, 1.0) - 102.5422).abs() < 1e-4);
        let down = MarketSpec::new(100.0, 0.0, 0.05).unwrap();
        assert!((avg_forward(&down, 1.0) - 97.5412).abs() < 1e-4);
    }

    #[test]
    fn sigma_ln_examples() {
        let d = DiffusionSpec::constant(0.126).unwrap();
        assert!((sigma_ln(&d, 1000.0, 1.0).unwrap() - 0.072746).abs() < 1e-6);
        let d = DiffusionSpec::constant(0.3).unwrap();
        assert!((sigma_ln(&d, 1000.0, 0.1f64.exp()).unwrap() - 0.174918).abs() < 1e-6);
        let z = DiffusionSpec::constant(0.0).unwrap();
        assert_eq!(sigma_ln(&z, 1000.0, 1.3).unwrap(), 0.0);
        assert!(sigma_ln(&z, 1000.0, 0.0).is_err());
    }

    #[test]
    fn diffusive_examples() {
        let m = fixtures::mjd();
        let t = 1.0 / 52.0;
        let atm = bs_asian_diffusive(&m.market, &m.diffusion, 1000.0, t, PutCall::Call).unwrap();
        assert!((atm - 4.0245).abs() < 5e-5);
        let otm = bs_asian_diffusive(&m.market, &m.diffusion, 1020.0, t, PutCall::Call).unwrap();
        assert!((otm - 0.0966).abs() < 5e-5);
        let z = DiffusionSpec::constant(0.0).unwrap();
        assert_eq!(
            bs_asian_diffusive(&m.market, &z, 1020.0, t, PutCall::Call).unwrap(),
            0.0
        );
    }

    #[test]
    fn approx_examples() {
        let m = fixtures::mjd();
        let t = 1.0 / 52.0;
        let c = approx_price(&m, &Instrument::fixed(PutCall::Call, 1020.0, t).unwrap()).unwrap();
        assert!((c.total - 0.1309).abs() < 5e-5);
        assert_eq!(c.side_used, SideUsed::CallDirect);
        let p = approx_price(&m, &Instrument::fixed(PutCall::Put, 980.0, t).unwrap()).unwrap();
        assert!((p.total - 0.5448).abs() < 5e-5);
        let via = approx_price(&m, &Instrument::fixed(PutCall::Put, 1020.0, t).unwrap()).unwrap();
        assert_eq!(via.side_used, SideUsed::ViaParity);
        assert!((c.total - via.total - (1000.0 - 1020.0)).abs() < 1e-12);
        let floating = Instrument::floating(PutCall::Put, 1.1, t).unwrap();
        assert!(matches!(approx_price(&m, &floating), Err(Error::Unsupported(_))));
    }

    #[test]
    fn implied_vol_inverts_black() {
        let m = fixtures::mjd();
        let t = 1.0 / 52.0;
        let price = bs_asian_diffusive(&m.market, &m.diffusion, 1000.0, t, PutCall::Call).unwrap();
        let v = implied_vol(price, &m.market, 1000.0, t, PutCall::Call).unwrap();
        assert!((v - 0.126 / 3f64.sqrt()).abs() < 1e-8);
        let v = implied_vol(0.1309, &m.market, 1020.0, t, PutCall::Call).unwrap();
        assert!(v > 0.0727);
        assert!(matches!(
            implied_vol(0.0, &m.market, 1000.0, t, PutCall::Call),
            Err(Error::NoSolution(_))
        ));
        assert!(implied_vol(1001.0, &m.market, 1000.0, t, PutCall::Call).is_err());
    }
}
