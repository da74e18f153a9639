//! First-order short-maturity coefficients for fixed- and floating-strike
//! Asian options.
//!
//! OTM coefficients are prices per unit maturity (`lim C(T)/T`); ATM
//! coefficients are prices per square-root maturity (`lim C(T)/√T`). Each
//! OTM coefficient has a generic quadrature path over the Lévy measure and,
//! where one exists, a closed form (Merton, double-exponential, VG).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{check_assumptions, levy_density, Cgmy, JumpSpec, ModelSpec, PutCall, Style};
use crate::quadrature::{integrate_1d, integrate_1d_pieces, integrate_2d_iterated, QuadConfig};
use crate::specfun::{arctanh, exp_integral_e1, hyp2f1_restricted, norm_cdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Otm,
    Atm,
    /// One-sided limit of an OTM coefficient at the ATM point.
    AtmLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    /// Closed form where one exists, quadrature otherwise.
    #[default]
    Auto,
    ClosedForm,
    Quadrature,
}

/// A short-maturity coefficient together with the contract it belongs to.
/// The coefficient does not depend on the maturity, so none is stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymCoeff {
    pub value: f64,
    pub regime: Regime,
    pub method: Method,
    pub style: Style,
    pub putcall: PutCall,
    /// `K` for fixed strikes, `κ` for floating strikes.
    pub strike: f64,
    /// Set when the limit is exactly zero (no jump reaches the money).
    pub degenerate: bool,
}

impl AsymCoeff {
    fn new(value: f64, regime: Regime, method: Method, style: Style, putcall: PutCall, strike: f64) -> Self {
        // roundoff in the closed forms can leave tiny negative values
        let value = value.max(0.0);
        Self {
            value,
            regime,
            method,
            style,
            putcall,
            strike,
            degenerate: value == 0.0,
        }
    }

    /// Price contribution at maturity `t`: `value·t` (OTM) or `value·√t` (ATM).
    pub fn scaled(&self, t: f64) -> f64 {
        match self.regime {
            Regime::Atm => self.value * t.sqrt(),
            _ => self.value * t,
        }
    }
}

/// Quadrature tolerances used for coefficients at spot level `s0`.
pub fn coeff_quad_config(s0: f64) -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-13 * s0,
        rel_tol: 1e-10,
        max_depth: 50,
        tail_eps: 1e-16,
    }
}

fn ensure_assumptions(model: &ModelSpec) -> Result<()> {
    check_assumptions(model).ensure_required()
}

fn has_closed_form(jumps: &JumpSpec, style: Style) -> bool {
    match style {
        Style::Fixed => !matches!(jumps, JumpSpec::Generic(_)),
        Style::Floating => matches!(jumps, JumpSpec::Merton { .. }),
    }
}

fn resolve(choice: MethodChoice, jumps: &JumpSpec, style: Style) -> Result<Method> {
    match choice {
        MethodChoice::Quadrature => Ok(Method::Quadrature),
        MethodChoice::Auto if has_closed_form(jumps, style) => Ok(Method::ClosedForm),
        MethodChoice::Auto => Ok(Method::Quadrature),
        MethodChoice::ClosedForm if has_closed_form(jumps, style) => Ok(Method::ClosedForm),
        MethodChoice::ClosedForm => Err(Error::Unsupported(format!(
            "no closed form for {style:?} strikes under this jump kind; use quadrature"
        ))),
    }
}

/// Lévy density as a plain function; the VG singular point `y = 0` has
/// measure zero in every integral and is mapped to 0.
fn density_fn(jumps: &JumpSpec) -> impl Fn(f64) -> f64 + '_ {
    move |y| levy_density(jumps, y).unwrap_or(0.0)
}

// ---- Merton inner integrals ----

/// Inner `y`-integrals of the Merton closed form at lower/upper limit `l`:
/// `I1 = P(Y > l)`, `I2 = E[e^Y; Y > l]`, `I3 = P(Y < l)`, `I4 = E[e^Y; Y < l]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertonInner {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
}

pub fn merton_inner(l: f64, jump_mean: f64, jump_sd: f64) -> MertonInner {
    let (a, d) = (jump_mean, jump_sd);
    let m = (a + 0.5 * d * d).exp();
    MertonInner {
        i1: norm_cdf((a - l) / d),
        i2: m * norm_cdf((a + d * d - l) / d),
        i3: norm_cdf((l - a) / d),
        i4: m * norm_cdf((l - a - d * d) / d),
    }
}

/// `y*(t) = log((k - t)/(1 - t))`, the log-jump that puts the average at the strike.
fn ystar(k: f64, t: f64) -> f64 {
    ((k - t) / (1.0 - t)).ln()
}

/// `log y0(t)` with `y0(t) = t/(κ - 1 + t)` for floating strikes.
fn log_y0(kappa: f64, t: f64) -> f64 {
    (t / (kappa - 1.0 + t)).ln()
}

// ---- fixed strike ----

fn fixed_call_closed(model: &ModelSpec, strike: f64) -> Result<f64> {
    let s0 = model.s0();
    let k = strike / s0;
    let cfg = coeff_quad_config(s0);
    match model.jumps {
        JumpSpec::Merton {
            lambda,
            jump_mean,
            jump_sd,
        } => {
            if lambda == 0.0 {
                return Ok(0.0);
            }
            let f = |t: f64| {
                let i = merton_inner(ystar(k, t), jump_mean, jump_sd);
                (s0 * t - strike) * i.i1 + s0 * (1.0 - t) * i.i2
            };
            Ok(lambda * integrate_1d(f, 0.0, 1.0, &cfg)?.value)
        }
        JumpSpec::DoubleExp { lambda, p_up, eta1, .. } => {
            let f = hyp2f1_restricted(eta1 - 1.0, 1.0 / k)?;
            Ok(lambda * p_up * s0 / (eta1 * eta1 - 1.0) * k.powf(1.0 - eta1) * f)
        }
        JumpSpec::Vg(p) => {
            let Cgmy { c, m, .. } = p.cgmy();
            if k == 1.0 {
                return Ok(c * s0 * arctanh(1.0 / (2.0 * m - 1.0))?);
            }
            // li(y0^{-a}) = -E1(a log y0)
            let f = |t: f64| {
                let l = ystar(k, t);
                let e = |a: f64| exp_integral_e1(a * l).unwrap_or(f64::NAN);
                c * ((s0 * t - strike) * e(m) + s0 * (1.0 - t) * e(m - 1.0))
            };
            Ok(integrate_1d(f, 0.0, 1.0, &cfg)?.value)
        }
        JumpSpec::Generic(_) => Err(Error::Unsupported("generic jumps have no closed form".into())),
    }
}

fn fixed_put_closed(model: &ModelSpec, strike: f64) -> Result<f64> {
    let s0 = model.s0();
    let k = strike / s0;
    let cfg = coeff_quad_config(s0);
    match model.jumps {
        JumpSpec::Merton {
            lambda,
            jump_mean,
            jump_sd,
        } => {
            if lambda == 0.0 {
                return Ok(0.0);
            }
            let f = |t: f64| {
                let i = merton_inner(ystar(k, t), jump_mean, jump_sd);
                (strike - s0 * t) * i.i3 - s0 * (1.0 - t) * i.i4
            };
            Ok(lambda * integrate_1d(f, 0.0, k, &cfg)?.value)
        }
        JumpSpec::DoubleExp { lambda, p_up, eta2, .. } => {
            let f = hyp2f1_restricted(eta2, k)?;
            Ok(lambda * (1.0 - p_up) * s0 / ((eta2 + 1.0) * (eta2 + 2.0)) * k.powf(eta2 + 2.0) * f)
        }
        JumpSpec::Vg(p) => {
            let Cgmy { c, g, .. } = p.cgmy();
            if k == 1.0 {
                return Ok(c * s0 * arctanh(1.0 / (2.0 * g + 1.0))?);
            }
            let f = |t: f64| {
                let l = -ystar(k, t);
                let e = |a: f64| exp_integral_e1(a * l).unwrap_or(f64::NAN);
                c * ((strike - s0 * t) * e(g) - s0 * (1.0 - t) * e(g + 1.0))
            };
            Ok(integrate_1d(f, 0.0, k, &cfg)?.value)
        }
        JumpSpec::Generic(_) => Err(Error::Unsupported("generic jumps have no closed form".into())),
    }
}

fn fixed_call_quad(model: &ModelSpec, strike: f64) -> Result<f64> {
    let s0 = model.s0();
    let k = strike / s0;
    let cfg = coeff_quad_config(s0);
    let (_, y_hi) = model.jumps.quad_support(cfg.tail_eps)?;
    if y_hi <= k.ln() {
        return Ok(0.0);
    }
    let e_hi = y_hi.exp();
    let t_max = ((e_hi - k) / (e_hi - 1.0)).min(1.0);
    let nu = density_fn(&model.jumps);
    let bp = model.jumps.breakpoints();
    let r = integrate_2d_iterated(
        |t, y| {
            let ys = ystar(k, t);
            s0 * (1.0 - t) * ys.exp() * (y - ys).exp_m1() * nu(y)
        },
        (0.0, t_max),
        |t| (ystar(k, t), y_hi),
        &bp,
        &cfg,
    )?;
    Ok(r.value)
}

fn fixed_put_quad(model: &ModelSpec, strike: f64) -> Result<f64> {
    let s0 = model.s0();
    let k = strike / s0;
    let cfg = coeff_quad_config(s0);
    let (y_lo, _) = model.jumps.quad_support(cfg.tail_eps)?;
    if y_lo >= k.ln() {
        return Ok(0.0);
    }
    let e_lo = y_lo.exp();
    let t_max = ((k - e_lo) / (1.0 - e_lo)).clamp(0.0, k);
    let nu = density_fn(&model.jumps);
    let bp = model.jumps.breakpoints();
    let r = integrate_2d_iterated(
        |t, y| {
            let ys = ystar(k, t);
            -s0 * (1.0 - t) * ys.exp() * (y - ys).exp_m1() * nu(y)
        },
        (0.0, t_max),
        |t| (y_lo, ystar(k, t)),
        &bp,
        &cfg,
    )?;
    Ok(r.value)
}

fn fixed_coeff(
    model: &ModelSpec,
    putcall: PutCall,
    strike: f64,
    regime: Regime,
    choice: MethodChoice,
) -> Result<AsymCoeff> {
    ensure_assumptions(model)?;
    let method = resolve(choice, &model.jumps, Style::Fixed)?;
    let value = match (putcall, method) {
        (PutCall::Call, Method::ClosedForm) => fixed_call_closed(model, strike)?,
        (PutCall::Call, Method::Quadrature) => fixed_call_quad(model, strike)?,
        (PutCall::Put, Method::ClosedForm) => fixed_put_closed(model, strike)?,
        (PutCall::Put, Method::Quadrature) => fixed_put_quad(model, strike)?,
    };
    Ok(AsymCoeff::new(value, regime, method, Style::Fixed, putcall, strike))
}

/// OTM fixed-strike call coefficient `lim C(T)/T` for `K > S0`.
pub fn otm_call_coeff(model: &ModelSpec, strike: f64, method: MethodChoice) -> Result<AsymCoeff> {
    if !(strike > model.s0()) {
        return Err(Error::Regime(format!(
            "call with K = {strike} <= S0 = {} is not OTM; use the ATM or put coefficient",
            model.s0()
        )));
    }
    fixed_coeff(model, PutCall::Call, strike, Regime::Otm, method)
}

/// OTM fixed-strike put coefficient `lim P(T)/T` for `0 < K < S0`.
pub fn otm_put_coeff(model: &ModelSpec, strike: f64, method: MethodChoice) -> Result<AsymCoeff> {
    if !(strike > 0.0 && strike < model.s0()) {
        return Err(Error::Regime(format!(
            "put with K = {strike} outside (0, S0 = {}) is not OTM; use the ATM or call coefficient",
            model.s0()
        )));
    }
    fixed_coeff(model, PutCall::Put, strike, Regime::Otm, method)
}

/// ATM coefficient `σ(S0)·S0/√(6π)`, shared by calls and puts of both styles.
pub fn atm_coeff(model: &ModelSpec, style: Style, putcall: PutCall) -> Result<AsymCoeff> {
    if !model.jumps.is_compound_poisson() {
        return Err(Error::Unsupported(
            "ATM asymptotics are only available for compound Poisson jumps; use the one-sided VG limits".into(),
        ));
    }
    ensure_assumptions(model)?;
    let s0 = model.s0();
    let value = model.diffusion.sigma_at(s0) * s0 / (6.0 * std::f64::consts::PI).sqrt();
    let strike = match style {
        Style::Fixed => s0,
        Style::Floating => 1.0,
    };
    Ok(AsymCoeff::new(
        value,
        Regime::Atm,
        Method::ClosedForm,
        style,
        putcall,
        strike,
    ))
}

/// One-sided limit at the ATM point of the OTM jump coefficient: `K ↓ S0`
/// for calls and `K ↑ S0` for puts (or `κ ↑ 1` / `κ ↓ 1` for floating
/// strikes). These are limits of OTM formulas, not ATM prices.
pub fn atm_limit_coeff(model: &ModelSpec, style: Style, putcall: PutCall, method: MethodChoice) -> Result<AsymCoeff> {
    match style {
        Style::Fixed => fixed_coeff(model, putcall, model.s0(), Regime::AtmLimit, method),
        Style::Floating => floating_coeff(model, putcall, 1.0, Regime::AtmLimit, method),
    }
}

/// `(call, put)` one-sided ATM limits of the VG coefficients,
/// `C·S0·arctanh(1/(2M-1))` and `C·S0·arctanh(1/(2G+1))`.
pub fn vg_atm_limit_coeffs(model: &ModelSpec) -> Result<(f64, f64)> {
    let JumpSpec::Vg(p) = model.jumps else {
        return Err(Error::Unsupported("VG ATM limits need VG jumps".into()));
    };
    let Cgmy { c, g, m } = p.cgmy();
    let s0 = model.s0();
    Ok((
        c * s0 * arctanh(1.0 / (2.0 * m - 1.0))?,
        c * s0 * arctanh(1.0 / (2.0 * g + 1.0))?,
    ))
}

// ---- floating strike ----

fn floating_closed(model: &ModelSpec, putcall: PutCall, kappa: f64) -> Result<f64> {
    let JumpSpec::Merton {
        lambda,
        jump_mean,
        jump_sd,
    } = model.jumps
    else {
        return Err(Error::Unsupported("floating closed form needs Merton jumps".into()));
    };
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let s0 = model.s0();
    let cfg = coeff_quad_config(s0);
    let r = match putcall {
        PutCall::Call => integrate_1d(
            |t| {
                let i = merton_inner(log_y0(kappa, t), jump_mean, jump_sd);
                (kappa - 1.0 + t) * i.i2 - t * i.i1
            },
            1.0 - kappa,
            1.0,
            &cfg,
        )?,
        PutCall::Put => integrate_1d(
            |t| {
                let i = merton_inner(log_y0(kappa, t), jump_mean, jump_sd);
                t * i.i3 - (kappa - 1.0 + t) * i.i4
            },
            0.0,
            1.0,
            &cfg,
        )?,
    };
    Ok(lambda * s0 * r.value)
}

fn floating_quad(model: &ModelSpec, putcall: PutCall, kappa: f64) -> Result<f64> {
    let s0 = model.s0();
    let cfg = coeff_quad_config(s0);
    let (y_lo, y_hi) = model.jumps.quad_support(cfg.tail_eps)?;
    let nu = density_fn(&model.jumps);
    let bp = model.jumps.breakpoints();
    let integrand = |t: f64, y: f64| s0 * t * (y - log_y0(kappa, t)).exp_m1() * nu(y);
    let r = match putcall {
        PutCall::Call => {
            if y_hi <= 0.0 {
                return Ok(0.0);
            }
            let e_hi = y_hi.exp();
            let t_min = e_hi * (1.0 - kappa) / (e_hi - 1.0);
            if t_min >= 1.0 {
                return Ok(0.0);
            }
            integrate_2d_iterated(integrand, (t_min, 1.0), |t| (log_y0(kappa, t), y_hi), &bp, &cfg)?.value
        }
        PutCall::Put => {
            if y_lo >= 0.0 {
                return Ok(0.0);
            }
            let e_lo = y_lo.exp();
            let t_min = e_lo * (kappa - 1.0) / (1.0 - e_lo);
            if t_min >= 1.0 {
                return Ok(0.0);
            }
            -integrate_2d_iterated(integrand, (t_min, 1.0), |t| (y_lo, log_y0(kappa, t)), &bp, &cfg)?.value
        }
    };
    Ok(r)
}

fn floating_coeff(
    model: &ModelSpec,
    putcall: PutCall,
    kappa: f64,
    regime: Regime,
    choice: MethodChoice,
) -> Result<AsymCoeff> {
    ensure_assumptions(model)?;
    let method = resolve(choice, &model.jumps, Style::Floating)?;
    let value = match method {
        Method::ClosedForm => floating_closed(model, putcall, kappa)?,
        Method::Quadrature => floating_quad(model, putcall, kappa)?,
    };
    Ok(AsymCoeff::new(value, regime, method, Style::Floating, putcall, kappa))
}

/// OTM floating-strike call coefficient for `0 < κ < 1`.
pub fn floating_otm_call_coeff(model: &ModelSpec, kappa: f64, method: MethodChoice) -> Result<AsymCoeff> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Regime(format!("floating call needs 0 < kappa < 1, got {kappa}")));
    }
    floating_coeff(model, PutCall::Call, kappa, Regime::Otm, method)
}

/// OTM floating-strike put coefficient for `κ > 1`.
pub fn floating_otm_put_coeff(model: &ModelSpec, kappa: f64, method: MethodChoice) -> Result<AsymCoeff> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(Error::Regime(format!("floating put needs kappa > 1, got {kappa}")));
    }
    floating_coeff(model, PutCall::Put, kappa, Regime::Otm, method)
}

// ---- European ----

fn european_closed(model: &ModelSpec, strike: f64, putcall: PutCall) -> Result<f64> {
    let s0 = model.s0();
    let lk = (strike / s0).ln();
    let k = strike / s0;
    Ok(match (model.jumps.clone(), putcall) {
        (
            JumpSpec::Merton {
                lambda,
                jump_mean: a,
                jump_sd: d,
            },
            PutCall::Call,
        ) => lambda * (s0 * (a + 0.5 * d * d).exp() * norm_cdf((a + d * d - lk) / d) - strike * norm_cdf((a - lk) / d)),
        (
            JumpSpec::Merton {
                lambda,
                jump_mean: a,
                jump_sd: d,
            },
            PutCall::Put,
        ) => lambda * (strike * norm_cdf((lk - a) / d) - s0 * (a + 0.5 * d * d).exp() * norm_cdf((lk - a - d * d) / d)),
        (JumpSpec::DoubleExp { lambda, p_up, eta1, .. }, PutCall::Call) => {
            lambda * p_up * s0 / (eta1 - 1.0) * k.powf(1.0 - eta1)
        }
        (JumpSpec::DoubleExp { lambda, p_up, eta2, .. }, PutCall::Put) => {
            lambda * (1.0 - p_up) * strike / (eta2 + 1.0) * k.powf(eta2)
        }
        (JumpSpec::Vg(p), PutCall::Call) => {
            let Cgmy { c, m, .. } = p.cgmy();
            c * (s0 * exp_integral_e1((m - 1.0) * lk)? - strike * exp_integral_e1(m * lk)?)
        }
        (JumpSpec::Vg(p), PutCall::Put) => {
            let Cgmy { c, g, .. } = p.cgmy();
            c * (strike * exp_integral_e1(-g * lk)? - s0 * exp_integral_e1(-(g + 1.0) * lk)?)
        }
        (JumpSpec::Generic(_), _) => return Err(Error::Unsupported("generic jumps have no closed form".into())),
    })
}

fn european_quad(model: &ModelSpec, strike: f64, putcall: PutCall) -> Result<f64> {
    let s0 = model.s0();
    let lk = (strike / s0).ln();
    let cfg = coeff_quad_config(s0);
    let (y_lo, y_hi) = model.jumps.quad_support(cfg.tail_eps)?;
    let nu = density_fn(&model.jumps);
    let bp = model.jumps.breakpoints();
    let (lo, hi) = match putcall {
        PutCall::Call => (lk, y_hi),
        PutCall::Put => (y_lo, lk),
    };
    if !(lo < hi) {
        return Ok(0.0);
    }
    let sign = putcall.sign();
    let r = integrate_1d_pieces(|y| sign * strike * (y - lk).exp_m1() * nu(y), lo, hi, &bp, &cfg)?;
    Ok(r.value)
}

/// OTM European coefficient `lim C_E(T)/T = ∫ (S0 e^y - K)^+ ν(dy)` (or the put mirror).
pub fn european_otm_coeff(model: &ModelSpec, strike: f64, putcall: PutCall, method: MethodChoice) -> Result<AsymCoeff> {
    let s0 = model.s0();
    let otm = match putcall {
        PutCall::Call => strike > s0,
        PutCall::Put => strike > 0.0 && strike < s0,
    };
    if !otm {
        return Err(Error::Regime(format!(
            "European {putcall:?} with K = {strike} is not OTM at S0 = {s0}"
        )));
    }
    ensure_assumptions(model)?;
    let method = resolve(method, &model.jumps, Style::Fixed)?;
    let value = match method {
        Method::ClosedForm => european_closed(model, strike, putcall)?,
        Method::Quadrature => european_quad(model, strike, putcall)?,
    };
    Ok(AsymCoeff::new(
        value,
        Regime::Otm,
        method,
        Style::Fixed,
        putcall,
        strike,
    ))
}

/// Short-maturity ratio of Asian to European prices: the ratio of OTM
/// coefficients when `K ≠ S0`, and `1/√3` at the money (compound Poisson
/// jumps only).
pub fn asian_european_ratio(model: &ModelSpec, strike: f64) -> Result<f64> {
    let s0 = model.s0();
    if strike == s0 {
        let asian = atm_coeff(model, Style::Fixed, PutCall::Call)?;
        let sigma = model.diffusion.sigma_at(s0);
        if sigma == 0.0 {
            return Ok(1.0 / 3f64.sqrt());
        }
        let european = sigma * s0 / (2.0 * std::f64::consts::PI).sqrt();
        return Ok(asian.value / european);
    }
    let putcall = if strike > s0 { PutCall::Call } else { PutCall::Put };
    let european = european_otm_coeff(model, strike, putcall, MethodChoice::Auto)?;
    if european.value == 0.0 {
        return Err(Error::Domain {
            function: "asian_european_ratio",
            detail: format!("European coefficient vanishes at K = {strike}"),
        });
    }
    let asian = fixed_coeff(model, putcall, strike, Regime::Otm, MethodChoice::Auto)?;
    Ok(asian.value / european.value)
}

/// Dispatch on the contract: OTM coefficient off the money, ATM coefficient
/// at the money. In-the-money contracts are a regime error.
pub fn coefficient(
    model: &ModelSpec,
    style: Style,
    putcall: PutCall,
    strike: f64,
    method: MethodChoice,
) -> Result<AsymCoeff> {
    let atm_point = match style {
        Style::Fixed => model.s0(),
        Style::Floating => 1.0,
    };
    if strike == atm_point {
        return atm_coeff(model, style, putcall);
    }
    match (style, putcall) {
        (Style::Fixed, PutCall::Call) => otm_call_coeff(model, strike, method),
        (Style::Fixed, PutCall::Put) => otm_put_coeff(model, strike, method),
        (Style::Floating, PutCall::Call) => floating_otm_call_coeff(model, strike, method),
        (Style::Floating, PutCall::Put) => floating_otm_put_coeff(model, strike, method),
    }
}
