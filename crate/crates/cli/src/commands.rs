use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use asianjump_core::approx::{approx_price_branch, Branch};
use asianjump_core::asymptotics::{atm_coeff, atm_limit_coeff, coefficient};
use asianjump_core::mc::{convergence_study, mc_price_many};
use asianjump_core::{
    approx_price, implied_vol, mc_price, ApproxPrice, AsymCoeff, Error, Instrument, MCResult, MarketSpec, ModelSpec,
    PutCall, Style,
};

use crate::output::{emit_csv, emit_json, load_model, num, opt_num, Table};
use crate::{AsymArgs, ContractArgs, ConvergenceArgs, IvolArgs, McArgs, PriceArgs, RegimeArg, SmileArgs, SourceArg};

fn style_name(s: Style) -> &'static str {
    match s {
        Style::Fixed => "fixed",
        Style::Floating => "floating",
    }
}

fn pc_name(p: PutCall) -> &'static str {
    match p {
        PutCall::Call => "call",
        PutCall::Put => "put",
    }
}

fn atm_point(model: &ModelSpec, style: Style) -> f64 {
    match style {
        Style::Fixed => model.s0(),
        Style::Floating => 1.0,
    }
}

/// `(style, putcall, K or κ)` from the contract flags.
fn contract(c: &ContractArgs) -> Result<(Style, PutCall, f64)> {
    let style = Style::from(c.style);
    let strike = match style {
        Style::Fixed => c
            .strike
            .ok_or_else(|| anyhow!("--strike is required for fixed-strike contracts"))?,
        Style::Floating => c
            .kappa
            .ok_or_else(|| anyhow!("--kappa is required for floating-strike contracts"))?,
    };
    Ok((style, c.putcall.into(), strike))
}

/// Adds a pointer to the command line that does apply.
fn regime_hint(e: Error, model: &ModelSpec, style: Style, putcall: PutCall, strike: f64) -> anyhow::Error {
    if !matches!(e, Error::Regime(_) | Error::Unsupported(_)) {
        return e.into();
    }
    let atm = atm_point(model, style);
    let flag = match style {
        Style::Fixed => "--strike",
        Style::Floating => "--kappa",
    };
    let hint = if strike == atm && !model.jumps.is_compound_poisson() {
        format!("at the money this model has only one-sided limits: run `asianjump asym --regime atm-limit --style {} --putcall {}`", style_name(style), pc_name(putcall))
    } else if strike == atm {
        format!("run `asianjump asym --regime atm {flag} {strike}` or `--regime atm-limit`")
    } else {
        // fixed calls and floating puts are OTM above the money
        let otm_above = matches!(
            (style, putcall),
            (Style::Fixed, PutCall::Call) | (Style::Floating, PutCall::Put)
        );
        let above = strike > atm;
        if otm_above != above {
            let other = match putcall {
                PutCall::Call => "put",
                PutCall::Put => "call",
            };
            format!("this contract is in the money; the OTM side is `asianjump asym --style {} --putcall {other} {flag} {strike}`", style_name(style))
        } else {
            "try `--method quad`".to_string()
        }
    };
    anyhow!("{e}\nhint: {hint}")
}

pub fn asym(a: &AsymArgs) -> Result<()> {
    let (model, path) = load_model(&a.model.model)?;
    let (style, putcall, strike) = contract(&a.contract)?;
    let atm = atm_point(&model, style);
    let regime = a
        .regime
        .unwrap_or(if strike == atm { RegimeArg::Atm } else { RegimeArg::Otm });
    let result: asianjump_core::Result<AsymCoeff> = match regime {
        RegimeArg::Otm if strike == atm => Err(Error::Regime(format!("strike {strike} is at the money"))),
        RegimeArg::Otm => coefficient(&model, style, putcall, strike, a.method.into()),
        RegimeArg::Atm if strike != atm => {
            bail!("--regime atm needs the strike at the money ({atm}), got {strike}")
        }
        RegimeArg::Atm => atm_coeff(&model, style, putcall),
        RegimeArg::AtmLimit => atm_limit_coeff(&model, style, putcall, a.method.into()),
    };
    let coeff = result.map_err(|e| regime_hint(e, &model, style, putcall, strike))?;
    let params = json!({ "style": style_name(style), "putcall": pc_name(putcall), "strike": strike });
    emit_json(&coeff, a.out.as_deref(), "asym", Some(&path), params)
}

#[derive(Serialize)]
struct PriceOut {
    putcall: PutCall,
    strike: f64,
    maturity: f64,
    #[serde(flatten)]
    price: ApproxPrice,
    /// At the money: totals from the call-side and put-side formulas.
    #[serde(skip_serializing_if = "Option::is_none")]
    atm_call_side: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    atm_put_side: Option<f64>,
}

pub fn price(a: &PriceArgs) -> Result<()> {
    let (model, path) = load_model(&a.model.model)?;
    let inst = Instrument::fixed(a.putcall.into(), a.strike, a.maturity)?;
    let price = approx_price(&model, &inst)?;
    let (mut atm_call_side, mut atm_put_side) = (None, None);
    if a.strike == model.s0() {
        atm_call_side = Some(approx_price_branch(&model, &inst, Branch::CallSide)?.total);
        atm_put_side = Some(approx_price_branch(&model, &inst, Branch::PutSide)?.total);
    }
    let out = PriceOut {
        putcall: inst.putcall,
        strike: a.strike,
        maturity: a.maturity,
        price,
        atm_call_side,
        atm_put_side,
    };
    let params = json!({ "putcall": pc_name(inst.putcall), "strike": a.strike, "T": a.maturity });
    emit_json(&out, a.out.as_deref(), "price", Some(&path), params)
}

#[derive(Serialize)]
struct McOut {
    instrument: Instrument,
    #[serde(flatten)]
    result: MCResult,
    scaled_price: f64,
    scaled_std_err: f64,
}

fn mc_params(cfg: &asianjump_core::MCConfig) -> serde_json::Value {
    json!({ "paths": cfg.n_paths, "steps": cfg.n_steps, "seed": cfg.seed, "batch_size": cfg.batch_size, "antithetic": cfg.antithetic })
}

pub fn mc(a: &McArgs) -> Result<()> {
    let (model, path) = load_model(&a.model.model)?;
    let (style, putcall, strike) = contract(&a.contract)?;
    let inst = Instrument::new(style, putcall, strike, a.maturity)?;
    let cfg = a.mc.config();
    let result = mc_price(&model, &inst, &cfg)?;
    let out = McOut {
        instrument: inst,
        result,
        scaled_price: result.price / a.maturity,
        scaled_std_err: result.std_err / a.maturity,
    };
    let mut params = mc_params(&cfg);
    params["instrument"] = serde_json::to_value(inst)?;
    emit_json(&out, a.out.as_deref(), "mc", Some(&path), params)
}

#[derive(Serialize)]
struct IvolOut {
    implied_vol: f64,
    price: f64,
    strike: f64,
    maturity: f64,
    putcall: PutCall,
}

pub fn ivol(a: &IvolArgs) -> Result<()> {
    let market = MarketSpec::new(a.s0, a.r, a.q)?;
    let putcall = a.putcall.into();
    let v = implied_vol(a.price, &market, a.strike, a.maturity, putcall)?;
    let out = IvolOut {
        implied_vol: v,
        price: a.price,
        strike: a.strike,
        maturity: a.maturity,
        putcall,
    };
    let params = json!({ "price": a.price, "strike": a.strike, "T": a.maturity, "putcall": pc_name(putcall), "s0": a.s0, "r": a.r, "q": a.q });
    emit_json(&out, a.out.as_deref(), "ivol", None, params)
}

/// Strike grid in `k = K/S0` with the point nearest 1 snapped onto it.
fn k_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        bail!("need 0 < k-min < k-max and n-points >= 2");
    }
    Ok((0..n)
        .map(|i| {
            let k = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            if (k - 1.0).abs() < 1e-9 {
                1.0
            } else {
                k
            }
        })
        .collect())
}

pub fn smile(a: &SmileArgs) -> Result<()> {
    let (model, path) = load_model(&a.model.model)?;
    let s0 = model.s0();
    let t = a.maturity;
    // call side above the money, put side below, both at k = 1
    let mut insts = Vec::new();
    for k in k_grid(a.k_min, a.k_max, a.n_points)? {
        if k >= 1.0 {
            insts.push((k, Instrument::fixed(PutCall::Call, k * s0, t)?));
        }
        if k <= 1.0 {
            insts.push((k, Instrument::fixed(PutCall::Put, k * s0, t)?));
        }
    }
    let prices: Vec<f64> = match a.source {
        SourceArg::Approx => insts
            .iter()
            .map(|(_, i)| approx_price(&model, i).map(|p| p.total))
            .collect::<asianjump_core::Result<_>>()?,
        SourceArg::Mc => {
            let only: Vec<Instrument> = insts.iter().map(|x| x.1).collect();
            mc_price_many(&model, &only, &a.mc.config())?
                .iter()
                .map(|r| r.price)
                .collect()
        }
    };
    let mut table = Table::new(vec!["k", "implied_vol", "putcall", "price"]);
    let mut misses = 0;
    for ((k, inst), price) in insts.iter().zip(prices) {
        let vol = match implied_vol(price, &model.market, inst.strike, t, inst.putcall) {
            Ok(v) => Some(v),
            Err(Error::NoSolution(msg)) => {
                log::warn!("k = {k}: {msg}");
                misses += 1;
                None
            }
            Err(e) => return Err(e.into()),
        };
        table.push(vec![num(*k), opt_num(vol), pc_name(inst.putcall).into(), num(price)]);
    }
    if misses > 0 {
        eprintln!("warning: {misses} point(s) without an implied volatility");
    }
    let source = match a.source {
        SourceArg::Approx => "approx",
        SourceArg::Mc => "mc",
    };
    let mut params = json!({ "T": t, "k_min": a.k_min, "k_max": a.k_max, "n_points": a.n_points, "source": source, "no_solution": misses });
    if let SourceArg::Mc = a.source {
        params["mc"] = mc_params(&a.mc.config());
    }
    emit_csv(&table, a.out.as_deref(), "smile", Some(&path), params)
}

pub fn convergence(a: &ConvergenceArgs) -> Result<()> {
    let (model, path) = load_model(&a.model.model)?;
    let (style, putcall, strike) = contract(&a.contract)?;
    let inst = Instrument::new(style, putcall, strike, 1.0)?;
    let cfg = a.mc.config();
    let rows = convergence_study(&model, &inst, &a.maturities, &cfg)?;
    // the OTM limit of price/T, when the contract has one
    let asymptote = if strike != atm_point(&model, style) {
        Some(
            coefficient(&model, style, putcall, strike, asianjump_core::MethodChoice::Auto)
                .context("asymptotic coefficient")?
                .value,
        )
    } else {
        None
    };
    let mut table = Table::new(vec![
        "maturity",
        "scaled_price",
        "scaled_std_err",
        "price",
        "std_err",
        "asymptote",
    ]);
    for r in rows {
        table.push(vec![
            num(r.maturity),
            num(r.scaled_price),
            num(r.scaled_std_err),
            num(r.result.price),
            num(r.result.std_err),
            opt_num(asymptote),
        ]);
    }
    let mut params = mc_params(&cfg);
    params["style"] = style_name(style).into();
    params["putcall"] = pc_name(putcall).into();
    params["strike"] = strike.into();
    params["maturities"] = a.maturities.clone().into();
    emit_csv(&table, a.out.as_deref(), "convergence", Some(&path), params)
}
