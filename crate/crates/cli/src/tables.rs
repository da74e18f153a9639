//! Reference tables: theory decomposition next to fresh Monte Carlo columns.

use anyhow::Result;
use serde_json::json;

use asianjump_core::asymptotics::{atm_limit_coeff, floating_otm_put_coeff, otm_call_coeff, vg_atm_limit_coeffs};
use asianjump_core::mc::mc_price_many;
use asianjump_core::{approx_price, fixtures, Instrument, MCConfig, MethodChoice, PutCall, Style};

use crate::output::{emit_csv, num, Table};
use crate::{TableArgs, TableName};

const WEEK: f64 = 1.0 / 52.0;
const MATURITIES: [f64; 3] = [1.0 / 252.0, 1.0 / 52.0, 1.0 / 12.0];

pub fn table(a: &TableArgs) -> Result<()> {
    let cfg = a.mc.config();
    let (name, table) = match a.name {
        TableName::Mjd => ("mjd", mjd(&cfg)?),
        TableName::Kou => ("kou", kou(&cfg)?),
        TableName::Vg => ("vg", vg(&cfg)?),
        TableName::Float => ("float", float(&cfg)?),
    };
    let params = json!({
        "table": name,
        "paths": cfg.n_paths,
        "steps": cfg.n_steps,
        "seed": cfg.seed,
        "batch_size": cfg.batch_size,
        "antithetic": cfg.antithetic,
    });
    let model = match a.name {
        TableName::Mjd | TableName::Float => "bundled:mjd",
        TableName::Kou => "bundled:kou",
        TableName::Vg => "bundled:vg",
    };
    emit_csv(&table, a.out.as_deref(), "table", Some(model), params)
}

fn mjd(cfg: &MCConfig) -> Result<Table> {
    let m = fixtures::mjd();
    let rows = [
        (960.0, PutCall::Put),
        (980.0, PutCall::Put),
        (1000.0, PutCall::Put),
        (1000.0, PutCall::Call),
        (1020.0, PutCall::Call),
        (1040.0, PutCall::Call),
    ];
    let insts: Vec<_> = rows
        .iter()
        .map(|&(k, pc)| Instrument::fixed(pc, k, WEEK))
        .collect::<Result<_, _>>()?;
    let mc = mc_price_many(&m, &insts, cfg)?;
    let mut t = Table::new(vec![
        "K",
        "putcall",
        "mc_price",
        "mc_std_err",
        "coefficient",
        "jump_term",
        "diffusive",
        "total",
    ]);
    for (inst, r) in insts.iter().zip(mc) {
        let p = approx_price(&m, inst)?;
        let (pc, coeff) = match inst.putcall {
            PutCall::Call => ("call", "a_C"),
            PutCall::Put => ("put", "a_P"),
        };
        t.push(vec![
            num(inst.strike),
            pc.into(),
            num(r.price),
            num(r.std_err),
            coeff.into(),
            num(p.jump_term),
            num(p.diffusive),
            num(p.total),
        ]);
    }
    Ok(t)
}

fn kou(cfg: &MCConfig) -> Result<Table> {
    let ks = [0.9, 0.95, 1.0, 1.05, 1.1];
    let mut t = Table::new(vec![
        "sigma",
        "k",
        "theory",
        "theory_call_side",
        "theory_printed",
        "mc_price",
        "mc_std_err",
    ]);
    for sigma in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5] {
        let m = fixtures::kou(sigma);
        let s0 = m.s0();
        // one MC price per strike; with r = q = 0 the ATM call and put coincide
        let insts: Vec<_> = ks
            .iter()
            .map(|&k| Instrument::fixed(if k < 1.0 { PutCall::Put } else { PutCall::Call }, k * s0, WEEK))
            .collect::<Result<_, _>>()?;
        let mc = mc_price_many(&m, &insts, cfg)?;
        for ((k, inst), r) in ks.iter().zip(&insts).zip(mc) {
            let (theory, call_side, printed) = if *k == 1.0 {
                let put = approx_price(&m, &Instrument::fixed(PutCall::Put, s0, WEEK)?)?.total;
                let call = approx_price(&m, &Instrument::fixed(PutCall::Call, s0, WEEK)?)?.total;
                let d = if sigma == 0.0 { 3 } else { 2 };
                (put, num(call), format!("{put:.d$}/{call:.d$}"))
            } else {
                let p = approx_price(&m, inst)?.total;
                (p, String::new(), format!("{p:.3}"))
            };
            t.push(vec![
                num(sigma),
                num(*k),
                num(theory),
                call_side,
                printed,
                num(r.price),
                num(r.std_err),
            ]);
        }
    }
    Ok(t)
}

const SWEEP_HEADER: [&str; 6] = ["mc_T252", "se_T252", "mc_T52", "se_T52", "mc_T12", "se_T12"];

/// `scale·price/T` and its error for each maturity of the sweep.
fn sweep(
    model: &asianjump_core::ModelSpec,
    make: impl Fn(f64) -> Result<Instrument>,
    strikes: &[f64],
    scale: f64,
    cfg: &MCConfig,
) -> Result<Vec<Vec<String>>> {
    let mut cols = vec![Vec::new(); strikes.len()];
    for t in MATURITIES {
        let insts: Vec<_> = strikes
            .iter()
            .map(|&k| make(k).and_then(|i| Ok(Instrument::new(i.style, i.putcall, i.strike, t)?)))
            .collect::<Result<_>>()?;
        for (c, r) in cols.iter_mut().zip(mc_price_many(model, &insts, cfg)?) {
            c.push(num(scale * r.price / t));
            c.push(num(scale * r.std_err / t));
        }
    }
    Ok(cols)
}

fn vg(cfg: &MCConfig) -> Result<Table> {
    let m = fixtures::vg();
    let s0 = m.s0();
    let ks = [1.00, 1.02, 1.04, 1.06, 1.08, 1.10, 1.20];
    let mut header = vec!["k", "short_maturity"];
    header.extend(SWEEP_HEADER);
    let mut t = Table::new(header);
    let cols = sweep(
        &m,
        |k| Ok(Instrument::fixed(PutCall::Call, k * s0, 1.0)?),
        &ks,
        1.0,
        cfg,
    )?;
    for (k, c) in ks.iter().zip(cols) {
        // at k = 1 the coefficient is the one-sided limit from above
        let a = if *k == 1.0 {
            vg_atm_limit_coeffs(&m)?.0
        } else {
            otm_call_coeff(&m, k * s0, MethodChoice::Auto)?.value
        };
        let mut row = vec![num(*k), num(a)];
        row.extend(c);
        t.push(row);
    }
    Ok(t)
}

fn float(cfg: &MCConfig) -> Result<Table> {
    let m = fixtures::mjd();
    let kappas = [1.00, 1.02, 1.04, 1.06, 1.08, 1.10, 1.12, 1.14, 1.16, 1.18, 1.20];
    let mut header = vec!["kappa", "short_maturity"];
    header.extend(SWEEP_HEADER);
    let mut t = Table::new(header);
    // 1000·P/T per unit spot
    let scale = 1000.0 / m.s0();
    let cols = sweep(
        &m,
        |k| Ok(Instrument::floating(PutCall::Put, k, 1.0)?),
        &kappas,
        scale,
        cfg,
    )?;
    for (k, c) in kappas.iter().zip(cols) {
        let a = if *k == 1.0 {
            atm_limit_coeff(&m, Style::Floating, PutCall::Put, MethodChoice::Auto)?.value
        } else {
            floating_otm_put_coeff(&m, *k, MethodChoice::Auto)?.value
        };
        let mut row = vec![num(*k), num(a * scale)];
        row.extend(c);
        t.push(row);
    }
    Ok(t)
}
