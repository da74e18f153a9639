//! Special functions used by the closed-form short-maturity coefficients.
//!
//! Only the real-argument branches the coefficients actually touch are
//! provided: `li` on `[0, 1)`, `E1` on `(0, ∞)` and `₂F₁(1, b; b + 3; z)` on
//! `[0, 1]`.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Termination controls for series and continued-fraction evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunConfig {
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for SpecFunConfig {
    fn default() -> Self {
        Self {
            tol: 1e-16,
            max_terms: 100_000,
        }
    }
}

impl SpecFunConfig {
    pub fn new(tol: f64, max_terms: usize) -> Result<Self> {
        if !(tol > 0.0 && tol <= 1e-6) {
            return Err(crate::error::invalid("tol", "must lie in (0, 1e-6]"));
        }
        if max_terms < 100 {
            return Err(crate::error::invalid("max_terms", "must be at least 100"));
        }
        Ok(Self { tol, max_terms })
    }
}

/// Standard normal cumulative distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    exp_integral_e1_with(x, &SpecFunConfig::default())
}

pub fn exp_integral_e1_with(x: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            function: "E1",
            detail: format!("x = {x} must be positive"),
        });
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= 1.0 {
        // E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k k!)
        let mut sum = 0.0;
        let mut fact_term = 1.0; // (-x)^k / k!
        for k in 1..=cfg.max_terms {
            fact_term *= -x / k as f64;
            let term = fact_term / k as f64;
            sum += term;
            if term.abs() <= cfg.tol * sum.abs().max(f64::MIN_POSITIVE) {
                return Ok(-EULER_GAMMA - x.ln() - sum);
            }
        }
        Err(Error::NonConvergence {
            estimate: -EULER_GAMMA - x.ln() - sum,
            error: fact_term.abs(),
        })
    } else {
        // Modified Lentz evaluation of the continued fraction
        // E1(x) = e^{-x} / (x + 1 - 1² / (x + 3 - 2² / (x + 5 - ...)))
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=cfg.max_terms {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() <= cfg.tol.max(f64::EPSILON) {
                return Ok(h * (-x).exp());
            }
        }
        Err(Error::NonConvergence {
            estimate: h * (-x).exp(),
            error: f64::NAN,
        })
    }
}

/// Logarithmic integral `li(z) = ∫_0^z dt / ln t` on `0 ≤ z < 1`.
///
/// Computed as `li(z) = Ei(ln z) = -E1(-ln z)`.
pub fn log_integral(z: f64) -> Result<f64> {
    log_integral_with(z, &SpecFunConfig::default())
}

pub fn log_integral_with(z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::Domain {
            function: "li",
            detail: format!("z = {z} must satisfy 0 <= z < 1"),
        });
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let x = -z.ln();
    Ok(-exp_integral_e1_with(x, cfg)?)
}

/// Digamma function for positive real arguments.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli tail: 1/12, -1/120, 1/252, -1/240, 1/132, -691/32760, 1/12
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    acc + x.ln() - 0.5 * inv - tail
}

/// Gauss hypergeometric function restricted to `₂F₁(1, b; b + 3; z)` with
/// `b > 0` and `0 ≤ z ≤ 1`.
///
/// The defining series is used for `z ≤ 0.9`. Closer to `z = 1` the series
/// converges only algebraically, so the logarithmic continuation for
/// `c - a - b = 2` in powers of `1 - z` takes over.
pub fn hyp2f1_restricted(b: f64, z: f64) -> Result<f64> {
    hyp2f1_restricted_with(b, z, &SpecFunConfig::default())
}

pub fn hyp2f1_restricted_with(b: f64, z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Domain {
            function: "2F1(1,b;b+3;z)",
            detail: format!("b = {b} must be positive"),
        });
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain {
            function: "2F1(1,b;b+3;z)",
            detail: format!("z = {z} must lie in [0, 1]"),
        });
    }
    if z == 1.0 {
        return Ok(0.5 * (b + 2.0));
    }
    if z <= 0.9 {
        hyp2f1_series(b, z, cfg)
    } else {
        hyp2f1_near_one(b, 1.0 - z, cfg)
    }
}

fn hyp2f1_series(b: f64, z: f64, cfg: &SpecFunConfig) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..cfg.max_terms {
        let n = n as f64;
        let ratio = (b + n) / (b + 3.0 + n) * z;
        term *= ratio;
        sum += term;
        // remaining terms are bounded by a geometric tail with ratio < z
        if term <= cfg.tol * sum * (1.0 - z) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        estimate: sum,
        error: term / (1.0 - z),
    })
}

fn hyp2f1_near_one(b: f64, w: f64, cfg: &SpecFunConfig) -> Result<f64> {
    // F = (b+2)/2 (1 - b w)
    //   - w² b(b+1)(b+2)/2 Σ_n (b+2)_n/n! w^n [ln w - ψ(n+1) + ψ(b+n+2)]
    let ln_w = w.ln();
    let mut psi_n1 = -EULER_GAMMA;
    let mut psi_bn2 = digamma(b + 2.0);
    let mut poch = 1.0;
    let mut sum = 0.0;
    for n in 0..cfg.max_terms {
        let nf = n as f64;
        let term = poch * (ln_w - psi_n1 + psi_bn2);
        sum += term;
        let next_ratio = (b + 2.0 + nf) / (nf + 1.0) * w;
        if next_ratio < 1.0 && term.abs() <= cfg.tol * sum.abs() {
            let leading = 0.5 * (b + 2.0) * (1.0 - b * w);
            return Ok(leading - 0.5 * w * w * b * (b + 1.0) * (b + 2.0) * sum);
        }
        poch *= next_ratio;
        psi_n1 += 1.0 / (nf + 1.0);
        psi_bn2 += 1.0 / (b + nf + 2.0);
    }
    Err(Error::NonConvergence {
        estimate: sum,
        error: f64::NAN,
    })
}

/// Inverse hyperbolic tangent on `|x| < 1`.
pub fn arctanh(x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::Domain {
            function: "arctanh",
            detail: format!("|x| = {} must be < 1", x.abs()),
        });
    }
    Ok(0.5 * (x.ln_1p() - (-x).ln_1p()))
}
