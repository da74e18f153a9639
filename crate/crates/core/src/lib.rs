#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Short-maturity asymptotics, an analytical approximation and a Monte Carlo
//! engine for fixed- and floating-strike Asian options under local
//! volatility with jumps.

pub mod approx;
pub mod asymptotics;
pub mod error;
pub mod fixtures;
pub mod mc;
pub mod models;
pub mod quadrature;
pub mod specfun;

pub use approx::{
    approx_price, avg_forward, bs_asian_diffusive, implied_vol, sigma_ln, ApproxPrice, SideUsed, SmilePoint,
};
pub use asymptotics::{AsymCoeff, Method, MethodChoice, Regime};
pub use error::{Error, Result};
pub use mc::{mc_price, MCConfig, MCResult};
pub use models::{DiffusionSpec, Instrument, JumpSpec, MarketSpec, ModelSpec, PutCall, Style};
