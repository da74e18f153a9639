//! `asianjump`: short-maturity asymptotics, approximations and Monte Carlo
//! prices for Asian options under jump models.

mod commands;
mod output;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use asianjump_core::{MCConfig, MethodChoice, PutCall, Style};

#[derive(Parser)]
#[command(
    name = "asianjump",
    version,
    about = "Asian option pricing under jump diffusions and VG"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Short-maturity coefficient (price per T, or per √T at the money).
    Asym(AsymArgs),
    /// Analytical approximation of a fixed-strike price.
    Price(PriceArgs),
    /// Monte Carlo price with standard error.
    Mc(McArgs),
    /// Black-form implied volatility with the Asian forward.
    Ivol(IvolArgs),
    /// Regenerate a reference table as CSV.
    Table(TableArgs),
    /// Implied-volatility smile over a strike grid.
    Smile(SmileArgs),
    /// Monte Carlo maturity sweep of price/T.
    Convergence(ConvergenceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum StyleArg {
    Fixed,
    Floating,
}

impl From<StyleArg> for Style {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Fixed => Style::Fixed,
            StyleArg::Floating => Style::Floating,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PutCallArg {
    Call,
    Put,
}

impl From<PutCallArg> for PutCall {
    fn from(p: PutCallArg) -> Self {
        match p {
            PutCallArg::Call => PutCall::Call,
            PutCallArg::Put => PutCall::Put,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Closed,
    Quad,
}

impl From<MethodArg> for MethodChoice {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => MethodChoice::Auto,
            MethodArg::Closed => MethodChoice::ClosedForm,
            MethodArg::Quad => MethodChoice::Quadrature,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Otm,
    Atm,
    /// One-sided limit of the OTM jump coefficient at the money.
    AtmLimit,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum TableName {
    Mjd,
    Kou,
    Vg,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SourceArg {
    Approx,
    Mc,
}

#[derive(Args)]
pub struct ModelArg {
    /// Model document (JSON) or bundled name: mjd, kou, vg.
    #[arg(long, default_value = "mjd")]
    pub model: String,
}

#[derive(Args)]
pub struct ContractArgs {
    #[arg(long, value_enum, default_value = "fixed")]
    pub style: StyleArg,
    #[arg(long, value_enum, default_value = "call")]
    pub putcall: PutCallArg,
    /// Fixed strike K.
    #[arg(long, conflicts_with = "kappa")]
    pub strike: Option<f64>,
    /// Floating strike multiplier κ.
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Args)]
pub struct McFlags {
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub antithetic: bool,
}

impl McFlags {
    pub fn config(&self) -> MCConfig {
        MCConfig {
            n_paths: self.paths,
            n_steps: self.steps,
            seed: self.seed,
            antithetic: self.antithetic,
            threads: output::thread_cap(),
            ..MCConfig::default()
        }
    }
}

#[derive(Args)]
pub struct AsymArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub contract: ContractArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    /// Defaults to atm at the money and otm elsewhere.
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PriceArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value = "call")]
    pub putcall: PutCallArg,
    #[arg(long)]
    pub strike: f64,
    #[arg(long = "T")]
    pub maturity: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct McArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub contract: ContractArgs,
    #[arg(long = "T")]
    pub maturity: f64,
    #[command(flatten)]
    pub mc: McFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct IvolArgs {
    #[arg(long)]
    pub price: f64,
    #[arg(long)]
    pub strike: f64,
    #[arg(long = "T")]
    pub maturity: f64,
    #[arg(long, value_enum, default_value = "call")]
    pub putcall: PutCallArg,
    #[arg(long, default_value_t = 1000.0)]
    pub s0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub q: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct TableArgs {
    #[arg(value_enum)]
    pub name: TableName,
    #[command(flatten)]
    pub mc: McFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SmileArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long = "T")]
    pub maturity: f64,
    #[arg(long, default_value_t = 0.9)]
    pub k_min: f64,
    #[arg(long, default_value_t = 1.1)]
    pub k_max: f64,
    #[arg(long, default_value_t = 21)]
    pub n_points: usize,
    #[arg(long, value_enum, default_value = "approx")]
    pub source: SourceArg,
    #[command(flatten)]
    pub mc: McFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub contract: ContractArgs,
    /// Comma-separated maturities in years.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0 / 252.0, 1.0 / 52.0, 1.0 / 12.0])]
    pub maturities: Vec<f64>,
    #[command(flatten)]
    pub mc: McFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Asym(a) => commands::asym(&a),
        Command::Price(a) => commands::price(&a),
        Command::Mc(a) => commands::mc(&a),
        Command::Ivol(a) => commands::ivol(&a),
        Command::Table(a) => tables::table(&a),
        Command::Smile(a) => commands::smile(&a),
        Command::Convergence(a) => commands::convergence(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
