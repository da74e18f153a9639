//! Monte Carlo pricing of Asian options under local volatility with jumps.
//!
//! The jump-free factor `Ŝ` is stepped by log-Euler on a uniform grid;
//! compound Poisson jumps are drawn per path (Poisson count, uniform
//! times) and applied at the end of the step that contains them; VG jumps
//! come from per-step gamma subordinator increments. The average is the
//! trapezoid rule over the `N + 1` grid values.
//!
//! Paths are split into fixed-size batches. Batch `b` draws from a ChaCha8
//! generator seeded with `seed` on stream `b`, and batch statistics are
//! merged in batch order, so results do not depend on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::models::{compensator, CpDensity, DiffusionSpec, GenericCp, Instrument, JumpSpec, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MCConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Paths per work unit; part of the reproducibility key.
    pub batch_size: usize,
    /// Pair each path with its Brownian mirror image (jumps shared).
    pub antithetic: bool,
    /// Worker threads, 0 for the global rayon pool.
    pub threads: usize,
}

impl Default for MCConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            n_steps: 100,
            seed: 42,
            batch_size: 4096,
            antithetic: false,
            threads: 0,
        }
    }
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 1000 {
            return Err(invalid("n_paths", "need at least 1000 paths"));
        }
        if self.n_steps < 2 {
            return Err(invalid("n_steps", "need at least 2 time steps"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCResult {
    pub price: f64,
    pub std_err: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

/// One simulated path: trapezoid average, terminal value and number of
/// compound Poisson jumps (always 0 for VG).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub average: f64,
    pub terminal: f64,
    pub n_jumps: u32,
}

// ---- jump samplers ----

#[derive(Debug, Clone)]
enum SizeSampler {
    Normal {
        mean: f64,
        sd: f64,
    },
    DoubleExp {
        p_up: f64,
        up: Exp<f64>,
        down: Exp<f64>,
    },
    /// Inverse CDF by linear interpolation on a tabulated grid.
    Table {
        y: Vec<f64>,
        cdf: Vec<f64>,
    },
}

impl SizeSampler {
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Self::DoubleExp { p_up, up, down } => {
                let u: f64 = rng.random();
                if u < *p_up {
                    up.sample(rng)
                } else {
                    -down.sample(rng)
                }
            }
            Self::Table { y, cdf } => {
                let u: f64 = rng.random();
                let i = cdf.partition_point(|&c| c < u).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[i - 1], cdf[i]);
                let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                y[i - 1] + w * (y[i] - y[i - 1])
            }
        }
    }
}

fn table_sampler(g: &GenericCp) -> Result<SizeSampler> {
    let (lo, hi) = match g.density() {
        CpDensity::Tabulated { y, .. } => (y[0], y[y.len() - 1]),
        CpDensity::Function(_) => {
            let up = crate::quadrature::truncate_upper(g.decay_up(), 1e-12)?;
            let down = crate::quadrature::truncate_upper(g.decay_down(), 1e-12)?;
            (-down, up)
        }
    };
    let n = 8192;
    let h = (hi - lo) / n as f64;
    let y: Vec<f64> = (0..=n).map(|i| lo + h * i as f64).collect();
    let mut cdf = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    cdf.push(0.0);
    for w in y.windows(2) {
        acc += 0.5 * h * (g.pdf(w[0]) + g.pdf(w[1]));
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::Sampler(
            "generic jump density has zero mass on its support".into(),
        ));
    }
    cdf.iter_mut().for_each(|c| *c /= acc);
    Ok(SizeSampler::Table { y, cdf })
}

#[derive(Debug, Clone)]
enum JumpGen {
    None,
    Cp { lambda: f64, sizes: SizeSampler },
    Vg { nu: f64, theta: f64, sigma: f64 },
}

/// Everything a path needs, precomputed once per run.
struct PathModel<'a> {
    s0: f64,
    t: f64,
    /// `r - q - μ`
    drift: f64,
    diffusion: &'a DiffusionSpec,
    jumps: JumpGen,
}

impl<'a> PathModel<'a> {
    fn new(model: &'a ModelSpec, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid("maturity", "T must be positive"));
        }
        let mu = compensator(&model.jumps)?;
        let jumps = match &model.jumps {
            JumpSpec::Merton {
                lambda,
                jump_mean,
                jump_sd,
            } => JumpGen::Cp {
                lambda: *lambda,
                sizes: SizeSampler::Normal {
                    mean: *jump_mean,
                    sd: *jump_sd,
                },
            },
            JumpSpec::DoubleExp {
                lambda,
                p_up,
                eta1,
                eta2,
            } => JumpGen::Cp {
                lambda: *lambda,
                sizes: SizeSampler::DoubleExp {
                    p_up: *p_up,
                    up: Exp::new(*eta1).map_err(|e| Error::Sampler(e.to_string()))?,
                    down: Exp::new(*eta2).map_err(|e| Error::Sampler(e.to_string()))?,
                },
            },
            JumpSpec::Generic(g) => JumpGen::Cp {
                lambda: g.lambda(),
                sizes: table_sampler(g)?,
            },
            JumpSpec::Vg(p) => JumpGen::Vg {
                nu: p.nu,
                theta: p.theta,
                sigma: p.sigma_vg,
            },
        };
        let jumps = match jumps {
            JumpGen::Cp { lambda: 0.0, .. } => JumpGen::None,
            j => j,
        };
        Ok(Self {
            s0: model.s0(),
            t,
            drift: model.market.carry() - mu,
            diffusion: &model.diffusion,
            jumps,
        })
    }

    fn gamma_for(&self, dt: f64) -> Result<Option<Gamma<f64>>> {
        match self.jumps {
            JumpGen::Vg { nu, .. } => {
                let shape = dt / nu;
                if !(shape > 1e-300) {
                    return Err(Error::Sampler(format!(
                        "gamma shape dt/nu = {shape:e} underflows; use fewer steps or a larger dt/nu"
                    )));
                }
                Gamma::new(shape, nu)
                    .map(Some)
                    .map_err(|e| Error::Sampler(format!("gamma(shape {shape:e}, scale {nu}): {e}; use a larger dt/nu")))
            }
            _ => Ok(None),
        }
    }
}

/// Log-Euler state of one discretization of `Ŝ` plus its running average.
struct Track {
    dt: f64,
    log_shat: f64,
    jump_log: f64,
    sum: f64,
    /// pending log-jump to apply at each grid point (index = step end)
    pending: Vec<f64>,
}

impl Track {
    fn new(pm: &PathModel, n_steps: usize) -> Self {
        Self {
            dt: pm.t / n_steps as f64,
            log_shat: pm.s0.ln(),
            jump_log: 0.0,
            sum: 0.5 * pm.s0,
            pending: vec![0.0; n_steps + 1],
        }
    }

    fn reset(&mut self, s0: f64) {
        self.log_shat = s0.ln();
        self.jump_log = 0.0;
        self.sum = 0.5 * s0;
        self.pending.iter_mut().for_each(|p| *p = 0.0);
    }

    fn add_jump(&mut self, time: f64, size: f64) {
        let n = self.pending.len() - 1;
        let step = ((time / self.dt) as usize).min(n - 1);
        self.pending[step + 1] += size;
    }

    /// Advance one step with standard-normal draw `z` (for `Ŝ`) and VG
    /// log-increment `dx`, then fold the new grid value into the average.
    fn step(&mut self, pm: &PathModel, i: usize, z: f64, dx: f64, last: bool) {
        let sigma = pm.diffusion.sigma_at(self.log_shat.exp());
        self.log_shat += (pm.drift - 0.5 * sigma * sigma) * self.dt + sigma * self.dt.sqrt() * z;
        self.jump_log += self.pending[i] + dx;
        let s = (self.log_shat + self.jump_log).exp();
        self.sum += if last { 0.5 * s } else { s };
    }

    fn finish(&self, n_jumps: u32) -> PathSample {
        let n = (self.pending.len() - 1) as f64;
        PathSample {
            average: self.sum / n,
            terminal: (self.log_shat + self.jump_log).exp(),
            n_jumps,
        }
    }
}

/// Simulates on a grid of `n_steps·refine` steps and, when `refine > 1`,
/// simultaneously on the grid of `n_steps` steps driven by the same Brownian
/// increments, jump times and jump sizes.
struct PathSim<'a> {
    pm: &'a PathModel<'a>,
    n_steps: usize,
    refine: usize,
    fine: Track,
    coarse: Option<Track>,
    gamma: Option<Gamma<f64>>,
}

impl<'a> PathSim<'a> {
    fn new(pm: &'a PathModel<'a>, n_steps: usize, refine: usize) -> Result<Self> {
        let fine = Track::new(pm, n_steps * refine);
        let gamma = pm.gamma_for(fine.dt)?;
        Ok(Self {
            pm,
            n_steps,
            refine,
            coarse: (refine > 1).then(|| Track::new(pm, n_steps)),
            fine,
            gamma,
        })
    }

    /// Returns `(fine, coarse)` samples; `coarse` equals `fine` when `refine == 1`.
    /// `sign = -1` mirrors the Gaussian draws (antithetic partner).
    fn run<R: Rng>(&mut self, rng: &mut R, sign: f64, jumps: &[(f64, f64)]) -> (PathSample, PathSample) {
        let pm = self.pm;
        self.fine.reset(pm.s0);
        if let Some(c) = self.coarse.as_mut() {
            c.reset(pm.s0);
        }
        for &(time, size) in jumps {
            self.fine.add_jump(time, size);
            if let Some(c) = self.coarse.as_mut() {
                c.add_jump(time, size);
            }
        }
        let n_fine = self.n_steps * self.refine;
        let (mut zsum, mut dxsum) = (0.0, 0.0);
        for j in 1..=n_fine {
            let z: f64 = StandardNormal.sample(rng);
            let z = sign * z;
            let dx = match (&self.gamma, &pm.jumps) {
                (Some(gamma), JumpGen::Vg { theta, sigma, .. }) => {
                    let dg = gamma.sample(rng);
                    let zx: f64 = StandardNormal.sample(rng);
                    theta * dg + sigma * dg.sqrt() * sign * zx
                }
                _ => 0.0,
            };
            self.fine.step(pm, j, z, dx, j == n_fine);
            if let Some(c) = self.coarse.as_mut() {
                zsum += z;
                dxsum += dx;
                if j % self.refine == 0 {
                    let i = j / self.refine;
                    c.step(pm, i, zsum / (self.refine as f64).sqrt(), dxsum, i == self.n_steps);
                    zsum = 0.0;
                    dxsum = 0.0;
                }
            }
        }
        let n_jumps = jumps.len() as u32;
        let fine = self.fine.finish(n_jumps);
        let coarse = self.coarse.as_ref().map_or(fine, |c| c.finish(n_jumps));
        (fine, coarse)
    }
}

fn draw_jumps<R: Rng>(pm: &PathModel, rng: &mut R, out: &mut Vec<(f64, f64)>) -> Result<()> {
    out.clear();
    if let JumpGen::Cp { lambda, sizes } = &pm.jumps {
        let mean = lambda * pm.t;
        let count: f64 = Poisson::new(mean)
            .map_err(|e| Error::Sampler(format!("poisson({mean}): {e}")))?
            .sample(rng);
        for _ in 0..count as u64 {
            let time = pm.t * rng.random::<f64>();
            out.push((time, sizes.sample(rng)));
        }
    }
    Ok(())
}

// ---- statistics ----

/// Welford accumulator; merged with Chan's pairwise formula.
#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Stats {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Stats) -> Stats {
        if o.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Stats {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }

    fn std_err(&self) -> f64 {
        if self.n < 2.0 {
            return f64::INFINITY;
        }
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

fn with_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| invalid("threads", e.to_string()))?;
    Ok(pool.install(job))
}

fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

fn batches(cfg: &MCConfig) -> Vec<(usize, usize)> {
    let n = cfg.n_paths.div_ceil(cfg.batch_size);
    (0..n)
        .map(|b| (b, cfg.batch_size.min(cfg.n_paths - b * cfg.batch_size)))
        .collect()
}

/// Runs every batch and returns per-batch results in batch order. `visit`
/// receives `(fine, coarse)` samples of a path and, with antithetic
/// sampling, its mirrored partner as a second pair.
fn run_batches<A, F>(model: &ModelSpec, t: f64, cfg: &MCConfig, refine: usize, init: A, visit: F) -> Result<Vec<A>>
where
    A: Clone + Send + Sync,
    F: Fn(&mut A, (PathSample, PathSample), Option<(PathSample, PathSample)>) + Sync,
{
    cfg.validate()?;
    let pm = PathModel::new(model, t)?;
    // surface sampler construction errors before fanning out
    PathSim::new(&pm, cfg.n_steps, refine)?;
    let jobs = batches(cfg);
    let work = || {
        jobs.par_iter()
            .map(|&(b, count)| -> Result<A> {
                let mut rng = batch_rng(cfg.seed, b);
                let mut sim = PathSim::new(&pm, cfg.n_steps, refine)?;
                let mut jumps = Vec::new();
                let mut acc = init.clone();
                let mut done = 0;
                while done < count {
                    draw_jumps(&pm, &mut rng, &mut jumps)?;
                    let first = sim.run(&mut rng, 1.0, &jumps);
                    if cfg.antithetic && done + 1 < count {
                        let second = sim.run(&mut rng, -1.0, &jumps);
                        visit(&mut acc, first, Some(second));
                        done += 2;
                    } else {
                        visit(&mut acc, first, None);
                        done += 1;
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<A>>>()
    };
    with_pool(cfg.threads, work)?
}

/// All simulated paths in batch order.
pub fn simulate_paths(model: &ModelSpec, t: f64, cfg: &MCConfig) -> Result<Vec<PathSample>> {
    let per_batch = run_batches(model, t, cfg, 1, Vec::new(), |acc: &mut Vec<PathSample>, a, b| {
        acc.push(a.0);
        if let Some(b) = b {
            acc.push(b.0);
        }
    })?;
    Ok(per_batch.into_iter().flatten().collect())
}

fn check_maturities(insts: &[Instrument]) -> Result<f64> {
    let t = insts
        .first()
        .ok_or_else(|| invalid("instruments", "need at least one instrument"))?
        .maturity;
    if insts.iter().any(|i| i.maturity != t) {
        return Err(invalid("instruments", "all instruments must share one maturity"));
    }
    Ok(t)
}

fn results(stats: &[Stats], disc: f64, cfg: &MCConfig) -> Vec<MCResult> {
    stats
        .iter()
        .map(|s| MCResult {
            price: disc * s.mean,
            std_err: disc * s.std_err(),
            n_paths: cfg.n_paths,
            n_steps: cfg.n_steps,
            seed: cfg.seed,
        })
        .collect()
}

/// Prices several same-maturity instruments on one set of paths.
pub fn mc_price_many(model: &ModelSpec, insts: &[Instrument], cfg: &MCConfig) -> Result<Vec<MCResult>> {
    let t = check_maturities(insts)?;
    let per_batch = run_batches(model, t, cfg, 1, vec![Stats::default(); insts.len()], |acc, a, b| {
        for (s, inst) in acc.iter_mut().zip(insts) {
            let mut x = inst.payoff(a.0.average, a.0.terminal);
            if let Some(b) = b {
                x = 0.5 * (x + inst.payoff(b.0.average, b.0.terminal));
            }
            s.push(x);
        }
    })?;
    let total = per_batch
        .into_iter()
        .fold(vec![Stats::default(); insts.len()], |acc, b| {
            acc.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()
        });
    Ok(results(&total, (-model.market.r * t).exp(), cfg))
}

/// Discounted Monte Carlo price with its standard error.
pub fn mc_price(model: &ModelSpec, inst: &Instrument, cfg: &MCConfig) -> Result<MCResult> {
    Ok(mc_price_many(model, std::slice::from_ref(inst), cfg)?[0])
}

/// Prices on an `N`-step grid and an `N·refine`-step grid sharing the same
/// Brownian increments and jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoupledResult {
    pub coarse: MCResult,
    pub fine: MCResult,
    /// `fine - coarse` price difference and the standard error of that
    /// paired difference.
    pub diff: f64,
    pub diff_std_err: f64,
}

pub fn mc_price_coupled(
    model: &ModelSpec,
    insts: &[Instrument],
    cfg: &MCConfig,
    refine: usize,
) -> Result<Vec<CoupledResult>> {
    if refine < 2 {
        return Err(invalid("refine", "must be at least 2"));
    }
    let t = check_maturities(insts)?;
    let n = insts.len();
    let init = vec![[Stats::default(); 3]; n];
    let per_batch = run_batches(model, t, cfg, refine, init, |acc: &mut Vec<[Stats; 3]>, a, b| {
        for (s, inst) in acc.iter_mut().zip(insts) {
            let pay = |p: (PathSample, PathSample)| {
                (
                    inst.payoff(p.0.average, p.0.terminal),
                    inst.payoff(p.1.average, p.1.terminal),
                )
            };
            let (mut f, mut c) = pay(a);
            if let Some(b) = b {
                let (f2, c2) = pay(b);
                f = 0.5 * (f + f2);
                c = 0.5 * (c + c2);
            }
            s[0].push(c);
            s[1].push(f);
            s[2].push(f - c);
        }
    })?;
    let total = per_batch.into_iter().fold(vec![[Stats::default(); 3]; n], |acc, b| {
        acc.into_iter()
            .zip(b)
            .map(|(x, y)| [x[0].merge(y[0]), x[1].merge(y[1]), x[2].merge(y[2])])
            .collect()
    });
    let disc = (-model.market.r * t).exp();
    let fine_cfg = MCConfig {
        n_steps: cfg.n_steps * refine,
        ..*cfg
    };
    Ok(total
        .iter()
        .map(|s| CoupledResult {
            coarse: results(&s[0..1], disc, cfg)[0],
            fine: results(&s[1..2], disc, &fine_cfg)[0],
            diff: disc * s[2].mean,
            diff_std_err: disc * s[2].std_err(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub maturity: f64,
    /// `price / T`
    pub scaled_price: f64,
    /// `std_err / T`
    pub scaled_std_err: f64,
    pub result: MCResult,
}

/// Maturity sweep of `(1/T)·price`; `inst.maturity` is replaced by each
/// entry of `maturities`.
pub fn convergence_study(
    model: &ModelSpec,
    inst: &Instrument,
    maturities: &[f64],
    cfg: &MCConfig,
) -> Result<Vec<ConvergenceRow>> {
    maturities
        .iter()
        .map(|&t| {
            let i = Instrument::new(inst.style, inst.putcall, inst.strike, t)?;
            let r = mc_price(model, &i, cfg)?;
            Ok(ConvergenceRow {
                maturity: t,
                scaled_price: r.price / t,
                scaled_std_err: r.std_err / t,
                result: r,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::avg_forward;
    use crate::fixtures;
    use crate::models::{MarketSpec, PutCall};

    fn small() -> MCConfig {
        MCConfig {
            n_paths: 20_000,
            n_steps: 50,
            batch_size: 1000,
            ..MCConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(MCConfig {
            n_paths: 999,
            ..MCConfig::default()
        }
        .validate()
        .is_err());
        assert!(MCConfig {
            n_steps: 1,
            ..MCConfig::default()
        }
        .validate()
        .is_err());
        assert!(MCConfig::default().validate().is_ok());
    }

    #[test]
    fn deterministic_degenerate_paths() {
        let market = MarketSpec::new(100.0, 0.05, 0.0).unwrap();
        let m = ModelSpec::new(
            market,
            DiffusionSpec::constant(0.0).unwrap(),
            JumpSpec::merton(0.0, 0.0, 0.1).unwrap(),
        )
        .unwrap();
        let paths = simulate_paths(
            &m,
            1.0,
            &MCConfig {
                n_paths: 1000,
                n_steps: 100,
                ..small()
            },
        )
        .unwrap();
        let a = avg_forward(&market, 1.0);
        for p in &paths {
            assert!((p.terminal - 100.0 * 0.05f64.exp()).abs() < 1e-10);
            // trapezoid error is O(dt^2)
            assert!((p.average - a).abs() < 1e-4 * a);
            assert_eq!(p.n_jumps, 0);
        }
    }

    #[test]
    fn same_seed_same_result() {
        let m = fixtures::mjd();
        let inst = Instrument::fixed(PutCall::Call, 1020.0, 1.0 / 52.0).unwrap();
        let a = mc_price(&m, &inst, &small()).unwrap();
        let b = mc_price(&m, &inst, &small()).unwrap();
        assert_eq!(a.price.to_bits(), b.price.to_bits());
        assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
        let c = mc_price(&m, &inst, &MCConfig { seed: 7, ..small() }).unwrap();
        assert_ne!(a.price, c.price);
    }

    #[test]
    fn antithetic_runs() {
        let m = fixtures::kou(0.2);
        let inst = Instrument::fixed(PutCall::Call, 1000.0, 1.0 / 52.0).unwrap();
        let plain = mc_price(&m, &inst, &small()).unwrap();
        let anti = mc_price(
            &m,
            &inst,
            &MCConfig {
                antithetic: true,
                ..small()
            },
        )
        .unwrap();
        assert!((plain.price - anti.price).abs() < 4.0 * (plain.std_err.powi(2) + anti.std_err.powi(2)).sqrt());
    }

    #[test]
    fn coupled_grids_share_noise() {
        let m = fixtures::mjd();
        let inst = [Instrument::fixed(PutCall::Call, 1000.0, 1.0 / 52.0).unwrap()];
        let r = mc_price_coupled(&m, &inst, &small(), 4).unwrap();
        assert!(r[0].diff_std_err < 0.2 * r[0].coarse.std_err);
        assert_eq!(r[0].fine.n_steps, 200);
    }

    #[test]
    fn stats_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut all = Stats::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Stats::default(), Stats::default());
        xs[..37].iter().for_each(|&x| a.push(x));
        xs[37..].iter().for_each(|&x| b.push(x));
        let m = a.merge(b);
        assert!((m.mean - all.mean).abs() < 1e-15);
        assert!((m.m2 - all.m2).abs() < 1e-12);
    }

    #[test]
    fn tiny_gamma_shape_is_an_error() {
        let vg = fixtures::vg();
        let inst = Instrument::fixed(PutCall::Call, 1000.0, 1e-300).unwrap();
        assert!(matches!(mc_price(&vg, &inst, &small()), Err(Error::Sampler(_))));
    }
}
