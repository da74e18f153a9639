//! Adaptive Gauss–Kronrod integration on finite intervals, exponential tail
//! truncation, and iterated two-dimensional integration.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Error, Result};

/// Tolerances and limits for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any subinterval.
    pub max_depth: u32,
    /// Mass allowed to be discarded when truncating infinite ranges.
    pub tail_eps: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            max_depth: 50,
            tail_eps: 1e-15,
        }
    }
}

impl QuadConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32, tail_eps: f64) -> Result<Self> {
        let cfg = Self {
            abs_tol,
            rel_tol,
            max_depth,
            tail_eps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("tail_eps", self.tail_eps),
        ] {
            if !(v > 0.0 && v <= 1e-4) {
                return Err(invalid(name, format!("{v} must lie in (0, 1e-4]")));
            }
        }
        if self.max_depth < 30 {
            return Err(invalid("max_depth", "must be at least 30"));
        }
        Ok(())
    }

    /// Same config with both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_129_742_647,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut res_g = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]`.
///
/// Subintervals are refined worst-first until the summed error estimate
/// meets `max(abs_tol, rel_tol·|value|)`.
pub fn integrate_1d<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("range", format!("[{a}, {b}] must be finite; truncate first")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    if a > b {
        let r = integrate_1d(f, b, a, cfg)?;
        return Ok(QuadResult {
            value: -r.value,
            error: r.error,
        });
    }
    let (v, e) = kronrod21(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
        depth: 0,
    });
    let mut total = v;
    let mut total_err = e;
    loop {
        if total_err <= cfg.target(total) {
            break;
        }
        let worst = heap.pop().expect("heap never empties");
        if worst.depth >= cfg.max_depth {
            // roundoff floor: nothing left to gain by splitting
            if worst.error <= 100.0 * f64::EPSILON * worst.value.abs().max(cfg.abs_tol) {
                heap.push(worst);
                break;
            }
            return Err(Error::NonConvergence {
                estimate: total,
                error: total_err,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = kronrod21(&mut f, worst.a, mid);
        let (v2, e2) = kronrod21(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            depth: worst.depth + 1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            depth: worst.depth + 1,
        });
    }
    // resum to shed accumulated update drift
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(QuadResult { value, error })
}

/// Integral over `[a, b]` split at interior `breaks` (kinks or jumps of `f`).
pub fn integrate_1d_pieces<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let mut knots = vec![a];
    knots.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    knots.push(b);
    knots.sort_by(f64::total_cmp);
    let mut acc = QuadResult { value: 0.0, error: 0.0 };
    for w in knots.windows(2) {
        let r = integrate_1d(&mut f, w[0], w[1], cfg)?;
        acc.value += r.value;
        acc.error += r.error;
    }
    Ok(acc)
}

/// Upper cut-off `y_max ≥ 0` such that `∫_{y_max}^∞ e^{-decay·y} dy ≤ tail_eps`.
pub fn truncate_upper(decay_rate: f64, tail_eps: f64) -> Result<f64> {
    if !(decay_rate > 0.0) || !decay_rate.is_finite() {
        return Err(Error::Assumption(format!(
            "tail decay rate {decay_rate} must be positive for truncation"
        )));
    }
    if !(tail_eps > 0.0) {
        return Err(invalid("tail_eps", "must be positive"));
    }
    Ok(((1.0 / (decay_rate * tail_eps)).ln() / decay_rate).max(0.0))
}

/// Iterated integral `∫_{t0}^{t1} ∫_{lo(t)}^{hi(t)} f(t, y) dy dt`.
///
/// Where `y_range(t)` is empty (`lo ≥ hi`) the inner integral is taken as 0;
/// this is how diverging inner limits (`y*(t) → ±∞` at an endpoint) are
/// handled once the range has been clipped to the truncated support.
pub fn integrate_2d_iterated<F, R>(
    f: F,
    t_range: (f64, f64),
    y_range: R,
    y_breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> f64,
    R: Fn(f64) -> (f64, f64),
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_cfg = cfg.scaled(0.1);
    let outer = |t: f64| -> f64 {
        let (lo, hi) = y_range(t);
        if !(lo < hi) {
            return 0.0;
        }
        match integrate_1d_pieces(|y| f(t, y), lo, hi, y_breaks, &inner_cfg) {
            Ok(r) => r.value,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = integrate_1d(outer, t_range.0, t_range.1, cfg);
    if let Some(e) = failure.into_inner() {
        log::debug!("inner integral failed: {e}");
        return Err(e);
    }
    result
}
