//! Bundled reference parameter sets (`S0 = 1000`, `r = q = 0`).

use crate::models::ModelSpec;

pub const MJD_JSON: &str = include_str!("../fixtures/mjd.json");
pub const KOU_JSON: &str = include_str!("../fixtures/kou.json");
pub const VG_JSON: &str = include_str!("../fixtures/vg.json");

/// Merton jump diffusion with `σ = 0.126`.
pub fn mjd() -> ModelSpec {
    ModelSpec::from_json(MJD_JSON).expect("bundled mjd.json is valid")
}

/// Double-exponential jumps with diffusion `sigma` (the bundled file has `σ = 0`).
pub fn kou(sigma: f64) -> ModelSpec {
    ModelSpec::from_json(KOU_JSON)
        .and_then(|m| m.with_constant_sigma(sigma))
        .expect("bundled kou.json is valid")
}

/// VG jumps plus a small constant diffusion.
pub fn vg() -> ModelSpec {
    ModelSpec::from_json(VG_JSON).expect("bundled vg.json is valid")
}

/// Look up a bundled model by name (`mjd`, `kou`, `vg`).
pub fn by_name(name: &str) -> Option<ModelSpec> {
    match name {
        "mjd" | "merton" => Some(mjd()),
        "kou" => Some(kou(0.0)),
        "vg" => Some(vg()),
        _ => None,
    }
}
