//! Browser demo bindings: three interactive views onto the collapse engine,
//! each returning a JSON payload for the static page in `www/`.
//!
//! Build with `wasm-pack build crates/web --target web --out-dir www/pkg` and
//! serve `crates/web/www/`.

use wasm_bindgen::prelude::*;

mod api;

/// Width-vs-scaled-time curves of one seeded photocount trajectory and its
/// no-jump post-selected companion.
#[wasm_bindgen]
pub fn trajectory_curves(
    geometry: &str,
    atoms: u32,
    seed: u32,
    tau_max: f64,
    samples: u32,
) -> Result<String, JsValue> {
    api::trajectory_curves(geometry, atoms, seed as u64, tau_max, samples)
        .map_err(|e| JsValue::from_str(&e))
}

/// Closed-form conditional distribution after `m` photocounts at scaled time
/// `tau`, next to the initial superfluid distribution.
#[wasm_bindgen]
pub fn conditional_distribution(
    geometry: &str,
    atoms: u32,
    photocounts: u32,
    tau: f64,
) -> Result<String, JsValue> {
    api::conditional_distribution(geometry, atoms, photocounts, tau)
        .map_err(|e| JsValue::from_str(&e))
}

/// Collapse-and-revival coherence proxy for a Poissonian atom-number
/// distribution under the quadratic phase evolution.
#[wasm_bindgen]
pub fn revival_curve(mean_nk: f64, phase_rate: f64, samples: u32) -> Result<String, JsValue> {
    api::revival_curve(mean_nk, phase_rate, samples).map_err(|e| JsValue::from_str(&e))
}
