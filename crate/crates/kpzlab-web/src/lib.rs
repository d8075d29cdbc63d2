//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes plain numbers and returns typed arrays or a JSON string,
//! so the page needs no glue beyond the generated module.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use kpzlab::asep::{reliable_window_start, simulate_asep, TruncationPolicy};
use kpzlab::gibbs::{gibbs_resample, Boundary, GibbsContext};
use kpzlab::harness::rng_from_seed;
use kpzlab::paths::{sample_uniform_bridge, BridgeSpec};
use kpzlab::sixvertex::{top_row_heights, S6VParams};

/// Largest window the page may request.
pub const MAX_WINDOW: usize = 2048;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn check_window(n: usize) -> Result<(), JsError> {
    if n == 0 || n > MAX_WINDOW {
        return Err(JsError::new(&format!("window must lie in 1..={MAX_WINDOW}")));
    }
    Ok(())
}

/// Heights `h(x, rows)` for `x = 1..=width + 1` of one six-vertex sample.
#[wasm_bindgen]
pub fn s6v_top_row(q: f64, zeta: f64, width: usize, rows: usize, seed: u64) -> Result<Vec<i32>, JsError> {
    check_window(width)?;
    check_window(rows)?;
    let params = S6VParams::from_zeta(q, zeta).map_err(js_err)?;
    let h = top_row_heights(seed, &params, width, rows).map_err(js_err)?;
    Ok(h.into_iter().map(|v| v as i32).collect())
}

#[derive(Serialize)]
struct AsepProfile {
    time: f64,
    x: Vec<i64>,
    h: Vec<i64>,
    events: u64,
}

/// Height profile of the exclusion process at `time`, as JSON `{time, x, h, events}`.
#[wasm_bindgen]
pub fn asep_profile(t: f64, time: f64, seed: u64) -> Result<String, JsError> {
    if !(time > 0.0 && time <= 400.0) {
        return Err(JsError::new("time must lie in (0, 400]"));
    }
    let state = simulate_asep(&mut rng_from_seed(seed), t, time, TruncationPolicy::for_time(time)).map_err(js_err)?;
    let start = reliable_window_start(time);
    let end = state.positions[0] + 1;
    let x: Vec<i64> = (start..=end).collect();
    let h = x.iter().map(|&v| state.height_int(v)).collect::<kpzlab::Result<_>>().map_err(js_err)?;
    serde_json::to_string(&AsepProfile { time, x, h, events: state.events }).map_err(js_err)
}

#[derive(Serialize)]
struct Resample {
    bottom: Vec<i64>,
    path: Vec<i64>,
    trials: u64,
    acceptance_estimate: f64,
}

/// Draws a random bottom bridge of length `len` with slope about `slope`, then
/// resamples the curve above it with endpoints lifted by `gap`. Returns JSON
/// `{bottom, path, trials, acceptance_estimate}`.
#[wasm_bindgen]
pub fn gibbs_resample_demo(len: usize, slope: f64, gap: i32, t: f64, seed: u64) -> Result<String, JsError> {
    if !(2..=256).contains(&len) {
        return Err(JsError::new("length must lie in 2..=256"));
    }
    if !(0.0..=1.0).contains(&slope) || gap < 0 {
        return Err(JsError::new("need slope in [0, 1] and gap >= 0"));
    }
    let mut rng = rng_from_seed(seed);
    let l = len as i64;
    let rise = (slope * len as f64).round() as i64;
    let bottom = sample_uniform_bridge(&mut rng, &BridgeSpec::new(0, l, 0, rise).map_err(js_err)?);
    let ctx = GibbsContext::full(t, 0, l, Boundary::Infinite, Boundary::Path(bottom.clone())).map_err(js_err)?;
    let report = gibbs_resample(&mut rng, &ctx, i64::from(gap), rise + i64::from(gap), 5_000_000).map_err(js_err)?;
    serde_json::to_string(&Resample {
        bottom: bottom.values().to_vec(),
        path: report.accepted_path.values().to_vec(),
        trials: report.trials,
        acceptance_estimate: report.acceptance_estimate,
    })
    .map_err(js_err)
}
