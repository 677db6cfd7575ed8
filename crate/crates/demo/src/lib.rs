//! wasm-bindgen bindings behind `www/index.html`.

use isac_core::air::AirConfig;
use isac_core::channel::FrameDims;
use isac_core::constellation::{Family, ShapedConstellation};
use isac_core::filtering::{Filter, FilterKind};
use isac_core::metrics::{self, expected_dd_power, Kernel};
use isac_core::pcs::{self, PcsConfig};
use isac_core::{from_db, to_db};
use js_sys::Float64Array;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn constellation(family: &str, order: usize) -> Result<ShapedConstellation, JsValue> {
    let family = match family.to_ascii_lowercase().as_str() {
        "psk" => Family::Psk,
        "qam" => Family::Qam,
        other => return Err(js_err(format!("unknown family {other:?}"))),
    };
    ShapedConstellation::uniform(family, order).map_err(js_err)
}

fn dims(n: usize, m: usize) -> Result<FrameDims, JsValue> {
    FrameDims::new(n, m).map_err(js_err)
}

/// DR in dB over an input-SNR grid, flattened as `[snr, mf, rf, wf]` rows.
#[wasm_bindgen]
pub fn dr_sweep(
    family: &str,
    order: usize,
    n: usize,
    m: usize,
    start_db: f64,
    stop_db: f64,
    step_db: f64,
) -> Result<Float64Array, JsValue> {
    if step_db.is_nan() || step_db <= 0.0 || stop_db < start_db {
        return Err(js_err("need step > 0 and stop >= start"));
    }
    let count = ((stop_db - start_db) / step_db + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| start_db + step_db * i as f64).collect();
    let rows =
        metrics::dr_sweep(&constellation(family, order)?, dims(n, m)?, &grid).map_err(js_err)?;
    let flat: Vec<f64> = rows
        .iter()
        .flat_map(|r| [r.snr_in_db, to_db(r.dr_mf), to_db(r.dr_rf), to_db(r.dr_wf)])
        .collect();
    Ok(Float64Array::from(flat.as_slice()))
}

/// Expected zero-Doppler slice (dB relative to the peak) for a target at
/// delay bin 0, with unit noise.
#[wasm_bindgen]
pub fn expected_profile(
    family: &str,
    order: usize,
    filter: &str,
    n: usize,
    m: usize,
    snr_db: f64,
) -> Result<Float64Array, JsValue> {
    let c = constellation(family, order)?;
    let kind: FilterKind = filter.parse().map_err(js_err)?;
    let snr = from_db(snr_db);
    let f = Filter::new(kind, snr);
    let d = dims(n, m)?;
    let power = |k: usize| {
        expected_dd_power(
            k as f64,
            0.0,
            (0.0, 0.0),
            &c,
            &f,
            d,
            snr,
            1.0,
            Kernel::Dirichlet,
        )
    };
    let peak = power(0).map_err(js_err)?;
    let slice = (0..n)
        .map(|k| power(k).map(|v| to_db(v / peak)))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(js_err)?;
    Ok(Float64Array::from(slice.as_slice()))
}

/// Shapes 64-QAM for a sensing budget placed `fraction` of the way from
/// the sensing-best to the sensing-worst MSE. Returns a JSON object with
/// the points, probabilities, AIR and MSE.
#[wasm_bindgen]
pub fn shape_constellation(
    filter: &str,
    snr_db: f64,
    comm_snr_db: f64,
    fraction: f64,
    seed: u64,
) -> Result<String, JsValue> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(js_err("fraction must lie in [0, 1]"));
    }
    let kind: FilterKind = filter.parse().map_err(js_err)?;
    let comm = AirConfig::new(from_db(-comm_snr_db), seed);
    let mut cfg = PcsConfig::new(64, kind, dims(64, 32)?, snr_db, comm);
    cfg.bank_samples = 100;
    let (lo, hi) = cfg.bounds().map_err(js_err)?;
    cfg.c0 = lo + fraction * (hi - lo);
    let sol = pcs::mba_solve(&cfg).map_err(js_err)?;
    let points: Vec<[f64; 2]> = cfg
        .alphabet()
        .map_err(js_err)?
        .points()
        .iter()
        .map(|p| [p.re, p.im])
        .collect();
    let out = serde_json::json!({
        "points": points,
        "probs": sol.probs,
        "air_bits": sol.air_bits,
        "sensing_mse": sol.sensing_mse,
        "c0": sol.c0_effective,
        "c_lo": sol.c_lo,
        "c_hi": sol.c_hi,
        "warnings": sol.warnings,
    });
    Ok(out.to_string())
}
