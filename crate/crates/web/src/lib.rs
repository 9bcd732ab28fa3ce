//! Browser bindings for the static demo page in `www/`.
//!
//! The plain functions return `Result<_, String>` and are what the native
//! tests exercise; the `#[wasm_bindgen]` wrappers only convert errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use hts_capacity::channels::{beam_gain, Malaga, Presets};
use hts_capacity::cli::ScenarioConfig;
use hts_capacity::feeder::{feeder_capacity, FeederMode};
use wasm_bindgen::prelude::*;

/// `n` evenly spaced points on [a, b].
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn check_grid(max: f64, points: usize) -> Result<(), String> {
    if !(max > 0.0) || !max.is_finite() {
        return Err(format!("range must be positive, got {max}"));
    }
    if !(2..=10_000).contains(&points) {
        return Err(format!("points must lie in 2..=10000, got {points}"));
    }
    Ok(())
}

/// Beam gain in dBi at off-axis angles linspace(0, max_deg, points);
/// `angle_3db_deg` is the off-axis angle where the gain is 3 dB down.
pub fn beam_pattern_db(angle_3db_deg: f64, gmax_dbi: f64, max_deg: f64, points: usize) -> Result<Vec<f64>, String> {
    check_grid(max_deg, points)?;
    if !(angle_3db_deg > 0.0) {
        return Err(format!("3 dB angle must be positive, got {angle_3db_deg}"));
    }
    let gmax = 10f64.powf(gmax_dbi / 10.0);
    Ok(linspace(0.0, max_deg, points)
        .into_iter()
        .map(|d| 10.0 * beam_gain(d.to_radians(), angle_3db_deg.to_radians(), gmax).max(1e-30).log10())
        .collect())
}

/// Irradiance density of a turbulence preset on linspace(0, x_max, points).
pub fn turbulence_pdf(preset: &str, x_max: f64, points: usize) -> Result<Vec<f64>, String> {
    check_grid(x_max, points)?;
    let p = Presets::embedded().malaga(preset).map_err(|e| e.to_string())?;
    let m = Malaga::new(p).map_err(|e| e.to_string())?;
    linspace(0.0, x_max, points)
        .into_iter()
        .map(|x| if x == 0.0 { Ok(0.0) } else { m.pdf(x).map_err(|e| e.to_string()) })
        .collect()
}

/// Amplitude density |ρ| of a shadowing preset on linspace(0, x_max, points).
pub fn shadowing_pdf(preset: &str, x_max: f64, points: usize) -> Result<Vec<f64>, String> {
    check_grid(x_max, points)?;
    let p = Presets::embedded().shadowed_rician(preset).map_err(|e| e.to_string())?;
    linspace(0.0, x_max, points)
        .into_iter()
        .map(|x| if x == 0.0 { Ok(0.0) } else { hts_capacity::channels::sr_pdf(x, &p).map_err(|e| e.to_string()) })
        .collect()
}

/// Closed-form C₁ (bits/s/Hz) of the default feeder with every gateway set
/// to `preset`, at powers linspace(from_dbm, to_dbm, points).
pub fn c1_curve(preset: &str, stbc: bool, from_dbm: f64, to_dbm: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(2..=200).contains(&points) || !from_dbm.is_finite() || !to_dbm.is_finite() {
        return Err("need finite powers and 2..=200 points".into());
    }
    let mut cfg = ScenarioConfig::default_config();
    cfg.apply_preset(preset).map_err(|e| e.to_string())?;
    if !Presets::embedded().malaga.contains_key(preset) {
        return Err(format!("`{preset}` is not a turbulence preset"));
    }
    let scn = cfg.resolve().map_err(|e| e.to_string())?;
    let mode = if stbc { FeederMode::Stbc } else { FeederMode::Single };
    linspace(from_dbm, to_dbm, points)
        .into_iter()
        .map(|p| {
            let s = scn.with_feeder_power_dbm(p);
            feeder_capacity(&s.feeder, s.quadrature, mode)
                .map(|c| c.bits)
                .map_err(|e| e.to_string())
        })
        .collect()
}

/// Comma-separated preset names of one family ("turbulence" or "shadowing").
pub fn preset_names(family: &str) -> Result<String, String> {
    let p = Presets::embedded();
    let names: Vec<&String> = match family {
        "turbulence" => p.malaga.keys().collect(),
        "shadowing" => p.shadowed_rician.keys().collect(),
        _ => return Err(format!("unknown preset family `{family}`")),
    };
    Ok(names.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","))
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = beamPattern)]
pub fn beam_pattern_js(angle_3db_deg: f64, gmax_dbi: f64, max_deg: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(beam_pattern_db(angle_3db_deg, gmax_dbi, max_deg, points))
}

#[wasm_bindgen(js_name = turbulencePdf)]
pub fn turbulence_pdf_js(preset: &str, x_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(turbulence_pdf(preset, x_max, points))
}

#[wasm_bindgen(js_name = shadowingPdf)]
pub fn shadowing_pdf_js(preset: &str, x_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(shadowing_pdf(preset, x_max, points))
}

#[wasm_bindgen(js_name = c1Curve)]
pub fn c1_curve_js(preset: &str, stbc: bool, from_dbm: f64, to_dbm: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(c1_curve(preset, stbc, from_dbm, to_dbm, points))
}

#[wasm_bindgen(js_name = presetNames)]
pub fn preset_names_js(family: &str) -> Result<String, JsError> {
    js(preset_names(family))
}
