//! Browser bindings for the static demo in `www/`. Results cross the
//! boundary as JSON strings.

pub mod api;

use serde::Serialize;
use wasm_bindgen::prelude::*;

fn json<T: Serialize>(r: api::ApiResult<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = demoData)]
#[allow(clippy::too_many_arguments)]
pub fn demo_data(
    n_calib: usize,
    n_test: usize,
    beta0: f64,
    beta1: f64,
    sigma: f64,
    n_outliers: usize,
    seed: u32,
) -> Result<String, JsError> {
    json(api::demo_data(n_calib, n_test, beta0, beta1, sigma, n_outliers, u64::from(seed)))
}

#[wasm_bindgen(js_name = intervalBand)]
pub fn interval_band(
    calib_y: &[f64],
    calib_f: &[f64],
    test_y: &[f64],
    test_f: &[f64],
    alpha: f64,
    points: usize,
) -> Result<String, JsError> {
    json(api::interval_band(calib_y, calib_f, test_y, test_f, alpha, points))
}

#[wasm_bindgen(js_name = findOutliers)]
pub fn find_outliers(y: &[f64], f_hat: &[f64], grid: usize) -> Result<String, JsError> {
    json(api::find_outliers(y, f_hat, grid))
}

/// `models` is a JSON array of `{label, predictions}`.
#[wasm_bindgen(js_name = rankModels)]
pub fn rank_models(y: &[f64], models: &str, link: &str) -> Result<String, JsError> {
    let models = serde_json::from_str(models).map_err(|e| JsError::new(&e.to_string()))?;
    json(api::rank(y, models, link))
}
