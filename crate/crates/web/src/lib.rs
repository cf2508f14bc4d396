//! Browser bindings. Every export takes and returns JSON text; the same
//! operations are plain Rust functions in [`demo`] so they can be tested
//! without a browser.

pub mod demo;

use wasm_bindgen::prelude::*;

fn to_js<T: serde::Serialize>(r: pet_core::Result<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

/// Runs one optimizer; see [`demo::RunRequest`] for the fields.
#[wasm_bindgen(js_name = runOptimizer)]
pub fn run_optimizer(request: &str) -> Result<String, JsError> {
    let req = serde_json::from_str(request).map_err(|e| JsError::new(&e.to_string()))?;
    to_js(demo::run_optimizer(&req))
}

/// Non-dominated rank of each point in a JSON array of objective vectors.
#[wasm_bindgen(js_name = nondominatedRanks)]
pub fn nondominated_ranks(points: &str) -> Result<String, JsError> {
    let pts: Vec<Vec<f64>> = serde_json::from_str(points).map_err(|e| JsError::new(&e.to_string()))?;
    to_js(demo::nondominated_ranks(&pts))
}

/// Repeated runs of two arms and a rank-sum comparison of their IGD.
#[wasm_bindgen(js_name = compareArms)]
pub fn compare_arms(request: &str) -> Result<String, JsError> {
    let req = serde_json::from_str(request).map_err(|e| JsError::new(&e.to_string()))?;
    to_js(demo::compare_arms(&req))
}

#[wasm_bindgen(js_name = problemNames)]
pub fn problem_names() -> String {
    serde_json::to_string(&demo::bi_objective_problems()).unwrap_or_default()
}
