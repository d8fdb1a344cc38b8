//! Browser bindings for the demo page in `www/`.
//!
//! Every export takes a model as JSON text (the same format the CLI reads)
//! and returns a JSON string. The `*_json` functions hold the logic so they
//! can be tested natively; the `#[wasm_bindgen]` wrappers only convert
//! errors into JS exceptions.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use quadham::dynamics::{constraint_drift, integrate_hamilton};
use quadham::hamiltonian::build_hamiltonian;
use quadham::koszul_tate::{homology, kt_delta, KTComplex};
use quadham::model::ModelConfig;
use quadham::split::{constraint_polys, default_sigma, momentum_split, solve_connection, velocity_split};
use quadham::{CoeffPoly, GradedElement, QuadraticModel};

/// Cap on samples sent back to the page; longer runs are thinned.
const MAX_POINTS: usize = 4000;

fn load(model_json: &str) -> Result<QuadraticModel, String> {
    ModelConfig::from_json(model_json).and_then(|c| c.to_model()).map_err(|e| e.to_string())
}

fn numbers(s: &str, len: usize, what: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{what}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != len {
        return Err(format!("{what}: expected {len} values, got {}", v.len()));
    }
    Ok(v)
}

/// Integrates the Hamilton equations from `(q0, p0)` at `t = 0` with the
/// default splitting and zero kernel offset.
pub fn simulate_json(model_json: &str, q0: &str, p0: &str, t_end: f64, step: f64) -> Result<String, String> {
    let model = load(model_json)?;
    let m = model.m();
    let (q0, p0) = (numbers(q0, m, "q0")?, numbers(p0, m, "p0")?);
    let err = |e: quadham::Error| e.to_string();
    let split = default_sigma(&model).map_err(err)?;
    let frame = solve_connection(&model, &split, &vec![CoeffPoly::zero(m, 0); m]).map_err(err)?;
    let h = build_hamiltonian(&model, &split, &frame).map_err(err)?;
    let traj = integrate_hamilton(&h, 0.0, &q0, &p0, t_end, step).map_err(err)?;
    let drift = constraint_drift(&traj, &split, &model).map_err(err)?;
    let stride = traj.len().div_ceil(MAX_POINTS);
    let kept: Vec<_> = traj.samples().iter().step_by(stride).collect();
    Ok(json!({
        "m": m,
        "t": kept.iter().map(|s| s.t).collect::<Vec<_>>(),
        "q": kept.iter().map(|s| s.q.clone()).collect::<Vec<_>>(),
        "p": kept.iter().map(|s| s.p.clone()).collect::<Vec<_>>(),
        "constraint_drift": drift,
    })
    .to_string())
}

/// Velocity split `v = S + F` and momentum split `p = R + P` at `(t, q)`,
/// with `p` the Legendre image of `v`.
pub fn split_json(model_json: &str, t: f64, q: &str, v: &str) -> Result<String, String> {
    let model = load(model_json)?;
    let m = model.m();
    let (q, v) = (numbers(q, m, "q")?, numbers(v, m, "v")?);
    let err = |e: quadham::Error| e.to_string();
    let split = default_sigma(&model).map_err(err)?;
    let (s, f) = velocity_split(&split, &model, t, &q, &v).map_err(err)?;
    let p = model.legendre_map(t, &q, &v).map_err(err)?;
    let (r, proj) = momentum_split(&split, &model, t, &q, &p).map_err(err)?;
    let constraints: Vec<String> = match constraint_polys(&split, &model) {
        Ok(polys) => polys.iter().filter(|c| !c.is_zero()).map(|c| c.to_string()).collect(),
        Err(_) => Vec::new(),
    };
    Ok(json!({ "S": s, "F": f, "p": p, "R": r, "P": proj, "constraints": constraints }).to_string())
}

/// Koszul-Tate differential on the antighosts and `H_k` for `k < K` up to
/// momentum degree `D`.
pub fn kt_json(model_json: &str, truncation: u32, degree: u32) -> Result<String, String> {
    let model = load(model_json)?;
    let err = |e: quadham::Error| e.to_string();
    let split = default_sigma(&model).map_err(err)?;
    let cx = KTComplex::new(&model, &split, truncation).map_err(err)?;
    let m = cx.m();
    let differential = cx
        .antighosts()
        .into_iter()
        .map(|g| Ok(json!([g.to_string(), kt_delta(&GradedElement::generator(g, m, m), &cx).map_err(err)?.to_string()])))
        .collect::<Result<Vec<Value>, String>>()?;
    let homology = (0..truncation).map(|k| homology(&cx, k, degree)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    Ok(json!({ "differential": differential, "homology": homology }).to_string())
}

#[wasm_bindgen]
pub fn simulate(model_json: &str, q0: &str, p0: &str, t_end: f64, step: f64) -> Result<String, JsValue> {
    simulate_json(model_json, q0, p0, t_end, step).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn split(model_json: &str, t: f64, q: &str, v: &str) -> Result<String, JsValue> {
    split_json(model_json, t, q, v).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn koszul_tate(model_json: &str, truncation: u32, degree: u32) -> Result<String, JsValue> {
    kt_json(model_json, truncation, degree).map_err(|e| JsValue::from_str(&e))
}
