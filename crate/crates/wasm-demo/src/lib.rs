//! Browser bindings for planar Poisson line tessellations.
//!
//! The directional distribution is given as line-normal angles (degrees)
//! with relative weights; it is symmetrised and normalised here. Every
//! export returns a JSON string so the page needs no glue beyond
//! `JSON.parse`.

use mosaic_core::minkowski::blaschke_body as solve_blaschke;
use mosaic_core::process::zero_cell as sample_zero_cell;
use mosaic_core::rng::substream;
use mosaic_core::shape::deviation_same_space;
use mosaic_core::{Polytope, ProcessSpec, SphericalMeasure, Subspace};
use nalgebra::DVector;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Stream index used for the demo's zero cells.
const DEMO_STREAM: u64 = 0;

fn spec(angles: &[f64], weights: &[f64], gamma: f64) -> Result<ProcessSpec, String> {
    if angles.len() != weights.len() {
        return Err(format!("{} angles but {} weights", angles.len(), weights.len()));
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err("weights must be positive".into());
    }
    let total: f64 = weights.iter().sum();
    let atoms: Vec<(DVector<f64>, f64)> = angles
        .iter()
        .zip(weights)
        .map(|(a, w)| {
            let (s, c) = a.to_radians().sin_cos();
            (DVector::from_vec(vec![c, s]), w / total)
        })
        .collect();
    let phi = SphericalMeasure::make_even(&atoms).map_err(|e| e.to_string())?;
    ProcessSpec::new(gamma, phi).map_err(|e| e.to_string())
}

fn outline(p: &Polytope) -> Vec<[f64; 2]> {
    p.polygon_outline().unwrap_or_default()
}

fn blaschke(spec: &ProcessSpec) -> Result<Polytope, String> {
    solve_blaschke(spec, &Subspace::whole(2)).map_err(|e| e.to_string())
}

fn cell(spec: &ProcessSpec, seed: u64) -> Result<Polytope, String> {
    sample_zero_cell(spec, &mut substream(seed, DEMO_STREAM)).map_err(|e| e.to_string())
}

/// Zero cell of the line process: outline and area.
pub fn zero_cell_json(angles: &[f64], weights: &[f64], gamma: f64, seed: u64) -> Result<String, String> {
    let z = cell(&spec(angles, weights, gamma)?, seed)?;
    Ok(json!({ "outline": outline(&z), "area": z.volume() }).to_string())
}

/// Blaschke body of the process: outline and area.
pub fn blaschke_json(angles: &[f64], weights: &[f64], gamma: f64) -> Result<String, String> {
    let b = blaschke(&spec(angles, weights, gamma)?)?;
    Ok(json!({ "outline": outline(&b), "area": b.volume() }).to_string())
}

/// `ϑ(Z₀, B)` for one zero cell, with the witness `αB ⊂ Z₀ + z ⊂ βB`
/// drawn as three outlines.
pub fn deviation_json(angles: &[f64], weights: &[f64], gamma: f64, seed: u64) -> Result<String, String> {
    let s = spec(angles, weights, gamma)?;
    let z = cell(&s, seed)?;
    let b = blaschke(&s)?;
    let d = deviation_same_space(&z, &b).map_err(|e| e.to_string())?;
    let shift = DVector::from_vec(d.witness_translation.clone());
    Ok(json!({
        "value": d.value,
        "alpha": d.witness_alpha,
        "beta": d.witness_beta,
        "cell": outline(&z.translated(&shift)),
        "inner": outline(&b.scaled(d.witness_alpha)),
        "outer": outline(&b.scaled(d.witness_beta)),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn zero_cell(angles: &[f64], weights: &[f64], gamma: f64, seed: u64) -> Result<String, JsValue> {
    zero_cell_json(angles, weights, gamma, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn blaschke_body(angles: &[f64], weights: &[f64], gamma: f64) -> Result<String, JsValue> {
    blaschke_json(angles, weights, gamma).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn deviation(angles: &[f64], weights: &[f64], gamma: f64, seed: u64) -> Result<String, JsValue> {
    deviation_json(angles, weights, gamma, seed).map_err(|e| JsValue::from_str(&e))
}
