//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string. The `*_json` functions hold the logic
//! so they can be tested natively.

use dlhwbench::accel::{predict, AcceleratorSpec, MeasurementLevel, OperationPoint, PointLabel};
use dlhwbench::cost::{model_cost, per_layer_table, CostReport, Precision};
use dlhwbench::report::ModelSummary;
use dlhwbench::zoo::{benchmark_suite, find_entry, BenchmarkEntry};
use serde::Serialize;
use wasm_bindgen::prelude::*;

thread_local! {
    static SUITE: Vec<BenchmarkEntry> = benchmark_suite();
}

fn cost_of(model: &str, precision_bytes: u32) -> Result<CostReport, String> {
    if precision_bytes == 0 {
        return Err("precision must be at least one byte".into());
    }
    SUITE.with(|suite| {
        let entry = find_entry(suite, model).map_err(|e| e.to_string())?;
        model_cost(&entry.graph, Precision::uniform(precision_bytes as u64)).map_err(|e| e.to_string())
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("demo output serializes")
}

pub fn model_names() -> Vec<String> {
    SUITE.with(|suite| suite.iter().map(|e| e.name().to_string()).collect())
}

#[derive(Serialize)]
struct Analysis {
    summary: ModelSummary,
    layers: Vec<dlhwbench::cost::LayerRow>,
}

pub fn analyze_json(model: &str, precision_bytes: u32) -> Result<String, String> {
    let cost = cost_of(model, precision_bytes)?;
    let (params, gmac) = SUITE.with(|s| {
        let e = find_entry(s, model).expect("checked above");
        (e.expected_params, e.expected_gmac)
    });
    Ok(to_json(&Analysis { summary: ModelSummary::new(&cost, Some(params), Some(gmac)), layers: per_layer_table(&cost) }))
}

fn demo_accel(peak_tops: f64, bandwidth_gbps: f64, capacity_mb: f64) -> Result<AcceleratorSpec, String> {
    let spec = AcceleratorSpec {
        name: "demo".into(),
        onchip_capacity_bytes: (capacity_mb * 1e6).round() as u64,
        external_bandwidth_gbps: bandwidth_gbps,
        measurement_level: MeasurementLevel::Chip,
        operation_points: vec![OperationPoint {
            label: PointLabel::MaxPower,
            peak_performance_tops: peak_tops,
            avg_power_w: 0.0,
            peak_power_w: 0.0,
        }],
    };
    spec.check().map_err(|e| e.to_string())?;
    Ok(spec)
}

#[derive(Serialize)]
struct PredictionRow {
    model: String,
    #[serde(flatten)]
    prediction: Option<dlhwbench::accel::PredictedPI>,
    error: Option<String>,
}

/// Roofline prediction of every suite model on a one-point accelerator.
pub fn predict_json(peak_tops: f64, bandwidth_gbps: f64, capacity_mb: f64, precision_bytes: u32) -> Result<String, String> {
    let accel = demo_accel(peak_tops, bandwidth_gbps, capacity_mb)?;
    let mut rows = Vec::new();
    for model in model_names() {
        let cost = cost_of(&model, precision_bytes)?;
        match predict(&cost, &accel, PointLabel::MaxPower) {
            Ok(p) => rows.push(PredictionRow { model, prediction: Some(p), error: None }),
            Err(e) => rows.push(PredictionRow { model, prediction: None, error: Some(e.to_string()) }),
        }
    }
    Ok(to_json(&rows))
}

#[derive(Debug, Serialize, PartialEq)]
pub struct SweepPoint {
    pub capacity_bytes: u64,
    pub traffic_bytes: u64,
}

/// Compulsory traffic at `points` capacities spaced geometrically from the
/// largest tensor to the spill-free capacity.
pub fn traffic_sweep(model: &str, precision_bytes: u32, points: u32) -> Result<Vec<SweepPoint>, String> {
    let cost = cost_of(model, precision_bytes)?;
    let lo = cost.largest_tensor.bytes.max(1) as f64;
    let hi = cost.spill_free_capacity().max(cost.largest_tensor.bytes) as f64;
    let n = points.max(2);
    (0..n)
        .map(|i| {
            let c = (lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).round() as u64;
            let c = c.clamp(lo as u64, hi as u64);
            cost.min_traffic(c).map(|t| SweepPoint { capacity_bytes: c, traffic_bytes: t }).map_err(|e| e.to_string())
        })
        .collect()
}

#[wasm_bindgen(js_name = modelNames)]
pub fn model_names_js() -> String {
    to_json(&model_names())
}

#[wasm_bindgen(js_name = analyzeModel)]
pub fn analyze_model(model: &str, precision_bytes: u32) -> Result<String, JsError> {
    analyze_json(model, precision_bytes).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = predictRoofline)]
pub fn predict_roofline(peak_tops: f64, bandwidth_gbps: f64, capacity_mb: f64, precision_bytes: u32) -> Result<String, JsError> {
    predict_json(peak_tops, bandwidth_gbps, capacity_mb, precision_bytes).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = trafficSweep)]
pub fn traffic_sweep_js(model: &str, precision_bytes: u32, points: u32) -> Result<String, JsError> {
    traffic_sweep(model, precision_bytes, points).map(|s| to_json(&s)).map_err(|e| JsError::new(&e))
}
