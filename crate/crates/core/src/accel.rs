//! Parametric accelerator description and whole-model roofline predictor.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{CostError, CostReport, OPS_PER_MAC};
use crate::submission::{ExecutionMode, LifecycleStatus, PIRecord, Submission};
use crate::zoo::{find_entry, BenchmarkEntry, Category, SuiteManifest};

#[derive(Debug, Error)]
pub enum AccelError {
    #[error("accelerator '{accel}' has no operation point '{label}'")]
    UnknownOperationPoint { accel: String, label: PointLabel },
    #[error(transparent)]
    Capacity(#[from] CostError),
    #[error("invalid accelerator spec: {0}")]
    Invalid(String),
    #[error("parse error at '{path}': {message}")]
    Parse { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointLabel {
    MinPower,
    MaxPower,
    OptimalPower,
}

impl PointLabel {
    pub const ALL: [PointLabel; 3] = [PointLabel::MinPower, PointLabel::MaxPower, PointLabel::OptimalPower];
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PointLabel::MinPower => "min-power",
            PointLabel::MaxPower => "max-power",
            PointLabel::OptimalPower => "optimal-power",
        })
    }
}

/// Where power is measured. Power figures are only comparable within a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementLevel {
    IpCore,
    Chip,
    Soc,
    Board,
}

impl fmt::Display for MeasurementLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasurementLevel::IpCore => "ip-core",
            MeasurementLevel::Chip => "chip",
            MeasurementLevel::Soc => "soc",
            MeasurementLevel::Board => "board",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct OperationPoint {
    pub label: PointLabel,
    pub peak_performance_tops: f64,
    pub avg_power_w: f64,
    pub peak_power_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct AcceleratorSpec {
    pub name: String,
    pub onchip_capacity_bytes: u64,
    pub external_bandwidth_gbps: f64,
    pub measurement_level: MeasurementLevel,
    pub operation_points: Vec<OperationPoint>,
}

impl AcceleratorSpec {
    pub fn point(&self, label: PointLabel) -> Result<&OperationPoint, AccelError> {
        self.operation_points
            .iter()
            .find(|p| p.label == label)
            .ok_or_else(|| AccelError::UnknownOperationPoint { accel: self.name.clone(), label })
    }

    pub fn labels(&self) -> Vec<PointLabel> {
        self.operation_points.iter().map(|p| p.label).collect()
    }

    pub fn check(&self) -> Result<(), AccelError> {
        let invalid = |m: String| Err(AccelError::Invalid(m));
        if self.onchip_capacity_bytes == 0 {
            return invalid("onchip-capacity-bytes must be positive".into());
        }
        if !(self.external_bandwidth_gbps > 0.0) {
            return invalid("external-bandwidth-gbps must be positive".into());
        }
        if self.operation_points.is_empty() {
            return invalid("at least one operation point is required".into());
        }
        for (i, p) in self.operation_points.iter().enumerate() {
            if self.operation_points[..i].iter().any(|q| q.label == p.label) {
                return invalid(format!("operation point '{}' declared twice", p.label));
            }
            if !(p.peak_performance_tops > 0.0) {
                return invalid(format!("{}: peak-performance-tops must be positive", p.label));
            }
            if !(p.avg_power_w >= 0.0 && p.peak_power_w >= p.avg_power_w) {
                return invalid(format!("{}: need 0 <= avg-power-w <= peak-power-w", p.label));
            }
        }
        Ok(())
    }

    pub fn to_document(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("accelerator spec serializes");
        s.push('\n');
        s
    }
}

pub fn parse_accelerator(text: &str) -> Result<AcceleratorSpec, AccelError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: AcceleratorSpec = serde_path_to_error::deserialize(de).map_err(|e| AccelError::Parse {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;
    spec.check()?;
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    ComputeBound,
    MemoryBound,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bound::ComputeBound => "compute-bound",
            Bound::MemoryBound => "memory-bound",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PredictedPI {
    pub model_name: String,
    pub operation_point: PointLabel,
    pub latency_ms: f64,
    pub throughput_img_per_s: f64,
    pub achieved_performance_tops: f64,
    pub compute_efficiency: f64,
    pub avg_bandwidth_gbps: f64,
    pub memory_footprint_mb: f64,
    pub compute_time_ms: f64,
    pub memory_time_ms: f64,
    pub traffic_bytes: u64,
    pub bound: Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BoundClassification {
    pub bound: Bound,
    /// MACs per byte of external traffic.
    pub arithmetic_intensity: f64,
    /// MACs per byte at which compute and memory time are equal.
    pub ridge_point: f64,
    pub compute_time_ms: f64,
    pub memory_time_ms: f64,
}

struct Times {
    compute_s: f64,
    memory_s: f64,
    traffic: u64,
}

fn times(report: &CostReport, accel: &AcceleratorSpec, point: &OperationPoint) -> Result<Times, AccelError> {
    let traffic = report.min_traffic(accel.onchip_capacity_bytes)?;
    Ok(Times {
        compute_s: report.ops() / (point.peak_performance_tops * 1e12),
        memory_s: traffic as f64 / (accel.external_bandwidth_gbps * 1e9),
        traffic,
    })
}

/// Roofline prediction: latency is the larger of the compute time at peak
/// performance and the compulsory traffic time at peak bandwidth.
pub fn predict(report: &CostReport, accel: &AcceleratorSpec, label: PointLabel) -> Result<PredictedPI, AccelError> {
    let point = accel.point(label)?;
    let t = times(report, accel, point)?;
    let latency_s = t.compute_s.max(t.memory_s);
    let achieved_ops = report.ops() / latency_s;
    Ok(PredictedPI {
        model_name: report.model_name.clone(),
        operation_point: label,
        latency_ms: latency_s * 1e3,
        throughput_img_per_s: 1.0 / latency_s,
        achieved_performance_tops: achieved_ops / 1e12,
        compute_efficiency: (achieved_ops / (point.peak_performance_tops * 1e12)).min(1.0),
        avg_bandwidth_gbps: t.traffic as f64 / latency_s / 1e9,
        memory_footprint_mb: report.memory_footprint_bytes() as f64 / 1e6,
        compute_time_ms: t.compute_s * 1e3,
        memory_time_ms: t.memory_s * 1e3,
        traffic_bytes: t.traffic,
        bound: if t.memory_s > t.compute_s { Bound::MemoryBound } else { Bound::ComputeBound },
    })
}

pub fn classify_bound(
    report: &CostReport,
    accel: &AcceleratorSpec,
    label: PointLabel,
) -> Result<BoundClassification, AccelError> {
    let point = accel.point(label)?;
    let t = times(report, accel, point)?;
    let macs_per_s = point.peak_performance_tops * 1e12 / OPS_PER_MAC;
    Ok(BoundClassification {
        bound: if t.memory_s > t.compute_s { Bound::MemoryBound } else { Bound::ComputeBound },
        arithmetic_intensity: report.total_macs as f64 / t.traffic as f64,
        ridge_point: macs_per_s / (accel.external_bandwidth_gbps * 1e9),
        compute_time_ms: t.compute_s * 1e3,
        memory_time_ms: t.memory_s * 1e3,
    })
}

/// Builds a category-2 submission whose numbers are the predictions
/// themselves, so it is consistent by construction. Power figures are copied
/// from the accelerator spec; model-level records report the reference
/// accuracy.
pub fn emit_submission(predictions: &[PredictedPI], accel: &AcceleratorSpec, suite: &[BenchmarkEntry]) -> Submission {
    let manifest = SuiteManifest::from_suite(suite).expect("suite manifest");
    let records = predictions
        .iter()
        .map(|p| {
            let point = accel.point(p.operation_point).expect("prediction uses a declared point");
            let accuracy = find_entry(suite, &p.model_name).ok().and_then(|e| e.reference_accuracy);
            PIRecord {
                benchmark_name: p.model_name.clone(),
                category: Category::QUANTIZED,
                operation_point: p.operation_point,
                execution_mode: ExecutionMode::Simulation,
                accuracy,
                achieved_performance_tops: p.achieved_performance_tops,
                throughput_img_per_s: p.throughput_img_per_s,
                latency_ms: p.latency_ms,
                avg_bandwidth_external_gbps: p.avg_bandwidth_gbps,
                peak_bandwidth_external_gbps: accel.external_bandwidth_gbps.max(p.avg_bandwidth_gbps),
                avg_bandwidth_local_gbps: None,
                peak_bandwidth_local_gbps: None,
                avg_memory_footprint_mb: p.memory_footprint_mb,
                avg_power_w: point.avg_power_w,
                peak_power_w: point.peak_power_w,
                static_power_w: None,
                dynamic_power_w: None,
                compute_efficiency_percent: (p.compute_efficiency * 100.0).min(100.0),
            }
        })
        .collect();
    Submission {
        vendor: accel.name.clone(),
        accelerator: accel.clone(),
        manifest_hash: manifest.manifest_hash,
        records,
        lifecycle_status: LifecycleStatus::Received,
    }
}
