//! Vendor performance-indicator submissions: schema, parsing and coverage.
//!
//! Field names carry their unit (`-tops`, `-ms`, `-gbps`, `-w`, ...) so a
//! value reported in the wrong unit fails loudly instead of drifting.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accel::{AccelError, AcceleratorSpec, PointLabel};
use crate::graph::Granularity;
use crate::zoo::{find_entry, Accuracy, BenchmarkEntry, Category, SuiteManifest};

pub const SUBMISSION_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum SubmissionError {
    #[error("parse error at '{path}': {message}")]
    Parse { path: String, message: String },
    #[error("unsupported schema-version '{found}' (expected '{expected}')")]
    SchemaVersion { found: String, expected: String },
    #[error("records[{index}]: unknown benchmark '{name}'")]
    UnknownBenchmark { index: usize, name: String },
    #[error("records[{index}]: duplicate record for ({name}, category {category}, {point})")]
    DuplicateRecord { index: usize, name: String, category: Category, point: PointLabel },
    #[error("schema error at '{path}': {message}")]
    Schema { path: String, message: String },
    #[error("manifest-hash '{found}' does not match the suite ('{expected}')")]
    ManifestMismatch { found: String, expected: String },
    #[error("accelerator: {0}")]
    Accelerator(#[from] AccelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutionMode {
    Silicon,
    Simulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LifecycleStatus {
    Received,
    Validated,
    Reported,
}

impl fmt::Display for LifecycleStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LifecycleStatus::Received => "received",
            LifecycleStatus::Validated => "validated",
            LifecycleStatus::Reported => "reported",
        })
    }
}

/// Reported indicators for one benchmark, category and operation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PIRecord {
    pub benchmark_name: String,
    pub category: Category,
    pub operation_point: PointLabel,
    pub execution_mode: ExecutionMode,
    /// Task accuracy, model-level benchmarks only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<Accuracy>,
    pub achieved_performance_tops: f64,
    pub throughput_img_per_s: f64,
    pub latency_ms: f64,
    pub avg_bandwidth_external_gbps: f64,
    pub peak_bandwidth_external_gbps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_bandwidth_local_gbps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_bandwidth_local_gbps: Option<f64>,
    pub avg_memory_footprint_mb: f64,
    pub avg_power_w: f64,
    pub peak_power_w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub static_power_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamic_power_w: Option<f64>,
    pub compute_efficiency_percent: f64,
}

impl PIRecord {
    pub fn key(&self) -> (String, Category, PointLabel) {
        (self.benchmark_name.clone(), self.category, self.operation_point)
    }

    /// Every numeric field by document name, optional ones only when present.
    pub fn magnitudes(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![
            ("achieved-performance-tops", self.achieved_performance_tops),
            ("throughput-img-per-s", self.throughput_img_per_s),
            ("latency-ms", self.latency_ms),
            ("avg-bandwidth-external-gbps", self.avg_bandwidth_external_gbps),
            ("peak-bandwidth-external-gbps", self.peak_bandwidth_external_gbps),
            ("avg-memory-footprint-mb", self.avg_memory_footprint_mb),
            ("avg-power-w", self.avg_power_w),
            ("peak-power-w", self.peak_power_w),
            ("compute-efficiency-percent", self.compute_efficiency_percent),
        ];
        let optional = [
            ("avg-bandwidth-local-gbps", self.avg_bandwidth_local_gbps),
            ("peak-bandwidth-local-gbps", self.peak_bandwidth_local_gbps),
            ("static-power-w", self.static_power_w),
            ("dynamic-power-w", self.dynamic_power_w),
        ];
        out.extend(optional.into_iter().filter_map(|(k, v)| v.map(|v| (k, v))));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Submission {
    pub vendor: String,
    pub accelerator: AcceleratorSpec,
    pub manifest_hash: String,
    pub lifecycle_status: LifecycleStatus,
    pub records: Vec<PIRecord>,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct DocumentOut<'a> {
    schema_version: &'static str,
    #[serde(flatten)]
    submission: &'a Submission,
}

pub fn write_submission(sub: &Submission) -> String {
    let doc = DocumentOut { schema_version: SUBMISSION_SCHEMA_VERSION, submission: sub };
    let mut out = serde_json::to_string_pretty(&doc).expect("submission serializes");
    out.push('\n');
    out
}

/// Parses a submission document and checks it against `suite`.
///
/// Peak-versus-average consistency of bandwidth and power is left to the
/// validator so that it is reported as a finding rather than a rejection.
pub fn parse_submission(text: &str, suite: &[BenchmarkEntry]) -> Result<Submission, SubmissionError> {
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| SubmissionError::Parse {
        path: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let version = value
        .as_object_mut()
        .and_then(|o| o.remove("schema-version"))
        .ok_or_else(|| SubmissionError::Parse { path: "schema-version".into(), message: "missing field".into() })?;
    let version = version.as_str().map(str::to_string).unwrap_or_else(|| version.to_string());
    if version != SUBMISSION_SCHEMA_VERSION {
        return Err(SubmissionError::SchemaVersion { found: version, expected: SUBMISSION_SCHEMA_VERSION.into() });
    }
    let sub: Submission = serde_path_to_error::deserialize(value).map_err(|e| SubmissionError::Parse {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;

    sub.accelerator.check()?;
    let expected = SuiteManifest::from_suite(suite).expect("suite manifest").manifest_hash;
    if sub.manifest_hash != expected {
        return Err(SubmissionError::ManifestMismatch { found: sub.manifest_hash, expected });
    }

    let mut seen = BTreeSet::new();
    for (index, rec) in sub.records.iter().enumerate() {
        let entry = find_entry(suite, &rec.benchmark_name)
            .map_err(|_| SubmissionError::UnknownBenchmark { index, name: rec.benchmark_name.clone() })?;
        if !seen.insert(rec.key()) {
            return Err(SubmissionError::DuplicateRecord {
                index,
                name: rec.benchmark_name.clone(),
                category: rec.category,
                point: rec.operation_point,
            });
        }
        let schema = |field: &str, message: String| SubmissionError::Schema { path: format!("records[{index}].{field}"), message };
        if sub.accelerator.point(rec.operation_point).is_err() {
            return Err(schema("operation-point", format!("'{}' is not declared by the accelerator", rec.operation_point)));
        }
        match (entry.granularity(), &rec.accuracy) {
            (Granularity::Meso, Some(_)) => {
                return Err(schema("accuracy", "accuracy is reported for task-specific (model-level) benchmarks only".into()))
            }
            (Granularity::Model, None) => {
                return Err(schema("accuracy", "model-level benchmarks must report accuracy".into()))
            }
            _ => {}
        }
        for (field, v) in rec.magnitudes() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(schema(field, format!("must be a finite value >= 0, got {v}")));
            }
        }
        let eff = rec.compute_efficiency_percent;
        if !(eff > 0.0 && eff <= 100.0) {
            return Err(schema("compute-efficiency-percent", format!("must be in (0, 100], got {eff}")));
        }
    }
    Ok(sub)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CoverageCell {
    pub benchmark_name: String,
    pub category: Category,
    pub operation_point: PointLabel,
    pub present: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Coverage {
    pub cells: Vec<CoverageCell>,
    pub fraction: f64,
    /// Records in categories the program does not accept.
    pub out_of_program: Vec<(String, Category, PointLabel)>,
}

impl Coverage {
    pub fn missing(&self) -> impl Iterator<Item = &CoverageCell> {
        self.cells.iter().filter(|c| !c.present)
    }
}

/// Expected coverage is every suite entry in categories 2 and 4 at every
/// operation point the accelerator declares.
pub fn completeness(sub: &Submission, suite: &[BenchmarkEntry]) -> Coverage {
    let have: BTreeSet<_> = sub.records.iter().map(PIRecord::key).collect();
    let mut cells = Vec::new();
    for entry in suite {
        for category in [Category::QUANTIZED, Category::OPTIMIZED] {
            for point in PointLabel::ALL {
                if !sub.accelerator.operation_points.iter().any(|p| p.label == point) {
                    continue;
                }
                let present = have.contains(&(entry.name().to_string(), category, point));
                cells.push(CoverageCell { benchmark_name: entry.name().to_string(), category, operation_point: point, present });
            }
        }
    }
    let fraction = if cells.is_empty() {
        0.0
    } else {
        cells.iter().filter(|c| c.present).count() as f64 / cells.len() as f64
    };
    let out_of_program = sub.records.iter().filter(|r| !r.category.in_program()).map(PIRecord::key).collect();
    Coverage { cells, fraction, out_of_program }
}
