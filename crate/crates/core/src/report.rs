//! Peak-normalized comparison across submissions and document rendering.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use crate::accel::{MeasurementLevel, PointLabel, PredictedPI};
use crate::cost::{CostReport, LayerRow};
use crate::submission::Submission;
use crate::validator::{Finding, ValidationReport};
use crate::zoo::Category;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("submissions reference different suite manifests: {0:?}")]
    MixedManifests(Vec<String>),
    #[error("unknown format '{0}' (expected plain-table, delimited or structured)")]
    UnknownFormat(String),
    #[error("structured document: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    PlainTable,
    Delimited,
    Structured,
}

impl FromStr for Format {
    type Err = ReportError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain-table" | "plain" | "table" => Ok(Format::PlainTable),
            "delimited" | "csv" => Ok(Format::Delimited),
            "structured" | "json" => Ok(Format::Structured),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::PlainTable => "plain-table",
            Format::Delimited => "delimited",
            Format::Structured => "structured",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ComparisonRow {
    pub vendor: String,
    pub accelerator: String,
    pub benchmark_name: String,
    pub category: Category,
    pub operation_point: PointLabel,
    pub measurement_level: MeasurementLevel,
    pub peak_performance_tops: f64,
    pub achieved_performance_tops: f64,
    pub throughput_img_per_s: f64,
    pub latency_ms: f64,
    pub avg_bandwidth_external_gbps: f64,
    pub compute_efficiency_percent: f64,
    /// Blank when rows of the benchmark were measured at different levels.
    pub avg_power_w: Option<f64>,
    pub peak_power_w: Option<f64>,
    pub power_comparable: bool,
    /// Achieved over declared peak performance.
    pub normalized_performance: f64,
    /// Images per second per peak TOPs.
    pub normalized_throughput: f64,
    /// 1-based rank by normalized throughput within the benchmark.
    pub rank: usize,
    /// 1-based rank by raw throughput within the benchmark.
    pub raw_rank: usize,
}

/// Flattens submissions into rows grouped by benchmark, best normalized
/// throughput first.
pub fn compare(subs: &[Submission]) -> Result<Vec<ComparisonRow>, ReportError> {
    let mut hashes: Vec<String> = subs.iter().map(|s| s.manifest_hash.clone()).collect();
    hashes.sort();
    hashes.dedup();
    if hashes.len() > 1 {
        return Err(ReportError::MixedManifests(hashes));
    }

    let mut rows = Vec::new();
    for sub in subs {
        for rec in &sub.records {
            let Ok(point) = sub.accelerator.point(rec.operation_point) else {
                continue;
            };
            let peak = point.peak_performance_tops;
            rows.push(ComparisonRow {
                vendor: sub.vendor.clone(),
                accelerator: sub.accelerator.name.clone(),
                benchmark_name: rec.benchmark_name.clone(),
                category: rec.category,
                operation_point: rec.operation_point,
                measurement_level: sub.accelerator.measurement_level,
                peak_performance_tops: peak,
                achieved_performance_tops: rec.achieved_performance_tops,
                throughput_img_per_s: rec.throughput_img_per_s,
                latency_ms: rec.latency_ms,
                avg_bandwidth_external_gbps: rec.avg_bandwidth_external_gbps,
                compute_efficiency_percent: rec.compute_efficiency_percent,
                avg_power_w: Some(rec.avg_power_w),
                peak_power_w: Some(rec.peak_power_w),
                power_comparable: true,
                normalized_performance: rec.achieved_performance_tops / peak,
                normalized_throughput: rec.throughput_img_per_s / peak,
                rank: 0,
                raw_rank: 0,
            });
        }
    }

    let mut levels: BTreeMap<String, Vec<MeasurementLevel>> = BTreeMap::new();
    for r in &rows {
        levels.entry(r.benchmark_name.clone()).or_default().push(r.measurement_level);
    }
    for r in &mut rows {
        let group = &levels[&r.benchmark_name];
        if group.iter().any(|l| *l != r.measurement_level) {
            r.power_comparable = false;
            r.avg_power_w = None;
            r.peak_power_w = None;
        }
    }

    rows.sort_by(|a, b| {
        a.benchmark_name
            .cmp(&b.benchmark_name)
            .then(b.normalized_throughput.total_cmp(&a.normalized_throughput))
            .then_with(|| (&a.vendor, a.category, a.operation_point).cmp(&(&b.vendor, b.category, b.operation_point)))
    });
    let mut start = 0;
    while start < rows.len() {
        let end = start + rows[start..].iter().take_while(|r| r.benchmark_name == rows[start].benchmark_name).count();
        for i in start..end {
            rows[i].rank = i - start + 1;
            let t = rows[i].throughput_img_per_s;
            rows[i].raw_rank = 1 + rows[start..end].iter().filter(|r| r.throughput_img_per_s > t).count();
        }
        start = end;
    }
    Ok(rows)
}

/// Per-model totals for cost summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ModelSummary {
    pub model: String,
    pub params: u64,
    pub gmac: f64,
    pub expected_params: Option<u64>,
    pub expected_gmac: Option<f64>,
    pub weight_bytes: u64,
    pub activation_peak_bytes: u64,
    pub largest_tensor: String,
    pub largest_tensor_bytes: u64,
    pub base_traffic_bytes: u64,
}

impl ModelSummary {
    pub fn new(cost: &CostReport, expected_params: Option<u64>, expected_gmac: Option<f64>) -> Self {
        ModelSummary {
            model: cost.model_name.clone(),
            params: cost.total_params,
            gmac: cost.gmac(),
            expected_params,
            expected_gmac,
            weight_bytes: cost.total_weight_bytes,
            activation_peak_bytes: cost.total_activation_peak_bytes,
            largest_tensor: cost.largest_tensor.tensor.clone(),
            largest_tensor_bytes: cost.largest_tensor.bytes,
            base_traffic_bytes: cost.base_traffic(),
        }
    }
}

pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
    Empty,
}

impl Cell {
    fn exact(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Num(x) => x.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn human(&self) -> String {
        match self {
            Cell::Num(x) if x.abs() >= 1000.0 => format!("{x:.1}"),
            Cell::Num(x) if x.abs() >= 1.0 => format!("{x:.3}"),
            Cell::Num(x) => format!("{x:.4}"),
            other => other.exact(),
        }
    }

    fn is_text(&self) -> bool {
        matches!(self, Cell::Text(_))
    }
}

fn text(s: impl ToString) -> Cell {
    Cell::Text(s.to_string())
}

fn opt(x: Option<f64>) -> Cell {
    x.map_or(Cell::Empty, Cell::Num)
}

/// A row type with a stable column order.
pub trait Table {
    const HEADERS: &'static [&'static str];
    fn cells(&self) -> Vec<Cell>;
}

impl Table for ComparisonRow {
    const HEADERS: &'static [&'static str] = &[
        "benchmark-name",
        "rank",
        "raw-rank",
        "vendor",
        "accelerator",
        "category",
        "operation-point",
        "measurement-level",
        "peak-performance-tops",
        "achieved-performance-tops",
        "throughput-img-per-s",
        "latency-ms",
        "avg-bandwidth-external-gbps",
        "compute-efficiency-percent",
        "avg-power-w",
        "peak-power-w",
        "power-comparable",
        "normalized-performance",
        "normalized-throughput",
    ];
    fn cells(&self) -> Vec<Cell> {
        vec![
            text(&self.benchmark_name),
            Cell::Int(self.rank as u64),
            Cell::Int(self.raw_rank as u64),
            text(&self.vendor),
            text(&self.accelerator),
            text(self.category),
            text(self.operation_point),
            text(self.measurement_level),
            Cell::Num(self.peak_performance_tops),
            Cell::Num(self.achieved_performance_tops),
            Cell::Num(self.throughput_img_per_s),
            Cell::Num(self.latency_ms),
            Cell::Num(self.avg_bandwidth_external_gbps),
            Cell::Num(self.compute_efficiency_percent),
            opt(self.avg_power_w),
            opt(self.peak_power_w),
            text(self.power_comparable),
            Cell::Num(self.normalized_performance),
            Cell::Num(self.normalized_throughput),
        ]
    }
}

impl Table for Finding {
    const HEADERS: &'static [&'static str] =
        &["rule-id", "severity", "benchmark-name", "category", "operation-point", "observed", "expected", "tolerance", "message"];
    fn cells(&self) -> Vec<Cell> {
        vec![
            text(&self.rule_id),
            text(self.severity),
            text(&self.benchmark_name),
            self.category.map_or(Cell::Empty, text),
            self.operation_point.map_or(Cell::Empty, text),
            opt(self.observed),
            opt(self.expected),
            opt(self.tolerance),
            text(&self.message),
        ]
    }
}

impl Table for LayerRow {
    const HEADERS: &'static [&'static str] =
        &["node-id", "kind", "out-shape", "params", "macs", "input-bytes", "output-bytes", "weight-bytes"];
    fn cells(&self) -> Vec<Cell> {
        vec![
            text(&self.node_id),
            text(&self.kind),
            text(&self.out_shape),
            Cell::Int(self.params),
            Cell::Int(self.macs),
            Cell::Int(self.input_bytes),
            Cell::Int(self.output_bytes),
            Cell::Int(self.weight_bytes),
        ]
    }
}

impl Table for ModelSummary {
    const HEADERS: &'static [&'static str] = &[
        "model",
        "params",
        "gmac",
        "expected-params",
        "expected-gmac",
        "weight-bytes",
        "activation-peak-bytes",
        "largest-tensor",
        "largest-tensor-bytes",
        "base-traffic-bytes",
    ];
    fn cells(&self) -> Vec<Cell> {
        vec![
            text(&self.model),
            Cell::Int(self.params),
            Cell::Num(self.gmac),
            self.expected_params.map_or(Cell::Empty, Cell::Int),
            opt(self.expected_gmac),
            Cell::Int(self.weight_bytes),
            Cell::Int(self.activation_peak_bytes),
            text(&self.largest_tensor),
            Cell::Int(self.largest_tensor_bytes),
            Cell::Int(self.base_traffic_bytes),
        ]
    }
}

impl Table for PredictedPI {
    const HEADERS: &'static [&'static str] = &[
        "model",
        "operation-point",
        "bound",
        "latency-ms",
        "throughput-img-per-s",
        "achieved-performance-tops",
        "compute-efficiency",
        "avg-bandwidth-gbps",
        "memory-footprint-mb",
        "compute-time-ms",
        "memory-time-ms",
        "traffic-bytes",
    ];
    fn cells(&self) -> Vec<Cell> {
        vec![
            text(&self.model_name),
            text(self.operation_point),
            text(self.bound),
            Cell::Num(self.latency_ms),
            Cell::Num(self.throughput_img_per_s),
            Cell::Num(self.achieved_performance_tops),
            Cell::Num(self.compute_efficiency),
            Cell::Num(self.avg_bandwidth_gbps),
            Cell::Num(self.memory_footprint_mb),
            Cell::Num(self.compute_time_ms),
            Cell::Num(self.memory_time_ms),
            Cell::Int(self.traffic_bytes),
        ]
    }
}

fn plain<T: Table>(rows: &[T]) -> String {
    let cells: Vec<Vec<Cell>> = rows.iter().map(Table::cells).collect();
    let body: Vec<Vec<String>> = cells.iter().map(|r| r.iter().map(Cell::human).collect()).collect();
    let mut widths: Vec<usize> = T::HEADERS.iter().map(|h| h.len()).collect();
    for r in &body {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    // Text columns align left, numbers right.
    let left: Vec<bool> = (0..widths.len()).map(|i| cells.first().map_or(true, |r| r[i].is_text())).collect();
    let line = |fields: &[String]| {
        let padded: Vec<String> = fields
            .iter()
            .zip(&widths)
            .zip(&left)
            .map(|((f, w), l)| if *l { format!("{f:<w$}") } else { format!("{f:>w$}") })
            .collect();
        padded.join("  ").trim_end().to_string()
    };
    let headers: Vec<String> = T::HEADERS.iter().map(|h| h.to_string()).collect();
    let mut out = line(&headers);
    out.push('\n');
    for r in &body {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

fn delimited<T: Table>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(T::HEADERS).expect("write to memory");
    for r in rows {
        w.write_record(r.cells().iter().map(Cell::exact)).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

fn structured<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Renders rows with a header line; an empty row set gives a header-only
/// document (an empty array in the structured format).
pub fn render_rows<T: Table + Serialize>(rows: &[T], format: Format) -> String {
    match format {
        Format::PlainTable => plain(rows),
        Format::Delimited => delimited(rows),
        Format::Structured => structured(rows),
    }
}

pub fn parse_rows<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, ReportError> {
    Ok(serde_json::from_str(text)?)
}

pub fn render_validation(report: &ValidationReport, format: Format) -> String {
    match format {
        Format::PlainTable => {
            let mut out = format!(
                "vendor: {}  accelerator: {}\nerrors: {}  warnings: {}  infos: {}  coverage: {:.1}%\n\n",
                report.vendor,
                report.accelerator,
                report.errors,
                report.warnings,
                report.infos,
                report.coverage * 100.0
            );
            out.push_str(&plain(&report.findings));
            out
        }
        Format::Delimited => delimited(&report.findings),
        Format::Structured => structured(report),
    }
}

pub fn parse_validation(text: &str) -> Result<ValidationReport, ReportError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel::{AcceleratorSpec, OperationPoint};
    use crate::submission::{ExecutionMode, LifecycleStatus, PIRecord};

    fn sub(vendor: &str, peak: f64, throughput: f64, level: MeasurementLevel) -> Submission {
        Submission {
            vendor: vendor.into(),
            accelerator: AcceleratorSpec {
                name: format!("{vendor}-npu"),
                onchip_capacity_bytes: 1 << 30,
                external_bandwidth_gbps: 10.0,
                measurement_level: level,
                operation_points: vec![OperationPoint {
                    label: PointLabel::MaxPower,
                    peak_performance_tops: peak,
                    avg_power_w: 1.0,
                    peak_power_w: 2.0,
                }],
            },
            manifest_hash: "h".into(),
            lifecycle_status: LifecycleStatus::Validated,
            records: vec![PIRecord {
                benchmark_name: "VGG-16_0.25".into(),
                category: Category::QUANTIZED,
                operation_point: PointLabel::MaxPower,
                execution_mode: ExecutionMode::Silicon,
                accuracy: None,
                achieved_performance_tops: 0.01 * throughput,
                throughput_img_per_s: throughput,
                latency_ms: 1000.0 / throughput,
                avg_bandwidth_external_gbps: 1.0,
                peak_bandwidth_external_gbps: 2.0,
                avg_bandwidth_local_gbps: None,
                peak_bandwidth_local_gbps: None,
                avg_memory_footprint_mb: 1.0,
                avg_power_w: 1.0,
                peak_power_w: 2.0,
                static_power_w: None,
                dynamic_power_w: None,
                compute_efficiency_percent: throughput / peak,
            }],
        }
    }

    #[test]
    fn smaller_device_ranks_first_after_normalization() {
        let rows = compare(&[
            sub("big", 10.0, 124.0, MeasurementLevel::Chip),
            sub("small", 2.0, 30.0, MeasurementLevel::Chip),
        ])
        .unwrap();
        assert_eq!(rows[0].vendor, "small");
        assert!((rows[0].normalized_throughput - 15.0).abs() < 1e-12);
        assert!((rows[1].normalized_throughput - 12.4).abs() < 1e-12);
        assert_eq!((rows[0].rank, rows[0].raw_rank), (1, 2));
        assert_eq!((rows[1].rank, rows[1].raw_rank), (2, 1));
        assert!(rows.iter().all(|r| r.power_comparable && r.avg_power_w.is_some()));
    }

    #[test]
    fn mixed_levels_blank_power() {
        let rows = compare(&[
            sub("ip", 10.0, 124.0, MeasurementLevel::IpCore),
            sub("board", 2.0, 30.0, MeasurementLevel::Board),
        ])
        .unwrap();
        assert!(rows.iter().all(|r| !r.power_comparable && r.avg_power_w.is_none()));
    }

    #[test]
    fn mixed_manifests_rejected() {
        let mut b = sub("b", 2.0, 30.0, MeasurementLevel::Chip);
        b.manifest_hash = "other".into();
        assert!(matches!(compare(&[sub("a", 10.0, 124.0, MeasurementLevel::Chip), b]), Err(ReportError::MixedManifests(_))));
    }

    #[test]
    fn renderings() {
        let rows = compare(&[sub("a", 10.0, 124.0, MeasurementLevel::Chip), sub("b", 2.0, 30.0, MeasurementLevel::Chip)]).unwrap();
        let csv = render_rows(&rows, Format::Delimited);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("benchmark-name,rank,raw-rank,"));
        assert_eq!(parse_rows::<ComparisonRow>(&render_rows(&rows, Format::Structured)).unwrap(), rows);

        let empty: Vec<ComparisonRow> = vec![];
        assert_eq!(render_rows(&empty, Format::Delimited).lines().count(), 1);
        assert_eq!(render_rows(&empty, Format::PlainTable).lines().count(), 1);
        assert!(matches!("xml".parse::<Format>(), Err(ReportError::UnknownFormat(_))));
    }

    #[test]
    fn delimited_numbers_are_exact() {
        let rows = compare(&[sub("a", 3.0, 1.0 / 3.0, MeasurementLevel::Chip)]).unwrap();
        let csv = render_rows(&rows, Format::Delimited);
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        let rec = reader.records().next().unwrap().unwrap();
        let col = ComparisonRow::HEADERS.iter().position(|h| *h == "normalized-throughput").unwrap();
        assert_eq!(rec[col].parse::<f64>().unwrap(), rows[0].normalized_throughput);
    }
}
