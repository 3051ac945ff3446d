//! Cross-validation rules over submitted performance indicators.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accel::{AcceleratorSpec, PointLabel};
use crate::cost::{model_cost, CostError, CostReport, Precision, OPS_PER_MAC};
use crate::submission::{completeness, PIRecord, Submission};
use crate::zoo::{find_entry, AccuracyMetric, BenchmarkEntry, Category};

/// Slack applied to every tolerance comparison so that values equal up to
/// float rounding are never flagged.
const EPS: f64 = 1e-9;

pub const RULE_ACCURACY: &str = "accuracy";
pub const RULE_BANDWIDTH: &str = "bandwidth-floor";
pub const RULE_COMPLETENESS: &str = "completeness";
pub const RULE_PEAK: &str = "peak-consistency";
pub const RULE_POWER: &str = "power";
pub const RULE_THROUGHPUT_LATENCY: &str = "throughput-latency";
pub const RULE_WORKLOAD: &str = "workload-consistency";

#[derive(Debug, Error)]
pub enum ValidatorError {
    #[error("{benchmark}: record reports {found} but the benchmark is scored by {expected}")]
    MetricMismatch { benchmark: String, found: AccuracyMetric, expected: AccuracyMetric },
    #[error("no cost report for '{0}'")]
    MissingCost(String),
    #[error("invalid tolerance: {0}")]
    Tolerance(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Finding {
    pub rule_id: String,
    pub severity: Severity,
    pub benchmark_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation_point: Option<PointLabel>,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl Finding {
    fn new(rule: &str, severity: Severity, rec: &PIRecord, message: String) -> Finding {
        Finding {
            rule_id: rule.to_string(),
            severity,
            benchmark_name: rec.benchmark_name.clone(),
            category: Some(rec.category),
            operation_point: Some(rec.operation_point),
            message,
            observed: None,
            expected: None,
            tolerance: None,
        }
    }

    fn values(mut self, observed: f64, expected: f64, tolerance: f64) -> Finding {
        self.observed = Some(observed);
        self.expected = Some(expected);
        self.tolerance = Some(tolerance);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub efficiency_consistency_tol: f64,
    pub workload_consistency_tol: f64,
    pub throughput_latency_tol: f64,
    pub bandwidth_floor_tol: f64,
    /// Accuracy allowance per benchmark for categories 3 and 4; categories 1 and 2 get half.
    pub accuracy_allowance: BTreeMap<String, f64>,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            efficiency_consistency_tol: 0.05,
            workload_consistency_tol: 0.10,
            throughput_latency_tol: 0.05,
            bandwidth_floor_tol: 0.0,
            accuracy_allowance: BTreeMap::new(),
        }
    }
}

pub fn default_accuracy_allowance(metric: AccuracyMetric) -> f64 {
    match metric {
        AccuracyMetric::MeanIou => 0.02,
        AccuracyMetric::LogAvgMissRate => 0.02,
        AccuracyMetric::ClassificationAccuracy => 0.01,
    }
}

impl ToleranceConfig {
    pub fn check(&self) -> Result<(), ValidatorError> {
        let scalars = [
            ("efficiency-consistency-tol", self.efficiency_consistency_tol),
            ("workload-consistency-tol", self.workload_consistency_tol),
            ("throughput-latency-tol", self.throughput_latency_tol),
            ("bandwidth-floor-tol", self.bandwidth_floor_tol),
        ];
        let per_model = self.accuracy_allowance.iter().map(|(k, v)| (k.as_str(), *v));
        for (name, v) in scalars.into_iter().chain(per_model) {
            if !(v >= 0.0) {
                return Err(ValidatorError::Tolerance(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn accuracy_allowance(&self, benchmark: &str, metric: AccuracyMetric, category: Category) -> f64 {
        let full = self.accuracy_allowance.get(benchmark).copied().unwrap_or_else(|| default_accuracy_allowance(metric));
        match category.get() {
            1 | 2 => full / 2.0,
            _ => full,
        }
    }
}

fn rel_dev(observed: f64, expected: f64) -> f64 {
    (observed - expected).abs() / expected
}

fn beyond(dev: f64, tol: f64) -> bool {
    dev > tol + EPS
}

/// Compute efficiency is achieved over peak, so achieved / efficiency must
/// give back the declared peak of the operation point.
pub fn check_peak_consistency(rec: &PIRecord, accel: &AcceleratorSpec, tol: &ToleranceConfig) -> Vec<Finding> {
    let Ok(point) = accel.point(rec.operation_point) else {
        return vec![];
    };
    let implied = rec.achieved_performance_tops / (rec.compute_efficiency_percent / 100.0);
    let declared = point.peak_performance_tops;
    let dev = rel_dev(implied, declared);
    if beyond(dev, tol.efficiency_consistency_tol) {
        vec![Finding::new(
            RULE_PEAK,
            Severity::Error,
            rec,
            format!(
                "achieved {} TOPs at {}% efficiency implies a {implied:.4} TOPs peak; declared {declared} TOPs",
                rec.achieved_performance_tops, rec.compute_efficiency_percent
            ),
        )
        .values(implied, declared, tol.efficiency_consistency_tol)]
    } else {
        vec![]
    }
}

/// Reported TOPs against 2 x MACs x throughput. Category 4 may change the
/// workload, so deviations there are warnings.
pub fn check_workload_consistency(rec: &PIRecord, cost: &CostReport, tol: &ToleranceConfig) -> Vec<Finding> {
    let expected = OPS_PER_MAC * cost.total_macs as f64 * rec.throughput_img_per_s / 1e12;
    let dev = rel_dev(rec.achieved_performance_tops, expected);
    if !beyond(dev, tol.workload_consistency_tol) {
        return vec![];
    }
    let severity = if rec.category == Category::OPTIMIZED { Severity::Warning } else { Severity::Error };
    vec![Finding::new(
        RULE_WORKLOAD,
        severity,
        rec,
        format!(
            "{} GMAC at {} img/s is {expected:.4} TOPs; reported {} TOPs",
            cost.gmac(),
            rec.throughput_img_per_s,
            rec.achieved_performance_tops
        ),
    )
    .values(rec.achieved_performance_tops, expected, tol.workload_consistency_tol)]
}

pub fn check_throughput_latency(rec: &PIRecord, tol: &ToleranceConfig) -> Vec<Finding> {
    let implied = 1000.0 / rec.latency_ms;
    let t = rec.throughput_img_per_s;
    let tl = tol.throughput_latency_tol;
    if t < implied * (1.0 - tl) * (1.0 - EPS) {
        vec![Finding::new(
            RULE_THROUGHPUT_LATENCY,
            Severity::Warning,
            rec,
            format!("throughput {t} img/s is below the single-stream rate {implied:.4} img/s implied by latency"),
        )
        .values(t, implied, tl)]
    } else if t > implied * (1.0 + tl) * (1.0 + EPS) {
        vec![Finding::new(
            RULE_THROUGHPUT_LATENCY,
            Severity::Info,
            rec,
            format!("pipelined execution: throughput {t} img/s exceeds 1000/latency = {implied:.4} img/s"),
        )
        .values(t, implied, tl)]
    } else {
        vec![]
    }
}

/// Average external bandwidth must cover the compulsory traffic at the
/// reported throughput. Categories 3 and 4 may shrink the model, so a
/// violation there is a warning.
pub fn check_bandwidth_floor(
    rec: &PIRecord,
    cost: &CostReport,
    accel: &AcceleratorSpec,
    tol: &ToleranceConfig,
) -> Result<Vec<Finding>, CostError> {
    let traffic = cost.min_traffic(accel.onchip_capacity_bytes)?;
    let floor = traffic as f64 * rec.throughput_img_per_s / 1e9;
    let avg = rec.avg_bandwidth_external_gbps;
    let peak = rec.peak_bandwidth_external_gbps;
    let mut out = Vec::new();
    if avg < floor * (1.0 - tol.bandwidth_floor_tol) * (1.0 - EPS) {
        let severity = if rec.category.get() >= 3 { Severity::Warning } else { Severity::Error };
        out.push(
            Finding::new(
                RULE_BANDWIDTH,
                severity,
                rec,
                format!(
                    "average external bandwidth {avg} GB/s is below the floor {floor:.4} GB/s ({traffic} B/img at {} img/s)",
                    rec.throughput_img_per_s
                ),
            )
            .values(avg, floor, tol.bandwidth_floor_tol),
        );
    }
    if peak < avg * (1.0 - EPS) {
        out.push(
            Finding::new(RULE_BANDWIDTH, Severity::Error, rec, format!("peak external bandwidth {peak} GB/s is below the average {avg} GB/s"))
                .values(peak, avg, 0.0),
        );
    }
    let spec_bw = accel.external_bandwidth_gbps;
    if avg > spec_bw * (1.0 + EPS) {
        out.push(
            Finding::new(
                RULE_BANDWIDTH,
                Severity::Warning,
                rec,
                format!("average external bandwidth {avg} GB/s exceeds the declared {spec_bw} GB/s"),
            )
            .values(avg, spec_bw, 0.0),
        );
    }
    if let (Some(a), Some(p)) = (rec.avg_bandwidth_local_gbps, rec.peak_bandwidth_local_gbps) {
        if p < a * (1.0 - EPS) {
            out.push(
                Finding::new(RULE_BANDWIDTH, Severity::Error, rec, format!("peak local bandwidth {p} GB/s is below the average {a} GB/s"))
                    .values(p, a, 0.0),
            );
        }
    }
    Ok(out)
}

/// Degradation is reference minus reported for higher-is-better metrics and
/// the reverse for miss rate.
pub fn check_accuracy(rec: &PIRecord, entry: &BenchmarkEntry, tol: &ToleranceConfig) -> Result<Vec<Finding>, ValidatorError> {
    let (Some(reported), Some(metric)) = (rec.accuracy, entry.task.metric()) else {
        return Ok(vec![]);
    };
    if reported.metric != metric {
        return Err(ValidatorError::MetricMismatch {
            benchmark: rec.benchmark_name.clone(),
            found: reported.metric,
            expected: metric,
        });
    }
    let Some(reference) = entry.reference_accuracy else {
        return Ok(vec![Finding::new(RULE_ACCURACY, Severity::Info, rec, "no reference accuracy; not checked".into())]);
    };
    let degradation = if metric.higher_is_better() {
        reference.value - reported.value
    } else {
        reported.value - reference.value
    };
    let allowance = tol.accuracy_allowance(&rec.benchmark_name, metric, rec.category);
    if degradation > allowance + EPS {
        Ok(vec![Finding::new(
            RULE_ACCURACY,
            Severity::Error,
            rec,
            format!("{metric} {} degrades the reference {} by {degradation:.4} (allowance {allowance})", reported.value, reference.value),
        )
        .values(reported.value, reference.value, allowance)])
    } else {
        Ok(vec![])
    }
}

pub fn check_power(rec: &PIRecord, accel: &AcceleratorSpec) -> Vec<Finding> {
    let mut out = Vec::new();
    let (avg, peak) = (rec.avg_power_w, rec.peak_power_w);
    if peak < avg * (1.0 - EPS) {
        out.push(
            Finding::new(RULE_POWER, Severity::Error, rec, format!("peak power {peak} W is below the average {avg} W")).values(peak, avg, 0.0),
        );
    }
    if let (Some(s), Some(d)) = (rec.static_power_w, rec.dynamic_power_w) {
        let split = s + d;
        if beyond(rel_dev(split, avg), 0.01) {
            out.push(
                Finding::new(
                    RULE_POWER,
                    Severity::Warning,
                    rec,
                    format!("static {s} W + dynamic {d} W = {split} W does not match the average {avg} W"),
                )
                .values(split, avg, 0.01),
            );
        }
    }
    out.push(Finding::new(RULE_POWER, Severity::Info, rec, format!("power measured at {} level", accel.measurement_level)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ValidationReport {
    pub vendor: String,
    pub accelerator: String,
    pub manifest_hash: String,
    pub coverage: f64,
    pub errors: usize,
    pub warnings: usize,
    pub infos: usize,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn count(&self, severity: Severity) -> usize {
        self.findings.iter().filter(|f| f.severity == severity).count()
    }

    pub fn exit_code(&self) -> i32 {
        if self.errors > 0 {
            1
        } else {
            0
        }
    }
}

fn cost_for<'a>(
    costs: &'a [CostReport],
    computed: &'a mut BTreeMap<String, CostReport>,
    entry: &BenchmarkEntry,
) -> Result<&'a CostReport, CostError> {
    if let Some(c) = costs.iter().find(|c| c.model_name == entry.name()) {
        return Ok(c);
    }
    if !computed.contains_key(entry.name()) {
        computed.insert(entry.name().to_string(), model_cost(&entry.graph, Precision::default())?);
    }
    Ok(&computed[entry.name()])
}

/// Runs every rule on every record and adds completeness findings. Cost
/// reports missing from `costs` are computed at one byte per element.
pub fn validate_all(sub: &Submission, suite: &[BenchmarkEntry], costs: &[CostReport], tol: &ToleranceConfig) -> ValidationReport {
    let accel = &sub.accelerator;
    let mut computed = BTreeMap::new();
    let mut findings = Vec::new();

    for rec in &sub.records {
        let Ok(entry) = find_entry(suite, &rec.benchmark_name) else {
            continue;
        };
        findings.extend(check_peak_consistency(rec, accel, tol));
        findings.extend(check_throughput_latency(rec, tol));
        findings.extend(check_power(rec, accel));
        match check_accuracy(rec, entry, tol) {
            Ok(f) => findings.extend(f),
            Err(e) => {
                let mut f = Finding::new(RULE_ACCURACY, Severity::Error, rec, e.to_string());
                f.observed = rec.accuracy.map(|a| a.value);
                f.expected = entry.reference_accuracy.map(|a| a.value);
                findings.push(f);
            }
        }
        match cost_for(costs, &mut computed, entry) {
            Ok(cost) => {
                findings.extend(check_workload_consistency(rec, cost, tol));
                match check_bandwidth_floor(rec, cost, accel, tol) {
                    Ok(f) => findings.extend(f),
                    Err(e) => findings.push(Finding::new(
                        RULE_BANDWIDTH,
                        Severity::Warning,
                        rec,
                        format!("bandwidth floor not computed: {e}"),
                    )),
                }
            }
            Err(e) => findings.push(Finding::new(RULE_WORKLOAD, Severity::Warning, rec, format!("no cost report: {e}"))),
        }
    }

    let coverage = completeness(sub, suite);
    for entry in suite {
        let missing: Vec<_> = coverage.missing().filter(|c| c.benchmark_name == entry.name()).collect();
        if missing.is_empty() {
            continue;
        }
        let cells: Vec<String> = missing.iter().map(|c| format!("{}/{}", c.category, c.operation_point)).collect();
        findings.push(Finding {
            rule_id: RULE_COMPLETENESS.into(),
            severity: Severity::Warning,
            benchmark_name: entry.name().to_string(),
            category: None,
            operation_point: None,
            message: format!("missing {} of the expected records: {}", missing.len(), cells.join(", ")),
            observed: None,
            expected: None,
            tolerance: None,
        });
    }
    for (name, category, point) in &coverage.out_of_program {
        findings.push(Finding {
            rule_id: RULE_COMPLETENESS.into(),
            severity: Severity::Info,
            benchmark_name: name.clone(),
            category: Some(*category),
            operation_point: Some(*point),
            message: format!("category {category} is outside the benchmark program"),
            observed: None,
            expected: None,
            tolerance: None,
        });
    }

    findings.sort_by(|a, b| {
        (&a.rule_id, &a.benchmark_name, a.category, a.operation_point, &a.message).cmp(&(
            &b.rule_id,
            &b.benchmark_name,
            b.category,
            b.operation_point,
            &b.message,
        ))
    });
    let count = |s| findings.iter().filter(|f: &&Finding| f.severity == s).count();
    ValidationReport {
        vendor: sub.vendor.clone(),
        accelerator: accel.name.clone(),
        manifest_hash: sub.manifest_hash.clone(),
        coverage: coverage.fraction,
        errors: count(Severity::Error),
        warnings: count(Severity::Warning),
        infos: count(Severity::Info),
        findings,
    }
}
