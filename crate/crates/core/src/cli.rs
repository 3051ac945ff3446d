//! Command-line front end. `run` returns the process exit code: 0 success,
//! 1 validation errors, 2 usage, input or parse errors.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::accel::{classify_bound, emit_submission, parse_accelerator, predict, AcceleratorSpec, PredictedPI};
use crate::cost::{model_cost, per_layer_table, CostReport, Precision};
use crate::graph::{deserialize, serialize};
use crate::report::{compare, render_rows, render_validation, Format, ModelSummary};
use crate::submission::{parse_submission, write_submission, Submission};
use crate::validator::{validate_all, ToleranceConfig};
use crate::zoo::{benchmark_suite, find_entry, graph_file_name, Accuracy, BenchmarkEntry, SuiteManifest};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "dlhwbench", version, about = "Benchmark suite, cost model, roofline predictor and PI validator")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Bytes per element, either `N` or `WEIGHTS/ACTIVATIONS`.
    #[arg(long, global = true, default_value = "1", value_parser = parse_precision)]
    pub precision: Precision,
    /// Tolerance overrides as a JSON document.
    #[arg(long, global = true)]
    pub tolerances: Option<PathBuf>,
    /// plain-table, delimited or structured.
    #[arg(long, global = true, default_value = "plain-table")]
    pub format: Format,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Export the seven benchmark graphs and the suite manifest.
    Suite {
        /// Directory to write into; prints the manifest when omitted.
        dir: Option<PathBuf>,
    },
    /// Per-layer and total costs for a benchmark, a graph file, or the whole suite.
    Analyze {
        /// Benchmark name, path to a graph document, or `suite`.
        #[arg(default_value = "suite")]
        model: String,
    },
    /// Roofline prediction of every benchmark on an accelerator.
    Predict {
        #[arg(long)]
        accel: PathBuf,
        /// Also write the predicted submission document here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Validate a submission document.
    Validate {
        submission: PathBuf,
        /// Accelerator spec to validate against instead of the embedded one.
        #[arg(long)]
        accel: Option<PathBuf>,
        /// Exported suite directory to check against the built-in manifest.
        #[arg(long)]
        suite_dir: Option<PathBuf>,
        /// Reference accuracies as a JSON object keyed by benchmark name.
        #[arg(long)]
        references: Option<PathBuf>,
    },
    /// Compare submissions after peak normalization.
    Compare {
        #[arg(required = true)]
        submissions: Vec<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Other(String),
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    let num = |t: &str| match t.trim().parse::<u64>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("'{t}' is not a positive byte count")),
    };
    match s.split_once('/') {
        Some((w, a)) => Ok(Precision { weight_bytes: num(w)?, activation_bytes: num(a)? }),
        None => Ok(Precision::uniform(num(s)?)),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn input_err(path: &Path, e: impl ToString) -> CliError {
    CliError::Input { path: path.to_path_buf(), message: e.to_string() }
}

fn load_accel(path: &Path) -> Result<AcceleratorSpec, CliError> {
    parse_accelerator(&read(path)?).map_err(|e| input_err(path, e))
}

fn load_tolerances(path: Option<&Path>) -> Result<ToleranceConfig, CliError> {
    let Some(path) = path else {
        return Ok(ToleranceConfig::default());
    };
    let tol: ToleranceConfig = serde_json::from_str(&read(path)?).map_err(|e| input_err(path, e))?;
    tol.check().map_err(|e| input_err(path, e))?;
    Ok(tol)
}

fn suite_costs(suite: &[BenchmarkEntry], precision: Precision) -> Result<Vec<CostReport>, CliError> {
    suite
        .iter()
        .map(|e| model_cost(&e.graph, precision).map_err(|err| CliError::Other(format!("{}: {err}", e.name()))))
        .collect()
}

/// Writes every graph document and the manifest; repeated exports are byte-identical.
pub fn export_suite(dir: &Path, suite: &[BenchmarkEntry]) -> Result<SuiteManifest, CliError> {
    let io = |source| CliError::Io { path: dir.to_path_buf(), source };
    fs::create_dir_all(dir).map_err(io)?;
    let manifest = SuiteManifest::from_suite(suite).map_err(|e| CliError::Other(e.to_string()))?;
    for e in suite {
        let path = dir.join(graph_file_name(e.name()));
        fs::write(&path, serialize(&e.graph)).map_err(|source| CliError::Io { path, source })?;
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest_document(&manifest)).map_err(|source| CliError::Io { path, source })?;
    Ok(manifest)
}

fn manifest_document(m: &SuiteManifest) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("manifest serializes");
    s.push('\n');
    s
}

/// Checks an exported suite directory against the built-in suite.
pub fn verify_suite_dir(dir: &Path, suite: &[BenchmarkEntry]) -> Result<(), CliError> {
    let expected = SuiteManifest::from_suite(suite).map_err(|e| CliError::Other(e.to_string()))?;
    let path = dir.join(MANIFEST_FILE);
    let found: SuiteManifest = serde_json::from_str(&read(&path)?).map_err(|e| input_err(&path, e))?;
    if found.manifest_hash != expected.manifest_hash || found.computed_hash() != expected.manifest_hash {
        return Err(input_err(&path, "manifest mismatch with the built-in suite"));
    }
    for entry in &expected.entries {
        let path = dir.join(&entry.file);
        let parsed = deserialize(&read(&path)?).map_err(|e| input_err(&path, e))?;
        let hash = parsed.graph.content_hash().map_err(|e| input_err(&path, e))?;
        if hash != entry.content_hash {
            return Err(input_err(&path, format!("manifest mismatch: content hash {hash} != {}", entry.content_hash)));
        }
    }
    Ok(())
}

fn emit(global: &GlobalArgs, stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match &global.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn cmd_suite(global: &GlobalArgs, dir: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let suite = benchmark_suite();
    match dir {
        Some(dir) => {
            let m = export_suite(dir, &suite)?;
            writeln!(stdout, "wrote {} graphs and {MANIFEST_FILE} to {} (manifest {})", m.entries.len(), dir.display(), m.manifest_hash)
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
        None => {
            let m = SuiteManifest::from_suite(&suite).map_err(|e| CliError::Other(e.to_string()))?;
            emit(global, stdout, &manifest_document(&m))?;
        }
    }
    Ok(0)
}

fn cmd_analyze(global: &GlobalArgs, model: &str, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let suite = benchmark_suite();
    if model == "suite" {
        let costs = suite_costs(&suite, global.precision)?;
        let rows: Vec<ModelSummary> = suite
            .iter()
            .zip(&costs)
            .map(|(e, c)| ModelSummary::new(c, Some(e.expected_params), Some(e.expected_gmac)))
            .collect();
        emit(global, stdout, &render_rows(&rows, global.format))?;
        return Ok(0);
    }
    let graph = match find_entry(&suite, model) {
        Ok(e) => e.graph.clone(),
        Err(_) => {
            let path = Path::new(model);
            let parsed = deserialize(&read(path)?).map_err(|e| input_err(path, e))?;
            for w in &parsed.warnings {
                let _ = writeln!(stderr, "warning: {}: {w}", path.display());
            }
            parsed.graph
        }
    };
    let cost = model_cost(&graph, global.precision).map_err(|e| CliError::Other(format!("{}: {e}", graph.name)))?;
    let mut text = render_rows(&per_layer_table(&cost), global.format);
    if global.format == Format::PlainTable {
        text.push('\n');
        text.push_str(&render_rows(&[ModelSummary::new(&cost, None, None)], Format::PlainTable));
    }
    emit(global, stdout, &text)?;
    Ok(0)
}

fn cmd_predict(
    global: &GlobalArgs,
    accel_path: &Path,
    emit_path: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let accel = load_accel(accel_path)?;
    let suite = benchmark_suite();
    let costs = suite_costs(&suite, global.precision)?;
    let mut predictions: Vec<PredictedPI> = Vec::new();
    let mut failed = false;
    for cost in &costs {
        for label in accel.labels() {
            match predict(cost, &accel, label) {
                Ok(p) => {
                    if let Ok(b) = classify_bound(cost, &accel, label) {
                        let _ = writeln!(
                            stderr,
                            "{} @ {label}: {} (intensity {:.2} MAC/B, ridge {:.2} MAC/B)",
                            cost.model_name, b.bound, b.arithmetic_intensity, b.ridge_point
                        );
                    }
                    predictions.push(p);
                }
                Err(e) => {
                    failed = true;
                    let _ = writeln!(stderr, "error: {} @ {label}: {e}", cost.model_name);
                }
            }
        }
    }
    emit(global, stdout, &render_rows(&predictions, global.format))?;
    if let Some(path) = emit_path {
        let sub = emit_submission(&predictions, &accel, &suite);
        fs::write(path, write_submission(&sub)).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    }
    Ok(if failed { 1 } else { 0 })
}

fn cmd_validate(
    global: &GlobalArgs,
    sub_path: &Path,
    accel_path: Option<&Path>,
    suite_dir: Option<&Path>,
    references: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<i32, CliError> {
    let tol = load_tolerances(global.tolerances.as_deref())?;
    let mut suite = benchmark_suite();
    if let Some(dir) = suite_dir {
        verify_suite_dir(dir, &suite)?;
    }
    if let Some(path) = references {
        let refs: BTreeMap<String, Accuracy> = serde_json::from_str(&read(path)?).map_err(|e| input_err(path, e))?;
        for (name, acc) in refs {
            let idx = suite.iter().position(|e| e.name() == name).ok_or_else(|| input_err(path, format!("unknown benchmark '{name}'")))?;
            suite[idx].reference_accuracy = Some(acc);
        }
    }
    let mut sub: Submission = parse_submission(&read(sub_path)?, &suite).map_err(|e| input_err(sub_path, e))?;
    if let Some(path) = accel_path {
        sub.accelerator = load_accel(path)?;
    }
    let costs = suite_costs(&suite, global.precision)?;
    let report = validate_all(&sub, &suite, &costs, &tol);
    emit(global, stdout, &render_validation(&report, global.format))?;
    Ok(report.exit_code())
}

fn cmd_compare(global: &GlobalArgs, paths: &[PathBuf], stdout: &mut dyn Write) -> Result<i32, CliError> {
    let suite = benchmark_suite();
    let subs = paths
        .iter()
        .map(|p| parse_submission(&read(p)?, &suite).map_err(|e| input_err(p, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = compare(&subs).map_err(|e| CliError::Other(e.to_string()))?;
    emit(global, stdout, &render_rows(&rows, global.format))?;
    Ok(0)
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Suite { dir } => cmd_suite(g, dir.as_deref(), stdout),
        Command::Analyze { model } => cmd_analyze(g, model, stdout, stderr),
        Command::Predict { accel, emit } => cmd_predict(g, accel, emit.as_deref(), stdout, stderr),
        Command::Validate { submission, accel, suite_dir, references } => {
            cmd_validate(g, submission, accel.as_deref(), suite_dir.as_deref(), references.as_deref(), stdout)
        }
        Command::Compare { submissions } => cmd_compare(g, submissions, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
