//! Builders for the seven benchmark networks and the suite manifest.
//!
//! Activations that directly follow a convolution are folded into it; explicit
//! activation nodes only appear where a network refers to them by name
//! (SparseNet's `activation_N` cutoff, the ActRec classifier).
//!
//! Model card (calibrated hyperparameters the reference architectures leave
//! open):
//!
//! | constant                  | value |
//! |---------------------------|-------|
//! | SparseNet-40 growth rate  | 24    |
//! | SparseNet-40 stem filters | 24 (7x7/2 conv, 3x3/2 max-pool) |
//! | SparseNet-40 compression  | none  |
//! | SSD extra layers          | 3 x (1x1/2 conv, 8 filters) |
//! | SSD anchors per location  | 1     |
//! | ActRec classifier         | pool5 -> fc 192 -> lstm 128 -> fc 2 |

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{self, Granularity, LayerKind, LayerNode, ModelGraph, TensorShape};

pub const FULL_HD: TensorShape = TensorShape { height: 1080, width: 1920, channels: 3, time_steps: 1 };
pub const ACTREC_PATCH: TensorShape = TensorShape { height: 80, width: 120, channels: 3, time_steps: 1 };

pub const VGG16_FILTERS: [u64; 13] = [64, 64, 128, 128, 256, 256, 256, 512, 512, 512, 512, 512, 512];
pub const VGG_ALPHA: f64 = 0.25;

pub const SPARSENET_GROWTH: u64 = 24;
pub const SPARSENET_STEM: u64 = 24;
pub const SPARSENET_LAYERS_PER_BLOCK: usize = 12;
pub const SSD_EXTRA_LAYERS: usize = 3;
pub const SSD_EXTRA_FILTERS: u64 = 8;
pub const SSD_ANCHORS: u64 = 1;
pub const ACTREC_FC_UNITS: u64 = 192;
pub const ACTREC_LSTM_UNITS: u64 = 128;
pub const NUM_CLASSES: u64 = 2;

pub const VGG16: &str = "VGG-16_0.25";
pub const SQUEEZENET: &str = "SqueezeNet";
pub const MOBILENET_V2: &str = "MobileNet_v2_1.0";
pub const SPARSENET40: &str = "SparseNet-40";
pub const FCN8S: &str = "VGG-16_0.25-FCN8s";
pub const SSD: &str = "VGG-16_0.25-SSD";
pub const ACTREC: &str = "VGG-16_0.25-ActRec";

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("unknown cutoff layer '{0}'")]
    UnknownCutoff(String),
    #[error("scaling factor {0} is outside (0, 1] or rounds a filter count to zero")]
    InvalidScale(f64),
    #[error("backbone '{backbone}' has no tap point '{tap}'")]
    MissingTap { backbone: String, tap: String },
    #[error("unknown benchmark '{0}'")]
    UnknownBenchmark(String),
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
}

/// Benchmark category: 1 identical computation, 2 quantization allowed,
/// 3 optimization without retraining, 4 optimization including retraining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Category(u8);

impl Category {
    pub const IDENTICAL: Category = Category(1);
    pub const QUANTIZED: Category = Category(2);
    pub const OPTIMIZED_NO_RETRAIN: Category = Category(3);
    pub const OPTIMIZED: Category = Category(4);

    pub fn new(n: u8) -> Option<Category> {
        (1..=4).contains(&n).then_some(Category(n))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Categories accepted by the benchmark program.
    pub fn in_program(self) -> bool {
        self == Category::QUANTIZED || self == Category::OPTIMIZED
    }
}

impl TryFrom<u8> for Category {
    type Error = String;
    fn try_from(n: u8) -> Result<Self, Self::Error> {
        Category::new(n).ok_or_else(|| format!("category must be 1..=4, got {n}"))
    }
}

impl From<Category> for u8 {
    fn from(c: Category) -> u8 {
        c.0
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccuracyMetric {
    MeanIou,
    LogAvgMissRate,
    ClassificationAccuracy,
}

impl AccuracyMetric {
    pub fn higher_is_better(self) -> bool {
        !matches!(self, AccuracyMetric::LogAvgMissRate)
    }
}

impl fmt::Display for AccuracyMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccuracyMetric::MeanIou => "mean-IoU",
            AccuracyMetric::LogAvgMissRate => "log-avg-miss-rate",
            AccuracyMetric::ClassificationAccuracy => "classification-accuracy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Accuracy {
    pub metric: AccuracyMetric,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    FeatureExtractor,
    SemanticSegmentation,
    ObjectDetection,
    ActionRecognition,
}

impl Task {
    pub fn metric(self) -> Option<AccuracyMetric> {
        match self {
            Task::FeatureExtractor => None,
            Task::SemanticSegmentation => Some(AccuracyMetric::MeanIou),
            Task::ObjectDetection => Some(AccuracyMetric::LogAvgMissRate),
            Task::ActionRecognition => Some(AccuracyMetric::ClassificationAccuracy),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkEntry {
    pub graph: ModelGraph,
    pub expected_params: u64,
    pub expected_gmac: f64,
    pub category_support: BTreeSet<Category>,
    /// Reference accuracy of the unoptimized model. The suite ships nominal
    /// placeholders; replace them with the reference training results.
    pub reference_accuracy: Option<Accuracy>,
    pub task: Task,
}

impl BenchmarkEntry {
    pub fn name(&self) -> &str {
        &self.graph.name
    }

    pub fn granularity(&self) -> Granularity {
        self.graph.granularity
    }
}

fn scaled(alpha: f64, filters: u64) -> u64 {
    ((alpha * filters as f64 + 0.5).floor() as u64).max(1)
}

/// Keeps only the cutoff node and its ancestors, in declaration order.
fn truncate(mut graph: ModelGraph, cutoff: &str) -> Result<ModelGraph, ZooError> {
    if graph.node(cutoff).is_none() {
        return Err(ZooError::UnknownCutoff(cutoff.to_string()));
    }
    let keep = graph.ancestors(cutoff);
    graph.nodes.retain(|n| keep.contains(&n.id));
    graph.cutoff_layer = Some(cutoff.to_string());
    graph.granularity = Granularity::Meso;
    Ok(graph)
}

fn meso(name: &str, input: TensorShape, nodes: Vec<LayerNode>) -> ModelGraph {
    ModelGraph {
        name: name.to_string(),
        nodes,
        input_shape: input,
        granularity: Granularity::Meso,
        cutoff_layer: None,
    }
}

/// VGG-16 convolutional stack with every filter count scaled by `alpha`
/// (round half up, minimum 1). Max-pools follow stages 1 to 4; `pool5` is
/// available as a cutoff as well.
pub fn build_vgg16_scaled(alpha: f64, input: TensorShape, cutoff: &str) -> Result<ModelGraph, ZooError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(ZooError::InvalidScale(alpha));
    }
    let stages: [&[u64]; 5] = [
        &VGG16_FILTERS[0..2],
        &VGG16_FILTERS[2..4],
        &VGG16_FILTERS[4..7],
        &VGG16_FILTERS[7..10],
        &VGG16_FILTERS[10..13],
    ];
    let mut nodes = vec![LayerNode::input("input")];
    let mut prev = "input".to_string();
    for (s, filters) in stages.iter().enumerate() {
        for (i, &f) in filters.iter().enumerate() {
            let id = format!("conv{}_{}", s + 1, i + 1);
            nodes.push(LayerNode::conv(&id, &prev, 3, 1, scaled(alpha, f)));
            prev = id;
        }
        let id = format!("pool{}", s + 1);
        nodes.push(LayerNode::pool(&id, LayerKind::MaxPool, &prev, 2, 2));
        prev = id;
    }
    let name = if alpha == 1.0 { "VGG-16".to_string() } else { format!("VGG-16_{alpha}") };
    truncate(meso(&name, input, nodes), cutoff)
}

/// SqueezeNet v1.1 through the requested fire-module concat.
pub fn build_squeezenet(input: TensorShape, cutoff: &str) -> Result<ModelGraph, ZooError> {
    let fire_ids: Vec<String> = (2..=9).map(|i| format!("fire{i}_concat")).collect();
    if !fire_ids.iter().any(|f| f == cutoff) {
        return Err(ZooError::UnknownCutoff(cutoff.to_string()));
    }
    let mut nodes = vec![
        LayerNode::input("input"),
        LayerNode::conv("conv1", "input", 3, 2, 64),
        LayerNode::pool("pool1", LayerKind::MaxPool, "conv1", 3, 2),
    ];
    let mut prev = "pool1".to_string();
    let fires: [(u32, u64, u64); 8] =
        [(2, 16, 64), (3, 16, 64), (4, 32, 128), (5, 32, 128), (6, 48, 192), (7, 48, 192), (8, 64, 256), (9, 64, 256)];
    for (i, squeeze, expand) in fires {
        let sq = format!("fire{i}_squeeze1x1");
        let e1 = format!("fire{i}_expand1x1");
        let e3 = format!("fire{i}_expand3x3");
        let cat = format!("fire{i}_concat");
        nodes.push(LayerNode::conv(&sq, &prev, 1, 1, squeeze));
        nodes.push(LayerNode::conv(&e1, &sq, 1, 1, expand));
        nodes.push(LayerNode::conv(&e3, &sq, 3, 1, expand));
        nodes.push(LayerNode::new(&cat, LayerKind::Concat, &[&e1, &e3]));
        prev = cat;
        if i == 3 || i == 5 {
            let pool = format!("pool{i}");
            nodes.push(LayerNode::pool(&pool, LayerKind::MaxPool, &prev, 3, 2));
            prev = pool;
        }
    }
    truncate(meso(SQUEEZENET, input, nodes), cutoff)
}

/// Channel rounding used by MobileNet width multipliers.
fn make_divisible(v: f64, divisor: u64) -> u64 {
    let d = divisor as f64;
    let mut new_v = (((v + d / 2.0) / d).floor() * d).max(d);
    if new_v < 0.9 * v {
        new_v += d;
    }
    new_v as u64
}

/// MobileNet-v2 inverted residual network (stem, blocks 0..16, final 1x1).
pub fn build_mobilenet_v2(width_mult: f64, input: TensorShape, cutoff: &str) -> Result<ModelGraph, ZooError> {
    if !(width_mult > 0.0 && width_mult <= 1.0) {
        return Err(ZooError::InvalidScale(width_mult));
    }
    // (expansion, output channels, repeats, first stride)
    const STAGES: [(u64, u64, usize, u64); 7] =
        [(1, 16, 1, 1), (6, 24, 2, 2), (6, 32, 3, 2), (6, 64, 4, 2), (6, 96, 3, 1), (6, 160, 3, 2), (6, 320, 1, 1)];

    let stem = make_divisible(32.0 * width_mult, 8);
    let mut nodes = vec![LayerNode::input("input"), LayerNode::conv("conv1", "input", 3, 2, stem)];
    let mut prev = "conv1".to_string();
    let mut channels = stem;
    let mut block = 0;
    for (t, c, n, s) in STAGES {
        let out = make_divisible(c as f64 * width_mult, 8);
        for i in 0..n {
            let stride = if i == 0 { s } else { 1 };
            let block_in = prev.clone();
            if t != 1 {
                let id = format!("block{block}_expand");
                nodes.push(LayerNode::pointwise(&id, &prev, channels * t));
                prev = id;
            }
            let dw = format!("block{block}_depthwise");
            nodes.push(LayerNode::depthwise(&dw, &prev, 3, stride));
            let proj = format!("block{block}_project");
            nodes.push(LayerNode::pointwise(&proj, &dw, out));
            prev = proj;
            if stride == 1 && channels == out {
                let add = format!("block{block}_add");
                nodes.push(LayerNode::new(&add, LayerKind::ElementwiseAdd, &[&block_in, &prev]));
                prev = add;
            }
            channels = out;
            block += 1;
        }
    }
    let last = if width_mult > 1.0 { make_divisible(1280.0 * width_mult, 8) } else { 1280 };
    nodes.push(LayerNode::pointwise("conv_1", &prev, last));
    let name = if width_mult == 1.0 { MOBILENET_V2.to_string() } else { format!("MobileNet_v2_{width_mult}") };
    truncate(meso(&name, input, nodes), cutoff)
}

/// Indices of the layers feeding layer `l` of a sparsely aggregated block:
/// `l - 1, l - 2, l - 4, ...` down to the block input at index 0.
pub fn sparse_sources(l: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |o| o.checked_mul(2))
        .take_while(|&o| o <= l)
        .map(|o| l - o)
        .collect()
}

/// SparseNet-40: stem, three sparsely aggregated blocks of 12 layers and two
/// transitions. Activations are numbered `activation_1` to `activation_40`.
pub fn build_sparsenet40(input: TensorShape, cutoff: &str) -> Result<ModelGraph, ZooError> {
    let mut nodes = vec![LayerNode::input("input"), LayerNode::conv("conv1", "input", 7, 2, SPARSENET_STEM)];
    let mut act = 0;
    let mut next_act = |nodes: &mut Vec<LayerNode>, from: &str| {
        act += 1;
        let id = format!("activation_{act}");
        nodes.push(LayerNode::activation(&id, from));
        id
    };
    let a = next_act(&mut nodes, "conv1");
    nodes.push(LayerNode::pool("pool1", LayerKind::MaxPool, &a, 3, 2));
    let mut block_in = "pool1".to_string();

    for b in 1..=3 {
        // outputs[0] is the block input, outputs[l] the l-th layer's conv.
        let mut outputs = vec![block_in.clone()];
        let gather = |nodes: &mut Vec<LayerNode>, outputs: &[String], l: usize, id: String| -> String {
            let srcs: Vec<&str> = sparse_sources(l).into_iter().map(|i| outputs[i].as_str()).collect();
            if srcs.len() == 1 {
                srcs[0].to_string()
            } else {
                nodes.push(LayerNode::new(&id, LayerKind::Concat, &srcs));
                id
            }
        };
        for l in 1..=SPARSENET_LAYERS_PER_BLOCK {
            let x = gather(&mut nodes, &outputs, l, format!("block{b}_concat{l}"));
            let a = next_act(&mut nodes, &x);
            let conv = format!("block{b}_conv{l}");
            nodes.push(LayerNode::conv(&conv, &a, 3, 1, SPARSENET_GROWTH));
            outputs.push(conv);
        }
        let out = gather(&mut nodes, &outputs, SPARSENET_LAYERS_PER_BLOCK + 1, format!("block{b}_output"));
        if b < 3 {
            let a = next_act(&mut nodes, &out);
            // No compression: the transition keeps the block's output width.
            let channels = SPARSENET_GROWTH * sparse_sources(SPARSENET_LAYERS_PER_BLOCK + 1).len() as u64;
            let conv = format!("transition{b}_conv");
            nodes.push(LayerNode::conv(&conv, &a, 1, 1, channels));
            let pool = format!("transition{b}_pool");
            nodes.push(LayerNode::pool(&pool, LayerKind::AvgPool, &conv, 2, 2));
            block_in = pool;
        } else {
            next_act(&mut nodes, &out);
        }
    }
    truncate(meso(SPARSENET40, input, nodes), cutoff)
}

fn require_taps(backbone: &ModelGraph, taps: &[&str]) -> Result<(), ZooError> {
    for tap in taps {
        if backbone.node(tap).is_none() {
            return Err(ZooError::MissingTap { backbone: backbone.name.clone(), tap: tap.to_string() });
        }
    }
    Ok(())
}

fn task_graph(name: &str, backbone: &ModelGraph, input: TensorShape, head: Vec<LayerNode>) -> ModelGraph {
    let mut nodes = backbone.nodes.clone();
    nodes.extend(head);
    ModelGraph {
        name: name.to_string(),
        nodes,
        input_shape: input,
        granularity: Granularity::Model,
        cutoff_layer: None,
    }
}

/// FCN-8s segmentation head on a VGG-family extractor ending at `conv5_3`.
/// Upsampled score maps are cropped to the skip tensor they are fused with.
pub fn build_fcn8s(backbone: &ModelGraph) -> Result<ModelGraph, ZooError> {
    require_taps(backbone, &["pool3", "pool4", "conv5_3"])?;
    let input = backbone.input_node().map(|n| n.id.clone()).unwrap_or_else(|| "input".into());
    let k = NUM_CLASSES;
    let head = vec![
        LayerNode::pool("pool5", LayerKind::MaxPool, "conv5_3", 2, 2),
        LayerNode::conv("score_fr", "pool5", 1, 1, k),
        LayerNode::transposed("upscore2", "score_fr", 4, 2, k),
        LayerNode::conv("score_pool4", "pool4", 1, 1, k),
        LayerNode::new("upscore2_crop", LayerKind::Crop, &["upscore2", "score_pool4"]),
        LayerNode::new("fuse_pool4", LayerKind::ElementwiseAdd, &["upscore2_crop", "score_pool4"]),
        LayerNode::transposed("upscore_pool4", "fuse_pool4", 4, 2, k),
        LayerNode::conv("score_pool3", "pool3", 1, 1, k),
        LayerNode::new("upscore_pool4_crop", LayerKind::Crop, &["upscore_pool4", "score_pool3"]),
        LayerNode::new("fuse_pool3", LayerKind::ElementwiseAdd, &["upscore_pool4_crop", "score_pool3"]),
        LayerNode::transposed("upscore8", "fuse_pool3", 16, 8, k),
        LayerNode::new("score", LayerKind::Crop, &["upscore8", &input]),
    ];
    Ok(task_graph(FCN8S, backbone, backbone.input_shape, head))
}

/// Single-shot detection head: one scale at `conv5_3` plus stride-2 extra
/// layers, each scale with sibling classification and box-regression convs.
pub fn build_ssd(backbone: &ModelGraph) -> Result<ModelGraph, ZooError> {
    require_taps(backbone, &["conv5_3"])?;
    let mut head = Vec::new();
    let mut scales = vec!["conv5_3".to_string()];
    for i in 1..=SSD_EXTRA_LAYERS {
        let id = format!("extra{i}");
        head.push(LayerNode::conv(&id, scales.last().expect("non-empty"), 1, 2, SSD_EXTRA_FILTERS));
        scales.push(id);
    }
    for s in &scales {
        head.push(LayerNode::conv(format!("{s}_cls"), s, 3, 1, SSD_ANCHORS * NUM_CLASSES));
        head.push(LayerNode::conv(format!("{s}_box"), s, 3, 1, SSD_ANCHORS * 4));
    }
    Ok(task_graph(SSD, backbone, backbone.input_shape, head))
}

/// CNN-LSTM action recogniser applied to single pedestrian patches.
pub fn build_actrec(backbone: &ModelGraph) -> Result<ModelGraph, ZooError> {
    require_taps(backbone, &["conv5_3"])?;
    let head = vec![
        LayerNode::pool("pool5", LayerKind::MaxPool, "conv5_3", 2, 2),
        LayerNode::fully_connected("fc1", "pool5", ACTREC_FC_UNITS),
        LayerNode::activation("fc1_relu", "fc1"),
        LayerNode::lstm("lstm", "fc1_relu", ACTREC_LSTM_UNITS),
        LayerNode::fully_connected("fc2", "lstm", NUM_CLASSES),
        LayerNode::new("softmax", LayerKind::Softmax, &["fc2"]),
    ];
    Ok(task_graph(ACTREC, backbone, ACTREC_PATCH, head))
}

fn entry(graph: ModelGraph, params: u64, gmac: f64, task: Task, reference: Option<f64>) -> BenchmarkEntry {
    BenchmarkEntry {
        graph,
        expected_params: params,
        expected_gmac: gmac,
        category_support: [Category::QUANTIZED, Category::OPTIMIZED].into_iter().collect(),
        reference_accuracy: task.metric().zip(reference).map(|(metric, value)| Accuracy { metric, value }),
        task,
    }
}

/// The seven benchmark entries at their canonical inputs.
pub fn benchmark_suite() -> Vec<BenchmarkEntry> {
    let vgg = build_vgg16_scaled(VGG_ALPHA, FULL_HD, "conv5_3").expect("vgg builds");
    let fcn = build_fcn8s(&vgg).expect("fcn builds");
    let ssd = build_ssd(&vgg).expect("ssd builds");
    let actrec = build_actrec(&vgg).expect("actrec builds");
    vec![
        entry(vgg, 921_000, 40.3, Task::FeatureExtractor, None),
        entry(
            build_squeezenet(FULL_HD, "fire9_concat").expect("squeezenet builds"),
            722_000,
            11.9,
            Task::FeatureExtractor,
            None,
        ),
        entry(
            build_mobilenet_v2(1.0, FULL_HD, "block12_add").expect("mobilenet builds"),
            531_000,
            8.7,
            Task::FeatureExtractor,
            None,
        ),
        entry(
            build_sparsenet40(FULL_HD, "activation_40").expect("sparsenet builds"),
            723_000,
            38.5,
            Task::FeatureExtractor,
            None,
        ),
        entry(fcn, 924_000, 40.6, Task::SemanticSegmentation, Some(0.700)),
        entry(ssd, 923_000, 40.4, Task::ObjectDetection, Some(0.150)),
        entry(actrec, 1_378_000, 0.2, Task::ActionRecognition, Some(0.900)),
    ]
}

pub fn find_entry<'a>(suite: &'a [BenchmarkEntry], name: &str) -> Result<&'a BenchmarkEntry, ZooError> {
    suite
        .iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| ZooError::UnknownBenchmark(name.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ManifestEntry {
    pub name: String,
    pub file: String,
    pub content_hash: String,
    pub expected_params: u64,
    pub expected_gmac: f64,
    pub canonical_input: TensorShape,
    pub granularity: Granularity,
    pub cutoff_layer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SuiteManifest {
    pub schema_version: String,
    pub manifest_hash: String,
    pub entries: Vec<ManifestEntry>,
}

pub fn graph_file_name(name: &str) -> String {
    format!("{name}.json")
}

impl SuiteManifest {
    pub fn from_suite(suite: &[BenchmarkEntry]) -> Result<SuiteManifest, ZooError> {
        let entries = suite
            .iter()
            .map(|e| {
                Ok(ManifestEntry {
                    name: e.name().to_string(),
                    file: graph_file_name(e.name()),
                    content_hash: e.graph.content_hash()?,
                    expected_params: e.expected_params,
                    expected_gmac: e.expected_gmac,
                    canonical_input: e.graph.input_shape,
                    granularity: e.graph.granularity,
                    cutoff_layer: e.graph.cutoff_layer.clone(),
                })
            })
            .collect::<Result<Vec<_>, ZooError>>()?;
        let manifest_hash = hash_entries(&entries);
        Ok(SuiteManifest { schema_version: graph::SCHEMA_VERSION.to_string(), manifest_hash, entries })
    }

    /// Recomputes the digest over the entries; differs from `manifest_hash`
    /// if the entries were edited.
    pub fn computed_hash(&self) -> String {
        hash_entries(&self.entries)
    }
}

fn hash_entries(entries: &[ManifestEntry]) -> String {
    let canonical = serde_json::to_string(entries).expect("manifest serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Manifest hash of the built-in suite.
pub fn suite_manifest_hash() -> String {
    SuiteManifest::from_suite(&benchmark_suite()).expect("suite manifest").manifest_hash
}
