//! Neutral computational-graph representation.
//!
//! A [`ModelGraph`] is a DAG of [`LayerNode`]s carrying topology and
//! hyperparameters only. Every analysis in the crate (shape inference, cost,
//! traffic, prediction) consumes this representation.

mod document;
mod shape;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use document::{deserialize, serialize, ParsedGraph, SCHEMA_VERSION};
pub use shape::{infer_shapes, ShapeMap};

/// Dimensions of a single activation tensor (batch is always 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TensorShape {
    pub height: u64,
    pub width: u64,
    pub channels: u64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub time_steps: u64,
}

fn one() -> u64 {
    1
}

fn is_one(v: &u64) -> bool {
    *v == 1
}

impl TensorShape {
    pub fn new(height: u64, width: u64, channels: u64) -> Self {
        Self { height, width, channels, time_steps: 1 }
    }

    /// A non-spatial vector of `channels` features.
    pub fn vector(channels: u64) -> Self {
        Self::new(1, 1, channels)
    }

    pub fn with_time_steps(mut self, time_steps: u64) -> Self {
        self.time_steps = time_steps;
        self
    }

    pub fn is_valid(&self) -> bool {
        self.height >= 1 && self.width >= 1 && self.channels >= 1 && self.time_steps >= 1
    }

    /// Element count, `None` on overflow.
    pub fn checked_elements(&self) -> Option<u64> {
        self.height
            .checked_mul(self.width)?
            .checked_mul(self.channels)?
            .checked_mul(self.time_steps)
    }

    /// Element count. Panics on overflow; shapes produced by [`infer_shapes`]
    /// are already overflow-checked.
    pub fn elements(&self) -> u64 {
        self.checked_elements().expect("tensor element count overflows u64")
    }

    /// Spatial positions per time step.
    pub fn pixels(&self) -> u64 {
        self.height * self.width
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.height, self.channels)?;
        if self.time_steps != 1 {
            write!(f, "@{}", self.time_steps)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    Input,
    Output,
    Conv2d,
    DepthwiseConv2d,
    PointwiseConv2d,
    TransposedConv2d,
    FullyConnected,
    MaxPool,
    AvgPool,
    UpsampleBilinear,
    Concat,
    ElementwiseAdd,
    /// Spatially crops its first input to the height/width of its second.
    Crop,
    ReluLikeActivation,
    LstmCell,
    Softmax,
}

impl LayerKind {
    pub const ALL: [LayerKind; 16] = [
        LayerKind::Input,
        LayerKind::Output,
        LayerKind::Conv2d,
        LayerKind::DepthwiseConv2d,
        LayerKind::PointwiseConv2d,
        LayerKind::TransposedConv2d,
        LayerKind::FullyConnected,
        LayerKind::MaxPool,
        LayerKind::AvgPool,
        LayerKind::UpsampleBilinear,
        LayerKind::Concat,
        LayerKind::ElementwiseAdd,
        LayerKind::Crop,
        LayerKind::ReluLikeActivation,
        LayerKind::LstmCell,
        LayerKind::Softmax,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LayerKind::Input => "input",
            LayerKind::Output => "output",
            LayerKind::Conv2d => "conv2d",
            LayerKind::DepthwiseConv2d => "depthwise-conv2d",
            LayerKind::PointwiseConv2d => "pointwise-conv2d",
            LayerKind::TransposedConv2d => "transposed-conv2d",
            LayerKind::FullyConnected => "fully-connected",
            LayerKind::MaxPool => "max-pool",
            LayerKind::AvgPool => "avg-pool",
            LayerKind::UpsampleBilinear => "upsample-bilinear",
            LayerKind::Concat => "concat",
            LayerKind::ElementwiseAdd => "elementwise-add",
            LayerKind::Crop => "crop",
            LayerKind::ReluLikeActivation => "relu-like-activation",
            LayerKind::LstmCell => "lstm-cell",
            LayerKind::Softmax => "softmax",
        }
    }

    /// Required input count; `None` means "two or more".
    pub fn arity(&self) -> Option<usize> {
        match self {
            LayerKind::Input => Some(0),
            LayerKind::Concat | LayerKind::ElementwiseAdd => None,
            LayerKind::Crop => Some(2),
            _ => Some(1),
        }
    }

    /// Whether the kind carries learned weights (and therefore a bias flag).
    pub fn has_weights(&self) -> bool {
        matches!(
            self,
            LayerKind::Conv2d
                | LayerKind::DepthwiseConv2d
                | LayerKind::PointwiseConv2d
                | LayerKind::TransposedConv2d
                | LayerKind::FullyConnected
                | LayerKind::LstmCell
        )
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayerKind {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LayerKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| GraphError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Padding {
    /// Output spatial size is `ceil(in / stride)`.
    #[default]
    Same,
    /// Output spatial size is `floor((in - kernel) / stride) + 1`.
    Valid,
}

/// Kind-specific hyperparameters. Absent fields are `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Attributes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<[u64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding: Option<Padding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filters: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_units: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upsample_factor: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<u64>,
}

impl Attributes {
    pub fn stride(&self) -> u64 {
        self.stride.unwrap_or(1)
    }

    pub fn padding(&self) -> Padding {
        self.padding.unwrap_or_default()
    }

    pub fn groups(&self) -> u64 {
        self.groups.unwrap_or(1)
    }

    fn values(&self) -> impl Iterator<Item = (&'static str, u64)> + '_ {
        let kernel = self
            .kernel
            .into_iter()
            .flat_map(|[h, w]| [("kernel", h), ("kernel", w)]);
        kernel.chain(
            [
                ("stride", self.stride),
                ("filters", self.filters),
                ("units", self.units),
                ("hidden-units", self.hidden_units),
                ("upsample-factor", self.upsample_factor),
                ("groups", self.groups),
            ]
            .into_iter()
            .filter_map(|(name, v)| v.map(|v| (name, v))),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LayerNode {
    pub id: String,
    pub kind: LayerKind,
    pub attrs: Attributes,
    pub inputs: Vec<String>,
    pub include_bias: bool,
}

impl LayerNode {
    pub fn new(id: impl Into<String>, kind: LayerKind, inputs: &[&str]) -> Self {
        Self {
            id: id.into(),
            kind,
            attrs: Attributes::default(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            include_bias: kind.has_weights(),
        }
    }

    pub fn input(id: impl Into<String>) -> Self {
        Self::new(id, LayerKind::Input, &[])
    }

    pub fn conv(
        id: impl Into<String>,
        input: &str,
        kernel: u64,
        stride: u64,
        filters: u64,
    ) -> Self {
        let mut n = Self::new(id, LayerKind::Conv2d, &[input]);
        n.attrs.kernel = Some([kernel, kernel]);
        n.attrs.stride = Some(stride);
        n.attrs.padding = Some(Padding::Same);
        n.attrs.filters = Some(filters);
        n
    }

    pub fn depthwise(id: impl Into<String>, input: &str, kernel: u64, stride: u64) -> Self {
        let mut n = Self::new(id, LayerKind::DepthwiseConv2d, &[input]);
        n.attrs.kernel = Some([kernel, kernel]);
        n.attrs.stride = Some(stride);
        n.attrs.padding = Some(Padding::Same);
        n
    }

    pub fn pointwise(id: impl Into<String>, input: &str, filters: u64) -> Self {
        let mut n = Self::new(id, LayerKind::PointwiseConv2d, &[input]);
        n.attrs.filters = Some(filters);
        n
    }

    pub fn transposed(
        id: impl Into<String>,
        input: &str,
        kernel: u64,
        stride: u64,
        filters: u64,
    ) -> Self {
        let mut n = Self::new(id, LayerKind::TransposedConv2d, &[input]);
        n.attrs.kernel = Some([kernel, kernel]);
        n.attrs.stride = Some(stride);
        n.attrs.padding = Some(Padding::Same);
        n.attrs.filters = Some(filters);
        n
    }

    pub fn pool(id: impl Into<String>, kind: LayerKind, input: &str, kernel: u64, stride: u64) -> Self {
        let mut n = Self::new(id, kind, &[input]);
        n.attrs.kernel = Some([kernel, kernel]);
        n.attrs.stride = Some(stride);
        n.attrs.padding = Some(Padding::Same);
        n
    }

    pub fn fully_connected(id: impl Into<String>, input: &str, units: u64) -> Self {
        let mut n = Self::new(id, LayerKind::FullyConnected, &[input]);
        n.attrs.units = Some(units);
        n
    }

    pub fn lstm(id: impl Into<String>, input: &str, hidden_units: u64) -> Self {
        let mut n = Self::new(id, LayerKind::LstmCell, &[input]);
        n.attrs.hidden_units = Some(hidden_units);
        n
    }

    pub fn activation(id: impl Into<String>, input: &str) -> Self {
        Self::new(id, LayerKind::ReluLikeActivation, &[input])
    }

    pub fn with_padding(mut self, padding: Padding) -> Self {
        self.attrs.padding = Some(padding);
        self
    }

    pub fn with_bias(mut self, include_bias: bool) -> Self {
        self.include_bias = include_bias;
        self
    }

    pub fn with_groups(mut self, groups: u64) -> Self {
        self.attrs.groups = Some(groups);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    /// Sub-model feature extractor, cut at a named layer.
    Meso,
    /// Complete task model.
    Model,
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Meso => "meso",
            Granularity::Model => "model",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelGraph {
    pub name: String,
    pub nodes: Vec<LayerNode>,
    pub input_shape: TensorShape,
    pub granularity: Granularity,
    pub cutoff_layer: Option<String>,
}

/// One violated structural invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("duplicate node id '{0}'")]
    DuplicateId(String),
    #[error("node '{node}' references nonexistent input '{input}'")]
    UnknownInput { node: String, input: String },
    #[error("node '{node}' references '{input}' which is declared later")]
    ForwardReference { node: String, input: String },
    #[error("cycle through nodes {0:?}")]
    Cycle(Vec<String>),
    #[error("graph must have exactly one input node, found {0}")]
    InputCount(usize),
    #[error("graph has no terminal node")]
    NoTerminal,
    #[error("node '{node}' of kind {kind} expects {expected} inputs, found {found}")]
    Arity { node: String, kind: LayerKind, expected: String, found: usize },
    #[error("node '{node}' is missing attribute '{attribute}'")]
    MissingAttribute { node: String, attribute: &'static str },
    #[error("node '{node}' has non-positive attribute '{attribute}'")]
    NonPositiveAttribute { node: String, attribute: &'static str },
    #[error("input shape {0} has a zero dimension or overflows")]
    InvalidInputShape(TensorShape),
    #[error("cutoff layer '{0}' is not a node of the graph")]
    UnknownCutoff(String),
    #[error("cutoff layer '{0}' is not the graph's only terminal node")]
    CutoffNotTerminal(String),
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph: {}", join_errors(.0))]
    Invalid(Vec<StructuralError>),
    #[error("cycle through nodes {0:?}")]
    Cycle(Vec<String>),
    #[error("shape mismatch at node '{node}': {reason}")]
    ShapeMismatch { node: String, reason: String },
    #[error("unknown layer kind '{0}'")]
    UnknownKind(String),
    #[error("unsupported schema-version '{found}' (expected '{expected}')")]
    SchemaVersion { found: String, expected: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("parse error at '{path}': {message}")]
    Field { path: String, message: String },
}

fn join_errors(errors: &[StructuralError]) -> String {
    errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

impl ModelGraph {
    pub fn node(&self, id: &str) -> Option<&LayerNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn input_node(&self) -> Option<&LayerNode> {
        self.nodes.iter().find(|n| n.kind == LayerKind::Input)
    }

    /// Nodes that no other node consumes.
    pub fn terminal_ids(&self) -> Vec<&str> {
        let consumed: HashSet<&str> = self
            .nodes
            .iter()
            .flat_map(|n| n.inputs.iter().map(String::as_str))
            .collect();
        self.nodes
            .iter()
            .filter(|n| !consumed.contains(n.id.as_str()))
            .map(|n| n.id.as_str())
            .collect()
    }

    /// Map from node id to the ids of nodes consuming it.
    pub fn consumers(&self) -> HashMap<&str, Vec<&str>> {
        let mut out: HashMap<&str, Vec<&str>> =
            self.nodes.iter().map(|n| (n.id.as_str(), Vec::new())).collect();
        for n in &self.nodes {
            for i in &n.inputs {
                if let Some(v) = out.get_mut(i.as_str()) {
                    v.push(n.id.as_str());
                }
            }
        }
        out
    }

    /// Ids of `id` and every node it transitively depends on.
    pub fn ancestors(&self, id: &str) -> BTreeSet<String> {
        let by_id: HashMap<&str, &LayerNode> =
            self.nodes.iter().map(|n| (n.id.as_str(), n)).collect();
        let mut seen = BTreeSet::new();
        let mut stack = vec![id.to_string()];
        while let Some(cur) = stack.pop() {
            if !seen.insert(cur.clone()) {
                continue;
            }
            if let Some(n) = by_id.get(cur.as_str()) {
                stack.extend(n.inputs.iter().cloned());
            }
        }
        seen
    }

    /// Digest of the canonical topological serialization, including the
    /// header (name, granularity, cutoff, input shape).
    pub fn content_hash(&self) -> Result<String, GraphError> {
        let order = topological_order(self)?;
        let mut h = Sha256::new();
        h.update(format!(
            "name={}\ngranularity={}\ncutoff={}\ninput={:?}\n",
            self.name,
            self.granularity,
            self.cutoff_layer.as_deref().unwrap_or("-"),
            self.input_shape
        ));
        self.hash_nodes(&order, &mut h);
        Ok(hex::encode(h.finalize()))
    }

    /// Digest over the canonical form of the subgraph made of `ids` only,
    /// independent of graph name and input resolution.
    pub fn topology_hash(&self, ids: &BTreeSet<String>) -> Result<String, GraphError> {
        let order: Vec<String> = topological_order(self)?
            .into_iter()
            .filter(|id| ids.contains(id))
            .collect();
        let mut h = Sha256::new();
        self.hash_nodes(&order, &mut h);
        Ok(hex::encode(h.finalize()))
    }

    fn hash_nodes(&self, order: &[String], h: &mut Sha256) {
        for id in order {
            let n = self.node(id).expect("ordered id exists");
            let attrs = serde_json::to_string(&n.attrs).expect("attributes serialize");
            h.update(format!(
                "{}|{}|{}|{}|{}\n",
                n.id,
                n.kind,
                attrs,
                n.inputs.join(","),
                n.include_bias
            ));
        }
    }
}

/// Returns every violated structural invariant; empty means valid.
pub fn validate_graph(graph: &ModelGraph) -> Vec<StructuralError> {
    let mut errors = Vec::new();

    if !graph.input_shape.is_valid() || graph.input_shape.checked_elements().is_none() {
        errors.push(StructuralError::InvalidInputShape(graph.input_shape));
    }

    let mut position: HashMap<&str, usize> = HashMap::new();
    for (i, n) in graph.nodes.iter().enumerate() {
        if position.insert(n.id.as_str(), i).is_some() {
            errors.push(StructuralError::DuplicateId(n.id.clone()));
        }
    }

    let inputs = graph.nodes.iter().filter(|n| n.kind == LayerKind::Input).count();
    if inputs != 1 {
        errors.push(StructuralError::InputCount(inputs));
    }

    for (i, n) in graph.nodes.iter().enumerate() {
        for input in &n.inputs {
            match position.get(input.as_str()) {
                None => errors.push(StructuralError::UnknownInput {
                    node: n.id.clone(),
                    input: input.clone(),
                }),
                Some(&p) if p >= i => errors.push(StructuralError::ForwardReference {
                    node: n.id.clone(),
                    input: input.clone(),
                }),
                _ => {}
            }
        }
        check_arity(n, &mut errors);
        check_attributes(n, &mut errors);
    }

    for cycle in find_cycles(graph) {
        errors.push(StructuralError::Cycle(cycle));
    }

    let terminals = graph.terminal_ids();
    if terminals.is_empty() && !graph.nodes.is_empty() {
        errors.push(StructuralError::NoTerminal);
    }
    if let Some(cut) = &graph.cutoff_layer {
        if !position.contains_key(cut.as_str()) {
            errors.push(StructuralError::UnknownCutoff(cut.clone()));
        } else if terminals != [cut.as_str()] {
            errors.push(StructuralError::CutoffNotTerminal(cut.clone()));
        }
    }

    errors
}

fn check_arity(n: &LayerNode, errors: &mut Vec<StructuralError>) {
    let found = n.inputs.len();
    let (ok, expected) = match n.kind.arity() {
        Some(k) => (found == k, k.to_string()),
        None => (found >= 2, ">= 2".to_string()),
    };
    if !ok {
        errors.push(StructuralError::Arity { node: n.id.clone(), kind: n.kind, expected, found });
    }
}

fn check_attributes(n: &LayerNode, errors: &mut Vec<StructuralError>) {
    let required: &[&'static str] = match n.kind {
        LayerKind::Conv2d | LayerKind::TransposedConv2d => &["kernel", "filters"],
        LayerKind::DepthwiseConv2d | LayerKind::MaxPool | LayerKind::AvgPool => &["kernel"],
        LayerKind::PointwiseConv2d => &["filters"],
        LayerKind::FullyConnected => &["units"],
        LayerKind::LstmCell => &["hidden-units"],
        LayerKind::UpsampleBilinear => &["upsample-factor"],
        _ => &[],
    };
    let a = &n.attrs;
    for &attribute in required {
        let present = match attribute {
            "kernel" => a.kernel.is_some(),
            "filters" => a.filters.is_some(),
            "units" => a.units.is_some(),
            "hidden-units" => a.hidden_units.is_some(),
            "upsample-factor" => a.upsample_factor.is_some(),
            _ => unreachable!(),
        };
        if !present {
            errors.push(StructuralError::MissingAttribute { node: n.id.clone(), attribute });
        }
    }
    let mut reported = BTreeSet::new();
    for (attribute, v) in a.values() {
        if v == 0 && reported.insert(attribute) {
            errors.push(StructuralError::NonPositiveAttribute { node: n.id.clone(), attribute });
        }
    }
}

/// Strongly connected components with more than one node, or with a
/// self-loop. Each cycle is returned sorted.
fn find_cycles(graph: &ModelGraph) -> Vec<Vec<String>> {
    let index: HashMap<&str, usize> = graph
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    let succ: Vec<Vec<usize>> = graph
        .nodes
        .iter()
        .map(|n| n.inputs.iter().filter_map(|i| index.get(i.as_str()).copied()).collect())
        .collect();

    // Iterative Tarjan.
    let n = graph.nodes.len();
    let mut idx = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut out = Vec::new();
    for root in 0..n {
        if idx[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        idx[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                if idx[w] == usize::MAX {
                    idx[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(idx[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == idx[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    if comp.len() > 1 || succ[v].contains(&v) {
                        let mut ids: Vec<String> =
                            comp.iter().map(|&i| graph.nodes[i].id.clone()).collect();
                        ids.sort();
                        out.push(ids);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Kahn's algorithm with ties broken by lexical node id.
pub fn topological_order(graph: &ModelGraph) -> Result<Vec<String>, GraphError> {
    let ids: BTreeSet<&str> = graph.nodes.iter().map(|n| n.id.as_str()).collect();
    let mut indegree: BTreeMap<&str, usize> = ids.iter().map(|&id| (id, 0)).collect();
    let mut succ: HashMap<&str, Vec<&str>> = HashMap::new();
    for n in &graph.nodes {
        for i in n.inputs.iter().filter(|i| ids.contains(i.as_str())) {
            *indegree.get_mut(n.id.as_str()).expect("known id") += 1;
            succ.entry(i.as_str()).or_default().push(n.id.as_str());
        }
    }
    let mut ready: BTreeSet<&str> =
        indegree.iter().filter(|(_, &d)| d == 0).map(|(&id, _)| id).collect();
    let mut order = Vec::with_capacity(ids.len());
    while let Some(id) = ready.pop_first() {
        order.push(id.to_string());
        for &s in succ.get(id).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indegree.get_mut(s).expect("known id");
            *d -= 1;
            if *d == 0 {
                ready.insert(s);
            }
        }
    }
    if order.len() != ids.len() {
        let cycles = find_cycles(graph);
        let members = cycles.into_iter().flatten().collect();
        return Err(GraphError::Cycle(members));
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(nodes: Vec<LayerNode>) -> ModelGraph {
        ModelGraph {
            name: "t".into(),
            nodes,
            input_shape: TensorShape::new(8, 8, 3),
            granularity: Granularity::Model,
            cutoff_layer: None,
        }
    }

    fn relu(id: &str, inputs: &[&str]) -> LayerNode {
        LayerNode::new(id, LayerKind::ReluLikeActivation, inputs)
    }

    #[test]
    fn single_input_is_valid() {
        assert!(validate_graph(&graph(vec![LayerNode::input("in")])).is_empty());
    }

    #[test]
    fn dangling_reference_names_the_missing_id() {
        let g = graph(vec![LayerNode::input("in"), relu("b", &["x"])]);
        let errs = validate_graph(&g);
        assert_eq!(
            errs,
            vec![StructuralError::UnknownInput { node: "b".into(), input: "x".into() }]
        );
    }

    #[test]
    fn two_node_cycle_is_reported() {
        let g = graph(vec![relu("a", &["b"]), relu("b", &["a"])]);
        let errs = validate_graph(&g);
        assert!(errs.contains(&StructuralError::Cycle(vec!["a".into(), "b".into()])));
        match topological_order(&g) {
            Err(GraphError::Cycle(ids)) => assert_eq!(ids, vec!["a", "b"]),
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn arity_and_attribute_checks() {
        let mut conv = LayerNode::new("c", LayerKind::Conv2d, &["in"]);
        conv.attrs.kernel = Some([3, 0]);
        let add = LayerNode::new("add", LayerKind::ElementwiseAdd, &["c"]);
        let g = graph(vec![LayerNode::input("in"), conv, add]);
        let errs = validate_graph(&g);
        assert!(errs.contains(&StructuralError::MissingAttribute {
            node: "c".into(),
            attribute: "filters"
        }));
        assert!(errs.contains(&StructuralError::NonPositiveAttribute {
            node: "c".into(),
            attribute: "kernel"
        }));
        assert!(errs.iter().any(|e| matches!(e, StructuralError::Arity { node, .. } if node == "add")));
    }

    #[test]
    fn cutoff_must_be_the_terminal() {
        let mut g = graph(vec![LayerNode::input("in"), relu("a", &["in"]), relu("b", &["a"])]);
        g.cutoff_layer = Some("a".into());
        assert_eq!(validate_graph(&g), vec![StructuralError::CutoffNotTerminal("a".into())]);
        g.cutoff_layer = Some("b".into());
        assert!(validate_graph(&g).is_empty());
    }

    #[test]
    fn linear_chain_order() {
        let g = graph(vec![LayerNode::input("a"), relu("b", &["a"]), relu("c", &["b"])]);
        assert_eq!(topological_order(&g).unwrap(), vec!["a", "b", "c"]);
    }

    #[test]
    fn diamond_breaks_ties_lexically() {
        let g = graph(vec![
            LayerNode::input("a"),
            relu("c", &["a"]),
            relu("b", &["a"]),
            LayerNode::new("d", LayerKind::ElementwiseAdd, &["b", "c"]),
        ]);
        assert_eq!(topological_order(&g).unwrap(), vec!["a", "b", "c", "d"]);
    }

    #[test]
    fn hash_ignores_declaration_order_but_not_attributes() {
        let a = graph(vec![
            LayerNode::input("a"),
            relu("c", &["a"]),
            relu("b", &["a"]),
            LayerNode::new("d", LayerKind::ElementwiseAdd, &["b", "c"]),
        ]);
        let mut b = a.clone();
        b.nodes.swap(1, 2);
        assert_eq!(a.content_hash().unwrap(), b.content_hash().unwrap());
        b.nodes[1].include_bias = true;
        assert_ne!(a.content_hash().unwrap(), b.content_hash().unwrap());
    }

    #[test]
    fn element_count_overflow_is_detected() {
        let s = TensorShape::new(u64::MAX, 2, 1);
        assert_eq!(s.checked_elements(), None);
        assert_eq!(TensorShape::new(2, 3, 4).with_time_steps(5).checked_elements(), Some(120));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in LayerKind::ALL {
            assert_eq!(k.as_str().parse::<LayerKind>().unwrap(), k);
        }
        assert!(matches!("conv3d".parse::<LayerKind>(), Err(GraphError::UnknownKind(k)) if k == "conv3d"));
    }
}
