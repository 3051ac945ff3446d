//! Analytical cost model: parameters, MACs, tensor sizes and the compulsory
//! external-memory traffic of a graph under an on-chip capacity.
//!
//! MAC counting: one multiply plus one accumulate. Bias additions are not
//! counted as MACs but biases are counted as parameters. Pooling, activation,
//! concat, add, crop and bilinear upsampling cost zero MACs. A transposed
//! convolution costs `k_h * k_w * C_in * C_out` per input position, which is
//! the number of non-zero taps of the equivalent convolution over the output
//! grid. Recurrent cells are costed per time step.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{infer_shapes, topological_order, GraphError, LayerKind, LayerNode, ModelGraph, TensorShape};

/// Operations per MAC when converting MAC counts to OPs.
pub const OPS_PER_MAC: f64 = 2.0;

#[derive(Debug, Error)]
pub enum CostError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("node '{0}' has no inferred shape")]
    Unshaped(String),
    #[error("on-chip capacity of {capacity} bytes cannot hold tensor '{tensor}' ({bytes} bytes)")]
    CapacityTooSmall { tensor: String, bytes: u64, capacity: u64 },
}

/// Bytes per element for weights and activations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Precision {
    pub weight_bytes: u64,
    pub activation_bytes: u64,
}

impl Precision {
    pub const fn uniform(bytes: u64) -> Self {
        Self { weight_bytes: bytes, activation_bytes: bytes }
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::uniform(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LayerCost {
    pub node_id: String,
    pub kind: LayerKind,
    pub out_shape: TensorShape,
    pub params: u64,
    pub macs: u64,
    pub input_bytes: u64,
    pub output_bytes: u64,
    pub weight_bytes: u64,
}

/// Memory state while one node of the schedule executes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScheduleStep {
    pub node_id: String,
    /// Activation bytes live during the step, including the step's output.
    pub live_bytes: u64,
    pub weight_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TensorSize {
    pub tensor: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CostReport {
    pub model_name: String,
    pub precision: Precision,
    pub layers: Vec<LayerCost>,
    pub total_params: u64,
    pub total_macs: u64,
    pub total_weight_bytes: u64,
    pub total_activation_peak_bytes: u64,
    pub input_bytes: u64,
    pub terminal_output_bytes: u64,
    pub largest_tensor: TensorSize,
    pub schedule: Vec<ScheduleStep>,
}

impl CostReport {
    pub fn gmac(&self) -> f64 {
        self.total_macs as f64 / 1e9
    }

    pub fn ops(&self) -> f64 {
        OPS_PER_MAC * self.total_macs as f64
    }

    /// Traffic with no spills: input read, outputs written, weights read once.
    pub fn base_traffic(&self) -> u64 {
        self.input_bytes + self.terminal_output_bytes + self.total_weight_bytes
    }

    /// Lower bound on external traffic per inference for a given on-chip
    /// capacity: base traffic plus a write-out and read-back of every byte by
    /// which a step's footprint (live activations plus the step's weights)
    /// exceeds the capacity.
    pub fn min_traffic(&self, capacity: u64) -> Result<u64, CostError> {
        if self.largest_tensor.bytes > capacity {
            return Err(CostError::CapacityTooSmall {
                tensor: self.largest_tensor.tensor.clone(),
                bytes: self.largest_tensor.bytes,
                capacity,
            });
        }
        let spill: u64 = self
            .schedule
            .iter()
            .map(|s| (s.live_bytes + s.weight_bytes).saturating_sub(capacity))
            .sum();
        Ok(self.base_traffic() + 2 * spill)
    }

    /// Largest footprint of any step; no spills at or above this capacity.
    pub fn spill_free_capacity(&self) -> u64 {
        self.schedule.iter().map(|s| s.live_bytes + s.weight_bytes).max().unwrap_or(0)
    }

    /// Weights plus peak activation liveness.
    pub fn memory_footprint_bytes(&self) -> u64 {
        self.total_weight_bytes + self.total_activation_peak_bytes
    }
}

/// Whether the node materialises a new activation buffer.
fn allocates(kind: LayerKind) -> bool {
    kind != LayerKind::Output
}

fn conv_window(node: &LayerNode) -> u64 {
    let [kh, kw] = node.attrs.kernel.unwrap_or([1, 1]);
    kh * kw
}

/// Parameters and MACs of a single node given its input and output shapes.
pub fn layer_cost(
    node: &LayerNode,
    in_shapes: &[TensorShape],
    out_shape: TensorShape,
    precision: Precision,
) -> Result<LayerCost, CostError> {
    let needed = node.kind.arity().unwrap_or(2);
    if in_shapes.len() < needed {
        return Err(CostError::Unshaped(node.id.clone()));
    }
    let bias = |n: u64| if node.include_bias { n } else { 0 };
    let (params, macs) = match node.kind {
        LayerKind::Conv2d | LayerKind::PointwiseConv2d => {
            let k = conv_window(node);
            let cin = in_shapes[0].channels / node.attrs.groups();
            let cout = out_shape.channels;
            (k * cin * cout + bias(cout), k * cin * cout * out_shape.pixels())
        }
        LayerKind::DepthwiseConv2d => {
            let k = conv_window(node);
            let c = out_shape.channels;
            (k * c + bias(c), k * c * out_shape.pixels())
        }
        LayerKind::TransposedConv2d => {
            let k = conv_window(node);
            let (cin, cout) = (in_shapes[0].channels, out_shape.channels);
            (k * cin * cout + bias(cout), k * cin * cout * in_shapes[0].pixels())
        }
        LayerKind::FullyConnected => {
            let n_in = in_shapes[0].pixels() * in_shapes[0].channels;
            let n_out = out_shape.channels;
            (n_in * n_out + bias(n_out), n_in * n_out)
        }
        LayerKind::LstmCell => {
            let n_in = in_shapes[0].pixels() * in_shapes[0].channels;
            let h = out_shape.channels;
            (4 * ((n_in + h) * h + bias(h)), 4 * (n_in + h) * h)
        }
        _ => (0, 0),
    };
    // Weights are shared across time steps; the work is repeated.
    let macs = macs * out_shape.time_steps;
    let act = precision.activation_bytes;
    Ok(LayerCost {
        node_id: node.id.clone(),
        kind: node.kind,
        out_shape,
        params,
        macs,
        input_bytes: in_shapes.iter().map(|s| s.elements() * act).sum(),
        output_bytes: out_shape.elements() * act,
        weight_bytes: params * precision.weight_bytes,
    })
}

/// Aggregates [`layer_cost`] over the topological schedule and records the
/// liveness profile used by [`CostReport::min_traffic`].
pub fn model_cost(graph: &ModelGraph, precision: Precision) -> Result<CostReport, CostError> {
    let shapes = infer_shapes(graph)?;
    let order = topological_order(graph)?;
    let by_id: HashMap<&str, &LayerNode> = graph.nodes.iter().map(|n| (n.id.as_str(), n)).collect();

    let mut layers = Vec::with_capacity(order.len());
    for id in &order {
        let node = by_id[id.as_str()];
        let ins = node
            .inputs
            .iter()
            .map(|i| shapes.get(i).copied().ok_or_else(|| CostError::Unshaped(i.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let out = *shapes.get(id).ok_or_else(|| CostError::Unshaped(id.clone()))?;
        layers.push(layer_cost(node, &ins, out, precision)?);
    }

    let step: HashMap<&str, usize> = order.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut last_use: Vec<usize> = (0..order.len()).collect();
    for node in &graph.nodes {
        let s = step[node.id.as_str()];
        for i in &node.inputs {
            let p = step[i.as_str()];
            last_use[p] = last_use[p].max(s);
        }
    }

    let buffer = |i: usize| if allocates(layers[i].kind) { layers[i].output_bytes } else { 0 };
    let mut live = vec![0u64; order.len()];
    for (p, &end) in last_use.iter().enumerate() {
        let bytes = buffer(p);
        for l in &mut live[p..=end] {
            *l += bytes;
        }
    }
    let schedule: Vec<ScheduleStep> = layers
        .iter()
        .zip(&live)
        .map(|(l, &live_bytes)| ScheduleStep { node_id: l.node_id.clone(), live_bytes, weight_bytes: l.weight_bytes })
        .collect();

    let mut largest = TensorSize { tensor: String::new(), bytes: 0 };
    for (i, l) in layers.iter().enumerate() {
        if buffer(i) > largest.bytes {
            largest = TensorSize { tensor: l.node_id.clone(), bytes: buffer(i) };
        }
        if l.weight_bytes > largest.bytes {
            largest = TensorSize { tensor: format!("{} (weights)", l.node_id), bytes: l.weight_bytes };
        }
    }

    let input_bytes = layers.iter().filter(|l| l.kind == LayerKind::Input).map(|l| l.output_bytes).sum();
    let terminal_output_bytes = graph
        .terminal_ids()
        .iter()
        .map(|id| layers[step[id]].output_bytes)
        .sum();

    Ok(CostReport {
        model_name: graph.name.clone(),
        precision,
        total_params: layers.iter().map(|l| l.params).sum(),
        total_macs: layers.iter().map(|l| l.macs).sum(),
        total_weight_bytes: layers.iter().map(|l| l.weight_bytes).sum(),
        total_activation_peak_bytes: live.iter().copied().max().unwrap_or(0),
        input_bytes,
        terminal_output_bytes,
        largest_tensor: largest,
        schedule,
        layers,
    })
}

/// Compulsory traffic of `graph` for one inference at the given capacity.
pub fn min_traffic(graph: &ModelGraph, precision: Precision, capacity: u64) -> Result<u64, CostError> {
    model_cost(graph, precision)?.min_traffic(capacity)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct LayerRow {
    pub node_id: String,
    pub kind: String,
    pub out_shape: String,
    pub params: u64,
    pub macs: u64,
    pub input_bytes: u64,
    pub output_bytes: u64,
    pub weight_bytes: u64,
}

/// Per-layer rows in schedule order.
pub fn per_layer_table(report: &CostReport) -> Vec<LayerRow> {
    report
        .layers
        .iter()
        .map(|l| LayerRow {
            node_id: l.node_id.clone(),
            kind: l.kind.to_string(),
            out_shape: l.out_shape.to_string(),
            params: l.params,
            macs: l.macs,
            input_bytes: l.input_bytes,
            output_bytes: l.output_bytes,
            weight_bytes: l.weight_bytes,
        })
        .collect()
}
