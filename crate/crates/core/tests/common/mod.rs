#![allow(dead_code)]

use std::collections::HashMap;

use dlhwbench::accel::{AcceleratorSpec, MeasurementLevel, OperationPoint, PointLabel};
use dlhwbench::graph::{Granularity, LayerKind, LayerNode, ModelGraph, Padding, TensorShape};
use dlhwbench::submission::PIRecord;
use rand::seq::SliceRandom;
use rand::Rng;

/// Output extent computed directly from the padding definition.
fn out_extent(n: u64, k: u64, s: u64, padding: Padding) -> u64 {
    match padding {
        Padding::Same => (n + s - 1) / s,
        Padding::Valid => (n - k) / s + 1,
    }
}

/// Counts MACs by walking every output position, kernel tap and channel pair.
/// Shapes are tracked here independently of the library's shape inference.
pub fn brute_force_macs(graph: &ModelGraph) -> (u64, HashMap<String, u64>) {
    let mut shapes: HashMap<&str, TensorShape> = HashMap::new();
    let mut per_node = HashMap::new();
    let mut total = 0u64;
    for node in &graph.nodes {
        let ins: Vec<TensorShape> = node.inputs.iter().map(|i| shapes[i.as_str()]).collect();
        let a = &node.attrs;
        let [kh, kw] = a.kernel.unwrap_or([1, 1]);
        let s = a.stride.unwrap_or(1);
        let pad = a.padding.unwrap_or(Padding::Same);
        let mut macs = 0u64;
        let out = match node.kind {
            LayerKind::Input => graph.input_shape,
            LayerKind::Conv2d | LayerKind::PointwiseConv2d => {
                let x = ins[0];
                let g = a.groups.unwrap_or(1);
                let f = a.filters.unwrap();
                let (oh, ow) = (out_extent(x.height, kh, s, pad), out_extent(x.width, kw, s, pad));
                for _t in 0..x.time_steps {
                    for _oy in 0..oh {
                        for _ox in 0..ow {
                            for _ky in 0..kh {
                                for _kx in 0..kw {
                                    for co in 0..f {
                                        let group = co / (f / g);
                                        for ci in 0..x.channels {
                                            if ci / (x.channels / g) == group {
                                                macs += 1;
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                TensorShape { height: oh, width: ow, channels: f, time_steps: x.time_steps }
            }
            LayerKind::DepthwiseConv2d => {
                let x = ins[0];
                let (oh, ow) = (out_extent(x.height, kh, s, pad), out_extent(x.width, kw, s, pad));
                for _ in 0..x.time_steps * oh * ow {
                    for _ in 0..kh * kw {
                        for _ in 0..x.channels {
                            macs += 1;
                        }
                    }
                }
                TensorShape { height: oh, width: ow, channels: x.channels, time_steps: x.time_steps }
            }
            LayerKind::TransposedConv2d => {
                let x = ins[0];
                let f = a.filters.unwrap();
                // Every input element scatters into a k x k window of every output channel.
                for _ in 0..x.time_steps * x.height * x.width {
                    for _ in 0..kh * kw {
                        for _ in 0..x.channels {
                            for _ in 0..f {
                                macs += 1;
                            }
                        }
                    }
                }
                let (oh, ow) = match pad {
                    Padding::Same => (x.height * s, x.width * s),
                    Padding::Valid => ((x.height - 1) * s + kh, (x.width - 1) * s + kw),
                };
                TensorShape { height: oh, width: ow, channels: f, time_steps: x.time_steps }
            }
            LayerKind::MaxPool | LayerKind::AvgPool => {
                let x = ins[0];
                TensorShape {
                    height: out_extent(x.height, kh, s, pad),
                    width: out_extent(x.width, kw, s, pad),
                    ..x
                }
            }
            LayerKind::FullyConnected => {
                let x = ins[0];
                let u = a.units.unwrap();
                for _ in 0..x.time_steps {
                    for _ in 0..u {
                        for _ in 0..x.height * x.width * x.channels {
                            macs += 1;
                        }
                    }
                }
                TensorShape::vector(u).with_time_steps(x.time_steps)
            }
            LayerKind::LstmCell => {
                let x = ins[0];
                let h = a.hidden_units.unwrap();
                let n_in = x.height * x.width * x.channels;
                for _ in 0..x.time_steps {
                    for _gate in 0..4 {
                        for _ in 0..h {
                            for _ in 0..n_in + h {
                                macs += 1;
                            }
                        }
                    }
                }
                TensorShape::vector(h).with_time_steps(x.time_steps)
            }
            LayerKind::UpsampleBilinear => {
                let x = ins[0];
                let f = a.upsample_factor.unwrap();
                TensorShape { height: x.height * f, width: x.width * f, ..x }
            }
            LayerKind::Concat => TensorShape { channels: ins.iter().map(|s| s.channels).sum(), ..ins[0] },
            LayerKind::Crop => TensorShape { height: ins[1].height, width: ins[1].width, ..ins[0] },
            _ => ins[0],
        };
        shapes.insert(&node.id, out);
        per_node.insert(node.id.clone(), macs);
        total += macs;
    }
    (total, per_node)
}

/// Random valid graph of at most `max_nodes` nodes (input included) with
/// every dimension at most 16.
pub fn random_small_graph<R: Rng>(rng: &mut R, max_nodes: usize) -> ModelGraph {
    let input = TensorShape::new(rng.gen_range(1..=16), rng.gen_range(1..=16), rng.gen_range(1..=16));
    let mut nodes = vec![LayerNode::input("n0")];
    let mut shapes = vec![input];
    let count = rng.gen_range(2..=max_nodes);
    while nodes.len() < count {
        let i = nodes.len();
        let id = format!("n{i}");
        let pick = rng.gen_range(0..shapes.len());
        let src = nodes[pick].id.clone();
        let x = shapes[pick];
        let k = rng.gen_range(1..=3u64);
        let s = rng.gen_range(1..=2u64);
        let pad = if rng.gen_bool(0.5) && x.height >= k && x.width >= k { Padding::Valid } else { Padding::Same };
        let spatial = |n: u64| out_extent(n, k, s, pad);
        let (node, shape) = match rng.gen_range(0..11) {
            0 => {
                let f = rng.gen_range(1..=16);
                let g = if x.channels % 2 == 0 && f % 2 == 0 && rng.gen_bool(0.3) { 2 } else { 1 };
                (
                    LayerNode::conv(&id, &src, k, s, f).with_padding(pad).with_groups(g).with_bias(rng.gen_bool(0.5)),
                    TensorShape { height: spatial(x.height), width: spatial(x.width), channels: f, time_steps: 1 },
                )
            }
            1 => (
                LayerNode::depthwise(&id, &src, k, s).with_padding(pad),
                TensorShape { height: spatial(x.height), width: spatial(x.width), ..x },
            ),
            2 => {
                let f = rng.gen_range(1..=16);
                (LayerNode::pointwise(&id, &src, f), TensorShape { channels: f, ..x })
            }
            3 => {
                let kind = *[LayerKind::MaxPool, LayerKind::AvgPool].choose(rng).unwrap();
                (
                    LayerNode::pool(&id, kind, &src, k, s).with_padding(pad),
                    TensorShape { height: spatial(x.height), width: spatial(x.width), ..x },
                )
            }
            4 => {
                let f = rng.gen_range(1..=16);
                let node = LayerNode::transposed(&id, &src, k, s, f).with_padding(pad);
                let (oh, ow) = match pad {
                    Padding::Same => (x.height * s, x.width * s),
                    Padding::Valid => ((x.height - 1) * s + k, (x.width - 1) * s + k),
                };
                if oh > 16 || ow > 16 {
                    continue;
                }
                (node, TensorShape { height: oh, width: ow, channels: f, time_steps: 1 })
            }
            5 => {
                let u = rng.gen_range(1..=16);
                (LayerNode::fully_connected(&id, &src, u), TensorShape::vector(u))
            }
            6 => {
                let h = rng.gen_range(1..=16);
                (LayerNode::lstm(&id, &src, h), TensorShape::vector(h))
            }
            7 => {
                let others: Vec<usize> = (0..shapes.len()).filter(|&j| shapes[j] == x).collect();
                let other = nodes[*others.choose(rng).unwrap()].id.clone();
                (LayerNode::new(&id, LayerKind::ElementwiseAdd, &[&src, &other]), x)
            }
            8 => {
                let others: Vec<usize> =
                    (0..shapes.len()).filter(|&j| shapes[j].height == x.height && shapes[j].width == x.width).collect();
                let other = nodes[*others.choose(rng).unwrap()].id.clone();
                let c = x.channels + shapes[nodes.iter().position(|n| n.id == other).unwrap()].channels;
                if c > 32 {
                    continue;
                }
                (LayerNode::new(&id, LayerKind::Concat, &[&src, &other]), TensorShape { channels: c, ..x })
            }
            9 if x.height * 2 <= 16 && x.width * 2 <= 16 => {
                let mut node = LayerNode::new(&id, LayerKind::UpsampleBilinear, &[&src]);
                node.attrs.upsample_factor = Some(2);
                (node, TensorShape { height: x.height * 2, width: x.width * 2, ..x })
            }
            _ => (LayerNode::activation(&id, &src), x),
        };
        nodes.push(node);
        shapes.push(shape);
    }
    ModelGraph { name: "random".into(), nodes, input_shape: input, granularity: Granularity::Model, cutoff_layer: None }
}

/// Random accelerator whose capacity covers the largest tensor of the suite
/// at one byte per element.
pub fn random_accel<R: Rng>(rng: &mut R, min_capacity: u64) -> AcceleratorSpec {
    let points: Vec<PointLabel> = {
        let mut all = PointLabel::ALL.to_vec();
        all.shuffle(rng);
        all.truncate(rng.gen_range(1..=3));
        all
    };
    let levels = [MeasurementLevel::IpCore, MeasurementLevel::Chip, MeasurementLevel::Soc, MeasurementLevel::Board];
    AcceleratorSpec {
        name: format!("accel-{}", rng.gen::<u32>()),
        onchip_capacity_bytes: min_capacity + rng.gen_range(0..(256u64 << 20)),
        external_bandwidth_gbps: 10f64.powf(rng.gen_range(-1.0..3.0)),
        measurement_level: *levels.choose(rng).unwrap(),
        operation_points: points
            .into_iter()
            .map(|label| {
                let avg = rng.gen_range(0.1..50.0);
                OperationPoint {
                    label,
                    peak_performance_tops: 10f64.powf(rng.gen_range(-2.0..2.5)),
                    avg_power_w: avg,
                    peak_power_w: avg * rng.gen_range(1.0..3.0),
                }
            })
            .collect(),
    }
}

/// Record fields whose perturbation is caught by an error-grade rule.
/// Latency only feeds a warning-grade rule and footprint has no rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Efficiency,
    AchievedPerformance,
    Throughput,
    AvgBandwidth,
    PeakBandwidth,
    AvgPower,
    PeakPower,
    Accuracy,
}

pub const FIELDS: [Field; 8] = [
    Field::Efficiency,
    Field::AchievedPerformance,
    Field::Throughput,
    Field::AvgBandwidth,
    Field::PeakBandwidth,
    Field::AvgPower,
    Field::PeakPower,
    Field::Accuracy,
];

/// Perturbs one field of a category-2 oracle record, either beyond the
/// default tolerance of the rule that owns it or within every tolerance.
/// Returns false if the field cannot be perturbed that way on this record.
pub fn perturb<R: Rng>(rec: &mut PIRecord, field: Field, beyond: bool, allowance: f64, rng: &mut R) -> bool {
    let pick = |rng: &mut R, lo: f64, hi: f64| rng.gen_range(lo..=hi);
    let sided = |rng: &mut R| {
        if rng.gen_bool(0.5) {
            pick(rng, 0.5, 0.94)
        } else {
            pick(rng, 1.06, 1.5)
        }
    };
    match (field, beyond) {
        // implied peak deviates by |1/f - 1|
        (Field::Efficiency, true) => rec.compute_efficiency_percent *= sided(rng),
        (Field::Efficiency, false) => rec.compute_efficiency_percent *= pick(rng, 0.97, 1.03),
        (Field::AchievedPerformance, true) => rec.achieved_performance_tops *= sided(rng),
        (Field::AchievedPerformance, false) => rec.achieved_performance_tops *= pick(rng, 0.97, 1.03),
        // workload deviation is |1 - f| / f; any increase also breaks the bandwidth floor
        (Field::Throughput, true) => {
            rec.throughput_img_per_s *= if rng.gen_bool(0.5) { pick(rng, 0.5, 0.9) } else { pick(rng, 1.01, 1.5) }
        }
        (Field::Throughput, false) => rec.throughput_img_per_s *= pick(rng, 0.97, 1.0),
        (Field::AvgBandwidth, true) => {
            rec.avg_bandwidth_external_gbps *= if rng.gen_bool(0.5) {
                pick(rng, 0.5, 0.99)
            } else {
                rec.peak_bandwidth_external_gbps / rec.avg_bandwidth_external_gbps * pick(rng, 1.01, 2.0)
            }
        }
        (Field::AvgBandwidth, false) => {
            let room = rec.peak_bandwidth_external_gbps / rec.avg_bandwidth_external_gbps;
            rec.avg_bandwidth_external_gbps *= pick(rng, 1.0, room.max(1.0))
        }
        (Field::PeakBandwidth, true) => rec.peak_bandwidth_external_gbps = rec.avg_bandwidth_external_gbps * pick(rng, 0.5, 0.99),
        (Field::PeakBandwidth, false) => rec.peak_bandwidth_external_gbps *= pick(rng, 1.0, 2.0),
        (Field::AvgPower, true) => rec.avg_power_w = rec.peak_power_w * pick(rng, 1.01, 2.0),
        (Field::AvgPower, false) => rec.avg_power_w *= pick(rng, 0.5, 1.0),
        (Field::PeakPower, true) => rec.peak_power_w = rec.avg_power_w * pick(rng, 0.5, 0.99),
        (Field::PeakPower, false) => rec.peak_power_w *= pick(rng, 1.0, 2.0),
        (Field::Accuracy, beyond) => {
            let Some(acc) = rec.accuracy.as_mut() else {
                return false;
            };
            let sign = if acc.metric.higher_is_better() { -1.0 } else { 1.0 };
            let delta = if beyond { allowance + pick(rng, 0.001, 0.05) } else { pick(rng, -0.05, 0.99 * allowance) };
            acc.value += sign * delta;
        }
    }
    true
}

