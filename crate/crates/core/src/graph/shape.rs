use std::collections::HashMap;

use super::{topological_order, validate_graph, GraphError, LayerKind, LayerNode, ModelGraph, Padding, TensorShape};

/// Output shape of every node, keyed by node id.
pub type ShapeMap = HashMap<String, TensorShape>;

/// Infers the output shape of every node.
///
/// Fails with [`GraphError::Invalid`] if the graph does not validate and
/// with [`GraphError::ShapeMismatch`] naming the first offending node.
pub fn infer_shapes(graph: &ModelGraph) -> Result<ShapeMap, GraphError> {
    let errors = validate_graph(graph);
    if !errors.is_empty() {
        return Err(GraphError::Invalid(errors));
    }
    let mut shapes = ShapeMap::with_capacity(graph.nodes.len());
    for id in topological_order(graph)? {
        let node = graph.node(&id).expect("ordered id exists");
        let ins: Vec<TensorShape> = node.inputs.iter().map(|i| shapes[i.as_str()]).collect();
        let out = node_shape(node, &ins, graph.input_shape)?;
        if out.checked_elements().is_none() || !out.is_valid() {
            return Err(mismatch(node, format!("output shape {out} is empty or overflows")));
        }
        shapes.insert(id, out);
    }
    Ok(shapes)
}

fn mismatch(node: &LayerNode, reason: impl Into<String>) -> GraphError {
    GraphError::ShapeMismatch { node: node.id.clone(), reason: reason.into() }
}

fn spatial(node: &LayerNode, extent: u64, kernel: u64, stride: u64) -> Result<u64, GraphError> {
    match node.attrs.padding() {
        Padding::Same => Ok(extent.div_ceil(stride)),
        Padding::Valid => {
            if extent < kernel {
                Err(mismatch(node, format!("kernel {kernel} exceeds input extent {extent}")))
            } else {
                Ok((extent - kernel) / stride + 1)
            }
        }
    }
}

fn windowed(node: &LayerNode, input: TensorShape, channels: u64) -> Result<TensorShape, GraphError> {
    let [kh, kw] = node.attrs.kernel.unwrap_or([1, 1]);
    let s = node.attrs.stride();
    Ok(TensorShape {
        height: spatial(node, input.height, kh, s)?,
        width: spatial(node, input.width, kw, s)?,
        channels,
        time_steps: input.time_steps,
    })
}

pub(crate) fn node_shape(
    node: &LayerNode,
    ins: &[TensorShape],
    graph_input: TensorShape,
) -> Result<TensorShape, GraphError> {
    let a = &node.attrs;
    match node.kind {
        LayerKind::Input => Ok(graph_input),
        LayerKind::Output | LayerKind::ReluLikeActivation | LayerKind::Softmax => Ok(ins[0]),
        LayerKind::Conv2d => {
            let filters = a.filters.unwrap_or(0);
            let g = a.groups();
            if ins[0].channels % g != 0 || filters % g != 0 {
                return Err(mismatch(
                    node,
                    format!("groups {g} must divide input channels {} and filters {filters}", ins[0].channels),
                ));
            }
            windowed(node, ins[0], filters)
        }
        LayerKind::PointwiseConv2d => windowed(node, ins[0], a.filters.unwrap_or(0)),
        LayerKind::DepthwiseConv2d | LayerKind::MaxPool | LayerKind::AvgPool => {
            windowed(node, ins[0], ins[0].channels)
        }
        LayerKind::TransposedConv2d => {
            let [kh, kw] = a.kernel.unwrap_or([1, 1]);
            let s = a.stride();
            let up = |extent: u64, k: u64| match a.padding() {
                Padding::Same => extent * s,
                Padding::Valid => (extent - 1) * s + k,
            };
            Ok(TensorShape {
                height: up(ins[0].height, kh),
                width: up(ins[0].width, kw),
                channels: a.filters.unwrap_or(0),
                time_steps: ins[0].time_steps,
            })
        }
        LayerKind::UpsampleBilinear => {
            let f = a.upsample_factor.unwrap_or(1);
            Ok(TensorShape { height: ins[0].height * f, width: ins[0].width * f, ..ins[0] })
        }
        LayerKind::FullyConnected => {
            Ok(TensorShape::vector(a.units.unwrap_or(0)).with_time_steps(ins[0].time_steps))
        }
        LayerKind::LstmCell => {
            Ok(TensorShape::vector(a.hidden_units.unwrap_or(0)).with_time_steps(ins[0].time_steps))
        }
        LayerKind::ElementwiseAdd => {
            if let Some(bad) = ins.iter().find(|s| **s != ins[0]) {
                return Err(mismatch(node, format!("input shapes differ: {} vs {bad}", ins[0])));
            }
            Ok(ins[0])
        }
        LayerKind::Concat => {
            let first = ins[0];
            let mut channels = 0u64;
            for s in ins {
                if (s.height, s.width, s.time_steps) != (first.height, first.width, first.time_steps) {
                    return Err(mismatch(node, format!("concat inputs disagree on spatial dims: {first} vs {s}")));
                }
                channels = channels
                    .checked_add(s.channels)
                    .ok_or_else(|| mismatch(node, "channel count overflows"))?;
            }
            Ok(TensorShape { channels, ..first })
        }
        LayerKind::Crop => {
            let (data, reference) = (ins[0], ins[1]);
            if data.height < reference.height || data.width < reference.width {
                return Err(mismatch(node, format!("cannot crop {data} to the extent of {reference}")));
            }
            Ok(TensorShape { height: reference.height, width: reference.width, ..data })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Granularity;

    fn chain(input: TensorShape, nodes: Vec<LayerNode>) -> ModelGraph {
        let mut all = vec![LayerNode::input("in")];
        all.extend(nodes);
        ModelGraph {
            name: "t".into(),
            nodes: all,
            input_shape: input,
            granularity: Granularity::Model,
            cutoff_layer: None,
        }
    }

    const FULL_HD: TensorShape = TensorShape { height: 1080, width: 1920, channels: 3, time_steps: 1 };

    #[test]
    fn same_conv_keeps_spatial_dims() {
        let g = chain(FULL_HD, vec![LayerNode::conv("c", "in", 3, 1, 16)]);
        assert_eq!(infer_shapes(&g).unwrap()["c"], TensorShape::new(1080, 1920, 16));
    }

    #[test]
    fn pool_halves_exactly() {
        let g = chain(
            TensorShape::new(1080, 1920, 16),
            vec![LayerNode::pool("p", LayerKind::MaxPool, "in", 2, 2)],
        );
        assert_eq!(infer_shapes(&g).unwrap()["p"], TensorShape::new(540, 960, 16));
    }

    #[test]
    fn strided_same_conv_uses_ceil() {
        let g = chain(FULL_HD, vec![LayerNode::conv("c", "in", 7, 2, 24)]);
        assert_eq!(infer_shapes(&g).unwrap()["c"], TensorShape::new(540, 960, 24));
        let g = chain(TensorShape::new(135, 240, 8), vec![LayerNode::conv("c", "in", 3, 2, 8)]);
        assert_eq!(infer_shapes(&g).unwrap()["c"], TensorShape::new(68, 120, 8));
    }

    #[test]
    fn valid_padding_uses_floor() {
        let g = chain(
            TensorShape::new(1080, 1920, 3),
            vec![LayerNode::conv("c", "in", 3, 2, 64).with_padding(Padding::Valid)],
        );
        assert_eq!(infer_shapes(&g).unwrap()["c"], TensorShape::new(539, 959, 64));
    }

    #[test]
    fn upsample_concat_fc_lstm() {
        let mut up = LayerNode::new("up", LayerKind::UpsampleBilinear, &["in"]);
        up.attrs.upsample_factor = Some(4);
        let g = chain(
            TensorShape::new(5, 6, 3),
            vec![
                up,
                LayerNode::conv("c", "in", 1, 1, 2),
                LayerNode::new("cat", LayerKind::Concat, &["in", "c"]),
                LayerNode::fully_connected("fc", "cat", 10),
                LayerNode::lstm("l", "fc", 7),
            ],
        );
        let s = infer_shapes(&g).unwrap();
        assert_eq!(s["up"], TensorShape::new(20, 24, 3));
        assert_eq!(s["cat"], TensorShape::new(5, 6, 5));
        assert_eq!(s["fc"], TensorShape::vector(10));
        assert_eq!(s["l"], TensorShape::vector(7));
    }

    #[test]
    fn unequal_add_is_a_shape_mismatch() {
        let g = chain(
            TensorShape::new(4, 4, 3),
            vec![
                LayerNode::conv("c", "in", 3, 1, 8),
                LayerNode::new("add", LayerKind::ElementwiseAdd, &["in", "c"]),
            ],
        );
        match infer_shapes(&g) {
            Err(GraphError::ShapeMismatch { node, .. }) => assert_eq!(node, "add"),
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn crop_and_transposed_conv() {
        let g = chain(
            TensorShape::new(135, 240, 2),
            vec![
                LayerNode::pool("p", LayerKind::MaxPool, "in", 2, 2),
                LayerNode::transposed("up", "p", 4, 2, 2),
                LayerNode::new("crop", LayerKind::Crop, &["up", "in"]),
            ],
        );
        let s = infer_shapes(&g).unwrap();
        assert_eq!(s["up"], TensorShape::new(136, 240, 2));
        assert_eq!(s["crop"], TensorShape::new(135, 240, 2));
    }
}
