//! Text document format for [`ModelGraph`].
//!
//! Documents are JSON objects with the fields `schema-version`, `name`,
//! `granularity`, `cutoff-layer`, `input-shape` and `nodes`. Each node carries
//! `id`, `kind`, `attributes`, `inputs` and `include-bias`. Unknown fields are
//! collected as warnings; unknown layer kinds are errors.

use serde::{Deserialize, Serialize};

use super::{Attributes, GraphError, Granularity, LayerKind, LayerNode, ModelGraph, TensorShape};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
struct GraphDocument {
    schema_version: String,
    name: String,
    granularity: Granularity,
    #[serde(default)]
    cutoff_layer: Option<String>,
    input_shape: TensorShape,
    nodes: Vec<NodeDocument>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
struct NodeDocument {
    id: String,
    kind: String,
    #[serde(default)]
    attributes: Attributes,
    #[serde(default)]
    inputs: Vec<String>,
    #[serde(default)]
    include_bias: Option<bool>,
}

/// A deserialized graph plus the paths of any fields that were ignored.
#[derive(Debug, Clone)]
pub struct ParsedGraph {
    pub graph: ModelGraph,
    pub warnings: Vec<String>,
}

pub fn serialize(graph: &ModelGraph) -> String {
    let doc = GraphDocument {
        schema_version: SCHEMA_VERSION.to_string(),
        name: graph.name.clone(),
        granularity: graph.granularity,
        cutoff_layer: graph.cutoff_layer.clone(),
        input_shape: graph.input_shape,
        nodes: graph
            .nodes
            .iter()
            .map(|n| NodeDocument {
                id: n.id.clone(),
                kind: n.kind.as_str().to_string(),
                attributes: n.attrs.clone(),
                inputs: n.inputs.clone(),
                include_bias: Some(n.include_bias),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("graph document serializes");
    out.push('\n');
    out
}

pub fn deserialize(text: &str) -> Result<ParsedGraph, GraphError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| GraphError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let version = value.get("schema-version").ok_or_else(|| GraphError::Field {
        path: "schema-version".into(),
        message: "missing field".into(),
    })?;
    let version = match version {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if version != SCHEMA_VERSION {
        return Err(GraphError::SchemaVersion { found: version, expected: SCHEMA_VERSION.into() });
    }

    let mut warnings = Vec::new();
    let doc: GraphDocument = {
        let mut on_ignored = |path: serde_ignored::Path<'_>| {
            warnings.push(format!("unknown field '{path}' ignored"));
        };
        let de = serde_ignored::Deserializer::new(value, &mut on_ignored);
        serde_path_to_error::deserialize(de).map_err(|e| GraphError::Field {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        })?
    };

    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for n in doc.nodes {
        let kind: LayerKind = n.kind.parse()?;
        nodes.push(LayerNode {
            include_bias: n.include_bias.unwrap_or_else(|| kind.has_weights()),
            id: n.id,
            kind,
            attrs: n.attributes,
            inputs: n.inputs,
        });
    }

    Ok(ParsedGraph {
        graph: ModelGraph {
            name: doc.name,
            nodes,
            input_shape: doc.input_shape,
            granularity: doc.granularity,
            cutoff_layer: doc.cutoff_layer,
        },
        warnings,
    })
}
