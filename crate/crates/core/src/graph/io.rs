//! JSON graph files.
//!
//! ```text
//! {
//!   "schema": { "attributes": [ { "name", "values", "priors" }, ... ] },
//!   "nodes":  [ { "id": 0, "values": ["male", "Google", "York"] }, ... ],
//!   "edges":  [ [0, 1], [0, 2], ... ]
//! }
//! ```
//!
//! Edges are written as `[low, high]` in ascending order. On read, self-loops,
//! reversed pairs and duplicates are rejected with the position of the
//! offending edge.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use super::{AttributeSchema, AttributedGraph, NodeId, NodeProfile};
use crate::error::{Error, Result};

#[derive(Serialize)]
struct NodeOut<'a> {
    id: NodeId,
    values: Vec<&'a str>,
}

#[derive(Serialize)]
struct GraphOut<'a> {
    schema: &'a AttributeSchema,
    nodes: Vec<NodeOut<'a>>,
    edges: &'a [(NodeId, NodeId)],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeIn {
    id: NodeId,
    values: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphIn {
    schema: AttributeSchema,
    nodes: Vec<NodeIn>,
    edges: EdgeList,
}

struct EdgeList(Vec<(NodeId, NodeId)>);

impl<'de> Deserialize<'de> for EdgeList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct EdgeVisitor;

        impl<'de> Visitor<'de> for EdgeVisitor {
            type Value = EdgeList;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of [low, high] node id pairs")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<EdgeList, A::Error> {
                let mut edges = Vec::with_capacity(seq.size_hint().unwrap_or(0));
                let mut seen = HashSet::new();
                while let Some((u, v)) = seq.next_element::<(NodeId, NodeId)>()? {
                    if u == v {
                        return Err(de::Error::custom(format!("self-loop [{u}, {v}]")));
                    }
                    if u > v {
                        return Err(de::Error::custom(format!(
                            "edge [{u}, {v}] must be written as [low, high]"
                        )));
                    }
                    if !seen.insert((u, v)) {
                        return Err(de::Error::custom(format!("duplicate edge [{u}, {v}]")));
                    }
                    if edges.last().is_some_and(|&last| last > (u, v)) {
                        return Err(de::Error::custom(format!("edge [{u}, {v}] out of order")));
                    }
                    edges.push((u, v));
                }
                Ok(EdgeList(edges))
            }
        }

        deserializer.deserialize_seq(EdgeVisitor)
    }
}

pub fn to_json_string(g: &AttributedGraph) -> Result<String> {
    let schema = g.schema();
    let nodes = g
        .nodes()
        .iter()
        .map(|n| NodeOut {
            id: n.id,
            values: n
                .values
                .iter()
                .zip(schema.attributes())
                .map(|(&v, a)| a.values[v].as_str())
                .collect(),
        })
        .collect();
    let doc = GraphOut {
        schema,
        nodes,
        edges: g.edges(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

pub fn from_json_str(text: &str) -> Result<AttributedGraph> {
    let doc: GraphIn = serde_json::from_str(text).map_err(Error::from_json_parse)?;
    let schema = doc.schema;
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for node in doc.nodes {
        if node.values.len() != schema.attribute_count() {
            return Err(Error::SchemaMismatch(format!(
                "node {} has {} values, schema has {} attributes",
                node.id,
                node.values.len(),
                schema.attribute_count()
            )));
        }
        let values = node
            .values
            .iter()
            .enumerate()
            .map(|(a, name)| {
                schema.value_index(a, name).ok_or_else(|| {
                    Error::SchemaMismatch(format!(
                        "node {}: `{name}` is not a value of `{}`",
                        node.id,
                        schema.attributes()[a].name
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        nodes.push(NodeProfile { id: node.id, values });
    }
    AttributedGraph::from_parts(schema, nodes, doc.edges.0)
}

pub fn save_graph(g: &AttributedGraph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(g)?)?;
    Ok(())
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<AttributedGraph> {
    from_json_str(&fs::read_to_string(path)?)
}
