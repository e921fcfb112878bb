//! Attributed undirected graphs.
//!
//! Nodes are identified by dense integer ids assigned in creation order. Every
//! node carries exactly one value per schema attribute. Edges are stored as a
//! sorted list of `(low, high)` pairs, which doubles as the edge-id space: the
//! id of an edge is its position in that list.

mod export;
mod io;
mod schema;

pub use export::{to_dot, write_graphml};
pub use io::{from_json_str, load_graph, save_graph, to_json_string};
pub use schema::{Attribute, AttributeSchema};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NodeProfile {
    pub id: NodeId,
    /// Value index per attribute, local to that attribute's value list.
    pub values: Vec<usize>,
}

/// Undirected simple graph with attributed nodes. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributedGraph {
    schema: AttributeSchema,
    nodes: Vec<NodeProfile>,
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
}

impl AttributedGraph {
    /// Builds a graph from explicit parts, validating every invariant.
    pub fn from_parts(
        schema: AttributeSchema,
        nodes: Vec<NodeProfile>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self> {
        let mut builder = GraphBuilder::new(schema);
        for (i, node) in nodes.into_iter().enumerate() {
            if node.id != i {
                return Err(Error::InvalidGraph(format!(
                    "node ids must be dense and ascending: expected {i}, found {}",
                    node.id
                )));
            }
            builder.add_node(node.values)?;
        }
        for (u, v) in edges {
            if !builder.add_edge(u, v)? {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(builder.build())
    }

    pub fn empty(schema: AttributeSchema) -> Self {
        GraphBuilder::new(schema).build()
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeProfile] {
        &self.nodes
    }

    /// Edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        v < self.nodes.len()
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if self.contains_node(v) {
            Ok(())
        } else {
            Err(Error::NodeNotFound(v))
        }
    }

    pub fn profile(&self, v: NodeId) -> Result<&NodeProfile> {
        self.nodes.get(v).ok_or(Error::NodeNotFound(v))
    }

    /// Sorted neighbor list of `v`.
    ///
    /// Panics if `v` is not a node of the graph.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        self.check(v)?;
        Ok(self.adjacency[v].len())
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.nodes.len() && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn edge_id(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&key).ok()
    }

    /// Number of attributes on which `u` and `v` hold the same value.
    pub fn shared_attribute_count(&self, u: NodeId, v: NodeId) -> Result<usize> {
        let a = self.profile(u)?;
        let b = self.profile(v)?;
        Ok(a.values.iter().zip(&b.values).filter(|(x, y)| x == y).count())
    }

    /// Nodes holding `value` (local index) for attribute `attribute`, ascending.
    pub fn nodes_with_value(&self, attribute: usize, value: usize) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.values.get(attribute) == Some(&value))
            .map(|n| n.id)
            .collect()
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Incremental construction of an [`AttributedGraph`].
#[derive(Clone, Debug)]
pub struct GraphBuilder {
    schema: AttributeSchema,
    nodes: Vec<NodeProfile>,
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl GraphBuilder {
    pub fn new(schema: AttributeSchema) -> Self {
        GraphBuilder {
            schema,
            nodes: Vec::new(),
            adjacency: Vec::new(),
            edge_count: 0,
        }
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn profiles(&self) -> &[NodeProfile] {
        &self.nodes
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    /// Appends a node and returns its id.
    pub fn add_node(&mut self, values: Vec<usize>) -> Result<NodeId> {
        self.schema.check_profile(&values)?;
        let id = self.nodes.len();
        self.nodes.push(NodeProfile { id, values });
        self.adjacency.push(Vec::new());
        Ok(id)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.adjacency.len() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Adds the undirected edge `{u, v}`. Returns `false` if it already existed.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<bool> {
        let n = self.nodes.len();
        if u >= n {
            return Err(Error::NodeNotFound(u));
        }
        if v >= n {
            return Err(Error::NodeNotFound(v));
        }
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
        }
        match self.adjacency[u].binary_search(&v) {
            Ok(_) => Ok(false),
            Err(pos) => {
                self.adjacency[u].insert(pos, v);
                let pos = self.adjacency[v].binary_search(&u).unwrap_err();
                self.adjacency[v].insert(pos, u);
                self.edge_count += 1;
                Ok(true)
            }
        }
    }

    pub fn build(self) -> AttributedGraph {
        let mut edges = Vec::with_capacity(self.edge_count);
        for (u, adj) in self.adjacency.iter().enumerate() {
            edges.extend(adj.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        AttributedGraph {
            schema: self.schema,
            nodes: self.nodes,
            edges,
            adjacency: self.adjacency,
        }
    }
}
