//! Community detection.
//!
//! Three methods are provided: multilevel modularity optimization, recursive
//! leading-eigenvector bisection of the modularity matrix, and link
//! communities restricted by link context. The first two return partitions;
//! link communities overlap.

mod eigenvector;
mod links;
mod modularity;
mod multilevel;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use eigenvector::leading_eigenvector_communities;
pub use links::{
    link_communities, link_context, link_dendrogram, links_in_context_communities, partition_density,
    DendrogramLevel, LinkCluster, LinkDendrogram, LinkMerge, LinkSimilarity,
};
pub use modularity::modularity;
pub use multilevel::multilevel_communities;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Multilevel modularity optimization.
    #[serde(rename = "MC")]
    Multilevel,
    #[serde(rename = "LE")]
    LeadingEigenvector,
    #[serde(rename = "LiC")]
    LinksInContext,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Multilevel, Method::LeadingEigenvector, Method::LinksInContext];

    pub fn code(self) -> &'static str {
        match self {
            Method::Multilevel => "MC",
            Method::LeadingEigenvector => "LE",
            Method::LinksInContext => "LiC",
        }
    }

    pub fn detect(self, g: &AttributedGraph) -> CommunityCover {
        match self {
            Method::Multilevel => multilevel_communities(g),
            Method::LeadingEigenvector => leading_eigenvector_communities(g),
            Method::LinksInContext => links_in_context_communities(g),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "MC" | "mc" | "multilevel" => Ok(Method::Multilevel),
            "LE" | "le" | "leading-eigenvector" => Ok(Method::LeadingEigenvector),
            "LiC" | "lic" | "LIC" | "links-in-context" => Ok(Method::LinksInContext),
            other => Err(Error::InvalidConfig(format!("unknown community method `{other}`"))),
        }
    }
}

/// A set of node clusters. Clusters are sorted internally and ordered by
/// size (descending), then smallest member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityCover {
    pub method: Method,
    pub overlapping: bool,
    pub clusters: Vec<Vec<NodeId>>,
}

impl CommunityCover {
    pub fn new(method: Method, overlapping: bool, clusters: Vec<Vec<NodeId>>) -> Self {
        let mut clusters: Vec<Vec<NodeId>> = clusters
            .into_iter()
            .filter(|c| !c.is_empty())
            .map(|mut c| {
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();
        clusters.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        CommunityCover {
            method,
            overlapping,
            clusters,
        }
    }

    /// Builds a partition from a per-node cluster label.
    pub fn from_labels(method: Method, labels: &[usize]) -> Self {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut clusters = vec![Vec::new(); k];
        for (v, &c) in labels.iter().enumerate() {
            clusters[c].push(v);
        }
        Self::new(method, false, clusters)
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Per-node cluster label, or `None` if the clusters do not partition
    /// `0..node_count`.
    pub fn labels(&self, node_count: usize) -> Option<Vec<usize>> {
        let mut labels = vec![usize::MAX; node_count];
        for (c, cluster) in self.clusters.iter().enumerate() {
            for &v in cluster {
                if v >= node_count || labels[v] != usize::MAX {
                    return None;
                }
                labels[v] = c;
            }
        }
        labels.iter().all(|&l| l != usize::MAX).then_some(labels)
    }

    /// Checks the cover invariants against `g`.
    pub fn validate(&self, g: &AttributedGraph) -> Result<()> {
        let n = g.node_count();
        let mut seen = vec![0usize; n];
        for cluster in &self.clusters {
            if cluster.is_empty() {
                return Err(Error::InvalidGraph("empty cluster".into()));
            }
            for &v in cluster {
                *seen.get_mut(v).ok_or(Error::NodeNotFound(v))? += 1;
            }
        }
        if let Some(v) = seen.iter().position(|&c| c == 0) {
            return Err(Error::InvalidGraph(format!("node {v} is not covered")));
        }
        if !self.overlapping && seen.iter().any(|&c| c > 1) {
            return Err(Error::NotAPartition);
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
pub(crate) mod test_graphs {
    use crate::graph::fixtures::uniform;
    use crate::graph::AttributedGraph;

    /// Triangles {0,1,2} and {3,4,5} joined by the bridge 2-3.
    pub fn two_triangles() -> AttributedGraph {
        uniform(6, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)])
    }

    pub fn complete(n: usize) -> AttributedGraph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        uniform(n, &edges)
    }
}
