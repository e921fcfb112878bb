//! Link communities with contextual restriction.
//!
//! The context of a link is the set of `(attribute, value)` pairs its two
//! endpoints have in common. Two links that share an endpoint are compared
//! only if their contexts intersect (links with empty context are compared
//! only with each other). Their similarity is the Jaccard index of the
//! inclusive neighborhoods of the two non-shared endpoints. Links are merged
//! by single linkage in decreasing similarity; the dendrogram is cut where the
//! partition density peaks, and every link cluster becomes the node set of
//! its endpoints.

use std::collections::BTreeSet;

use super::{CommunityCover, Method};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, EdgeId, NodeId};

/// `(attribute index, value index)` pairs shared by both endpoints of a link.
pub type LinkContext = BTreeSet<(usize, usize)>;

#[derive(Clone, Debug, PartialEq)]
pub struct LinkCluster {
    /// Member edge ids, ascending.
    pub edges: Vec<EdgeId>,
    /// Pairs common to the contexts of all member links.
    pub context: LinkContext,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkSimilarity {
    /// Compare adjacent links only when their contexts intersect.
    Contextual,
    /// Compare every pair of adjacent links.
    ContextFree,
}

/// Context of the link `{u, v}`.
pub fn link_context(g: &AttributedGraph, u: NodeId, v: NodeId) -> Result<LinkContext> {
    if !g.has_edge(u, v) {
        return Err(Error::EdgeNotFound(u, v));
    }
    let a = &g.nodes()[u].values;
    let b = &g.nodes()[v].values;
    Ok(a.iter()
        .zip(b)
        .enumerate()
        .filter(|(_, (x, y))| x == y)
        .map(|(attr, (&x, _))| (attr, x))
        .collect())
}

/// Shared-attribute bitmask of each edge, by edge id.
fn context_masks(g: &AttributedGraph) -> Vec<u64> {
    assert!(g.schema().attribute_count() <= 64, "at most 64 attributes supported");
    g.edges()
        .iter()
        .map(|&(u, v)| {
            let a = &g.nodes()[u].values;
            let b = &g.nodes()[v].values;
            a.iter()
                .zip(b)
                .enumerate()
                .filter(|(_, (x, y))| x == y)
                .fold(0u64, |m, (i, _)| m | (1 << i))
        })
        .collect()
}

fn cluster_density(edges: usize, nodes: usize) -> f64 {
    if nodes <= 2 {
        return 0.0;
    }
    let (m, n) = (edges as f64, nodes as f64);
    (m * (m - n + 1.0) / ((n - 2.0) * (n - 1.0))).max(0.0)
}

/// Partition density `D = (2/M) sum_c m_c (m_c - n_c + 1) / ((n_c - 2)(n_c - 1))`,
/// with clusters of at most two nodes contributing zero and every
/// contribution clamped at zero.
pub fn partition_density(g: &AttributedGraph, clusters: &[LinkCluster]) -> Result<f64> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::Empty("edge set"));
    }
    let mut seen = vec![false; m];
    let mut sum = 0.0;
    for cluster in clusters {
        let mut nodes = BTreeSet::new();
        for &e in &cluster.edges {
            let &(u, v) = g
                .edges()
                .get(e)
                .ok_or_else(|| Error::InvalidGraph(format!("edge id {e} out of range")))?;
            if std::mem::replace(&mut seen[e], true) {
                return Err(Error::InvalidGraph(format!("edge id {e} in more than one cluster")));
            }
            nodes.insert(u);
            nodes.insert(v);
        }
        sum += cluster_density(cluster.edges.len(), nodes.len());
    }
    if let Some(e) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidGraph(format!("edge id {e} is not in any cluster")));
    }
    Ok(2.0 / m as f64 * sum)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkMerge {
    pub similarity: f64,
    pub a: EdgeId,
    pub b: EdgeId,
}

/// State of the dendrogram after all merges at one similarity level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DendrogramLevel {
    pub similarity: f64,
    /// Number of effective merges applied up to and including this level.
    pub merge_count: usize,
    pub partition_density: f64,
}

/// Single-linkage dendrogram over the links of a graph.
#[derive(Clone, Debug)]
pub struct LinkDendrogram {
    edge_count: usize,
    merges: Vec<LinkMerge>,
    /// Level 0 is the all-singleton state.
    levels: Vec<DendrogramLevel>,
}

impl LinkDendrogram {
    pub fn merges(&self) -> &[LinkMerge] {
        &self.merges
    }

    pub fn levels(&self) -> &[DendrogramLevel] {
        &self.levels
    }

    /// Level with the highest partition density; the earliest one on ties.
    pub fn best_level(&self) -> DendrogramLevel {
        let mut best = self.levels[0];
        for level in &self.levels[1..] {
            if level.partition_density > best.partition_density {
                best = *level;
            }
        }
        best
    }

    /// Link clusters after the first `merge_count` merges, as sorted edge-id
    /// lists ordered by smallest edge id.
    pub fn cut(&self, merge_count: usize) -> Vec<Vec<EdgeId>> {
        let mut uf = UnionFind::new(self.edge_count);
        for merge in &self.merges[..merge_count.min(self.merges.len())] {
            uf.union(merge.a, merge.b);
        }
        let mut groups: Vec<Vec<EdgeId>> = vec![Vec::new(); self.edge_count];
        for e in 0..self.edge_count {
            groups[uf.find(e)].push(e);
        }
        let mut out: Vec<Vec<EdgeId>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
        out.sort_by_key(|g| g[0]);
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns the `(root, absorbed)` pair, or `None` if already joined.
    fn union(&mut self, a: usize, b: usize) -> Option<(usize, usize)> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra] < self.size[rb] || (self.size[ra] == self.size[rb] && rb < ra) {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        Some((ra, rb))
    }
}

fn jaccard(a: &[NodeId], a_self: NodeId, b: &[NodeId], b_self: NodeId) -> f64 {
    // Inclusive neighborhoods: a ∪ {a_self}, b ∪ {b_self}.
    let mut left: Vec<NodeId> = a.to_vec();
    left.insert(left.binary_search(&a_self).unwrap_or_else(|p| p), a_self);
    let mut right: Vec<NodeId> = b.to_vec();
    right.insert(right.binary_search(&b_self).unwrap_or_else(|p| p), b_self);
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < left.len() && j < right.len() {
        match left[i].cmp(&right[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    common as f64 / (left.len() + right.len() - common) as f64
}

/// Builds the single-linkage link dendrogram of `g`.
pub fn link_dendrogram(g: &AttributedGraph, mode: LinkSimilarity) -> LinkDendrogram {
    let m = g.edge_count();
    let masks = context_masks(g);
    let comparable = |e: EdgeId, f: EdgeId| match mode {
        LinkSimilarity::ContextFree => true,
        LinkSimilarity::Contextual => {
            let (a, b) = (masks[e], masks[f]);
            // Both links contain the shared node, so a common attribute
            // implies a common value.
            (a & b) != 0 || (a == 0 && b == 0)
        }
    };

    let mut pairs: Vec<(f64, EdgeId, EdgeId)> = Vec::new();
    for k in 0..g.node_count() {
        let nbrs = g.neighbors(k);
        let ids: Vec<EdgeId> = nbrs.iter().map(|&x| g.edge_id(k, x).expect("adjacent")).collect();
        for x in 0..nbrs.len() {
            for y in x + 1..nbrs.len() {
                let (e, f) = (ids[x], ids[y]);
                if !comparable(e, f) {
                    continue;
                }
                let (i, j) = (nbrs[x], nbrs[y]);
                let s = jaccard(g.neighbors(i), i, g.neighbors(j), j);
                pairs.push((s, e.min(f), e.max(f)));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut uf = UnionFind::new(m);
    let mut cluster_edges = vec![1usize; m];
    let mut cluster_nodes: Vec<BTreeSet<NodeId>> =
        g.edges().iter().map(|&(u, v)| BTreeSet::from([u, v])).collect();
    let mut density_sum = 0.0;
    let scale = if m > 0 { 2.0 / m as f64 } else { 0.0 };

    let mut merges = Vec::new();
    let mut levels = vec![DendrogramLevel {
        similarity: f64::INFINITY,
        merge_count: 0,
        partition_density: 0.0,
    }];
    let mut idx = 0;
    while idx < pairs.len() {
        let level_sim = pairs[idx].0;
        let before = merges.len();
        while idx < pairs.len() && pairs[idx].0 == level_sim {
            let (_, e, f) = pairs[idx];
            idx += 1;
            let Some((root, absorbed)) = uf.union(e, f) else {
                continue;
            };
            density_sum -= cluster_density(cluster_edges[root], cluster_nodes[root].len());
            density_sum -= cluster_density(cluster_edges[absorbed], cluster_nodes[absorbed].len());
            let moved = std::mem::take(&mut cluster_nodes[absorbed]);
            if cluster_nodes[root].len() < moved.len() {
                let mut moved = moved;
                moved.append(&mut cluster_nodes[root]);
                cluster_nodes[root] = moved;
            } else {
                cluster_nodes[root].extend(moved);
            }
            cluster_edges[root] += cluster_edges[absorbed];
            cluster_edges[absorbed] = 0;
            density_sum += cluster_density(cluster_edges[root], cluster_nodes[root].len());
            merges.push(LinkMerge {
                similarity: level_sim,
                a: e,
                b: f,
            });
        }
        if merges.len() > before {
            levels.push(DendrogramLevel {
                similarity: level_sim,
                merge_count: merges.len(),
                partition_density: scale * density_sum,
            });
        }
    }
    LinkDendrogram {
        edge_count: m,
        merges,
        levels,
    }
}

fn link_clusters(g: &AttributedGraph, groups: Vec<Vec<EdgeId>>) -> Vec<LinkCluster> {
    groups
        .into_iter()
        .map(|edges| {
            let mut context: Option<LinkContext> = None;
            for &e in &edges {
                let (u, v) = g.edges()[e];
                let c = link_context(g, u, v).expect("edge exists");
                context = Some(match context {
                    None => c,
                    Some(acc) => acc.intersection(&c).copied().collect(),
                });
            }
            LinkCluster {
                edges,
                context: context.unwrap_or_default(),
            }
        })
        .collect()
}

/// Link clusters at the partition-density optimum, plus the overlapping node
/// cover they induce.
pub fn link_communities(g: &AttributedGraph, mode: LinkSimilarity) -> (Vec<LinkCluster>, CommunityCover) {
    let dendrogram = link_dendrogram(g, mode);
    let best = dendrogram.best_level();
    let clusters = link_clusters(g, dendrogram.cut(best.merge_count));

    let mut node_sets: Vec<Vec<NodeId>> = clusters
        .iter()
        .map(|c| {
            let nodes: BTreeSet<NodeId> = c
                .edges
                .iter()
                .flat_map(|&e| {
                    let (u, v) = g.edges()[e];
                    [u, v]
                })
                .collect();
            nodes.into_iter().collect()
        })
        .collect();
    node_sets.extend((0..g.node_count()).filter(|&v| g.neighbors(v).is_empty()).map(|v| vec![v]));
    node_sets.sort();
    node_sets.dedup();
    (clusters, CommunityCover::new(Method::LinksInContext, true, node_sets))
}

/// Overlapping node communities from context-restricted link clustering.
pub fn links_in_context_communities(g: &AttributedGraph) -> CommunityCover {
    link_communities(g, LinkSimilarity::Contextual).1
}
