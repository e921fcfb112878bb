//! Homophily-driven preferential attachment.
//!
//! Every attribute value defines a group. The openness matrix holds one
//! factor per pair of groups, and the total homophily between two nodes is the
//! product of the factors over all pairs drawn from their group sets. Growth
//! starts from a seed clique; each step adds one newcomer linked to `m`
//! existing nodes chosen with probability proportional to `degree * homophily`,
//! then adds `c` internal edges between existing non-adjacent pairs chosen with
//! probability proportional to `degree_i * degree_j * homophily_ij`.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributeSchema, AttributedGraph, GraphBuilder, NodeId};
use crate::rng::{seeded, SimRng};

/// Symmetric matrix of group-openness factors over global value indices.
#[derive(Clone, Debug, PartialEq)]
pub struct OpennessMatrix {
    size: usize,
    entries: Vec<f64>,
}

/// Sparse openness entry `(valueA, valueB, lambda)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpennessOverride(pub String, pub String, pub f64);

impl OpennessMatrix {
    /// All factors equal to one: no homophily.
    pub fn ones(size: usize) -> Self {
        OpennessMatrix {
            size,
            entries: vec![1.0; size * size],
        }
    }

    /// Starts from all-ones and applies `overrides` symmetrically, in order.
    pub fn from_overrides(schema: &AttributeSchema, overrides: &[OpennessOverride]) -> Result<Self> {
        let mut m = Self::ones(schema.total_values());
        for OpennessOverride(a, b, lambda) in overrides {
            let p = schema.resolve_value(a)?;
            let q = schema.resolve_value(b)?;
            m.set(p, q, *lambda)?;
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, p: usize, q: usize) -> Option<f64> {
        (p < self.size && q < self.size).then(|| self.entries[p * self.size + q])
    }

    pub fn set(&mut self, p: usize, q: usize, lambda: f64) -> Result<()> {
        if p >= self.size || q >= self.size {
            return Err(Error::UnknownValue(format!(
                "openness index ({p}, {q}) outside a {0}x{0} matrix",
                self.size
            )));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidConfig(format!(
                "openness factor {lambda} outside [0, 1]"
            )));
        }
        if p == q && lambda != 1.0 {
            return Err(Error::InvalidConfig(format!(
                "diagonal openness factor for value {p} must be 1"
            )));
        }
        self.entries[p * self.size + q] = lambda;
        self.entries[q * self.size + p] = lambda;
        Ok(())
    }

    /// Product of `Λ[p, q]` over every `p` in `group_a` and `q` in `group_b`.
    pub fn total_homophily(&self, group_a: &[usize], group_b: &[usize]) -> Result<f64> {
        let mut h = 1.0;
        for &p in group_a {
            for &q in group_b {
                h *= self
                    .get(p, q)
                    .ok_or_else(|| Error::UnknownValue(format!("value index {}", p.max(q))))?;
            }
        }
        Ok(h)
    }
}

/// Total homophily between two group sets (global value indices).
pub fn total_homophily(group_a: &[usize], group_b: &[usize], openness: &OpennessMatrix) -> Result<f64> {
    openness.total_homophily(group_a, group_b)
}

/// Total homophily between two profiles given as local value indices.
fn profile_homophily(schema: &AttributeSchema, a: &[usize], b: &[usize], openness: &OpennessMatrix) -> Result<f64> {
    openness.total_homophily(&schema.group_set(a), &schema.group_set(b))
}

fn check_openness(schema: &AttributeSchema, openness: &OpennessMatrix) -> Result<()> {
    if openness.size() != schema.total_values() {
        return Err(Error::SchemaMismatch(format!(
            "openness matrix is {0}x{0} but the schema has {1} values",
            openness.size(),
            schema.total_values()
        )));
    }
    Ok(())
}

/// Probability that a newcomer with `profile` links to each existing node.
///
/// Falls back to the uniform distribution when every weight is zero.
pub fn newcomer_attachment_distribution(
    g: &AttributedGraph,
    profile: &[usize],
    openness: &OpennessMatrix,
) -> Result<Vec<f64>> {
    if g.node_count() == 0 {
        return Err(Error::Empty("graph"));
    }
    let schema = g.schema();
    schema.check_profile(profile)?;
    check_openness(schema, openness)?;
    let newcomer = schema.group_set(profile);
    let mut weights = Vec::with_capacity(g.node_count());
    for node in g.nodes() {
        let h = openness.total_homophily(&schema.group_set(&node.values), &newcomer)?;
        weights.push(g.neighbors(node.id).len() as f64 * h);
    }
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter_mut().for_each(|w| *w /= total);
    } else {
        let p = 1.0 / weights.len() as f64;
        weights.iter_mut().for_each(|w| *w = p);
    }
    Ok(weights)
}

/// Probability of each non-adjacent pair `(i, j)`, `i < j`, both with degree
/// at least one, being chosen for an internal edge.
///
/// Pairs are listed in ascending order. The result is empty when no pair
/// carries positive weight.
pub fn internal_edge_distribution(
    g: &AttributedGraph,
    openness: &OpennessMatrix,
) -> Result<Vec<((NodeId, NodeId), f64)>> {
    let schema = g.schema();
    check_openness(schema, openness)?;
    let groups: Vec<Vec<usize>> = g.nodes().iter().map(|n| schema.group_set(&n.values)).collect();
    let degrees = g.degrees();
    let mut out = Vec::new();
    let mut total = 0.0;
    for i in 0..g.node_count() {
        if degrees[i] == 0 {
            continue;
        }
        for j in i + 1..g.node_count() {
            if degrees[j] == 0 || g.has_edge(i, j) {
                continue;
            }
            let w = (degrees[i] * degrees[j]) as f64 * openness.total_homophily(&groups[i], &groups[j])?;
            if w > 0.0 {
                total += w;
                out.push(((i, j), w));
            }
        }
    }
    out.iter_mut().for_each(|(_, w)| *w /= total);
    Ok(out)
}

/// Draws one value per attribute, independently, from the schema priors.
pub fn assign_attributes<R: Rng + ?Sized>(rng: &mut R, schema: &AttributeSchema) -> Vec<usize> {
    schema
        .attributes()
        .iter()
        .map(|attr| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut last_positive = 0;
            for (i, &p) in attr.priors.iter().enumerate() {
                if p > 0.0 {
                    last_positive = i;
                }
                acc += p;
                if u < acc && p > 0.0 {
                    return i;
                }
            }
            last_positive
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    /// Final node count `N`.
    pub nodes: usize,
    /// Links per newcomer `m`.
    pub links_per_newcomer: usize,
    /// Seed clique size `m0`.
    pub seed_clique: usize,
    /// Internal-edge attempts after each newcomer.
    pub internal_edges_per_step: usize,
    pub openness: OpennessMatrix,
    pub schema: AttributeSchema,
    pub rng_seed: u64,
}

impl GeneratorConfig {
    /// `N` nodes over `schema`, `m = m0 = 3`, `c = 1`, no homophily.
    pub fn new(nodes: usize, schema: AttributeSchema, rng_seed: u64) -> Self {
        GeneratorConfig {
            nodes,
            links_per_newcomer: 3,
            seed_clique: 3,
            internal_edges_per_step: 1,
            openness: OpennessMatrix::ones(schema.total_values()),
            schema,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m, m0) = (self.nodes, self.links_per_newcomer, self.seed_clique);
        if m < 1 {
            return Err(Error::InvalidConfig("links per newcomer must be at least 1".into()));
        }
        if m0 < m {
            return Err(Error::InvalidConfig(format!(
                "seed clique size {m0} is smaller than links per newcomer {m}"
            )));
        }
        if n < m0 {
            return Err(Error::InvalidConfig(format!(
                "node count {n} is smaller than the seed clique {m0}"
            )));
        }
        check_openness(&self.schema, &self.openness)
    }
}

/// Emitted once per newcomer, after its targets are chosen and before its
/// edges are added.
#[derive(Debug)]
pub struct NewcomerEvent<'a> {
    pub node: NodeId,
    /// Targets in draw order.
    pub targets: &'a [NodeId],
    /// Degrees of all existing nodes at draw time.
    pub degrees: &'a [usize],
}

pub fn generate_network(cfg: &GeneratorConfig) -> Result<AttributedGraph> {
    generate_network_observed(cfg, |_| {})
}

/// [`generate_network`] with a hook called for every newcomer.
pub fn generate_network_observed<F>(cfg: &GeneratorConfig, mut observer: F) -> Result<AttributedGraph>
where
    F: FnMut(&NewcomerEvent<'_>),
{
    cfg.validate()?;
    let mut growth = Growth::new(cfg)?;
    for _ in 0..cfg.seed_clique {
        growth.add_node()?;
    }
    for u in 0..cfg.seed_clique {
        for v in u + 1..cfg.seed_clique {
            growth.add_edge(u, v)?;
        }
    }
    let mut targets = Vec::with_capacity(cfg.links_per_newcomer);
    let mut degrees = Vec::with_capacity(cfg.nodes);
    for _ in cfg.seed_clique..cfg.nodes {
        let profile = assign_attributes(&mut growth.rng, &cfg.schema);
        growth.pick_newcomer_targets(&profile, &mut targets);
        degrees.clear();
        degrees.extend_from_slice(&growth.degrees);
        let node = growth.builder.node_count();
        observer(&NewcomerEvent {
            node,
            targets: &targets,
            degrees: &degrees,
        });
        growth.push_node(profile)?;
        for &t in &targets {
            growth.add_edge(node, t)?;
        }
        for _ in 0..cfg.internal_edges_per_step {
            if let Some((i, j)) = growth.pick_internal_edge()? {
                growth.add_edge(i, j)?;
            }
        }
    }
    Ok(growth.builder.build())
}

const MAX_REJECTIONS: usize = 2000;

struct Growth<'a> {
    cfg: &'a GeneratorConfig,
    builder: GraphBuilder,
    rng: SimRng,
    class_count: usize,
    /// Total homophily between profile classes, row-major.
    class_h: Vec<f64>,
    classes: Vec<usize>,
    degrees: Vec<usize>,
    /// Members of each class, ascending.
    members: Vec<Vec<NodeId>>,
    /// Degree sum per class.
    class_degree: Vec<f64>,
    weights: Vec<f64>,
}

impl<'a> Growth<'a> {
    fn new(cfg: &'a GeneratorConfig) -> Result<Self> {
        let schema = &cfg.schema;
        let k = schema.profile_class_count();
        let mut class_h = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                class_h[a * k + b] = profile_homophily(
                    schema,
                    &schema.class_values(a),
                    &schema.class_values(b),
                    &cfg.openness,
                )?;
            }
        }
        Ok(Growth {
            cfg,
            builder: GraphBuilder::new(schema.clone()),
            rng: seeded(cfg.rng_seed),
            class_count: k,
            class_h,
            classes: Vec::with_capacity(cfg.nodes),
            degrees: Vec::with_capacity(cfg.nodes),
            members: vec![Vec::new(); k],
            class_degree: vec![0.0; k],
            weights: Vec::with_capacity(cfg.nodes),
        })
    }

    fn h(&self, a: usize, b: usize) -> f64 {
        self.class_h[a * self.class_count + b]
    }

    fn add_node(&mut self) -> Result<NodeId> {
        let profile = assign_attributes(&mut self.rng, &self.cfg.schema);
        self.push_node(profile)
    }

    fn push_node(&mut self, profile: Vec<usize>) -> Result<NodeId> {
        let class = self.cfg.schema.profile_class(&profile);
        let id = self.builder.add_node(profile)?;
        self.classes.push(class);
        self.degrees.push(0);
        self.members[class].push(id);
        Ok(id)
    }

    fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        if self.builder.add_edge(u, v)? {
            for w in [u, v] {
                self.degrees[w] += 1;
                self.class_degree[self.classes[w]] += 1.0;
            }
        }
        Ok(())
    }

    /// Draws `m` distinct targets, renormalizing after each draw.
    fn pick_newcomer_targets(&mut self, profile: &[usize], targets: &mut Vec<NodeId>) {
        let q = self.cfg.schema.profile_class(profile);
        let n = self.builder.node_count();
        self.weights.clear();
        for i in 0..n {
            let w = self.degrees[i] as f64 * self.h(self.classes[i], q);
            self.weights.push(w);
        }
        targets.clear();
        let m = self.cfg.links_per_newcomer.min(n);
        while targets.len() < m {
            let total: f64 = self.weights.iter().sum();
            let pick = if total > 0.0 {
                draw_weighted(&mut self.rng, &self.weights, total)
            } else {
                warn!(
                    "newcomer {n}: all attachment weights are zero, falling back to uniform choice"
                );
                let remaining: Vec<NodeId> = (0..n).filter(|i| !targets.contains(i)).collect();
                remaining[self.rng.gen_range(0..remaining.len())]
            };
            targets.push(pick);
            self.weights[pick] = 0.0;
        }
    }

    /// Draws an internal edge by rejection from the ordered-pair distribution
    /// `k_i k_j H_ij`, falling back to exact enumeration if rejections pile up.
    fn pick_internal_edge(&mut self) -> Result<Option<(NodeId, NodeId)>> {
        let k = self.class_count;
        let mut pair_weights = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                pair_weights.push(self.h(a, b) * self.class_degree[a] * self.class_degree[b]);
            }
        }
        let total: f64 = pair_weights.iter().sum();
        if total > 0.0 {
            for _ in 0..MAX_REJECTIONS {
                let cell = draw_weighted(&mut self.rng, &pair_weights, total);
                let i = self.draw_member(cell / k);
                let j = self.draw_member(cell % k);
                if i != j && !self.builder.has_edge(i, j) {
                    return Ok(Some((i.min(j), i.max(j))));
                }
            }
        }
        self.pick_internal_edge_exact()
    }

    fn draw_member(&mut self, class: usize) -> NodeId {
        let total = self.class_degree[class];
        let mut u = self.rng.gen::<f64>() * total;
        let members = &self.members[class];
        let mut last = members[0];
        for &v in members {
            let d = self.degrees[v] as f64;
            if d > 0.0 {
                last = v;
                if u < d {
                    return v;
                }
                u -= d;
            }
        }
        last
    }

    fn pick_internal_edge_exact(&mut self) -> Result<Option<(NodeId, NodeId)>> {
        let n = self.builder.node_count();
        let mut pairs = Vec::new();
        let mut weights = Vec::new();
        for i in 0..n {
            if self.degrees[i] == 0 {
                continue;
            }
            for j in i + 1..n {
                if self.degrees[j] == 0 || self.builder.has_edge(i, j) {
                    continue;
                }
                let w = (self.degrees[i] * self.degrees[j]) as f64 * self.h(self.classes[i], self.classes[j]);
                if w > 0.0 {
                    pairs.push((i, j));
                    weights.push(w);
                }
            }
        }
        if pairs.is_empty() {
            return Ok(None);
        }
        let total = weights.iter().sum();
        Ok(Some(pairs[draw_weighted(&mut self.rng, &weights, total)]))
    }
}

/// Index drawn with probability `weights[i] / total`; zero weights are never drawn.
fn draw_weighted(rng: &mut SimRng, weights: &[f64], total: f64) -> usize {
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last
}
