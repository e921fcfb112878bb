//! Attribute-weighted independent cascade with gatekeeper removal.
//!
//! An infected node `v` gets one chance to infect each inactive neighbor `u`,
//! succeeding with probability `shared(v, u) / attribute_count * beta`.
//! Before a cascade, the highest-degree gatekeepers of an ACL (outside
//! contacts adjacent to it) can be removed.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, NodeId};
use crate::rng::{stream, Purpose};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DiffusionConfig {
    /// Infection probability between contacts sharing every attribute.
    pub beta: f64,
    pub seed_count: usize,
    pub gatekeeper_removal_fraction: f64,
    pub rng_seed: u64,
}

impl DiffusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidConfig(format!("beta {} outside [0, 1]", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.gatekeeper_removal_fraction) {
            return Err(Error::InvalidConfig(format!(
                "gatekeeper removal fraction {} outside [0, 1]",
                self.gatekeeper_removal_fraction
            )));
        }
        Ok(())
    }
}

/// A graph with some nodes removed. Node ids are those of the original graph.
#[derive(Clone, Debug)]
pub struct ResidualGraph<'a> {
    graph: &'a AttributedGraph,
    removed: Vec<bool>,
}

impl<'a> ResidualGraph<'a> {
    pub fn new(graph: &'a AttributedGraph, removed: &[NodeId]) -> Result<Self> {
        let mut mask = vec![false; graph.node_count()];
        for &v in removed {
            *mask.get_mut(v).ok_or(Error::NodeNotFound(v))? = true;
        }
        Ok(ResidualGraph { graph, removed: mask })
    }

    /// The original graph.
    pub fn graph(&self) -> &'a AttributedGraph {
        self.graph
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v < self.removed.len() && !self.removed[v]
    }

    pub fn node_count(&self) -> usize {
        self.removed.iter().filter(|&&r| !r).count()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.removed.len()).filter(|&v| !self.removed[v])
    }

    pub fn removed(&self) -> Vec<NodeId> {
        (0..self.removed.len()).filter(|&v| self.removed[v]).collect()
    }

    /// Remaining neighbors of a remaining node, ascending.
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let list: &[NodeId] = if self.contains(v) { self.graph.neighbors(v) } else { &[] };
        list.iter().copied().filter(|&u| !self.removed[u])
    }

    /// Materializes the residual graph with nodes renumbered densely.
    pub fn to_graph(&self) -> Result<AttributedGraph> {
        let mut map = vec![usize::MAX; self.removed.len()];
        let mut builder = crate::graph::GraphBuilder::new(self.graph.schema().clone());
        for v in self.nodes() {
            map[v] = builder.add_node(self.graph.nodes()[v].values.clone())?;
        }
        for &(u, v) in self.graph.edges() {
            if self.contains(u) && self.contains(v) {
                builder.add_edge(map[u], map[v])?;
            }
        }
        Ok(builder.build())
    }
}

fn check_nodes(g: &AttributedGraph, nodes: &[NodeId]) -> Result<BTreeSet<NodeId>> {
    nodes
        .iter()
        .map(|&v| if g.contains_node(v) { Ok(v) } else { Err(Error::NodeNotFound(v)) })
        .collect()
}

/// Nodes outside `acl` adjacent to at least one ACL member, ascending.
pub fn gatekeepers(g: &AttributedGraph, acl: &[NodeId]) -> Result<Vec<NodeId>> {
    let members = check_nodes(g, acl)?;
    let out: BTreeSet<NodeId> = members
        .iter()
        .flat_map(|&v| g.neighbors(v).iter().copied())
        .filter(|u| !members.contains(u))
        .collect();
    Ok(out.into_iter().collect())
}

/// `round(fraction * total)`, halves rounded away from zero.
pub fn removal_count(total: usize, fraction: f64) -> usize {
    (fraction * total as f64).round() as usize
}

/// Removes the `round(fraction * |gatekeepers|)` gatekeepers of highest
/// degree (ties by ascending id) in one batch. Returns the residual graph, the
/// removed nodes (ascending) and the total number of gatekeepers.
pub fn remove_top_gatekeepers<'a>(
    g: &'a AttributedGraph,
    acl: &[NodeId],
    fraction: f64,
) -> Result<(ResidualGraph<'a>, Vec<NodeId>, usize)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidConfig(format!("removal fraction {fraction} outside [0, 1]")));
    }
    let mut ranked = gatekeepers(g, acl)?;
    let total = ranked.len();
    ranked.sort_by_key(|&v| (std::cmp::Reverse(g.neighbors(v).len()), v));
    ranked.truncate(removal_count(total, fraction));
    ranked.sort_unstable();
    Ok((ResidualGraph::new(g, &ranked)?, ranked, total))
}

/// Draws `s` seeds uniformly without replacement from the remaining nodes
/// outside `acl`. Returned ascending.
pub fn select_seeds<R: Rng + ?Sized>(
    residual: &ResidualGraph<'_>,
    acl: &[NodeId],
    s: usize,
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    let members = check_nodes(residual.graph(), acl)?;
    let eligible: Vec<NodeId> = residual.nodes().filter(|v| !members.contains(v)).collect();
    if s > eligible.len() {
        return Err(Error::InsufficientNodes {
            requested: s,
            available: eligible.len(),
        });
    }
    let mut seeds: Vec<NodeId> = index::sample(rng, eligible.len(), s)
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    seeds.sort_unstable();
    Ok(seeds)
}

/// `shared(v, u) / attribute_count * beta` for adjacent `v`, `u`.
pub fn edge_infection_probability(g: &AttributedGraph, v: NodeId, u: NodeId, beta: f64) -> Result<f64> {
    if !g.contains_node(v) {
        return Err(Error::NodeNotFound(v));
    }
    if !g.contains_node(u) {
        return Err(Error::NodeNotFound(u));
    }
    if !g.has_edge(v, u) {
        return Err(Error::NotAdjacent(v, u));
    }
    let shared = g.shared_attribute_count(v, u)? as f64;
    Ok(shared / g.schema().attribute_count() as f64 * beta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfectionEvent {
    pub step: usize,
    pub node: NodeId,
    /// `None` for seeds.
    pub infector: Option<NodeId>,
}

/// Result of one cascade.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cascade {
    /// Seeds at step 0, then infections in the order they happened.
    pub trace: Vec<InfectionEvent>,
    /// Infected nodes, ascending.
    pub infected: Vec<NodeId>,
    /// Last step in which a node was infected; 0 if only the seeds are.
    pub rounds: usize,
}

/// Runs a synchronous independent cascade on `residual` from `seeds`.
///
/// One uniform number is drawn up front for every directed edge `(v, u)` of
/// the original graph in ascending order, and the attempt `v -> u` succeeds
/// when that number is below `p_vu`. Runs that share the random stream are
/// therefore coupled: raising `beta` never shrinks the infected set.
pub fn run_independent_cascade<R: Rng + ?Sized>(
    residual: &ResidualGraph<'_>,
    seeds: &[NodeId],
    beta: f64,
    rng: &mut R,
) -> Result<Cascade> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidConfig(format!("beta {beta} outside [0, 1]")));
    }
    let g = residual.graph();
    for &s in seeds {
        if !residual.contains(s) {
            return Err(Error::NodeNotFound(s));
        }
    }
    let n = g.node_count();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for v in 0..n {
        offsets.push(offsets[v] + g.neighbors(v).len());
    }
    let draws: Vec<f64> = (0..offsets[n]).map(|_| rng.gen::<f64>()).collect();
    let attributes = g.schema().attribute_count() as f64;

    let mut infected = vec![false; n];
    let mut trace = Vec::new();
    let mut frontier: Vec<NodeId> = seeds.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    for &s in &frontier {
        infected[s] = true;
        trace.push(InfectionEvent {
            step: 0,
            node: s,
            infector: None,
        });
    }
    let mut rounds = 0;
    let mut step = 0;
    while !frontier.is_empty() {
        step += 1;
        let mut next = Vec::new();
        for &v in &frontier {
            let profile = &g.nodes()[v].values;
            for (k, &u) in g.neighbors(v).iter().enumerate() {
                if infected[u] || !residual.contains(u) {
                    continue;
                }
                let shared = profile.iter().zip(&g.nodes()[u].values).filter(|(a, b)| a == b).count();
                let p = shared as f64 / attributes * beta;
                if draws[offsets[v] + k] < p {
                    infected[u] = true;
                    next.push(u);
                    trace.push(InfectionEvent {
                        step,
                        node: u,
                        infector: Some(v),
                    });
                }
            }
        }
        if !next.is_empty() {
            rounds = step;
        }
        next.sort_unstable();
        frontier = next;
    }
    Ok(Cascade {
        trace,
        infected: (0..n).filter(|&v| infected[v]).collect(),
        rounds,
    })
}

/// Full record of one diffusion run against an ACL.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiffusionOutcome {
    pub removed_gatekeepers: Vec<NodeId>,
    pub gatekeeper_total: usize,
    pub seeds: Vec<NodeId>,
    pub infection_trace: Vec<InfectionEvent>,
    pub infected_total: usize,
    pub infected_acl_count: usize,
    pub acl_size: usize,
    /// Infected ACL members over the size of the original ACL.
    pub infected_acl_fraction: f64,
    pub rounds: usize,
}

impl DiffusionOutcome {
    pub fn from_cascade(
        acl: &[NodeId],
        removed_gatekeepers: Vec<NodeId>,
        gatekeeper_total: usize,
        seeds: Vec<NodeId>,
        cascade: Cascade,
    ) -> Result<Self> {
        let members: BTreeSet<NodeId> = acl.iter().copied().collect();
        if members.is_empty() {
            return Err(Error::Empty("acl"));
        }
        let infected_acl_count = cascade.infected.iter().filter(|v| members.contains(v)).count();
        Ok(DiffusionOutcome {
            removed_gatekeepers,
            gatekeeper_total,
            seeds,
            infected_total: cascade.infected.len(),
            infected_acl_count,
            acl_size: members.len(),
            infected_acl_fraction: infected_acl_count as f64 / members.len() as f64,
            rounds: cascade.rounds,
            infection_trace: cascade.trace,
        })
    }
}

/// Gatekeeper removal, seeding and one cascade. Seeds and cascade draws come
/// from separate streams derived from `cfg.rng_seed`.
pub fn simulate(g: &AttributedGraph, acl: &[NodeId], cfg: &DiffusionConfig) -> Result<DiffusionOutcome> {
    cfg.validate()?;
    let (residual, removed, total) = remove_top_gatekeepers(g, acl, cfg.gatekeeper_removal_fraction)?;
    simulate_on(&residual, acl, removed, total, cfg.seed_count, cfg.beta, cfg.rng_seed)
}

/// Seeding and one cascade on an already reduced graph.
pub fn simulate_on(
    residual: &ResidualGraph<'_>,
    acl: &[NodeId],
    removed: Vec<NodeId>,
    gatekeeper_total: usize,
    seed_count: usize,
    beta: f64,
    rng_seed: u64,
) -> Result<DiffusionOutcome> {
    let seeds = select_seeds(residual, acl, seed_count, &mut stream(rng_seed, Purpose::Seeds, 0, 0))?;
    let cascade = run_independent_cascade(residual, &seeds, beta, &mut stream(rng_seed, Purpose::Cascade, 0, 0))?;
    DiffusionOutcome::from_cascade(acl, removed, gatekeeper_total, seeds, cascade)
}
