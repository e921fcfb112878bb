//! Multilevel (Louvain-style) modularity optimization.
//!
//! Nodes are swept in a fixed order and moved to the neighboring community
//! with the largest modularity gain; sweeps repeat until no move gains more
//! than `MIN_GAIN`. Communities are then collapsed into weighted super-nodes
//! and the process repeats on the aggregate graph. The result of several sweep
//! orders, plus the spectral partition, is polished by single-node
//! refinement, community dissolution and spectral splits, and the best
//! partition is kept.

use super::modularity::modularity_of_labels;
use super::{CommunityCover, Method};
use crate::graph::AttributedGraph;

const MIN_GAIN: f64 = 1e-10;
/// A refinement pass stops after this many moves without a new best state.
const PATIENCE: usize = 25;

/// Weighted graph with self-loops; `loops[i]` is the weight of the loop on `i`.
struct LevelGraph {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
    /// Weighted degree, self-loops counted twice.
    strength: Vec<f64>,
    /// Twice the total edge weight.
    total: f64,
}

impl LevelGraph {
    fn from_graph(g: &AttributedGraph) -> Self {
        let adj: Vec<Vec<(usize, f64)>> = (0..g.node_count())
            .map(|v| g.neighbors(v).iter().map(|&w| (w, 1.0)).collect())
            .collect();
        let loops = vec![0.0; adj.len()];
        Self::with_loops(adj, loops)
    }

    fn with_loops(adj: Vec<Vec<(usize, f64)>>, loops: Vec<f64>) -> Self {
        let strength: Vec<f64> = adj
            .iter()
            .zip(&loops)
            .map(|(a, l)| a.iter().map(|x| x.1).sum::<f64>() + 2.0 * l)
            .collect();
        let total = strength.iter().sum();
        LevelGraph {
            adj,
            loops,
            strength,
            total,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// One round of local moving. Returns community labels (dense, numbered
    /// by first appearance) and whether any node moved.
    fn local_moving(&self, order: SweepOrder) -> (Vec<usize>, bool) {
        let n = self.len();
        let sweep = order.sequence(&self.strength);
        let mut community: Vec<usize> = (0..n).collect();
        let mut tot = self.strength.clone();
        let mut link_to = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &i in &sweep {
                let k_i = self.strength[i];
                if k_i == 0.0 {
                    continue;
                }
                let own = community[i];
                for &(j, w) in &self.adj[i] {
                    let c = community[j];
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    link_to[c] += w;
                }
                tot[own] -= k_i;
                let gain = |c: usize| link_to[c] - tot[c] * k_i / self.total;
                let mut best = own;
                let mut best_gain = gain(own);
                for &c in &touched {
                    if c == own {
                        continue;
                    }
                    let g = gain(c);
                    let better = g > best_gain + MIN_GAIN;
                    let tie = best != own && (g - best_gain).abs() <= MIN_GAIN && c < best;
                    if better || tie {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k_i;
                if best != own {
                    community[i] = best;
                    moved = true;
                    moved_any = true;
                }
                for &c in &touched {
                    link_to[c] = 0.0;
                    seen[c] = false;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
        }
        (renumber(&community), moved_any)
    }

    fn aggregate(&self, labels: &[usize]) -> LevelGraph {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut loops = vec![0.0; k];
        let mut weights: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        for i in 0..self.len() {
            let ci = labels[i];
            loops[ci] += self.loops[i];
            for &(j, w) in &self.adj[i] {
                let cj = labels[j];
                if ci == cj {
                    // Each internal edge is seen from both ends.
                    loops[ci] += w / 2.0;
                } else {
                    *weights[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let adj = weights.into_iter().map(|m| m.into_iter().collect()).collect();
        LevelGraph::with_loops(adj, loops)
    }
}

fn renumber(community: &[usize]) -> Vec<usize> {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    community
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect()
}

/// Node visiting order used in the local-moving phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SweepOrder {
    Ascending,
    Descending,
    StrengthDescending,
    StrengthAscending,
}

impl SweepOrder {
    const ALL: [SweepOrder; 4] = [
        SweepOrder::Ascending,
        SweepOrder::Descending,
        SweepOrder::StrengthDescending,
        SweepOrder::StrengthAscending,
    ];

    fn sequence(self, strength: &[f64]) -> Vec<usize> {
        let mut v: Vec<usize> = (0..strength.len()).collect();
        match self {
            SweepOrder::Ascending => {}
            SweepOrder::Descending => v.reverse(),
            SweepOrder::StrengthDescending => {
                v.sort_by(|&a, &b| strength[b].total_cmp(&strength[a]).then(a.cmp(&b)))
            }
            SweepOrder::StrengthAscending => {
                v.sort_by(|&a, &b| strength[a].total_cmp(&strength[b]).then(a.cmp(&b)))
            }
        }
        v
    }
}

fn run_levels(g: &AttributedGraph, order: SweepOrder) -> Vec<usize> {
    let mut membership: Vec<usize> = (0..g.node_count()).collect();
    let mut level = LevelGraph::from_graph(g);
    if level.total > 0.0 {
        loop {
            let (labels, moved) = level.local_moving(order);
            if !moved {
                break;
            }
            for m in membership.iter_mut() {
                *m = labels[*m];
            }
            level = level.aggregate(&labels);
        }
    }
    renumber(&membership)
}

/// Kernighan-Lin style refinement on the original graph. Each pass moves every
/// node at most once, always taking the best available single-node move (to a
/// neighboring community or a new one) even when it lowers modularity, then
/// rolls back to the best state seen. A pass ends early after `PATIENCE` moves
/// without a new best. Passes repeat while they improve.
fn refine(g: &AttributedGraph, labels: &mut Vec<usize>) {
    let n = g.node_count();
    let two_m = 2.0 * g.edge_count() as f64;
    let k: Vec<f64> = (0..n).map(|v| g.neighbors(v).len() as f64).collect();
    loop {
        let mut community = labels.clone();
        let mut tot = vec![0.0; n + 1];
        let mut size = vec![0usize; n + 1];
        for v in 0..n {
            tot[community[v]] += k[v];
            size[community[v]] += 1;
        }
        // Isolated nodes never move.
        let mut moved: Vec<bool> = k.iter().map(|&d| d == 0.0).collect();
        let mut q_delta = 0.0;
        let mut best_delta = 0.0;
        let mut best_state: Option<Vec<usize>> = None;
        let mut links = vec![0.0; n + 1];
        let mut touched = Vec::new();
        let mut targets = Vec::new();
        let mut since_best = 0;
        for _ in 0..n {
            if since_best >= PATIENCE {
                break;
            }
            let mut choice: Option<(f64, usize, usize)> = None;
            let empty = (0..=n).find(|&c| size[c] == 0);
            for i in (0..n).filter(|&i| !moved[i]) {
                let own = community[i];
                for &j in g.neighbors(i) {
                    let c = community[j];
                    if links[c] == 0.0 {
                        touched.push(c);
                    }
                    links[c] += 1.0;
                }
                let stay = links[own] - (tot[own] - k[i]) * k[i] / two_m;
                let mut consider = |c: usize, link: f64| {
                    let gain = (link - tot[c] * k[i] / two_m - stay) / (two_m / 2.0);
                    if choice.is_none_or(|(best, _, _)| gain > best + MIN_GAIN) {
                        choice = Some((gain, i, c));
                    }
                };
                targets.clear();
                targets.extend(touched.iter().copied().filter(|&c| c != own));
                targets.sort_unstable();
                for &c in &targets {
                    consider(c, links[c]);
                }
                if let Some(c) = empty {
                    if size[own] > 1 {
                        consider(c, 0.0);
                    }
                }
                for &c in &touched {
                    links[c] = 0.0;
                }
                touched.clear();
            }
            let Some((gain, i, c)) = choice else { break };
            tot[community[i]] -= k[i];
            tot[c] += k[i];
            size[community[i]] -= 1;
            size[c] += 1;
            community[i] = c;
            moved[i] = true;
            q_delta += gain;
            if q_delta > best_delta + MIN_GAIN {
                best_delta = q_delta;
                best_state = Some(community.clone());
                since_best = 0;
            } else {
                since_best += 1;
            }
        }
        match best_state {
            Some(state) => *labels = renumber(&state),
            None => break,
        }
    }
}

/// Tries dissolving each community in turn: its members join their best
/// neighboring community one by one, the result is refined, and the change is
/// kept if modularity improves. Repeats until no dissolution helps.
fn dissolve(g: &AttributedGraph, labels: &mut Vec<usize>) {
    let n = g.node_count();
    let two_m = 2.0 * g.edge_count() as f64;
    let mut q = modularity_of_labels(g, labels);
    'outer: loop {
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        for target in 0..count {
            let mut candidate = labels.clone();
            let mut tot = vec![0.0; count];
            for v in 0..n {
                tot[candidate[v]] += g.neighbors(v).len() as f64;
            }
            for v in (0..n).filter(|&v| labels[v] == target) {
                let k = g.neighbors(v).len() as f64;
                let mut links = vec![0.0; count];
                for &w in g.neighbors(v) {
                    links[candidate[w]] += 1.0;
                }
                let best = (0..count)
                    .filter(|&c| c != target && links[c] > 0.0)
                    .map(|c| (links[c] - tot[c] * k / two_m, c))
                    .fold(None, |acc: Option<(f64, usize)>, x| match acc {
                        Some(a) if a.0 >= x.0 => Some(a),
                        _ => Some(x),
                    });
                if let Some((_, c)) = best {
                    tot[target] -= k;
                    tot[c] += k;
                    candidate[v] = c;
                }
            }
            candidate = renumber(&candidate);
            refine(g, &mut candidate);
            let cq = modularity_of_labels(g, &candidate);
            if cq > q + MIN_GAIN {
                *labels = candidate;
                q = cq;
                continue 'outer;
            }
        }
        break;
    }
}

/// Tries splitting each community by its leading modularity eigenvector, then
/// refines; keeps the change if modularity improves.
fn split(g: &AttributedGraph, labels: &mut Vec<usize>) -> bool {
    let q = modularity_of_labels(g, labels);
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    for target in 0..count {
        let members: Vec<usize> = (0..labels.len()).filter(|&v| labels[v] == target).collect();
        let Some((_, minus)) = super::eigenvector::bisect(g, &members, false) else {
            continue;
        };
        let mut candidate = labels.clone();
        for v in minus {
            candidate[v] = count;
        }
        candidate = renumber(&candidate);
        refine(g, &mut candidate);
        if modularity_of_labels(g, &candidate) > q + MIN_GAIN {
            *labels = candidate;
            return true;
        }
    }
    false
}

/// Partitions `g` by multilevel modularity optimization followed by
/// single-node refinement.
pub fn multilevel_communities(g: &AttributedGraph) -> CommunityCover {
    if g.edge_count() == 0 {
        return CommunityCover::from_labels(Method::Multilevel, &run_levels(g, SweepOrder::Ascending));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let spectral = super::leading_eigenvector_communities(g).labels(g.node_count()).expect("partition");
    let starts = SweepOrder::ALL.iter().map(|&o| run_levels(g, o)).chain(std::iter::once(spectral));
    for mut labels in starts {
        refine(g, &mut labels);
        loop {
            dissolve(g, &mut labels);
            if !split(g, &mut labels) {
                break;
            }
        }
        let q = modularity_of_labels(g, &labels);
        if best.as_ref().is_none_or(|(bq, _)| q > bq + MIN_GAIN) {
            best = Some((q, labels));
        }
    }
    CommunityCover::from_labels(Method::Multilevel, &best.expect("at least one order").1)
}
