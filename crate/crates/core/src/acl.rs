//! ACL prediction from a handful of labelled untrusted contacts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::community::{CommunityCover, Method};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, NodeId};

/// Precision, recall and F1 of a predicted ACL.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AclScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AclPrediction {
    pub method: Method,
    pub untrusted_seeds: Vec<NodeId>,
    pub acl: Vec<NodeId>,
    #[serde(skip)]
    pub ground_truth: Vec<NodeId>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub acl_size: usize,
    pub cluster_count: usize,
}

impl AclPrediction {
    /// Runs seed selection, best-fit and scoring against a detected cover.
    pub fn predict(
        g: &AttributedGraph,
        cover: &CommunityCover,
        attribute: &str,
        value: &str,
        n: usize,
    ) -> Result<Self> {
        let untrusted_seeds = select_untrusted(g, attribute, value, n)?;
        let (a, v) = g.schema().lookup(attribute, value)?;
        let ground_truth = g.nodes_with_value(a, v);
        let acl = best_fit_cluster(cover, &untrusted_seeds)?;
        let scores = evaluate_acl(&acl, &ground_truth)?;
        Ok(AclPrediction {
            method: cover.method,
            untrusted_seeds,
            acl_size: acl.len(),
            acl,
            ground_truth,
            precision: scores.precision,
            recall: scores.recall,
            f1: scores.f1,
            cluster_count: cover.len(),
        })
    }

    pub fn scores(&self) -> AclScores {
        AclScores {
            precision: self.precision,
            recall: self.recall,
            f1: self.f1,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// The `n` highest-degree nodes holding `attribute = value`, ties broken by
/// ascending id. Returned in ascending id order.
pub fn select_untrusted(g: &AttributedGraph, attribute: &str, value: &str, n: usize) -> Result<Vec<NodeId>> {
    if n == 0 {
        return Err(Error::InvalidConfig("untrusted seed count must be at least 1".into()));
    }
    let (a, v) = g.schema().lookup(attribute, value)?;
    let mut candidates = g.nodes_with_value(a, v);
    if candidates.len() < n {
        return Err(Error::InsufficientNodes {
            requested: n,
            available: candidates.len(),
        });
    }
    candidates.sort_by_key(|&u| (std::cmp::Reverse(g.neighbors(u).len()), u));
    candidates.truncate(n);
    candidates.sort_unstable();
    Ok(candidates)
}

/// The cluster holding the most untrusted seeds; ties go to the smaller
/// cluster, then to the smaller minimum id.
pub fn best_fit_cluster(cover: &CommunityCover, untrusted: &[NodeId]) -> Result<Vec<NodeId>> {
    if cover.is_empty() {
        return Err(Error::Empty("community cover"));
    }
    let seeds: BTreeSet<NodeId> = untrusted.iter().copied().collect();
    cover
        .clusters
        .iter()
        .map(|c| (c.iter().filter(|v| seeds.contains(v)).count(), c))
        .filter(|(hits, _)| *hits > 0)
        .min_by(|(ha, a), (hb, b)| hb.cmp(ha).then(a.len().cmp(&b.len())).then(a[0].cmp(&b[0])))
        .map(|(_, c)| c.clone())
        .ok_or(Error::NoCandidateCommunity)
}

/// Scores `acl` against `ground_truth`. F1 is the harmonic mean of precision
/// and recall, zero when both are zero.
pub fn evaluate_acl(acl: &[NodeId], ground_truth: &[NodeId]) -> Result<AclScores> {
    let acl: BTreeSet<NodeId> = acl.iter().copied().collect();
    let truth: BTreeSet<NodeId> = ground_truth.iter().copied().collect();
    if acl.is_empty() {
        return Err(Error::Empty("acl"));
    }
    if truth.is_empty() {
        return Err(Error::Empty("ground truth"));
    }
    let hits = acl.intersection(&truth).count() as f64;
    let precision = hits / acl.len() as f64;
    let recall = hits / truth.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(AclScores { precision, recall, f1 })
}
