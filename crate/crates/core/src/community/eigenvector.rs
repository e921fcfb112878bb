//! Recursive spectral bisection of the modularity matrix.
//!
//! Each group `g` is split by the sign pattern of the leading eigenvector of
//! the generalized modularity matrix
//! `B(g)_ij = A_ij - k_i k_j / 2M - δ_ij (k_i(g) - k_i K_g / 2M)`,
//! where `k_i(g)` is the number of neighbors of `i` inside `g` and `K_g` the
//! degree sum of `g`. A split is kept only if it raises modularity. Connected
//! components are separated before any spectral split.

use std::collections::VecDeque;

use super::{CommunityCover, Method};
use crate::graph::{AttributedGraph, NodeId};

const TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;

/// Generalized modularity matrix of one group, applied implicitly.
struct GroupOperator<'a> {
    g: &'a AttributedGraph,
    nodes: &'a [NodeId],
    /// Position of each graph node inside `nodes`, `usize::MAX` if absent.
    position: Vec<usize>,
    degree: Vec<f64>,
    diagonal: Vec<f64>,
    two_m: f64,
}

impl<'a> GroupOperator<'a> {
    fn new(g: &'a AttributedGraph, nodes: &'a [NodeId], position: Vec<usize>) -> Self {
        let two_m = 2.0 * g.edge_count() as f64;
        let degree: Vec<f64> = nodes.iter().map(|&v| g.neighbors(v).len() as f64).collect();
        let group_degree: f64 = degree.iter().sum();
        let diagonal = nodes
            .iter()
            .zip(&degree)
            .map(|(&v, &k)| {
                let inside = g.neighbors(v).iter().filter(|&&w| position[w] != usize::MAX).count() as f64;
                inside - k * group_degree / two_m
            })
            .collect();
        GroupOperator {
            g,
            nodes,
            position,
            degree,
            diagonal,
            two_m,
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    /// `out = B(g) x`.
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let kx: f64 = self.degree.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() / self.two_m;
        for (i, &v) in self.nodes.iter().enumerate() {
            let ax: f64 = self
                .g
                .neighbors(v)
                .iter()
                .filter_map(|&w| {
                    let j = self.position[w];
                    (j != usize::MAX).then(|| x[j])
                })
                .sum();
            out[i] = ax - self.degree[i] * kx - self.diagonal[i] * x[i];
        }
    }

    /// Upper bound on the spectral radius (largest absolute row sum).
    fn shift(&self) -> f64 {
        let group_degree: f64 = self.degree.iter().sum();
        (0..self.len())
            .map(|i| {
                let inside = self.diagonal[i] + self.degree[i] * group_degree / self.two_m;
                inside + self.degree[i] * group_degree / self.two_m + self.diagonal[i].abs()
            })
            .fold(0.0, f64::max)
    }

    /// Leading eigenpair by power iteration on `B + cI`, with the constant
    /// vector (always in the null space of `B(g)`) projected out.
    fn leading_eigenpair(&self) -> (f64, Vec<f64>) {
        let n = self.len();
        let shift = self.shift();
        let mut x: Vec<f64> = (0..n).map(start_component).collect();
        center_and_normalize(&mut x);
        let mut y = vec![0.0; n];
        for _ in 0..MAX_ITERATIONS {
            self.apply(&x, &mut y);
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi += shift * xi;
            }
            if !center_and_normalize(&mut y) {
                break;
            }
            let delta = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            std::mem::swap(&mut x, &mut y);
            if delta < TOLERANCE {
                break;
            }
        }
        self.apply(&x, &mut y);
        let lambda = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        (lambda, x)
    }

    /// `s^T B(g) s / 4M` for a ±1 vector.
    fn split_gain(&self, s: &[f64]) -> f64 {
        let mut bs = vec![0.0; s.len()];
        self.apply(s, &mut bs);
        s.iter().zip(&bs).map(|(a, b)| a * b).sum::<f64>() / (2.0 * self.two_m)
    }
}

/// Deterministic start vector: all ones plus a small index-dependent ripple,
/// so no eigenvector is orthogonal to it by symmetry of the node numbering.
fn start_component(i: usize) -> f64 {
    let phase = (i as f64 + 1.0) * 0.618_033_988_749_894_9;
    1.0 + 0.5 * (phase - phase.floor() - 0.5)
}

/// Removes the mean and scales to unit length. Returns false for a zero vector.
fn center_and_normalize(x: &mut [f64]) -> bool {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= f64::MIN_POSITIVE {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

/// Tries to bisect `nodes` by the sign pattern of the leading eigenvector;
/// with `require_gain`, only a split that improves modularity is returned.
pub(super) fn bisect(
    g: &AttributedGraph,
    nodes: &[NodeId],
    require_gain: bool,
) -> Option<(Vec<NodeId>, Vec<NodeId>)> {
    if nodes.len() < 2 {
        return None;
    }
    let mut position = vec![usize::MAX; g.node_count()];
    for (i, &v) in nodes.iter().enumerate() {
        position[v] = i;
    }
    let op = GroupOperator::new(g, nodes, position);
    let (lambda, vector) = op.leading_eigenpair();
    if lambda <= TOLERANCE {
        return None;
    }
    let signs: Vec<f64> = vector.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
    if signs.iter().all(|&s| s > 0.0) || signs.iter().all(|&s| s < 0.0) {
        return None;
    }
    if require_gain && op.split_gain(&signs) <= TOLERANCE {
        return None;
    }
    let (mut plus, mut minus) = (Vec::new(), Vec::new());
    for (&v, &s) in nodes.iter().zip(&signs) {
        if s > 0.0 {
            plus.push(v);
        } else {
            minus.push(v);
        }
    }
    Some((plus, minus))
}

/// Partitions `g` by recursive leading-eigenvector bisection.
pub fn leading_eigenvector_communities(g: &AttributedGraph) -> CommunityCover {
    let mut queue: VecDeque<Vec<NodeId>> = g.components().into();
    let mut done = Vec::new();
    if g.edge_count() > 0 {
        while let Some(group) = queue.pop_front() {
            match bisect(g, &group, true) {
                Some((a, b)) => {
                    queue.push_back(a);
                    queue.push_back(b);
                }
                None => done.push(group),
            }
        }
    } else {
        done.extend(queue);
    }
    CommunityCover::new(Method::LeadingEigenvector, false, done)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::modularity::modularity_of_labels;
    use crate::community::test_graphs::{complete, two_triangles};
    use crate::graph::fixtures::uniform;
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;

    /// Dense generalized modularity matrix, built straight from the definition.
    fn dense_b(g: &AttributedGraph, nodes: &[NodeId]) -> DMatrix<f64> {
        let two_m = 2.0 * g.edge_count() as f64;
        let k = |v: NodeId| g.neighbors(v).len() as f64;
        let n = nodes.len();
        let mut b = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let a = if g.has_edge(nodes[i], nodes[j]) { 1.0 } else { 0.0 };
                b[(i, j)] = a - k(nodes[i]) * k(nodes[j]) / two_m;
            }
        }
        for i in 0..n {
            let row: f64 = (0..n).map(|j| b[(i, j)]).sum();
            b[(i, i)] -= row;
        }
        b
    }

    fn operator_matches_dense(g: &AttributedGraph, nodes: &[NodeId]) {
        let mut position = vec![usize::MAX; g.node_count()];
        for (i, &v) in nodes.iter().enumerate() {
            position[v] = i;
        }
        let op = GroupOperator::new(g, nodes, position);
        let dense = dense_b(g, nodes);
        for col in 0..nodes.len() {
            let mut e = vec![0.0; nodes.len()];
            e[col] = 1.0;
            let mut out = vec![0.0; nodes.len()];
            op.apply(&e, &mut out);
            for row in 0..nodes.len() {
                assert!((out[row] - dense[(row, col)]).abs() < 1e-12);
            }
        }
        let eig = SymmetricEigen::new(dense.clone());
        let max_abs = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(op.shift() >= max_abs - 1e-9);
    }

    #[test]
    fn implicit_operator_matches_dense_matrix() {
        let g = two_triangles();
        operator_matches_dense(&g, &[0, 1, 2, 3, 4, 5]);
        operator_matches_dense(&g, &[0, 1, 2]);
        operator_matches_dense(&g, &[1, 2, 3, 5]);
    }

    #[test]
    fn power_iteration_agrees_with_exact_eigendecomposition() {
        let g = two_triangles();
        let nodes: Vec<NodeId> = (0..6).collect();
        let exact = SymmetricEigen::new(dense_b(&g, &nodes));
        let (imax, lmax) = exact
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let exact_vec = exact.eigenvectors.column(imax);

        let position: Vec<usize> = (0..6).collect();
        let op = GroupOperator::new(&g, &nodes, position);
        let (lambda, v) = op.leading_eigenpair();
        assert!((lambda - lmax).abs() < 1e-8, "{lambda} vs {lmax}");
        let dot: f64 = v.iter().zip(exact_vec.iter()).map(|(a, b)| a * b).sum();
        assert!(dot.abs() > 1.0 - 1e-8);
        // Sign pattern separates the triangles.
        let s: Vec<bool> = exact_vec.iter().map(|&x| x > 0.0).collect();
        assert!(s[0] == s[1] && s[1] == s[2] && s[3] == s[4] && s[4] == s[5] && s[0] != s[3]);
    }

    #[test]
    fn two_triangles_split() {
        let c = leading_eigenvector_communities(&two_triangles());
        assert_eq!(c.clusters, vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn complete_graph_is_indivisible() {
        let g = complete(4);
        let nodes: Vec<NodeId> = (0..4).collect();
        let exact = SymmetricEigen::new(dense_b(&g, &nodes));
        assert!(exact.eigenvalues.iter().all(|&v| v <= 1e-12));
        assert_eq!(leading_eigenvector_communities(&g).clusters, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn components_split_first() {
        let g = uniform(4, &[(0, 1), (2, 3)]);
        assert_eq!(leading_eigenvector_communities(&g).clusters, vec![vec![0, 1], vec![2, 3]]);
        let g = uniform(3, &[]);
        assert_eq!(leading_eigenvector_communities(&g).len(), 3);
        assert!(leading_eigenvector_communities(&uniform(0, &[])).is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn splits_never_lower_modularity(
            n in 2usize..12,
            pairs in prop::collection::vec((0usize..12, 0usize..12), 1..30),
        ) {
            let edges: Vec<(usize, usize)> = {
                let mut e: Vec<_> = pairs
                    .into_iter()
                    .filter(|&(u, v)| u < n && v < n && u != v)
                    .map(|(u, v)| (u.min(v), u.max(v)))
                    .collect();
                e.sort_unstable();
                e.dedup();
                e
            };
            prop_assume!(!edges.is_empty());
            let g = uniform(n, &edges);
            let c = leading_eigenvector_communities(&g);
            c.validate(&g).unwrap();
            let comps = g.components();
            let mut comp_labels = vec![0; n];
            for (i, comp) in comps.iter().enumerate() {
                for &v in comp {
                    comp_labels[v] = i;
                }
            }
            let q = modularity_of_labels(&g, &c.labels(n).unwrap());
            prop_assert!(q >= modularity_of_labels(&g, &comp_labels) - 1e-12);
            prop_assert_eq!(leading_eigenvector_communities(&g), c);
        }
    }
}
