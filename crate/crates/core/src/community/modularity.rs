use super::CommunityCover;
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

/// Newman–Girvan modularity of a partition:
/// `Q = sum_c (e_c / M - (d_c / 2M)^2)`.
pub fn modularity(g: &AttributedGraph, partition: &CommunityCover) -> Result<f64> {
    if partition.overlapping {
        return Err(Error::NotAPartition);
    }
    let labels = partition
        .labels(g.node_count())
        .ok_or(Error::NotAPartition)?;
    if g.edge_count() == 0 {
        return Err(Error::Empty("edge set"));
    }
    Ok(modularity_of_labels(g, &labels))
}

pub(crate) fn modularity_of_labels(g: &AttributedGraph, labels: &[usize]) -> f64 {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for &(u, v) in g.edges() {
        if labels[u] == labels[v] {
            internal[labels[u]] += 1.0;
        }
    }
    for v in 0..g.node_count() {
        degree[labels[v]] += g.neighbors(v).len() as f64;
    }
    let m = g.edge_count() as f64;
    internal
        .iter()
        .zip(&degree)
        .map(|(e, d)| e / m - (d / (2.0 * m)).powi(2))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::test_graphs::{complete, two_triangles};
    use crate::community::Method;
    use crate::graph::fixtures::uniform;

    fn partition(clusters: Vec<Vec<usize>>) -> CommunityCover {
        CommunityCover::new(Method::Multilevel, false, clusters)
    }

    #[test]
    fn whole_graph_is_zero() {
        let g = two_triangles();
        let q = modularity(&g, &partition(vec![(0..6).collect()])).unwrap();
        assert!(q.abs() < 1e-15);
    }

    #[test]
    fn two_triangles_split() {
        let g = two_triangles();
        let q = modularity(&g, &partition(vec![vec![0, 1, 2], vec![3, 4, 5]])).unwrap();
        assert!((q - (6.0 / 7.0 - 0.5)).abs() < 1e-12, "{q}");
    }

    #[test]
    fn singleton_triangle() {
        let g = complete(3);
        let q = modularity(&g, &partition(vec![vec![0], vec![1], vec![2]])).unwrap();
        assert!((q + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_overlapping_or_incomplete_covers() {
        let g = complete(3);
        let overlapping = CommunityCover::new(Method::LinksInContext, true, vec![vec![0, 1, 2]]);
        assert!(matches!(modularity(&g, &overlapping), Err(Error::NotAPartition)));
        assert!(matches!(
            modularity(&g, &partition(vec![vec![0, 1], vec![1, 2]])),
            Err(Error::NotAPartition)
        ));
        assert!(matches!(
            modularity(&g, &partition(vec![vec![0, 1]])),
            Err(Error::NotAPartition)
        ));
        let edgeless = uniform(2, &[]);
        assert!(modularity(&edgeless, &partition(vec![vec![0], vec![1]])).is_err());
    }
}
