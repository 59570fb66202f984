//! Clustered autocovariance and Markov Stability of hard partitions.
//!
//! For a membership matrix `H`, the clustered autocovariance is
//! `R(t, H) = H^T [Pi P(t) - pi^T pi] H` and the stability is its trace.
//! Everything here works from the dense generalized modularity matrix
//! `B(t) = Pi P(t) - pi^T pi` returned by [`MarkovKernel::modularity_matrix`].

mod louvain;

use std::collections::HashMap;
use std::hash::Hash;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::MarkovKernel;

pub use louvain::{louvain_maximize, louvain_on_matrix, Louvain, GAIN_TOLERANCE};

/// Hard assignment of nodes to communities `0..C`.
///
/// Labels are canonical: communities are numbered in order of first
/// appearance, so two partitions compare equal iff they group the nodes the
/// same way.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    assignment: Vec<usize>,
    n_communities: usize,
}

impl Partition {
    /// Relabels arbitrary labels canonically.
    pub fn from_labels<T: Eq + Hash>(labels: &[T]) -> Self {
        let mut seen: HashMap<&T, usize> = HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = seen.len();
                *seen.entry(l).or_insert(next)
            })
            .collect();
        Self {
            assignment,
            n_communities: seen.len(),
        }
    }

    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::InvalidPartition("no nodes".into()));
        }
        Ok(Self::from_labels(&assignment))
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            assignment: (0..n).collect(),
            n_communities: n,
        }
    }

    pub fn all_in_one(n: usize) -> Self {
        Self {
            assignment: vec![0; n],
            n_communities: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn n_communities(&self) -> usize {
        self.n_communities
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_communities];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Members of each community, ascending.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_communities];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// Dense 0-1 membership matrix `H` (N x C).
    pub fn membership_matrix(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.len(), self.n_communities);
        for (i, &c) in self.assignment.iter().enumerate() {
            h[(i, c)] = 1.0;
        }
        h
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Partition::new(v)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.assignment
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityScore {
    pub t: f64,
    pub r: f64,
    pub partition: Partition,
}

fn check_len(b: &DMatrix<f64>, p: &Partition) -> Result<()> {
    if b.nrows() != p.len() {
        return Err(Error::LengthMismatch {
            left: b.nrows(),
            right: p.len(),
        });
    }
    Ok(())
}

/// `H^T B H` for a precomputed modularity matrix.
pub fn autocovariance_from_matrix(b: &DMatrix<f64>, p: &Partition) -> Result<DMatrix<f64>> {
    check_len(b, p)?;
    let n = p.len();
    let c = p.n_communities();
    let mut r = DMatrix::zeros(c, c);
    for j in 0..n {
        let cj = p.community(j);
        for i in 0..n {
            r[(p.community(i), cj)] += b[(i, j)];
        }
    }
    Ok(r)
}

/// `trace(H^T B H)`: sum of `B_ij` over same-community pairs.
pub fn stability_from_matrix(b: &DMatrix<f64>, p: &Partition) -> Result<f64> {
    check_len(b, p)?;
    let n = p.len();
    let data = b.as_slice();
    let mut r = 0.0;
    for j in 0..n {
        let cj = p.community(j);
        let col = &data[j * n..(j + 1) * n];
        for (i, &v) in col.iter().enumerate() {
            if p.community(i) == cj {
                r += v;
            }
        }
    }
    Ok(r)
}

/// `R(t, H) = H^T [Pi P(t) - pi^T pi] H`.
pub fn clustered_autocovariance(kernel: &MarkovKernel, t: f64, p: &Partition) -> Result<DMatrix<f64>> {
    if p.len() != kernel.n() {
        return Err(Error::LengthMismatch {
            left: kernel.n(),
            right: p.len(),
        });
    }
    autocovariance_from_matrix(&kernel.modularity_matrix(t), p)
}

/// Markov Stability `r(t, H) = trace R(t, H)`.
pub fn stability(kernel: &MarkovKernel, t: f64, p: &Partition) -> Result<StabilityScore> {
    if p.len() != kernel.n() {
        return Err(Error::LengthMismatch {
            left: kernel.n(),
            right: p.len(),
        });
    }
    let r = stability_from_matrix(&kernel.modularity_matrix(t), p)?;
    Ok(StabilityScore {
        t,
        r,
        partition: p.clone(),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::markov::build_kernel;
    use crate::simgraph::{Edge, SimilarityGraph};

    pub(crate) fn two_triangles() -> SimilarityGraph {
        let e = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)];
        SimilarityGraph::from_edges(6, e.iter().map(|&(i, j)| Edge { i, j, weight: 1.0 })).unwrap()
    }

    #[test]
    fn canonical_labels() {
        let p = Partition::new(vec![7, 7, 3, 9, 3]).unwrap();
        assert_eq!(p.assignment(), [0, 0, 1, 2, 1]);
        assert_eq!(p.n_communities(), 3);
        assert_eq!(p.sizes(), [2, 2, 1]);
        assert_eq!(p, Partition::new(vec![1, 1, 0, 2, 0]).unwrap());
        assert!(Partition::new(vec![]).is_err());
    }

    #[test]
    fn all_in_one_has_zero_autocovariance() {
        let k = build_kernel(&two_triangles()).unwrap();
        for t in [0.0, 0.3, 1.0, 10.0] {
            let r = clustered_autocovariance(&k, t, &Partition::all_in_one(6)).unwrap();
            assert_eq!(r.shape(), (1, 1));
            assert!(r[(0, 0)].abs() < 1e-12);
        }
    }

    #[test]
    fn singletons_at_time_zero() {
        let k = build_kernel(&two_triangles()).unwrap();
        let r = clustered_autocovariance(&k, 0.0, &Partition::singletons(6)).unwrap();
        let pi = k.stationary();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { pi[i] } else { 0.0 } - pi[i] * pi[j];
                assert!((r[(i, j)] - want).abs() < 1e-12);
            }
        }
        let s = stability(&k, 0.0, &Partition::singletons(6)).unwrap();
        let want = 1.0 - pi.iter().map(|p| p * p).sum::<f64>();
        assert!((s.r - want).abs() < 1e-12);
    }

    #[test]
    fn two_node_autocovariance() {
        let g = SimilarityGraph::from_edges(2, [Edge { i: 0, j: 1, weight: 1.0 }]).unwrap();
        let k = build_kernel(&g).unwrap();
        let r = clustered_autocovariance(&k, 1.0, &Partition::singletons(2)).unwrap();
        // 0.5 * (1 + e^-2) / 2 - 0.25
        let d = (-2.0f64).exp() / 4.0;
        assert!((d - 0.03383).abs() < 1e-5);
        assert!((r[(0, 0)] - d).abs() < 1e-12);
        assert!((r[(0, 1)] + d).abs() < 1e-12);
        assert!((r[(1, 0)] + d).abs() < 1e-12);
        assert!((r[(1, 1)] - d).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let k = build_kernel(&two_triangles()).unwrap();
        assert!(matches!(
            stability(&k, 1.0, &Partition::singletons(5)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn partition_serde_validates() {
        let p: Partition = serde_json::from_str("[4,4,1]").unwrap();
        assert_eq!(p.assignment(), [0, 0, 1]);
        assert!(serde_json::from_str::<Partition>("[]").is_err());
    }
}
