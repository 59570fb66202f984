//! Cosine similarity and the MST-kNN sparsification.
//!
//! The graph is the union of a maximum-similarity spanning tree (minimum
//! spanning tree under `d = 1 - S`) and each node's `k` most similar
//! neighbours. The tree keeps the graph connected, the kNN lists keep the
//! local geometry.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::VectorCorpus;
use crate::error::{Error, Result};

/// Weight given to tree edges whose similarity is not positive.
pub const MST_WEIGHT_FLOOR: f64 = 1e-9;

/// Dense symmetric matrix of pairwise cosine similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Wraps a row-major `n x n` matrix after checking symmetry, finiteness
    /// and the unit diagonal.
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: n * n,
            });
        }
        for i in 0..n {
            if values[i * n + i] != 1.0 {
                return Err(Error::InvalidParameter(format!("S({i},{i}) != 1")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v != values[j * n + i] {
                    return Err(Error::InvalidParameter(format!(
                        "S({i},{j}) is non-finite or asymmetric"
                    )));
                }
            }
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// `S(i,j) = <v_i, v_j> / (|v_i| |v_j|)`, each unordered pair computed once.
pub fn cosine_similarity(corpus: &VectorCorpus) -> SimilarityMatrix {
    let n = corpus.len();
    let unit: Vec<Vec<f64>> = corpus
        .vectors()
        .map(|v| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / norm).collect()
        })
        .collect();

    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    let dot: f64 = unit[i].iter().zip(&unit[j]).map(|(a, b)| a * b).sum();
                    dot.clamp(-1.0, 1.0)
                })
                .collect()
        })
        .collect();

    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        values[i * n + i] = 1.0;
        for (off, &s) in row.iter().enumerate() {
            let j = i + 1 + off;
            values[i * n + j] = s;
            values[j * n + i] = s;
        }
    }
    SimilarityMatrix { n, values }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Weighted undirected graph without self-loops. Edges are kept sorted by
/// `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    n: usize,
    edges: Vec<Edge>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl SimilarityGraph {
    /// Builds a graph from an edge list. Endpoints are normalized to `i < j`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut list: Vec<Edge> = Vec::new();
        for e in edges {
            if e.i >= n || e.j >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) outside 0..{n}",
                    e.i, e.j
                )));
            }
            if e.i == e.j {
                return Err(Error::InvalidParameter(format!("self-loop on node {}", e.i)));
            }
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(Error::NegativeWeight {
                    i: e.i,
                    j: e.j,
                    weight: e.weight,
                });
            }
            let (i, j) = if e.i < e.j { (e.i, e.j) } else { (e.j, e.i) };
            list.push(Edge { i, j, weight: e.weight });
        }
        list.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = list.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::InvalidParameter(format!(
                "duplicate edge ({}, {})",
                w[0].i, w[0].j
            )));
        }

        let mut neighbors = vec![Vec::new(); n];
        for e in &list {
            neighbors[e.i].push((e.j, e.weight));
            neighbors[e.j].push((e.i, e.weight));
        }
        for nb in &mut neighbors {
            nb.sort_by_key(|&(j, _)| j);
        }
        Ok(Self {
            n,
            edges: list,
            neighbors,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.neighbors[i].iter().map(|&(_, w)| w).sum()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let nb = &self.neighbors[i];
        nb.binary_search_by_key(&j, |&(k, _)| k).map_or(0.0, |p| nb[p].1)
    }

    /// Dense row-major adjacency matrix.
    pub fn dense_adjacency(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for e in &self.edges {
            a[e.i * n + e.j] = e.weight;
            a[e.j * n + e.i] = e.weight;
        }
        a
    }

    /// Connected components over positive-weight edges, each sorted, ordered
    /// by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![start];
            let mut members = Vec::new();
            label[start] = id;
            while let Some(u) = stack.pop() {
                members.push(u);
                for &(v, w) in &self.neighbors[u] {
                    if w > 0.0 && label[v] == usize::MAX {
                        label[v] = id;
                        stack.push(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Writes `i,j,weight` rows with a header.
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["i", "j", "weight"])?;
        for e in &self.edges {
            wtr.write_record([e.i.to_string(), e.j.to_string(), e.weight.to_string()])?;
        }
        wtr.flush().map_err(|e| Error::Csv(e.into()))
    }

    pub fn read_edge_list<R: Read>(n: usize, input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut edges = Vec::new();
        for rec in rdr.deserialize::<Edge>() {
            edges.push(rec?);
        }
        Self::from_edges(n, edges)
    }
}

/// Union of the minimum spanning tree under `1 - S` and the symmetrized
/// `k`-nearest-neighbour lists.
///
/// Ties prefer the lower node index. kNN candidates with `S <= 0` are
/// dropped; tree edges with `S <= 0` keep weight [`MST_WEIGHT_FLOOR`].
pub fn build_mst_knn(sim: &SimilarityMatrix, k: usize) -> Result<SimilarityGraph> {
    let n = sim.n();
    if n < 2 {
        return Err(Error::TooFewDocuments(n));
    }
    if k == 0 || k > n - 1 {
        return Err(Error::InvalidK { k, max: n - 1 });
    }

    let mut chosen: Vec<(usize, usize)> = minimum_spanning_tree(sim);
    let tree_len = chosen.len();
    for (i, nn) in knn_lists(sim, k).into_iter().enumerate() {
        chosen.extend(nn.into_iter().map(|j| (i.min(j), i.max(j))));
    }
    // Tree edges come first, so dedup keeps the floored weight rule simple.
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(chosen.len());
    for (pos, (i, j)) in chosen.into_iter().enumerate() {
        if !seen.insert((i, j)) {
            continue;
        }
        let s = sim.get(i, j);
        let weight = if pos < tree_len { s.max(MST_WEIGHT_FLOOR) } else { s };
        edges.push(Edge { i, j, weight });
    }
    SimilarityGraph::from_edges(n, edges)
}

/// Dense Prim on `d = 1 - S`; returns `(min, max)` endpoint pairs.
fn minimum_spanning_tree(sim: &SimilarityMatrix) -> Vec<(usize, usize)> {
    let n = sim.n();
    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut edges = Vec::with_capacity(n - 1);

    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = 1.0 - sim.get(current, v);
            if d < key[v] || (d == key[v] && current < parent[v]) {
                key[v] = d;
                parent[v] = current;
            }
        }
        let mut next = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (next == usize::MAX || key[v] < key[next]) {
                next = v;
            }
        }
        in_tree[next] = true;
        let p = parent[next];
        edges.push((p.min(next), p.max(next)));
        current = next;
    }
    edges
}

fn knn_lists(sim: &SimilarityMatrix, k: usize) -> Vec<Vec<usize>> {
    let n = sim.n();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let row = sim.row(i);
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            others.truncate(k);
            others.retain(|&j| row[j] > 0.0);
            others
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(rows: &[&[f64]]) -> VectorCorpus {
        let ids = (0..rows.len()).map(|i| format!("d{i}")).collect();
        VectorCorpus::new(ids, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let s = cosine_similarity(&corpus(&[&[3.0, 4.0], &[3.0, 4.0]]));
        assert!((s.get(0, 1) - 1.0).abs() < 1e-15);
        let s = cosine_similarity(&corpus(&[&[1.0, 0.0], &[0.0, 1.0]]));
        assert_eq!(s.get(0, 1), 0.0);
        let s = cosine_similarity(&corpus(&[&[1.0, 0.0], &[1.0, 1.0]]));
        assert!((s.get(0, 1) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s.get(0, 1) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(s.get(0, 1), s.get(1, 0));
        assert_eq!(s.get(0, 0), 1.0);
    }

    #[test]
    fn k_saturated_gives_complete_graph() {
        let c = corpus(&[&[1.0, 0.1], &[1.0, 0.5], &[0.7, 1.0], &[0.2, 1.0], &[1.0, 1.0]]);
        let g = build_mst_knn(&cosine_similarity(&c), 4).unwrap();
        assert_eq!(g.n_edges(), 10);
    }

    #[test]
    fn chain_with_k1_is_a_path() {
        // Angles 0, 0.3, 0.7, 1.2 rad: adjacent pairs are the most similar.
        let rows: Vec<Vec<f64>> = [0.0f64, 0.3, 0.7, 1.2].iter().map(|a| vec![a.cos(), a.sin()]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let sim = cosine_similarity(&corpus(&refs));

        // Adjacent pairs are the three most similar of the six, so the MST is
        // the path and every 1-NN lies on it.
        let mut pairs: Vec<(usize, usize)> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).collect();
        pairs.sort_by(|a, b| sim.get(b.0, b.1).total_cmp(&sim.get(a.0, a.1)));
        let mut top3 = pairs[..3].to_vec();
        top3.sort();
        assert_eq!(top3, vec![(0, 1), (1, 2), (2, 3)]);

        let g = build_mst_knn(&sim, 1).unwrap();
        let got: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(got, vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn negative_similarity_edges() {
        // Two antipodal clusters: the bridging tree edge has S < 0.
        let c = corpus(&[&[1.0, 0.0], &[1.0, 0.1], &[-1.0, 0.0], &[-1.0, -0.1]]);
        let g = build_mst_knn(&cosine_similarity(&c), 1).unwrap();
        assert!(g.is_connected());
        let floored: Vec<&Edge> = g.edges().iter().filter(|e| e.weight == MST_WEIGHT_FLOOR).collect();
        assert_eq!(floored.len(), 1);
        assert!(g.edges().iter().all(|e| e.weight > 0.0));
    }

    #[test]
    fn k_out_of_range() {
        let c = corpus(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]]);
        let sim = cosine_similarity(&c);
        assert!(matches!(build_mst_knn(&sim, 0), Err(Error::InvalidK { k: 0, max: 2 })));
        assert!(matches!(build_mst_knn(&sim, 3), Err(Error::InvalidK { k: 3, max: 2 })));
    }

    #[test]
    fn edge_list_round_trip() {
        let c = corpus(&[&[1.0, 0.1], &[1.0, 0.5], &[0.7, 1.0], &[0.2, 1.0]]);
        let g = build_mst_knn(&cosine_similarity(&c), 2).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let back = SimilarityGraph::read_edge_list(4, buf.as_slice()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn components_of_split_graph() {
        let g = SimilarityGraph::from_edges(
            4,
            [Edge { i: 0, j: 1, weight: 1.0 }, Edge { i: 2, j: 3, weight: 1.0 }],
        )
        .unwrap();
        assert_eq!(g.components(), vec![vec![0, 1], vec![2, 3]]);
        assert!(!g.is_connected());
    }
}
