//! Graphs with known community structure, for examples and tests.

use std::collections::BTreeMap;

use rand::Rng;

use crate::corpus::{ExternalLabeling, TokenStats, VectorCorpus};
use crate::simgraph::{Edge, SimilarityGraph};
use crate::stability::Partition;

/// `n_cliques` unit-weight cliques of `size` nodes, consecutive cliques
/// joined by one unit edge into a ring. Returns the graph and the planted
/// clique partition.
pub fn ring_of_cliques(n_cliques: usize, size: usize) -> (SimilarityGraph, Partition) {
    assert!(n_cliques >= 2 && size >= 2);
    let n = n_cliques * size;
    let mut edges = Vec::new();
    for c in 0..n_cliques {
        let base = c * size;
        for a in 0..size {
            for b in a + 1..size {
                edges.push(Edge { i: base + a, j: base + b, weight: 1.0 });
            }
        }
        if n_cliques > 2 || c == 0 {
            // last node of this clique to first node of the next
            let next = ((c + 1) % n_cliques) * size;
            edges.push(Edge { i: base + size - 1, j: next, weight: 1.0 });
        }
    }
    let graph = SimilarityGraph::from_edges(n, edges).expect("valid ring");
    let planted = Partition::new((0..n).map(|i| i / size).collect()).expect("non-empty");
    (graph, planted)
}

/// Connected weighted graph: a random spanning tree plus each remaining pair
/// with probability `density`. Weights are uniform in `[0.1, 1)`.
pub fn random_connected_graph<R: Rng>(n: usize, density: f64, rng: &mut R) -> SimilarityGraph {
    let mut edges = Vec::new();
    let mut present = vec![false; n * n];
    for v in 1..n {
        let u = rng.random_range(0..v);
        present[u * n + v] = true;
        edges.push(Edge { i: u, j: v, weight: rng.random_range(0.1..1.0) });
    }
    for i in 0..n {
        for j in i + 1..n {
            if !present[i * n + j] && rng.random_bool(density) {
                edges.push(Edge { i, j, weight: rng.random_range(0.1..1.0) });
            }
        }
    }
    SimilarityGraph::from_edges(n, edges).expect("valid graph")
}

/// Uniformly random labels in `0..max_communities`, canonicalized.
pub fn random_partition<R: Rng>(n: usize, max_communities: usize, rng: &mut R) -> Partition {
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..max_communities)).collect();
    Partition::from_labels(&labels)
}

/// Documents drawn around `n_topics` random directions, with matching token
/// counts and topic labels.
pub struct TopicCorpus {
    pub vectors: VectorCorpus,
    pub tokens: TokenStats,
    pub labels: ExternalLabeling,
    pub topics: Partition,
}

/// Document `i` belongs to topic `i % n_topics`. Its vector is the topic
/// centre plus uniform noise of amplitude `noise` per coordinate; its tokens
/// are eight draws from the topic's five words and two from a shared pool.
pub fn topic_corpus<R: Rng>(n_docs: usize, dim: usize, n_topics: usize, noise: f64, rng: &mut R) -> TopicCorpus {
    assert!(n_docs > 0 && dim > 0 && n_topics > 0);
    let centres: Vec<Vec<f64>> = (0..n_topics)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let doc_ids: Vec<String> = (0..n_docs).map(|i| format!("doc{i:04}")).collect();
    let mut vectors = Vec::with_capacity(n_docs);
    let mut counts = Vec::with_capacity(n_docs);
    for i in 0..n_docs {
        let topic = i % n_topics;
        let mut v: Vec<f64> = centres[topic].iter().map(|c| c + noise * rng.random_range(-1.0..1.0)).collect();
        if v.iter().all(|&x| x == 0.0) {
            v[0] = 1.0;
        }
        vectors.push(v);
        let mut doc = BTreeMap::new();
        for _ in 0..8 {
            *doc.entry(format!("topic{topic}_w{}", rng.random_range(0..5))).or_insert(0) += 1;
        }
        for _ in 0..2 {
            *doc.entry(format!("common{}", rng.random_range(0..4))).or_insert(0) += 1;
        }
        counts.push(doc);
    }
    let topic_of: Vec<usize> = (0..n_docs).map(|i| i % n_topics).collect();
    TopicCorpus {
        vectors: VectorCorpus::new(doc_ids.clone(), vectors).expect("nonzero finite vectors"),
        tokens: TokenStats::from_counts(doc_ids.clone(), counts).expect("unique ids"),
        labels: ExternalLabeling {
            doc_ids,
            labels: topic_of.iter().map(|t| format!("topic{t}")).collect(),
        },
        topics: Partition::from_labels(&topic_of),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ring_shape() {
        let (g, p) = ring_of_cliques(20, 10);
        assert_eq!(g.n_nodes(), 200);
        assert_eq!(g.n_edges(), 20 * 45 + 20);
        assert!(g.is_connected());
        assert_eq!(p.n_communities(), 20);
    }

    #[test]
    fn random_graphs_are_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..30 {
            assert!(random_connected_graph(n, 0.2, &mut rng).is_connected());
        }
    }

    #[test]
    fn topic_corpus_is_aligned() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = topic_corpus(30, 6, 3, 0.2, &mut rng);
        assert_eq!(c.vectors.len(), 30);
        assert_eq!(c.tokens.doc_ids(), c.vectors.doc_ids());
        assert_eq!(c.topics.n_communities(), 3);
        assert_eq!(c.labels.labels[4], "topic1");
    }
}
