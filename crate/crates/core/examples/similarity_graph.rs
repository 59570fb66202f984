//! Cosine similarity and the MST-kNN graph.
//!
//! The minimum spanning tree keeps the graph connected; the k nearest
//! neighbours add local density. Larger `k` only ever adds edges.
//!
//! ```text
//! cargo run --release --example similarity_graph
//! ```

use markov_stability::prelude::*;
use markov_stability::synthetic::topic_corpus;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> Result<Vec<(usize, usize)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let corpus = topic_corpus(120, 16, 4, 0.6, &mut rng).vectors;
    let sim = cosine_similarity(&corpus);
    println!("N = {}, D = {}, S(0, 4) = {:.3}, S(0, 1) = {:.3}", corpus.len(), corpus.dim(), sim.get(0, 4), sim.get(0, 1));

    let mut sizes = Vec::new();
    for k in [1, 3, 5, 13, 30] {
        let graph = build_mst_knn(&sim, k)?;
        let mean_degree = 2.0 * graph.n_edges() as f64 / graph.n_nodes() as f64;
        println!(
            "k = {k:>2}: {:>5} edges, mean degree {mean_degree:>5.1}, connected = {}",
            graph.n_edges(),
            graph.is_connected()
        );
        sizes.push((k, graph.n_edges()));
    }
    Ok(sizes)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
