//! Stability of fixed partitions and Louvain maximization across times.
//!
//! On a small graph with communities nested two levels deep, Louvain finds
//! the eight cliques at short times and the two halves at long times.
//!
//! ```text
//! cargo run --release --example louvain
//! ```

use markov_stability::prelude::*;

fn nested_graph() -> Result<SimilarityGraph> {
    // 8 cliques of 5 nodes. Cliques 0-3 and 4-7 form two dense groups.
    let mut edges = Vec::new();
    for c in 0..8 {
        for a in 0..5 {
            for b in a + 1..5 {
                edges.push(Edge { i: 5 * c + a, j: 5 * c + b, weight: 1.0 });
            }
        }
    }
    for c in 0..8 {
        for d in c + 1..8 {
            let w = if c / 4 == d / 4 { 0.4 } else if d == c + 4 { 0.05 } else { continue };
            edges.push(Edge { i: 5 * c, j: 5 * d, weight: w });
        }
    }
    SimilarityGraph::from_edges(40, edges)
}

pub fn run() -> Result<Vec<(f64, usize)>> {
    let kernel = build_kernel(&nested_graph()?)?;
    let cliques = Partition::new((0..40).map(|i| i / 5).collect())?;
    let halves = Partition::new((0..40).map(|i| i / 20).collect())?;
    let n = kernel.n();

    println!("{:>8} {:>9} {:>9} {:>9} {:>9} {:>4}", "t", "singles", "cliques", "halves", "louvain", "C");
    let mut found = Vec::new();
    for t in [0.05, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0] {
        let score = |p: &Partition| stability(&kernel, t, p).map(|s| s.r);
        let best = (0..20).map(|seed| louvain_maximize(&kernel, t, seed)).max_by(|a, b| a.r.total_cmp(&b.r)).unwrap();
        println!(
            "{t:>8} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>4}",
            score(&Partition::singletons(n))?,
            score(&cliques)?,
            score(&halves)?,
            best.r,
            best.partition.n_communities()
        );
        found.push((t, best.partition.n_communities()));
    }
    Ok(found)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
