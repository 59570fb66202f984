//! The continuous-time random walk behind Markov Stability.
//!
//! Shows the Laplacian spectrum, the stationary distribution and how rows of
//! `P(t)` spread from a point mass to `pi` as Markov time grows.
//!
//! ```text
//! cargo run --release --example markov_kernel
//! ```

use markov_stability::prelude::*;

pub fn run() -> Result<MarkovKernel> {
    // Two triangles joined by the edge 2-3, plus a pendant node on 5.
    let pairs = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3), (5, 6)];
    let graph = SimilarityGraph::from_edges(7, pairs.iter().map(|&(i, j)| Edge { i, j, weight: 1.0 }))?;
    let kernel = build_kernel(&graph)?;

    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    println!("spectrum: {}", fmt(kernel.spectrum()));
    println!("pi:       {}", fmt(kernel.stationary()));
    for t in [0.0, 0.5, 2.0, 10.0, 100.0] {
        let p = kernel.transition_matrix(t);
        let row: Vec<f64> = p.row(0).iter().copied().collect();
        println!("t = {t:>5}: P[0,:] = {}  (sum {:.12})", fmt(&row), row.iter().sum::<f64>());
    }

    // Flow out of the first triangle decays towards pi(A)^2.
    let a = Partition::new(vec![0, 0, 0, 1, 1, 1, 1])?;
    for t in [0.1, 1.0, 10.0] {
        let r = clustered_autocovariance(&kernel, t, &a)?;
        println!("t = {t:>4}: R = [[{:.4}, {:.4}], [{:.4}, {:.4}]]", r[(0, 0)], r[(0, 1)], r[(1, 0)], r[(1, 1)]);
    }
    Ok(kernel)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
