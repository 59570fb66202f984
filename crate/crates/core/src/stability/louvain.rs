//! Louvain maximization of Markov Stability on the dense matrix `B(t)`.
//!
//! A run alternates a move phase (each node, in a seeded random order, joins
//! the community with the largest positive gain) with an aggregation phase
//! that collapses communities into super-nodes with `B' = H^T B H`. It stops
//! when a move phase changes nothing. Super-nodes whose merge gain is zero to
//! within [`GAIN_TOLERANCE`] are then merged, which collapses everything into
//! one community in the ergodic limit where `B` vanishes.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{stability_from_matrix, Partition, StabilityScore};
use crate::markov::MarkovKernel;

/// Moves are accepted only when they raise stability by more than this.
pub const GAIN_TOLERANCE: f64 = 1e-12;

const MAX_SWEEPS: usize = 10_000;

/// Tunables for one optimization run.
#[derive(Debug, Clone, Copy)]
pub struct Louvain {
    pub gain_tolerance: f64,
    pub merge_ties: bool,
}

impl Default for Louvain {
    fn default() -> Self {
        Self {
            gain_tolerance: GAIN_TOLERANCE,
            merge_ties: true,
        }
    }
}

/// Row-major dense symmetric matrix for one aggregation level.
struct Level {
    n: usize,
    w: Vec<f64>,
}

impl Level {
    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    fn aggregate(&self, comm: &[usize], c: usize) -> Level {
        let mut w = vec![0.0; c * c];
        for i in 0..self.n {
            let ci = comm[i];
            for (j, &v) in self.row(i).iter().enumerate() {
                w[ci * c + comm[j]] += v;
            }
        }
        Level { n: c, w }
    }
}

impl Louvain {
    /// Optimizes a partition of the nodes of `b`. Deterministic in `seed`.
    pub fn run(&self, b: &DMatrix<f64>, seed: u64) -> Partition {
        let n = b.nrows();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // B is symmetric, so its column-major storage doubles as row-major.
        let mut level = Level {
            n,
            w: b.as_slice().to_vec(),
        };
        let mut node_comm: Vec<usize> = (0..n).collect();

        loop {
            let (comm, moved) = self.move_phase(&level, &mut rng);
            if !moved {
                break;
            }
            let (comm, c) = compact(&comm);
            for x in node_comm.iter_mut() {
                *x = comm[*x];
            }
            level = level.aggregate(&comm, c);
        }

        if self.merge_ties {
            let merged = self.merge_zero_gain(&level);
            for x in node_comm.iter_mut() {
                *x = merged[*x];
            }
        }
        Partition::from_labels(&node_comm)
    }

    /// Greedy single-node moves until a full sweep changes nothing.
    fn move_phase(&self, level: &Level, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = level.n;
        let mut comm: Vec<usize> = (0..n).collect();
        let mut size = vec![1usize; n];
        let mut free: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        // Half the tolerance because the gain is 2 * (s[to] - s[from]).
        let tol = self.gain_tolerance / 2.0;
        let mut link = vec![0.0; n];
        let mut moved_any = false;

        for _ in 0..MAX_SWEEPS {
            let mut moved = false;
            for &i in &order {
                link.fill(0.0);
                for (j, &v) in level.row(i).iter().enumerate() {
                    if j != i {
                        link[comm[j]] += v;
                    }
                }
                let from = comm[i];
                let mut best = from;
                let mut best_link = link[from];
                for c in 0..n {
                    if c != from && size[c] > 0 && link[c] > best_link + tol {
                        best = c;
                        best_link = link[c];
                    }
                }
                // Leaving for an empty community has link 0.
                let to_empty = size[from] > 1 && 0.0 > best_link + tol;
                if to_empty {
                    best = *free.last().expect("an empty community exists");
                }
                if best == from {
                    continue;
                }
                if to_empty {
                    free.pop();
                }
                size[from] -= 1;
                if size[from] == 0 {
                    free.push(from);
                }
                size[best] += 1;
                comm[i] = best;
                moved = true;
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        (comm, moved_any)
    }

    /// Merges super-nodes pairwise while the merge gain `2 W_ab` is at least
    /// `-gain_tolerance`. Returns the community of each super-node.
    fn merge_zero_gain(&self, level: &Level) -> Vec<usize> {
        let n = level.n;
        let mut w = level.w.clone();
        let mut owner: Vec<usize> = (0..n).collect();
        let mut alive = vec![true; n];
        for a in 0..n {
            if !alive[a] {
                continue;
            }
            for b in a + 1..n {
                if !alive[b] || 2.0 * w[a * n + b] < -self.gain_tolerance {
                    continue;
                }
                alive[b] = false;
                for x in owner.iter_mut().filter(|x| **x == b) {
                    *x = a;
                }
                let wbb = w[b * n + b];
                let wab = w[a * n + b];
                for c in 0..n {
                    w[a * n + c] += w[b * n + c];
                    w[c * n + a] = w[a * n + c];
                }
                w[a * n + a] = w[a * n + a] + wab + wbb;
            }
        }
        owner
    }
}

/// Relabels community ids to `0..C` by first appearance.
fn compact(comm: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; comm.len()];
    let mut next = 0;
    let out = comm
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect();
    (out, next)
}

/// Runs Louvain on a precomputed `B(t)` and scores the result on it.
pub fn louvain_on_matrix(b: &DMatrix<f64>, t: f64, seed: u64) -> StabilityScore {
    let partition = Louvain::default().run(b, seed);
    let r = stability_from_matrix(b, &partition).expect("partition built from b");
    StabilityScore { t, r, partition }
}

/// Local maximum of `r(t, .)` from one seeded Louvain run.
pub fn louvain_maximize(kernel: &MarkovKernel, t: f64, seed: u64) -> StabilityScore {
    louvain_on_matrix(&kernel.modularity_matrix(t), t, seed)
}
