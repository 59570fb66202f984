//! Markov-time sweep with Louvain ensembles.
//!
//! At every time on a log-spaced grid the optimizer is restarted
//! `n_repeats` times. The best run (highest stability) represents that time;
//! the mean pairwise variation of information of the ensemble, `VI(t)`,
//! measures how reproducible it is. After the sweep the VI between the best
//! partitions of every pair of times, `VI(t, t')`, shows which partitions
//! persist.
//!
//! Louvain can stall in a local optimum at one time while a neighbouring time
//! found a better partition for it. With `postprocess` on, every time's best
//! partition is re-scored at every other time and replaced when another
//! time's best scores strictly higher there.

mod select;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::MarkovKernel;
use crate::stability::{louvain_on_matrix, stability_from_matrix, Partition, StabilityScore, GAIN_TOLERANCE};

pub use crate::info::variation_of_information;
pub use select::{select_scales, SelectedScale, SCORE_EPSILON};

/// Above this ensemble size the pairwise VI mean is estimated from
/// [`VI_PAIR_SAMPLES`] seeded random pairs.
pub const VI_SUBSAMPLE_ABOVE: usize = 150;
pub const VI_PAIR_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// `n_points` log-uniform times from `t_min` to `t_max` inclusive.
    pub fn log_spaced(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min.is_finite() && t_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("need 0 < t_min, got {t_min}")));
        }
        if n_points == 0 {
            return Err(Error::InvalidGrid("need at least one point".into()));
        }
        if n_points == 1 {
            return Ok(Self { times: vec![t_min] });
        }
        if t_max <= t_min {
            return Err(Error::InvalidGrid(format!("need t_min < t_max, got {t_min} >= {t_max}")));
        }
        let (lo, hi) = (t_min.ln(), t_max.ln());
        let step = (hi - lo) / (n_points - 1) as f64;
        let mut times: Vec<f64> = (0..n_points).map(|i| (lo + step * i as f64).exp()).collect();
        times[0] = t_min;
        times[n_points - 1] = t_max;
        Self::from_times(times)
    }

    /// Any strictly increasing list of positive times.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidGrid("empty".into()));
        }
        if times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidGrid("times must be positive and finite".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("times must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub n_repeats: usize,
    pub master_seed: u64,
    /// Re-score best partitions across times, see [`postprocess`].
    pub postprocess: bool,
}

impl ScanConfig {
    pub fn new(n_repeats: usize, master_seed: u64) -> Self {
        Self {
            n_repeats,
            master_seed,
            postprocess: true,
        }
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self::new(500, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub t: f64,
    pub best: StabilityScore,
    pub n_communities: usize,
    /// Mean pairwise VI over the ensemble, nats.
    pub vi_ensemble: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub n_nodes: usize,
    pub points: Vec<ScanPoint>,
    /// VI between best partitions at each pair of times.
    pub cross_vi: Vec<Vec<f64>>,
}

impl ScanResult {
    /// Assembles a result from per-time points, computing `VI(t, t')`.
    pub fn from_points(points: Vec<ScanPoint>) -> Result<Self> {
        let n_nodes = points.first().map_or(0, |p| p.best.partition.len());
        let m = points.len();
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        let values: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| variation_of_information(&points[i].best.partition, &points[j].best.partition))
            .collect::<Result<_>>()?;
        let mut cross_vi = vec![vec![0.0; m]; m];
        for (&(i, j), v) in pairs.iter().zip(values) {
            cross_vi[i][j] = v;
            cross_vi[j][i] = v;
        }
        Ok(Self {
            n_nodes,
            points,
            cross_vi,
        })
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one Louvain run, a pure function of its position in the sweep.
pub fn derive_seed(master_seed: u64, t_index: usize, repeat: usize) -> u64 {
    let a = splitmix64(master_seed);
    let b = splitmix64(a ^ (t_index as u64));
    splitmix64(b ^ (repeat as u64).rotate_left(32))
}

/// Mean VI over unordered pairs of the ensemble, exact up to
/// [`VI_SUBSAMPLE_ABOVE`] members and sampled with `seed` beyond.
pub fn ensemble_vi(partitions: &[Partition], seed: u64) -> f64 {
    let m = partitions.len();
    if m < 2 {
        return 0.0;
    }
    let pairs: Vec<(usize, usize)> = if m > VI_SUBSAMPLE_ABOVE {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..VI_PAIR_SAMPLES)
            .map(|_| {
                let i = rng.random_range(0..m);
                let mut j = rng.random_range(0..m - 1);
                if j >= i {
                    j += 1;
                }
                (i.min(j), i.max(j))
            })
            .collect()
    } else {
        (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect()
    };
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| variation_of_information(&partitions[i], &partitions[j]).expect("same node set"))
        .collect();
    values.iter().sum::<f64>() / values.len() as f64
}

/// One ensemble at a single time from explicit seeds; `vi_seed` drives pair
/// subsampling for large ensembles.
pub fn ensemble_point(b: &DMatrix<f64>, t: f64, seeds: &[u64], vi_seed: u64) -> ScanPoint {
    let runs: Vec<StabilityScore> = seeds.par_iter().map(|&s| louvain_on_matrix(b, t, s)).collect();
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.r > runs[best].r {
            best = k;
        }
    }
    let partitions: Vec<Partition> = runs.iter().map(|r| r.partition.clone()).collect();
    let vi_ensemble = ensemble_vi(&partitions, vi_seed);
    let best = runs[best].clone();
    ScanPoint {
        t,
        n_communities: best.partition.n_communities(),
        best,
        vi_ensemble,
    }
}

/// The ensemble at grid index `t_index`, seeded from `config.master_seed`.
pub fn scan_point(kernel: &MarkovKernel, t_index: usize, t: f64, config: &ScanConfig) -> ScanPoint {
    let b = kernel.modularity_matrix(t);
    let seeds: Vec<u64> = (0..config.n_repeats)
        .map(|rep| derive_seed(config.master_seed, t_index, rep))
        .collect();
    let vi_seed = derive_seed(config.master_seed, t_index, usize::MAX);
    ensemble_point(&b, t, &seeds, vi_seed)
}

/// Replaces each time's best partition by the best partition of another
/// time when that one scores more than [`GAIN_TOLERANCE`] higher at this
/// time. Ties keep the current partition, then prefer the earliest time.
/// Ensemble VI is left untouched. Returns the number of replacements.
pub fn postprocess(kernel: &MarkovKernel, points: &mut [ScanPoint]) -> usize {
    let mut candidates: Vec<Partition> = Vec::new();
    for p in points.iter() {
        if !candidates.contains(&p.best.partition) {
            candidates.push(p.best.partition.clone());
        }
    }
    let replacements: Vec<Option<StabilityScore>> = points
        .par_iter()
        .map(|p| {
            let b = kernel.modularity_matrix(p.t);
            let mut best: Option<StabilityScore> = None;
            let mut best_r = p.best.r;
            for c in &candidates {
                if *c == p.best.partition {
                    continue;
                }
                let r = stability_from_matrix(&b, c).expect("same node set");
                if r > best_r + GAIN_TOLERANCE {
                    best_r = r;
                    best = Some(StabilityScore {
                        t: p.t,
                        r,
                        partition: c.clone(),
                    });
                }
            }
            best
        })
        .collect();
    let mut n = 0;
    for (p, rep) in points.iter_mut().zip(replacements) {
        if let Some(score) = rep {
            p.n_communities = score.partition.n_communities();
            p.best = score;
            n += 1;
        }
    }
    n
}

/// Full sweep. Output depends only on the inputs, not on thread count.
pub fn run_scan(kernel: &MarkovKernel, grid: &TimeGrid, config: &ScanConfig) -> Result<ScanResult> {
    if config.n_repeats < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_repeats must be at least 2, got {}",
            config.n_repeats
        )));
    }
    let mut points: Vec<ScanPoint> = grid
        .times()
        .iter()
        .enumerate()
        .map(|(i, &t)| scan_point(kernel, i, t, config))
        .collect();
    if config.postprocess {
        postprocess(kernel, &mut points);
    }
    ScanResult::from_points(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_log_uniform() {
        let g = TimeGrid::log_spaced(0.01, 100.0, 5).unwrap();
        assert_eq!(g.times()[0], 0.01);
        assert_eq!(g.times()[4], 100.0);
        for (t, want) in g.times().iter().zip([0.01, 0.1, 1.0, 10.0, 100.0]) {
            assert!((t / want - 1.0).abs() < 1e-12);
        }
        assert!(TimeGrid::log_spaced(0.0, 1.0, 3).is_err());
        assert!(TimeGrid::log_spaced(2.0, 1.0, 3).is_err());
        assert!(TimeGrid::from_times(vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn seeds_differ_across_positions() {
        let mut s: Vec<u64> = (0..10)
            .flat_map(|t| (0..10).map(move |r| derive_seed(7, t, r)))
            .collect();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 100);
    }

    #[test]
    fn ensemble_vi_of_identical_members_is_zero() {
        let p = Partition::new(vec![0, 0, 1, 1]).unwrap();
        assert_eq!(ensemble_vi(&vec![p.clone(); 3], 0), 0.0);
        assert_eq!(ensemble_vi(&vec![p; 200], 0), 0.0);
    }

    #[test]
    fn subsampled_vi_is_close_to_exact() {
        let a = Partition::new(vec![0, 0, 1, 1]).unwrap();
        let b = Partition::new(vec![0, 1, 0, 1]).unwrap();
        let members: Vec<Partition> = (0..200).map(|i| if i % 2 == 0 { a.clone() } else { b.clone() }).collect();
        let d = 2.0 * 2f64.ln();
        // 100 * 100 mixed pairs over C(200, 2)
        let exact = d * 10_000.0 / 19_900.0;
        let est = ensemble_vi(&members, 11);
        assert!((est - exact).abs() < 0.03, "{est} vs {exact}");
    }

    #[test]
    fn postprocess_adopts_a_better_partition_from_another_time() {
        let graph = crate::stability::tests::two_triangles();
        let kernel = crate::markov::build_kernel(&graph).unwrap();
        let split = Partition::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        let point = |t: f64, p: &Partition| ScanPoint {
            t,
            best: StabilityScore {
                t,
                r: crate::stability::stability(&kernel, t, p).unwrap().r,
                partition: p.clone(),
            },
            n_communities: p.n_communities(),
            vi_ensemble: 0.25,
        };
        let mut points = vec![point(1.0, &Partition::singletons(6)), point(2.0, &split)];
        assert_eq!(postprocess(&kernel, &mut points), 1);
        assert_eq!(points[0].best.partition, split);
        assert_eq!(points[0].n_communities, 2);
        assert_eq!(points[0].vi_ensemble, 0.25);
        assert_eq!(postprocess(&kernel, &mut points), 0);
    }
}
