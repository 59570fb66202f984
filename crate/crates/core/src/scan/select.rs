//! Robust scale selection from a finished scan.
//!
//! A plateau is a run of at least two consecutive grid points whose best
//! partitions have the same number of communities and lie within
//! `vi_threshold * ln N` of each other pairwise. Runs are grown greedily
//! left to right. Each plateau is scored by its log-time length divided by
//! the ensemble VI at its centre, so long and reproducible scales rank first.

use serde::{Deserialize, Serialize};

use super::ScanResult;
use crate::stability::Partition;

/// Added to the ensemble VI in the plateau score denominator.
pub const SCORE_EPSILON: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedScale {
    pub t: f64,
    pub t_index: usize,
    pub n_communities: usize,
    pub plateau_span: [f64; 2],
    pub index_span: [usize; 2],
    /// Mean ensemble VI just outside the plateau minus the VI at its centre.
    pub vi_dip_depth: f64,
    pub score: f64,
    pub partition: Partition,
}

/// Ranked plateaus, best first, at most `max_scales` of them.
/// `vi_threshold` is a fraction of `ln N`.
pub fn select_scales(scan: &ScanResult, max_scales: usize, vi_threshold: f64) -> Vec<SelectedScale> {
    let m = scan.points.len();
    let limit = vi_threshold * (scan.n_nodes.max(2) as f64).ln();
    let mut candidates = Vec::new();

    let mut start = 0;
    while start < m {
        let c = scan.points[start].n_communities;
        let mut end = start + 1;
        while end < m
            && scan.points[end].n_communities == c
            && (start..end).all(|k| scan.cross_vi[k][end] <= limit)
        {
            end += 1;
        }
        let last = end - 1;
        if last > start {
            candidates.push(plateau(scan, start, last));
        }
        start = end;
    }

    candidates.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.t_index.cmp(&b.t_index)));
    candidates.truncate(max_scales);
    candidates
}

fn plateau(scan: &ScanResult, lo: usize, hi: usize) -> SelectedScale {
    let centre = (lo + hi) / 2;
    let point = &scan.points[centre];
    let (t_lo, t_hi) = (scan.points[lo].t, scan.points[hi].t);
    let flanks: Vec<f64> = [lo.checked_sub(1), Some(hi + 1).filter(|&k| k < scan.points.len())]
        .into_iter()
        .flatten()
        .map(|k| scan.points[k].vi_ensemble)
        .collect();
    let vi_dip_depth = if flanks.is_empty() {
        0.0
    } else {
        flanks.iter().sum::<f64>() / flanks.len() as f64 - point.vi_ensemble
    };
    SelectedScale {
        t: point.t,
        t_index: centre,
        n_communities: point.n_communities,
        plateau_span: [t_lo, t_hi],
        index_span: [lo, hi],
        vi_dip_depth,
        score: (t_hi / t_lo).ln() / (point.vi_ensemble + SCORE_EPSILON),
        partition: point.best.partition.clone(),
    }
}
