//! Partition quality: PMI topic coherence, NMI agreement, Sankey flows and
//! centroid summaries.
//!
//! Word probabilities use document incidence: `P(w)` is the fraction of
//! documents containing `w`, `P(w1 w2)` the fraction containing both. Pairs
//! that never co-occur have undefined PMI and are left out of medians.

use serde::{Deserialize, Serialize};

use crate::corpus::{ExternalLabeling, TokenStats, VectorCorpus};
use crate::error::{Error, Result};
use crate::info::{contingency, entropy_of_sizes, Contingency};
use crate::stability::Partition;

pub const DEFAULT_TOP_WORDS: usize = 15;
pub const SUMMARY_NEAREST: usize = 3;

fn pmi_indices(stats: &TokenStats, w1: usize, w2: usize) -> Option<f64> {
    let both = stats.co_doc_frequency(w1, w2);
    if both == 0 {
        return None;
    }
    let n = stats.n_docs() as f64;
    let p12 = both as f64 / n;
    let p1 = stats.doc_frequency(w1) as f64 / n;
    let p2 = stats.doc_frequency(w2) as f64 / n;
    Some((p12 / (p1 * p2)).ln())
}

/// `ln(P(w1 w2) / (P(w1) P(w2)))`, or `None` when the words never share a
/// document.
pub fn pmi(stats: &TokenStats, w1: &str, w2: &str) -> Result<Option<f64>> {
    let a = stats.word_index(w1).ok_or_else(|| Error::UnknownWord(w1.to_string()))?;
    let b = stats.word_index(w2).ok_or_else(|| Error::UnknownWord(w2.to_string()))?;
    Ok(pmi_indices(stats, a, b))
}

/// Median with the mean of the two central values for even lengths.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterCoherence {
    pub cluster: usize,
    pub size: usize,
    pub top_words: Vec<String>,
    /// `None` when fewer than two words or no co-occurring pair.
    pub median_pmi: Option<f64>,
    pub defined_pairs: usize,
    pub undefined_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub per_cluster: Vec<ClusterCoherence>,
    /// Size-weighted mean of the defined cluster medians.
    pub aggregate: Option<f64>,
    pub unscored_clusters: Vec<usize>,
}

fn check_alignment(stats: &TokenStats, p: &Partition) -> Result<()> {
    if stats.n_docs() != p.len() {
        return Err(Error::LengthMismatch {
            left: stats.n_docs(),
            right: p.len(),
        });
    }
    Ok(())
}

/// Top `top_n` words of a cluster by summed count (ties lexicographic) and
/// the median PMI over their defined unordered pairs.
pub fn cluster_coherence(
    stats: &TokenStats,
    p: &Partition,
    cluster: usize,
    top_n: usize,
) -> Result<ClusterCoherence> {
    check_alignment(stats, p)?;
    if cluster >= p.n_communities() {
        return Err(Error::InvalidPartition(format!("no cluster {cluster}")));
    }
    let mut totals = vec![0u64; stats.vocabulary().len()];
    let mut size = 0;
    for doc in (0..p.len()).filter(|&d| p.community(d) == cluster) {
        size += 1;
        for &(w, c) in stats.doc_counts(doc) {
            totals[w] += c;
        }
    }
    let mut ranked: Vec<usize> = (0..totals.len()).filter(|&w| totals[w] > 0).collect();
    // Vocabulary is sorted, so index order is lexicographic order.
    ranked.sort_by(|&a, &b| totals[b].cmp(&totals[a]).then(a.cmp(&b)));
    ranked.truncate(top_n);

    let mut scores = Vec::new();
    let mut undefined_pairs = 0;
    for (k, &a) in ranked.iter().enumerate() {
        for &b in &ranked[k + 1..] {
            match pmi_indices(stats, a, b) {
                Some(v) => scores.push(v),
                None => undefined_pairs += 1,
            }
        }
    }
    Ok(ClusterCoherence {
        cluster,
        size,
        top_words: ranked.iter().map(|&w| stats.vocabulary()[w].clone()).collect(),
        defined_pairs: scores.len(),
        undefined_pairs,
        median_pmi: median(&mut scores),
    })
}

pub fn coherence_report(stats: &TokenStats, p: &Partition, top_n: usize) -> Result<CoherenceReport> {
    let per_cluster: Vec<ClusterCoherence> = (0..p.n_communities())
        .map(|c| cluster_coherence(stats, p, c, top_n))
        .collect::<Result<_>>()?;
    let (mut num, mut den) = (0.0, 0usize);
    let mut unscored_clusters = Vec::new();
    for c in &per_cluster {
        match c.median_pmi {
            Some(m) => {
                num += c.size as f64 * m;
                den += c.size;
            }
            None => unscored_clusters.push(c.cluster),
        }
    }
    Ok(CoherenceReport {
        per_cluster,
        aggregate: (den > 0).then(|| num / den as f64),
        unscored_clusters,
    })
}

/// `I(T, C) / sqrt(H(T) H(C))`. Undefined when either side has one class.
pub fn nmi(a: &Partition, b: &Partition) -> Result<f64> {
    let table: Contingency = contingency(a, b)?;
    let ha = entropy_of_sizes(&table.rows, table.n);
    let hb = entropy_of_sizes(&table.cols, table.n);
    if ha == 0.0 || hb == 0.0 {
        return Err(Error::Undefined("NMI with a single-class labelling".into()));
    }
    // Canonical labels make equality mean the same clustering.
    if a == b {
        return Ok(1.0);
    }
    Ok((table.mutual_information() / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// Partition of the corpus documents induced by an external labelling.
pub fn labeling_partition(labeling: &ExternalLabeling, corpus_ids: &[String]) -> Partition {
    Partition::from_labels(&labeling.aligned_labels(corpus_ids))
}

pub fn nmi_with_labels(p: &Partition, labeling: &ExternalLabeling, corpus_ids: &[String]) -> Result<f64> {
    if corpus_ids.len() != p.len() {
        return Err(Error::LengthMismatch {
            left: corpus_ids.len(),
            right: p.len(),
        });
    }
    nmi(p, &labeling_partition(labeling, corpus_ids))
}

/// Contingency counts between two partitions, as a dense table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
}

pub fn contingency_table(a: &Partition, b: &Partition) -> Result<ContingencyTable> {
    let table = contingency(a, b)?;
    let mut counts = vec![vec![0; b.n_communities()]; a.n_communities()];
    for (x, y, c) in table.cells {
        counts[x][y] = c;
    }
    Ok(ContingencyTable { counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SankeyLink {
    pub source: usize,
    pub target: usize,
    pub value: usize,
}

/// Nonzero contingency cells between a finer and a coarser partition.
pub fn sankey_links(fine: &Partition, coarse: &Partition) -> Result<Vec<SankeyLink>> {
    Ok(contingency(fine, coarse)?
        .cells
        .into_iter()
        .map(|(source, target, value)| SankeyLink { source, target, value })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestDoc {
    pub doc_id: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub size: usize,
    pub centroid: Vec<f64>,
    pub nearest_docs: Vec<NearestDoc>,
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Mean vector of each cluster and the corpus documents closest to it.
pub fn summarize_clusters(corpus: &VectorCorpus, p: &Partition) -> Result<Vec<ClusterSummary>> {
    if corpus.len() != p.len() {
        return Err(Error::LengthMismatch {
            left: corpus.len(),
            right: p.len(),
        });
    }
    let dim = corpus.dim();
    Ok(p.communities()
        .into_iter()
        .enumerate()
        .map(|(cluster, members)| {
            let mut centroid = vec![0.0; dim];
            for &m in &members {
                for (c, x) in centroid.iter_mut().zip(corpus.vector(m)) {
                    *c += x;
                }
            }
            for c in centroid.iter_mut() {
                *c /= members.len() as f64;
            }
            let mut sims: Vec<(usize, f64)> =
                (0..corpus.len()).map(|d| (d, cosine(&centroid, corpus.vector(d)))).collect();
            sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let nearest_docs = sims
                .into_iter()
                .take(SUMMARY_NEAREST)
                .map(|(d, similarity)| NearestDoc {
                    doc_id: corpus.doc_ids()[d].clone(),
                    similarity,
                })
                .collect();
            ClusterSummary {
                cluster,
                size: members.len(),
                centroid,
                nearest_docs,
            }
        })
        .collect())
}
