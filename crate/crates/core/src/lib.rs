//! Multiscale clustering of embedded documents with Markov Stability.
//!
//! The pipeline turns document vectors into a sparse similarity graph,
//! runs a continuous-time random walk on it, and optimizes Markov Stability
//! across a range of Markov times. Scanning time acts as a resolution knob:
//! short times favour many small communities, long times few large ones.
//! Robust scales are those that Louvain finds reproducibly and that persist
//! over an extended time span.
//!
//! | Stage | Module |
//! |-------|--------|
//! | load `vectors.csv`, `tokens.jsonl`, `labels.csv` | [`corpus`] |
//! | cosine similarity, MST-kNN graph | [`simgraph`] |
//! | random-walk kernel `P(t) = exp(-t L)` | [`markov`] |
//! | clustered autocovariance, stability, Louvain | [`stability`] |
//! | Markov-time sweep, VI, scale selection | [`scan`] |
//! | PMI coherence, NMI, Sankey, summaries | [`eval`] |
//! | `mstab` command line | [`cli`] |
//!
//! ```
//! use markov_stability::prelude::*;
//!
//! // Two triangles joined by a single edge.
//! let edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)];
//! let graph = SimilarityGraph::from_edges(6, edges.iter().map(|&(i, j)| Edge { i, j, weight: 1.0 })).unwrap();
//! let kernel = build_kernel(&graph).unwrap();
//! let best = louvain_maximize(&kernel, 1.0, 7);
//! assert_eq!(best.partition.assignment(), [0, 0, 0, 1, 1, 1]);
//! ```

pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod info;
pub mod markov;
pub mod scan;
pub mod simgraph;
pub mod stability;
pub mod synthetic;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::corpus::{load_labels, load_tokens, load_vectors, ExternalLabeling, TokenStats, VectorCorpus};
    pub use crate::error::{Error, Result};
    pub use crate::eval::{cluster_coherence, coherence_report, nmi, pmi, sankey_links, summarize_clusters};
    pub use crate::markov::{build_kernel, MarkovKernel};
    pub use crate::scan::{run_scan, select_scales, variation_of_information, ScanConfig, ScanResult, TimeGrid};
    pub use crate::simgraph::{build_mst_knn, cosine_similarity, Edge, SimilarityGraph, SimilarityMatrix};
    pub use crate::stability::{clustered_autocovariance, louvain_maximize, stability, Partition, StabilityScore};
}
