//! Judging clusters: PMI coherence from tokens, NMI against labels, Sankey
//! flows between two resolutions and centroid summaries.
//!
//! ```text
//! cargo run --release --example evaluate
//! ```

use markov_stability::eval::{nmi_with_labels, DEFAULT_TOP_WORDS};
use markov_stability::prelude::*;
use markov_stability::synthetic::topic_corpus;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = topic_corpus(60, 12, 6, 0.3, &mut rng);

    println!("PMI(topic0_w0, topic0_w1) = {:?}", pmi(&c.tokens, "topic0_w0", "topic0_w1")?);
    println!("PMI(topic0_w0, topic1_w0) = {:?}  (never together)", pmi(&c.tokens, "topic0_w0", "topic1_w0")?);

    // The true topics, and a coarser partition that pairs them up.
    let fine = c.topics.clone();
    let coarse = Partition::from_labels(&fine.assignment().iter().map(|t| t / 2).collect::<Vec<_>>());
    for (name, p) in [("topics", &fine), ("pairs", &coarse)] {
        let report = coherence_report(&c.tokens, p, DEFAULT_TOP_WORDS)?;
        let agreement = nmi_with_labels(p, &c.labels, c.vectors.doc_ids())?;
        println!("{name:>6}: C = {}, median PMI = {:.3}, NMI = {agreement:.3}", p.n_communities(), report.aggregate.unwrap_or(f64::NAN));
    }
    println!("NMI(topics, pairs) = {:.3}", nmi(&fine, &coarse)?);

    for l in sankey_links(&fine, &coarse)? {
        println!("flow {} -> {}: {} docs", l.source, l.target, l.value);
    }
    for s in summarize_clusters(&c.vectors, &coarse)? {
        let near: Vec<&str> = s.nearest_docs.iter().map(|d| d.doc_id.as_str()).collect();
        println!("cluster {} ({} docs): nearest {}", s.cluster, s.size, near.join(", "));
    }
    coherence_report(&c.tokens, &fine, DEFAULT_TOP_WORDS).map(|r| r.aggregate.unwrap_or(f64::NAN))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
