//! The `mstab` command line: `graph`, `scan`, `select`, `eval` and `run`.
//!
//! Each stage reads the previous stage's artifacts from the output
//! directory, so the expensive scan can be rerun or resumed on its own.
//! Exit codes: 0 success, 2 input or validation error, 3 graph-property
//! error (disconnected graph, isolated node).

pub mod artifacts;
mod config;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::Path;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::corpus::{load_labels, load_tokens, load_vectors, VectorCorpus};
use crate::error::{io_err, Error};
use crate::eval::{coherence_report, labeling_partition, nmi, sankey_links, summarize_clusters, CoherenceReport};
use crate::markov::build_kernel;
use crate::scan::{postprocess, scan_point, select_scales, ScanConfig, ScanResult, TimeGrid};
use crate::simgraph::{build_mst_knn, cosine_similarity};
use crate::stability::Partition;

use artifacts::*;
pub use config::{ConfigArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "mstab", version, about = "Multiscale document clustering with Markov Stability")]
pub struct Cli {
    /// Worker threads for the scan; never changes the output
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the MST-kNN similarity graph from vectors.csv
    Graph(ConfigArgs),
    /// Sweep Markov time with Louvain ensembles
    Scan(ConfigArgs),
    /// Pick robust scales from a finished scan
    Select(ConfigArgs),
    /// Coherence, NMI, Sankey flows and summaries for the selected scales
    Eval(ConfigArgs),
    /// All four stages in order
    Run(ConfigArgs),
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Disconnected { .. } | Error::IsolatedNode(_) => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        pool = pool.num_threads(w.max(1));
    }
    let pool = pool.build().map_err(|e| usage(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Graph(a) => cmd_graph(&a.resolve()?),
        Command::Scan(a) => cmd_scan(&a.resolve()?),
        Command::Select(a) => cmd_select(&a.resolve()?),
        Command::Eval(a) => cmd_eval(&a.resolve()?),
        Command::Run(a) => {
            let c = a.resolve()?;
            cmd_graph(&c)?;
            cmd_scan(&c)?;
            cmd_select(&c)?;
            cmd_eval(&c)
        }
    })
}

fn prepare_out_dir(config: &RunConfig) -> CliResult<()> {
    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    write_json(&config.out_dir.join(CONFIG), config)?;
    Ok(())
}

pub fn cmd_graph(config: &RunConfig) -> CliResult<()> {
    let path = config.vectors.as_ref().ok_or_else(|| usage("graph needs --vectors"))?;
    let corpus = load_vectors(path)?;
    prepare_out_dir(config)?;
    let sim = cosine_similarity(&corpus);
    let graph = build_mst_knn(&sim, config.k)?;
    let meta = GraphMeta::mst_knn(&graph, config.k, corpus.doc_ids().to_vec());
    write_graph(&config.out_dir, &graph, &meta)?;
    println!(
        "graph: N = {}, edges = {}, k = {}, connected = {}",
        meta.n_nodes, meta.n_edges, meta.k, meta.connected
    );
    Ok(())
}

pub fn cmd_scan(config: &RunConfig) -> CliResult<()> {
    let dir = &config.out_dir;
    let (graph, meta) = read_graph(dir)?;
    prepare_out_dir(config)?;
    let kernel = build_kernel(&graph)?;
    let grid = TimeGrid::log_spaced(config.t_min, config.t_max, config.n_points)?;
    let scan_config = ScanConfig {
        n_repeats: config.n_repeats,
        master_seed: config.master_seed,
        postprocess: config.postprocess,
    };
    let header = CheckpointHeader {
        n_nodes: graph.n_nodes(),
        n_edges: graph.n_edges(),
        times: grid.times().to_vec(),
        n_repeats: config.n_repeats,
        master_seed: config.master_seed,
    };

    let mut points = read_checkpoint(dir, &header);
    if !points.is_empty() {
        println!("scan: resuming after {} of {} times", points.len(), grid.len());
    }
    let mut checkpoint = CheckpointWriter::create(dir, &header, &points)?;
    for (index, &t) in grid.times().iter().enumerate().skip(points.len()) {
        let point = scan_point(&kernel, index, t, &scan_config);
        log::info!(
            "t[{index}] = {t:.4}: C = {}, r = {:.6}, VI = {:.4}",
            point.n_communities,
            point.best.r,
            point.vi_ensemble
        );
        checkpoint.append(index, &point)?;
        points.push(point);
    }
    if scan_config.postprocess {
        let replaced = postprocess(&kernel, &mut points);
        log::info!("postprocess replaced {replaced} best partitions");
    }
    let scan = ScanResult::from_points(points)?;
    write_scan(dir, &scan, &meta.doc_ids, config.n_repeats, config.master_seed)?;
    println!("scan: {} times, {} repeats each", scan.points.len(), config.n_repeats);
    Ok(())
}

pub fn cmd_select(config: &RunConfig) -> CliResult<()> {
    let dir = &config.out_dir;
    let (_, meta) = read_graph(dir)?;
    let scan = read_scan(dir, &meta.doc_ids)?;
    prepare_out_dir(config)?;
    let scales = select_scales(&scan, config.max_scales, config.vi_threshold);
    let records: Vec<SelectedRecord> = scales.iter().enumerate().map(|(r, s)| SelectedRecord::new(r, s)).collect();
    write_json(&dir.join(SELECTED), &records)?;
    for r in &records {
        println!(
            "scale {}: t = {:.4} (plateau {:.4}..{:.4}), C = {}",
            r.rank, r.t, r.plateau_span[0], r.plateau_span[1], r.n_communities
        );
    }
    if records.is_empty() {
        println!("select: no plateau satisfied the criteria");
    }
    Ok(())
}

#[derive(Serialize)]
struct ScaleCoherence {
    rank: usize,
    t: f64,
    #[serde(rename = "C")]
    n_communities: usize,
    report: CoherenceReport,
}

#[derive(Serialize)]
struct CoherenceFile {
    scales: Vec<ScaleCoherence>,
    labels: Option<CoherenceReport>,
}

#[derive(Serialize)]
struct ScaleNmi {
    rank: usize,
    t: f64,
    #[serde(rename = "C")]
    n_communities: usize,
    nmi: Option<f64>,
    note: Option<String>,
}

#[derive(Serialize)]
struct SankeyNode {
    name: String,
    scale: usize,
    cluster: usize,
}

#[derive(Serialize)]
struct SankeyJsonLink {
    source: usize,
    target: usize,
    value: usize,
}

#[derive(Serialize)]
struct SankeyFile {
    nodes: Vec<SankeyNode>,
    links: Vec<SankeyJsonLink>,
}

#[derive(Serialize)]
struct ScaleSummaries {
    rank: usize,
    t: f64,
    clusters: Vec<crate::eval::ClusterSummary>,
}

fn load_optional<T>(
    what: &str,
    path: Option<&Path>,
    load: impl FnOnce(&Path) -> crate::error::Result<T>,
) -> CliResult<Option<T>> {
    match path {
        None => {
            println!("eval: {what} skipped: no --{what_flag} given", what_flag = flag_for(what));
            Ok(None)
        }
        Some(p) => load(p)
            .map(Some)
            .map_err(|e| usage(format!("{what} skipped: cannot load {}: {e}", p.display()))),
    }
}

fn flag_for(what: &str) -> &'static str {
    match what {
        "coherence" => "tokens",
        "nmi" => "labels",
        _ => "vectors",
    }
}

pub fn cmd_eval(config: &RunConfig) -> CliResult<()> {
    let dir = &config.out_dir;
    let (_, meta) = read_graph(dir)?;
    let records: Vec<SelectedRecord> = read_json(&dir.join(SELECTED))?;
    prepare_out_dir(config)?;
    let ids = &meta.doc_ids;
    let partitions: Vec<Partition> = records
        .iter()
        .map(|r| read_partition(&dir.join(&r.partition_file), ids))
        .collect::<crate::error::Result<_>>()?;

    // Vectors define the corpus used to align tokens and labels when given.
    let corpus: Option<VectorCorpus> = match &config.vectors {
        Some(p) => {
            let c = load_vectors(p).map_err(|e| usage(format!("summaries skipped: {e}")))?;
            if c.doc_ids() != ids.as_slice() {
                return Err(usage("vectors do not match the graph's documents"));
            }
            Some(c)
        }
        None => None,
    };

    let tokens = load_optional("coherence", config.tokens.as_deref(), |p| {
        let stats = load_tokens(p, corpus.as_ref())?;
        if stats.doc_ids() != ids.as_slice() {
            return Err(Error::InvalidParameter(
                "token rows do not follow the graph's documents; pass --vectors to align them".into(),
            ));
        }
        Ok(stats)
    })?;
    let labels = load_optional("nmi", config.labels.as_deref(), |p| load_labels(p, corpus.as_ref()))?;

    if let Some(stats) = &tokens {
        let scales = records
            .iter()
            .zip(&partitions)
            .map(|(r, p)| {
                Ok(ScaleCoherence {
                    rank: r.rank,
                    t: r.t,
                    n_communities: r.n_communities,
                    report: coherence_report(stats, p, config.top_words)?,
                })
            })
            .collect::<crate::error::Result<_>>()?;
        let labels = match &labels {
            Some(l) => Some(coherence_report(stats, &labeling_partition(l, ids), config.top_words)?),
            None => None,
        };
        write_json(&dir.join(COHERENCE), &CoherenceFile { scales, labels })?;
        println!("eval: wrote {COHERENCE}");
    }

    if let Some(l) = &labels {
        let truth = labeling_partition(l, ids);
        let rows: Vec<ScaleNmi> = records
            .iter()
            .zip(&partitions)
            .map(|(r, p)| {
                let (nmi, note) = match nmi(p, &truth) {
                    Ok(v) => (Some(v), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                ScaleNmi {
                    rank: r.rank,
                    t: r.t,
                    n_communities: r.n_communities,
                    nmi,
                    note,
                }
            })
            .collect();
        write_json(&dir.join(NMI), &rows)?;
        println!("eval: wrote {NMI}");
    }

    // Sankey flows between consecutive scales, fine to coarse.
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].t.total_cmp(&records[b].t));
    let mut nodes = Vec::new();
    let mut offsets = Vec::new();
    for &s in &order {
        offsets.push(nodes.len());
        for c in 0..partitions[s].n_communities() {
            nodes.push(SankeyNode {
                name: format!("t{:.3}:{c}", records[s].t),
                scale: records[s].rank,
                cluster: c,
            });
        }
    }
    let mut links = Vec::new();
    for w in 0..order.len().saturating_sub(1) {
        let (fine, coarse) = (order[w], order[w + 1]);
        for l in sankey_links(&partitions[fine], &partitions[coarse])? {
            links.push(SankeyJsonLink {
                source: offsets[w] + l.source,
                target: offsets[w + 1] + l.target,
                value: l.value,
            });
        }
    }
    write_json(&dir.join(SANKEY), &SankeyFile { nodes, links })?;
    println!("eval: wrote {SANKEY}");

    match &corpus {
        Some(c) => {
            let summaries = records
                .iter()
                .zip(&partitions)
                .map(|(r, p)| {
                    Ok(ScaleSummaries {
                        rank: r.rank,
                        t: r.t,
                        clusters: summarize_clusters(c, p)?,
                    })
                })
                .collect::<crate::error::Result<Vec<_>>>()?;
            write_json(&dir.join(SUMMARIES), &summaries)?;
            println!("eval: wrote {SUMMARIES}");
        }
        None => println!("eval: summaries skipped: no --vectors given"),
    }
    Ok(())
}
