//! File layout of a run directory.
//!
//! ```text
//! config.json            RunConfig of the last stage run here
//! graph.json             graph metadata (N, k, construction, doc ids)
//! graph_edges.csv        i,j,weight
//! scan_checkpoint.jsonl  scan parameters, then one finished time per line
//! scan.json              per-time records
//! curves.csv             t,C,r,vi
//! cross_vi.csv           VI(t, t') matrix
//! partitions/t_NNN.csv   doc_id,community for the best partition at time NNN
//! selected_scales.json   ranked plateaus
//! coherence.json, nmi.json, sankey.json, summaries.json
//! ```

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::scan::{ScanPoint, ScanResult, SelectedScale};
use crate::simgraph::{SimilarityGraph, MST_WEIGHT_FLOOR};
use crate::stability::{Partition, StabilityScore};

pub const CONFIG: &str = "config.json";
pub const GRAPH_META: &str = "graph.json";
pub const GRAPH_EDGES: &str = "graph_edges.csv";
pub const CHECKPOINT: &str = "scan_checkpoint.jsonl";
pub const SCAN: &str = "scan.json";
pub const CURVES: &str = "curves.csv";
pub const CROSS_VI: &str = "cross_vi.csv";
pub const PARTITIONS: &str = "partitions";
pub const SELECTED: &str = "selected_scales.json";
pub const COHERENCE: &str = "coherence.json";
pub const NMI: &str = "nmi.json";
pub const SANKEY: &str = "sankey.json";
pub const SUMMARIES: &str = "summaries.json";

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n").map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub k: usize,
    pub construction: String,
    pub mst_distance: String,
    pub mst_weight_floor: f64,
    pub connected: bool,
    pub doc_ids: Vec<String>,
}

impl GraphMeta {
    pub fn mst_knn(graph: &SimilarityGraph, k: usize, doc_ids: Vec<String>) -> Self {
        Self {
            n_nodes: graph.n_nodes(),
            n_edges: graph.n_edges(),
            k,
            construction: "mst_knn".into(),
            mst_distance: "1 - cosine".into(),
            mst_weight_floor: MST_WEIGHT_FLOOR,
            connected: graph.is_connected(),
            doc_ids,
        }
    }
}

pub fn write_graph(dir: &Path, graph: &SimilarityGraph, meta: &GraphMeta) -> Result<()> {
    write_json(&dir.join(GRAPH_META), meta)?;
    let path = dir.join(GRAPH_EDGES);
    let file = File::create(&path).map_err(io_err(&path))?;
    graph.write_edge_list(BufWriter::new(file))
}

pub fn read_graph(dir: &Path) -> Result<(SimilarityGraph, GraphMeta)> {
    let meta: GraphMeta = read_json(&dir.join(GRAPH_META))?;
    if meta.doc_ids.len() != meta.n_nodes {
        return Err(Error::LengthMismatch {
            left: meta.doc_ids.len(),
            right: meta.n_nodes,
        });
    }
    let path = dir.join(GRAPH_EDGES);
    let file = File::open(&path).map_err(io_err(&path))?;
    let graph = SimilarityGraph::read_edge_list(meta.n_nodes, BufReader::new(file))?;
    Ok((graph, meta))
}

pub fn partition_file(t_index: usize) -> String {
    format!("{PARTITIONS}/t_{t_index:03}.csv")
}

pub fn write_partition(path: &Path, doc_ids: &[String], p: &Partition) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["doc_id", "community"])?;
    for (id, c) in doc_ids.iter().zip(p.assignment()) {
        wtr.write_record([id.as_str(), &c.to_string()])?;
    }
    wtr.flush().map_err(io_err(path))
}

/// Reads `doc_id,community` rows back into the order of `doc_ids`.
pub fn read_partition(path: &Path, doc_ids: &[String]) -> Result<Partition> {
    #[derive(Deserialize)]
    struct Row {
        doc_id: String,
        community: usize,
    }
    let index: HashMap<&str, usize> = doc_ids.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    let mut labels = vec![usize::MAX; doc_ids.len()];
    let mut rdr = csv::Reader::from_path(path)?;
    for (line, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row?;
        let line = line as u64 + 2;
        let &i = index.get(row.doc_id.as_str()).ok_or(Error::UnknownId {
            line,
            id: row.doc_id.clone(),
        })?;
        labels[i] = row.community;
    }
    if let Some(i) = labels.iter().position(|&l| l == usize::MAX) {
        return Err(Error::InvalidPartition(format!(
            "{}: no community for `{}`",
            path.display(),
            doc_ids[i]
        )));
    }
    Partition::new(labels)
}

/// Parameters that must match for a checkpoint to be reused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub times: Vec<f64>,
    pub n_repeats: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointLine {
    pub index: usize,
    pub point: ScanPoint,
}

/// Finished points of a previous run with the same header. A truncated or
/// mismatching checkpoint yields only its valid prefix.
pub fn read_checkpoint(dir: &Path, header: &CheckpointHeader) -> Vec<ScanPoint> {
    let Ok(file) = File::open(dir.join(CHECKPOINT)) else {
        return Vec::new();
    };
    let mut lines = BufReader::new(file).lines();
    let Some(Ok(first)) = lines.next() else {
        return Vec::new();
    };
    match serde_json::from_str::<CheckpointHeader>(&first) {
        Ok(h) if &h == header => {}
        _ => {
            log::info!("checkpoint does not match this scan, starting over");
            return Vec::new();
        }
    }
    let mut points = Vec::new();
    for line in lines {
        let Ok(line) = line else { break };
        match serde_json::from_str::<CheckpointLine>(&line) {
            Ok(c) if c.index == points.len() => points.push(c.point),
            _ => break,
        }
    }
    points
}

pub struct CheckpointWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl CheckpointWriter {
    /// Rewrites the checkpoint with `header` and the reused `points`.
    pub fn create(dir: &Path, header: &CheckpointHeader, points: &[ScanPoint]) -> Result<Self> {
        let path = dir.join(CHECKPOINT);
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = Self {
            out: BufWriter::new(file),
            path,
        };
        serde_json::to_writer(&mut w.out, header)?;
        w.out.write_all(b"\n").map_err(io_err(&w.path))?;
        for (index, point) in points.iter().enumerate() {
            w.append(index, point)?;
        }
        Ok(w)
    }

    pub fn append(&mut self, index: usize, point: &ScanPoint) -> Result<()> {
        let line = CheckpointLine {
            index,
            point: point.clone(),
        };
        serde_json::to_writer(&mut self.out, &line)?;
        self.out.write_all(b"\n").map_err(io_err(&self.path))?;
        self.out.flush().map_err(io_err(&self.path))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub index: usize,
    pub t: f64,
    #[serde(rename = "C")]
    pub n_communities: usize,
    pub r: f64,
    pub vi_ensemble: f64,
    pub partition_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFile {
    pub n_nodes: usize,
    pub n_repeats: usize,
    pub master_seed: u64,
    pub points: Vec<ScanRecord>,
}

pub fn write_scan(dir: &Path, scan: &ScanResult, doc_ids: &[String], n_repeats: usize, master_seed: u64) -> Result<()> {
    let pdir = dir.join(PARTITIONS);
    fs::create_dir_all(&pdir).map_err(io_err(&pdir))?;
    let mut records = Vec::with_capacity(scan.points.len());
    for (index, p) in scan.points.iter().enumerate() {
        let file = partition_file(index);
        write_partition(&dir.join(&file), doc_ids, &p.best.partition)?;
        records.push(ScanRecord {
            index,
            t: p.t,
            n_communities: p.n_communities,
            r: p.best.r,
            vi_ensemble: p.vi_ensemble,
            partition_file: file,
        });
    }
    write_json(
        &dir.join(SCAN),
        &ScanFile {
            n_nodes: scan.n_nodes,
            n_repeats,
            master_seed,
            points: records,
        },
    )?;

    let mut curves = csv::Writer::from_path(dir.join(CURVES))?;
    curves.write_record(["t", "C", "r", "vi"])?;
    for p in &scan.points {
        curves.write_record([p.t.to_string(), p.n_communities.to_string(), p.best.r.to_string(), p.vi_ensemble.to_string()])?;
    }
    curves.flush().map_err(io_err(dir.join(CURVES)))?;

    let mut cross = csv::Writer::from_path(dir.join(CROSS_VI))?;
    for row in &scan.cross_vi {
        cross.write_record(row.iter().map(|v| v.to_string()))?;
    }
    cross.flush().map_err(io_err(dir.join(CROSS_VI)))
}

pub fn read_scan(dir: &Path, doc_ids: &[String]) -> Result<ScanResult> {
    let file: ScanFile = read_json(&dir.join(SCAN))?;
    let mut points = Vec::with_capacity(file.points.len());
    for rec in &file.points {
        let partition = read_partition(&dir.join(&rec.partition_file), doc_ids)?;
        points.push(ScanPoint {
            t: rec.t,
            n_communities: rec.n_communities,
            vi_ensemble: rec.vi_ensemble,
            best: StabilityScore {
                t: rec.t,
                r: rec.r,
                partition,
            },
        });
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(dir.join(CROSS_VI))?;
    let mut cross_vi = Vec::new();
    for rec in rdr.deserialize::<Vec<f64>>() {
        cross_vi.push(rec?);
    }
    if cross_vi.len() != points.len() || cross_vi.iter().any(|r| r.len() != points.len()) {
        return Err(Error::InvalidParameter(format!(
            "{CROSS_VI} does not match {} scan points",
            points.len()
        )));
    }
    Ok(ScanResult {
        n_nodes: file.n_nodes,
        points,
        cross_vi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedRecord {
    pub rank: usize,
    pub t: f64,
    pub t_index: usize,
    #[serde(rename = "C")]
    pub n_communities: usize,
    pub plateau_span: [f64; 2],
    pub index_span: [usize; 2],
    pub vi_dip_depth: f64,
    pub score: f64,
    pub partition_file: String,
}

impl SelectedRecord {
    pub fn new(rank: usize, s: &SelectedScale) -> Self {
        Self {
            rank,
            t: s.t,
            t_index: s.t_index,
            n_communities: s.n_communities,
            plateau_span: s.plateau_span,
            index_span: s.index_span,
            vi_dip_depth: s.vi_dip_depth,
            score: s.score,
            partition_file: partition_file(s.t_index),
        }
    }
}
