//! Loading and writing the on-disk artifacts shared with the embedding side.
//!
//! Three formats are understood:
//!
//! * `vectors.csv` with header `id,v0,...,v{D-1}` and one document per row,
//! * `tokens.jsonl` with one `{"id": ..., "tokens": [...]}` object per line
//!   (a `"counts": {word: n}` object is accepted in place of `tokens`),
//! * `labels.csv` with header `id,label`.
//!
//! Loaders validate everything and report the offending 1-based line.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

/// Label given to corpus documents that an external labelling does not cover.
pub const UNCLASSIFIED: &str = "Unclassified";

/// Document identifiers with one embedding vector each.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorCorpus {
    doc_ids: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    dim: usize,
}

impl VectorCorpus {
    /// Builds a corpus from rows, enforcing every corpus invariant.
    pub fn new(doc_ids: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if doc_ids.len() != vectors.len() {
            return Err(Error::LengthMismatch {
                left: doc_ids.len(),
                right: vectors.len(),
            });
        }
        let dim = vectors.first().map_or(0, Vec::len);
        let mut builder = CorpusBuilder::new(dim);
        for (row, (id, v)) in doc_ids.into_iter().zip(vectors).enumerate() {
            let line = row as u64 + 1;
            if v.len() != dim {
                return Err(Error::Arity {
                    line,
                    expected: dim + 1,
                    found: v.len() + 1,
                });
            }
            builder.push(line, id, &v)?;
        }
        builder.finish()
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }
}

struct CorpusBuilder {
    dim: usize,
    doc_ids: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl CorpusBuilder {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            doc_ids: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    fn push(&mut self, line: u64, id: String, v: &[f64]) -> Result<()> {
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateId { line, id });
        }
        if let Some(column) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { line, id, column });
        }
        if v.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroNorm { line, id });
        }
        self.index.insert(id.clone(), self.doc_ids.len());
        self.doc_ids.push(id);
        self.data.extend_from_slice(v);
        Ok(())
    }

    fn finish(self) -> Result<VectorCorpus> {
        if self.doc_ids.len() < 2 {
            return Err(Error::TooFewDocuments(self.doc_ids.len()));
        }
        if self.dim == 0 {
            return Err(Error::InvalidParameter("vectors have dimension 0".into()));
        }
        Ok(VectorCorpus {
            doc_ids: self.doc_ids,
            index: self.index,
            data: self.data,
            dim: self.dim,
        })
    }
}

pub fn load_vectors(path: impl AsRef<Path>) -> Result<VectorCorpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    read_vectors(BufReader::new(file))
}

/// Parses the vector CSV format from any reader.
pub fn read_vectors<R: Read>(reader: R) -> Result<VectorCorpus> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(rec) => rec?,
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file, expected header".into(),
            })
        }
    };
    let columns = header.len();
    if columns < 2 || &header[0] != "id" {
        return Err(Error::Parse {
            line: 1,
            message: "header must be `id,v0,...,v{D-1}`".into(),
        });
    }
    for (d, name) in header.iter().skip(1).enumerate() {
        if name != format!("v{d}") {
            return Err(Error::Parse {
                line: 1,
                message: format!("header column {} is `{name}`, expected `v{d}`", d + 1),
            });
        }
    }

    let dim = columns - 1;
    let mut builder = CorpusBuilder::new(dim);
    let mut vec = Vec::with_capacity(dim);
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != columns {
            return Err(Error::Arity {
                line,
                expected: columns,
                found: rec.len(),
            });
        }
        vec.clear();
        for (column, field) in rec.iter().enumerate().skip(1) {
            let x: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {column}: `{field}` is not a number"),
            })?;
            vec.push(x);
        }
        builder.push(line, rec[0].to_string(), &vec)?;
    }
    builder.finish()
}

/// Writes the canonical CSV form: shortest round-trip float formatting.
pub fn write_vectors(corpus: &VectorCorpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    write_vectors_to(corpus, &mut out).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

pub fn write_vectors_to<W: Write>(corpus: &VectorCorpus, out: &mut W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string()];
    header.extend((0..corpus.dim()).map(|d| format!("v{d}")));
    wtr.write_record(&header)?;
    for (i, id) in corpus.doc_ids().iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(corpus.vector(i).iter().map(|x| x.to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush()
}

/// Per-document token occurrence statistics over a sorted vocabulary.
///
/// Counts are stored sparsely; `incidence(i, w)` is `count(i, w) >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenStats {
    doc_ids: Vec<String>,
    vocabulary: Vec<String>,
    word_index: HashMap<String, usize>,
    /// Per document, `(word, count)` sorted by word, counts >= 1.
    rows: Vec<Vec<(usize, u64)>>,
    /// Per word, sorted indices of the documents containing it.
    postings: Vec<Vec<usize>>,
}

impl TokenStats {
    /// Builds statistics from per-document word counts in row order.
    pub fn from_counts(doc_ids: Vec<String>, docs: Vec<BTreeMap<String, u64>>) -> Result<Self> {
        if doc_ids.len() != docs.len() {
            return Err(Error::LengthMismatch {
                left: doc_ids.len(),
                right: docs.len(),
            });
        }
        let mut vocabulary: Vec<String> = docs
            .iter()
            .flat_map(|d| d.iter().filter(|(_, &c)| c > 0).map(|(w, _)| w.clone()))
            .collect();
        vocabulary.sort();
        vocabulary.dedup();
        let word_index: HashMap<String, usize> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();

        let mut postings = vec![Vec::new(); vocabulary.len()];
        let rows: Vec<Vec<(usize, u64)>> = docs
            .iter()
            .enumerate()
            .map(|(doc, counts)| {
                // BTreeMap iteration is lexicographic, matching vocabulary order.
                counts
                    .iter()
                    .filter(|(_, &c)| c > 0)
                    .map(|(w, &c)| {
                        let wi = word_index[w];
                        postings[wi].push(doc);
                        (wi, c)
                    })
                    .collect()
            })
            .collect();

        Ok(Self {
            doc_ids,
            vocabulary,
            word_index,
            rows,
            postings,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.word_index.get(word).copied()
    }

    pub fn count(&self, doc: usize, word: usize) -> u64 {
        let row = &self.rows[doc];
        row.binary_search_by_key(&word, |&(w, _)| w)
            .map_or(0, |k| row[k].1)
    }

    pub fn incidence(&self, doc: usize, word: usize) -> bool {
        self.count(doc, word) >= 1
    }

    /// Nonzero `(word, count)` entries of one document.
    pub fn doc_counts(&self, doc: usize) -> &[(usize, u64)] {
        &self.rows[doc]
    }

    pub fn is_empty_doc(&self, doc: usize) -> bool {
        self.rows[doc].is_empty()
    }

    /// Number of documents containing `word`.
    pub fn doc_frequency(&self, word: usize) -> usize {
        self.postings[word].len()
    }

    /// Number of documents containing both words.
    pub fn co_doc_frequency(&self, w1: usize, w2: usize) -> usize {
        let (a, b) = (&self.postings[w1], &self.postings[w2]);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

#[derive(Serialize, Deserialize)]
struct TokenLine {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tokens: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<BTreeMap<String, i64>>,
}

/// Loads `tokens.jsonl`. With a corpus, rows follow the corpus order and
/// documents absent from the file get empty rows.
pub fn load_tokens(path: impl AsRef<Path>, corpus: Option<&VectorCorpus>) -> Result<TokenStats> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    read_tokens(BufReader::new(file), corpus)
}

pub fn read_tokens<R: BufRead>(reader: R, corpus: Option<&VectorCorpus>) -> Result<TokenStats> {
    let mut ids: Vec<String> = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    let mut docs: Vec<BTreeMap<String, u64>> = Vec::new();

    for (n, line) in reader.lines().enumerate() {
        let line_no = n as u64 + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TokenLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if seen.insert(parsed.id.clone(), line_no).is_some() {
            return Err(Error::DuplicateId {
                line: line_no,
                id: parsed.id,
            });
        }
        if let Some(c) = corpus {
            if c.position(&parsed.id).is_none() {
                return Err(Error::UnknownId {
                    line: line_no,
                    id: parsed.id,
                });
            }
        }
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        match (parsed.tokens, parsed.counts) {
            (Some(_), Some(_)) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "give either `tokens` or `counts`, not both".into(),
                })
            }
            (Some(tokens), None) => {
                for t in tokens {
                    *counts.entry(t).or_insert(0) += 1;
                }
            }
            (None, Some(map)) => {
                for (token, c) in map {
                    if c < 0 {
                        return Err(Error::NegativeCount {
                            line: line_no,
                            token,
                        });
                    }
                    if c > 0 {
                        counts.insert(token, c as u64);
                    }
                }
            }
            (None, None) => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "missing `tokens`".into(),
                })
            }
        }
        if counts.is_empty() {
            log::warn!("line {line_no}: document `{}` has no tokens", parsed.id);
        }
        ids.push(parsed.id);
        docs.push(counts);
    }

    match corpus {
        None => TokenStats::from_counts(ids, docs),
        Some(c) => {
            let mut aligned = vec![BTreeMap::new(); c.len()];
            for (id, counts) in ids.into_iter().zip(docs) {
                aligned[c.position(&id).expect("validated above")] = counts;
            }
            for id in c.doc_ids().iter().filter(|id| !seen.contains_key(*id)) {
                log::warn!("document `{id}` missing from token file, treated as empty");
            }
            TokenStats::from_counts(c.doc_ids().to_vec(), aligned)
        }
    }
}

/// Writes the canonical token form: each word repeated by its count, in
/// vocabulary order.
pub fn write_tokens(stats: &TokenStats, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for (doc, id) in stats.doc_ids().iter().enumerate() {
        let tokens: Vec<String> = stats
            .doc_counts(doc)
            .iter()
            .flat_map(|&(w, c)| std::iter::repeat_n(stats.vocabulary[w].clone(), c as usize))
            .collect();
        let line = TokenLine {
            id: id.clone(),
            tokens: Some(tokens),
            counts: None,
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

/// One category label per document, e.g. from a taxonomy service or a
/// baseline clustering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalLabeling {
    pub doc_ids: Vec<String>,
    pub labels: Vec<String>,
}

impl ExternalLabeling {
    /// Label of each corpus document, in corpus order; uncovered documents
    /// are `Unclassified`.
    pub fn aligned_labels(&self, corpus_ids: &[String]) -> Vec<String> {
        let map: HashMap<&str, &str> = self
            .doc_ids
            .iter()
            .zip(&self.labels)
            .map(|(d, l)| (d.as_str(), l.as_str()))
            .collect();
        corpus_ids
            .iter()
            .map(|id| map.get(id.as_str()).copied().unwrap_or(UNCLASSIFIED).to_string())
            .collect()
    }
}

/// Loads `labels.csv`. With a corpus, ids must belong to it and the result
/// covers every corpus document in corpus order.
pub fn load_labels(path: impl AsRef<Path>, corpus: Option<&VectorCorpus>) -> Result<ExternalLabeling> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    read_labels(BufReader::new(file), corpus)
}

pub fn read_labels<R: Read>(reader: R, corpus: Option<&VectorCorpus>) -> Result<ExternalLabeling> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    match records.next() {
        Some(rec) => {
            let rec = rec?;
            if rec.len() != 2 || &rec[0] != "id" || &rec[1] != "label" {
                return Err(Error::Parse {
                    line: 1,
                    message: "header must be `id,label`".into(),
                });
            }
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file, expected header".into(),
            })
        }
    }

    let mut labeling = ExternalLabeling {
        doc_ids: Vec::new(),
        labels: Vec::new(),
    };
    let mut seen: HashMap<String, usize> = HashMap::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(Error::Arity {
                line,
                expected: 2,
                found: rec.len(),
            });
        }
        let (id, label) = (rec[0].to_string(), rec[1].to_string());
        if let Some(c) = corpus {
            if c.position(&id).is_none() {
                return Err(Error::UnknownId { line, id });
            }
        }
        match seen.get(&id) {
            Some(&k) if labeling.labels[k] == label => continue,
            Some(&k) => {
                return Err(Error::ConflictingLabel {
                    line,
                    id,
                    first: labeling.labels[k].clone(),
                    second: label,
                })
            }
            None => {
                seen.insert(id.clone(), labeling.doc_ids.len());
                labeling.doc_ids.push(id);
                labeling.labels.push(label);
            }
        }
    }

    if let Some(c) = corpus {
        let labels = labeling.aligned_labels(c.doc_ids());
        labeling = ExternalLabeling {
            doc_ids: c.doc_ids().to_vec(),
            labels,
        };
    }
    Ok(labeling)
}

pub fn write_labels(labeling: &ExternalLabeling, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["id", "label"])?;
    for (id, label) in labeling.doc_ids.iter().zip(&labeling.labels) {
        wtr.write_record([id, label])?;
    }
    wtr.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vectors(text: &str) -> Result<VectorCorpus> {
        read_vectors(text.as_bytes())
    }

    #[test]
    fn three_rows_two_dims() {
        let c = vectors("id,v0,v1\na,1,0\nb,0,1\nc,0.5,0.5\n").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.dim(), 2);
        assert_eq!(c.doc_ids(), ["a", "b", "c"]);
        assert_eq!(c.vector(2), [0.5, 0.5]);
    }

    #[test]
    fn duplicate_id_is_named() {
        let err = vectors("id,v0,v1\na,1,0\na,0,1\n").unwrap_err();
        match err {
            Error::DuplicateId { line, id } => {
                assert_eq!(id, "a");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_vector_is_rejected_with_row() {
        let err = vectors("id,v0,v1\na,1,0\nb,0,0\n").unwrap_err();
        assert!(matches!(err, Error::ZeroNorm { line: 3, ref id } if id == "b"), "{err}");
    }

    #[test]
    fn malformed_rows() {
        assert!(matches!(
            vectors("id,v0,v1\na,1\nb,0,1\n").unwrap_err(),
            Error::Arity { line: 2, expected: 3, found: 2 }
        ));
        assert!(matches!(
            vectors("id,v0,v1\na,1,NaN\nb,0,1\n").unwrap_err(),
            Error::NonFinite { line: 2, column: 1, .. }
        ));
        assert!(matches!(
            vectors("id,v0,v1\na,1,x\nb,0,1\n").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        assert!(matches!(vectors("id,x,y\n").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(matches!(vectors("id,v0\na,1\n").unwrap_err(), Error::TooFewDocuments(1)));
    }

    #[test]
    fn token_counts_and_incidence() {
        let text = "{\"id\":\"d1\",\"tokens\":[\"a\",\"a\",\"b\"]}\n{\"id\":\"d2\",\"tokens\":[\"b\"]}\n";
        let s = read_tokens(text.as_bytes(), None).unwrap();
        assert_eq!(s.vocabulary(), ["a", "b"]);
        let counts: Vec<Vec<u64>> = (0..2).map(|d| (0..2).map(|w| s.count(d, w)).collect()).collect();
        assert_eq!(counts, vec![vec![2, 1], vec![0, 1]]);
        let inc: Vec<Vec<bool>> = (0..2).map(|d| (0..2).map(|w| s.incidence(d, w)).collect()).collect();
        assert_eq!(inc, vec![vec![true, true], vec![false, true]]);
    }

    #[test]
    fn empty_document_is_a_zero_row() {
        let text = "{\"id\":\"d1\",\"tokens\":[]}\n{\"id\":\"d2\",\"tokens\":[\"b\"]}\n";
        let s = read_tokens(text.as_bytes(), None).unwrap();
        assert_eq!(s.n_docs(), 2);
        assert!(s.is_empty_doc(0));
        assert_eq!(s.count(1, 0), 1);
    }

    #[test]
    fn token_ids_are_checked_against_corpus() {
        let c = vectors("id,v0\nd1,1\nd2,2\n").unwrap();
        let err = read_tokens("{\"id\":\"zz\",\"tokens\":[\"a\"]}\n".as_bytes(), Some(&c)).unwrap_err();
        assert!(matches!(err, Error::UnknownId { line: 1, ref id } if id == "zz"));

        // rows follow corpus order, missing documents are empty
        let s = read_tokens("{\"id\":\"d2\",\"tokens\":[\"a\"]}\n".as_bytes(), Some(&c)).unwrap();
        assert_eq!(s.doc_ids(), ["d1", "d2"]);
        assert!(s.is_empty_doc(0));
        assert_eq!(s.count(1, 0), 1);
    }

    #[test]
    fn negative_count_is_rejected() {
        let err = read_tokens("{\"id\":\"d\",\"counts\":{\"a\":-1}}\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::NegativeCount { line: 1, ref token } if token == "a"));
    }

    #[test]
    fn labels_default_and_dedup() {
        let c = vectors("id,v0\nd1,1\nd2,2\nd3,3\n").unwrap();
        let l = read_labels("id,label\nd1,News\nd2,Sport\nd1,News\n".as_bytes(), Some(&c)).unwrap();
        assert_eq!(l.doc_ids, ["d1", "d2", "d3"]);
        assert_eq!(l.labels, ["News", "Sport", UNCLASSIFIED]);

        let err = read_labels("id,label\nd1,News\nd1,Sport\n".as_bytes(), Some(&c)).unwrap_err();
        assert!(matches!(err, Error::ConflictingLabel { line: 3, .. }));
    }
}
