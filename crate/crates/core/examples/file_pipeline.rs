//! End to end through files, as the `mstab` binary does it.
//!
//! Writes a synthetic `vectors.csv`, `tokens.jsonl` and `labels.csv`, then
//! runs `graph`, `scan`, `select` and `eval` into an output directory.
//!
//! ```text
//! cargo run --release --example file_pipeline [out_dir]
//! ```

use std::path::{Path, PathBuf};

use markov_stability::cli::main_with_args;
use markov_stability::corpus::{write_labels, write_tokens, write_vectors};
use markov_stability::synthetic::topic_corpus;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run(dir: &Path, n_points: usize, n_repeats: usize) -> markov_stability::Result<i32> {
    std::fs::create_dir_all(dir).map_err(|e| markov_stability::Error::Io { path: dir.into(), source: e })?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let c = topic_corpus(90, 10, 3, 0.5, &mut rng);
    let (vectors, tokens, labels) = (dir.join("vectors.csv"), dir.join("tokens.jsonl"), dir.join("labels.csv"));
    write_vectors(&c.vectors, &vectors)?;
    write_tokens(&c.tokens, &tokens)?;
    write_labels(&c.labels, &labels)?;

    let out = dir.join("out");
    let (np, nr) = (n_points.to_string(), n_repeats.to_string());
    let p = |p: &PathBuf| p.to_string_lossy().into_owned();
    let args = [
        "mstab", "run", "--vectors", &p(&vectors), "--tokens", &p(&tokens), "--labels", &p(&labels),
        "--k", "5", "--t-min", "0.01", "--t-max", "100", "--n-points", &np, "--n-repeats", &nr,
        "--out-dir", &p(&out),
    ];
    let code = main_with_args(args);
    println!("exit code {code}; artifacts in {}", out.display());
    Ok(code)
}

#[allow(dead_code)]
fn main() -> markov_stability::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("mstab_example"));
    run(&dir, 40, 50).map(|_| ())
}
