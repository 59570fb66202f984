use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

/// Every input that affects results. Serialized next to the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub vectors: Option<PathBuf>,
    pub tokens: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub k: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
    pub n_repeats: usize,
    pub master_seed: u64,
    /// Plateau VI threshold as a fraction of `ln N`.
    pub vi_threshold: f64,
    pub max_scales: usize,
    pub top_words: usize,
    pub out_dir: PathBuf,
    /// Re-score best partitions across Markov times after the sweep.
    pub postprocess: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            vectors: None,
            tokens: None,
            labels: None,
            k: 13,
            t_min: 1e-2,
            t_max: 1e2,
            n_points: 100,
            n_repeats: 500,
            master_seed: 0,
            vi_threshold: 0.1,
            max_scales: 4,
            top_words: crate::eval::DEFAULT_TOP_WORDS,
            out_dir: PathBuf::from("out"),
            postprocess: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.t_min > 0.0 && self.t_min.is_finite()) {
            return bad(format!("t_min must be positive, got {}", self.t_min));
        }
        if !(self.t_max.is_finite() && (self.t_max > self.t_min || self.n_points == 1)) {
            return bad(format!("t_max must exceed t_min, got {}", self.t_max));
        }
        if self.n_points == 0 {
            return bad("n_points must be at least 1".into());
        }
        if self.n_repeats < 2 {
            return bad(format!("n_repeats must be at least 2, got {}", self.n_repeats));
        }
        if !(self.vi_threshold >= 0.0 && self.vi_threshold.is_finite()) {
            return bad(format!("vi_threshold must be nonnegative, got {}", self.vi_threshold));
        }
        if self.max_scales == 0 || self.top_words == 0 {
            return bad("max_scales and top_words must be at least 1".into());
        }
        Ok(())
    }
}

/// Flags mirroring [`RunConfig`]; unset flags fall back to `--config`, then
/// to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Serialized RunConfig to start from
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[arg(long)]
    pub tokens: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Nearest neighbours per node in the MST-kNN graph
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: Option<u64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub n_points: Option<usize>,
    /// Louvain runs per Markov time
    #[arg(long)]
    pub n_repeats: Option<usize>,
    #[arg(long)]
    pub master_seed: Option<u64>,
    #[arg(long)]
    pub vi_threshold: Option<f64>,
    #[arg(long)]
    pub max_scales: Option<usize>,
    #[arg(long)]
    pub top_words: Option<usize>,
    #[arg(long, short)]
    pub out_dir: Option<PathBuf>,
    /// Keep each time's own best partition instead of re-scoring across times
    #[arg(long)]
    pub no_postprocess: bool,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone().into();
                }
            )*};
        }
        take!(vectors, tokens, labels, t_min, t_max, n_points, n_repeats, master_seed, vi_threshold, max_scales, top_words, out_dir);
        if let Some(k) = self.k {
            c.k = k as usize;
        }
        if self.no_postprocess {
            c.postprocess = false;
        }
        c.validate()?;
        Ok(c)
    }
}
