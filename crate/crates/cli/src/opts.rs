//! Flag surface and the key=value config file.
//!
//! Every subcommand shares the common option block; unset flags fall back to
//! the config file (when given), then to defaults, so flags always override
//! the file.

use clap::{Args, Parser, Subcommand};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "lpcoresets",
    about = "Row-sampling coresets for multiple-response lp regression and friends",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build a strong coreset for min_X ||AX - B||_{p,p}
    StrongCoreset(StrongArgs),
    /// Build a B-oblivious weak coreset from Lewis weights of A
    WeakCoreset(WeakArgs),
    /// Euclidean power means by uniform sampling (single run or sweep)
    PowerMeans(PowerMeansArgs),
    /// Spanning coreset for rank-k lp subspace approximation
    Subspace(SubspaceArgs),
    /// Verify a stored coreset against the strong or weak guarantee
    Verify(VerifyArgs),
    /// Generate lower-bound stress instances
    LbGen(LbGenArgs),
    /// Seeded wall-clock timings of the core kernels
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Norm order p >= 1
    #[arg(long)]
    pub p: Option<f64>,
    /// Accuracy parameter in (0,1)
    #[arg(long)]
    pub eps: Option<f64>,
    /// Failure probability in (0,1)
    #[arg(long)]
    pub delta: Option<f64>,
    /// RNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Input matrix (A, or the point set)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Target matrix B
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Embedding matrix G (t x m)
    #[arg(long)]
    pub embedding: Option<PathBuf>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Matrix output format
    #[arg(long, value_parser = ["csv", "bin"])]
    pub format: Option<String>,
    /// Strong/weak coreset oversampling constant
    #[arg(long = "c-alpha")]
    pub c_alpha: Option<f64>,
    /// Residual-term constant of the strong coreset
    #[arg(long = "c-beta")]
    pub c_beta: Option<f64>,
    /// Power-means instance-count constant
    #[arg(long = "c-l")]
    pub c_l: Option<f64>,
    /// Power-means sample-budget constant
    #[arg(long = "c-s")]
    pub c_s: Option<f64>,
    /// Embedding row-count constant
    #[arg(long = "n-embed-const")]
    pub n_embed_const: Option<f64>,
    /// key=value file supplying defaults for any of the flags above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct StrongArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct WeakArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct PowerMeansArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated sample sizes; presence switches to sweep mode
    #[arg(long, value_delimiter = ',')]
    pub sweep: Vec<usize>,
    /// Feature counts for the sweep (random column subsets)
    #[arg(long = "m-list", value_delimiter = ',')]
    pub m_list: Vec<usize>,
    /// Seeds per sweep cell (seed, seed+1, ...)
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Rows of the synthetic surrogate when --input is omitted
    #[arg(long = "surrogate-n")]
    pub surrogate_n: Option<usize>,
    /// Columns of the synthetic surrogate when --input is omitted
    #[arg(long = "surrogate-dim")]
    pub surrogate_dim: Option<usize>,
    /// Use the full multi-instance pipeline inside the sweep
    #[arg(long)]
    pub pipeline: bool,
}

#[derive(Args)]
pub struct SubspaceArgs {
    #[command(flatten)]
    pub common: Common,
    /// Target rank
    #[arg(long)]
    pub k: usize,
    /// Solve the sampled problem through the Gaussian embedding
    #[arg(long)]
    pub embed_mode: bool,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Stored coreset table (row_index,scale CSV)
    #[arg(long)]
    pub coreset: PathBuf,
    /// Guarantee to check
    #[arg(long, value_parser = ["strong", "weak"], default_value = "strong")]
    pub mode: String,
    /// Probe count for the strong check
    #[arg(long, default_value_t = 200)]
    pub probes: usize,
}

#[derive(Args)]
pub struct LbGenArgs {
    #[command(flatten)]
    pub common: Common,
    /// Instance family
    #[arg(long, value_parser = ["strong", "spanning"])]
    pub kind: String,
    /// Sign-vector dimension (strong kind)
    #[arg(long)]
    pub d: Option<usize>,
    /// Override the group multiplicity (weak-coreset variant)
    #[arg(long)]
    pub multiplicity: Option<f64>,
    /// Block size n (spanning kind)
    #[arg(long)]
    pub n: Option<usize>,
    /// Block count k (spanning kind)
    #[arg(long)]
    pub k: Option<usize>,
    /// First-column magnitude R >= 2 (spanning kind)
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Kernel to time
    #[arg(long, value_parser = ["lewis", "solve", "strong", "verify", "power-means"])]
    pub task: String,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub d: usize,
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
}

/// Concrete values after merging flags, config file, and defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub p: f64,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub embedding: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: lp_coresets::io::MatrixFormat,
    pub c_alpha: f64,
    pub c_beta: f64,
    pub c_l: f64,
    pub c_s: f64,
    pub n_embed_const: f64,
}

pub fn parse_config_file(path: &Path) -> Result<HashMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn pick<T: std::str::FromStr>(
    flag: Option<T>,
    file: &HashMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, String> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|_| format!("config key {key}: cannot parse {raw:?}")),
        None => Ok(default),
    }
}

impl Common {
    pub fn resolve(&self) -> Result<Resolved, String> {
        let file = match &self.config {
            Some(p) => parse_config_file(p)?,
            None => HashMap::new(),
        };
        let path_of = |flag: &Option<PathBuf>, key: &str| -> Option<PathBuf> {
            flag.clone().or_else(|| file.get(key).map(PathBuf::from))
        };
        let format_str = pick(self.format.clone(), &file, "format", "csv".to_string())?;
        let format = format_str
            .parse::<lp_coresets::io::MatrixFormat>()
            .map_err(|e| e.to_string())?;
        Ok(Resolved {
            p: pick(self.p, &file, "p", 2.0)?,
            eps: pick(self.eps, &file, "eps", 0.25)?,
            delta: pick(self.delta, &file, "delta", 0.1)?,
            seed: pick(self.seed, &file, "seed", 0)?,
            input: path_of(&self.input, "input"),
            target: path_of(&self.target, "target"),
            embedding: path_of(&self.embedding, "embedding"),
            output: path_of(&self.output, "output"),
            format,
            c_alpha: pick(self.c_alpha, &file, "c-alpha", 1.0)?,
            c_beta: pick(self.c_beta, &file, "c-beta", 1.0)?,
            c_l: pick(self.c_l, &file, "c-l", 3.0)?,
            c_s: pick(self.c_s, &file, "c-s", 4.0)?,
            n_embed_const: pick(self.n_embed_const, &file, "n-embed-const", 50.0)?,
        })
    }
}
