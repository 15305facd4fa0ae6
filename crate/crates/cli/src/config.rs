use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

/// Flags shared by every subcommand. A TOML file passed with `--config`
/// uses the same keys; flags given on the command line win.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Domain bit-length (toy scheme input length, permutation size, PIR database size).
    #[arg(long)]
    pub n: Option<u32>,
    /// Rounds or depth.
    #[arg(long, visible_alias = "rounds")]
    #[serde(alias = "rounds")]
    pub d: Option<u32>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Sender communication in bits.
    #[arg(long)]
    pub c: Option<u32>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated depth list for invert-tradeoff.
    #[arg(long, value_delimiter = ',')]
    pub depths: Option<Vec<u32>>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// hiding-estimate: `toy` or `pir`.
    #[arg(long)]
    pub scheme: Option<String>,
    /// reconstruct: comma-separated adversary names.
    #[arg(long, value_delimiter = ',')]
    pub adversaries: Option<Vec<String>>,
    /// JSON output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV output path for sweep curves.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Recorded only.
    #[arg(long)]
    #[serde(alias = "hardness-s")]
    pub hardness_s: Option<f64>,
    /// Recorded only.
    #[arg(long)]
    #[serde(alias = "expansion-ell")]
    pub expansion_ell: Option<f64>,
}

macro_rules! overlay {
    ($a:ident, $b:ident, $($f:ident),*) => {
        Params { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Params {
    pub fn load(path: &Path) -> Result<Params, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))
    }

    /// Fields of `self` override `base`.
    pub fn over(self, base: Params) -> Params {
        let (a, b) = (self, base);
        overlay!(a, b, n, d, k, eps, c, trials, seed, depths, threads, scheme, adversaries, out, csv, hardness_s, expansion_ell)
    }
}

/// The resolved configuration embedded in every output.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<u32>,
    pub trials: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depths: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adversaries: Option<Vec<String>>,
    pub hardness_s: Option<f64>,
    pub expansion_ell: Option<f64>,
}
