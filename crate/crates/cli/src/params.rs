use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use serde::{Deserialize, Serialize};

/// Every tunable of every command. Each key may come from a flag or from the
/// `--config` file (same names, with `-` or `_`); flags win.
///
/// Defaults are listed per key; where a default depends on the command it is
/// given per command.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// System: cat, cat_x_id or sphere_quotient [default: cat]
    #[arg(long)]
    pub system: Option<String>,
    /// Override of the 2x2 hyperbolic block, row-major, e.g. 3,2,1,1
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub matrix: Option<Vec<i64>>,
    /// Seed for every random choice [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Orbit length N [default: lyapunov 10000; oseledets 200; birkhoff,
    /// ergodic-test, components, spectral 100000; manifold pushes 4;
    /// holonomy samples 200; ehc 10; rate 60]
    #[arg(long)]
    pub steps: Option<u64>,
    /// Ensemble size E [default: ergodic-test 100; components, spectral 200; recurrence 1000]
    #[arg(long)]
    pub ensemble: Option<usize>,
    /// Verdict tolerance τ [default: 0.05]
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Output file; run records are appended as JSON lines [default: runs.jsonl;
    /// export writes to stdout when unset]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: all cores]
    #[arg(long)]
    pub threads: Option<usize>,

    /// Base point x [default: a seeded random point]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Option<Vec<f64>>,
    /// QR renormalisation cadence [default: 1]
    #[arg(long)]
    pub renorm: Option<u64>,
    /// Tempering rate ε [default: 0.1]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comparison window N for Pesin constants [default: 100]
    #[arg(long)]
    pub window: Option<u64>,
    /// Pesin block bound L [default: 10]
    #[arg(long)]
    pub bound: Option<f64>,
    /// Tempering steps T; 0 skips the tempering report [default: 0]
    #[arg(long)]
    pub tempering: Option<u64>,
    /// Bundle E for `dominated`: stable, unstable, centre or a vector [default: stable]
    #[arg(long, allow_hyphen_values = true)]
    pub bundle_e: Option<String>,
    /// Bundle F for `dominated` [default: unstable]
    #[arg(long, allow_hyphen_values = true)]
    pub bundle_f: Option<String>,

    /// Observable frequency k [default: 1,0 (or 1,0,0 on T³)]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub freq: Option<Vec<i64>>,
    /// Observable kind: cosine or sine [default: cosine]
    #[arg(long)]
    pub kind: Option<String>,
    /// Birkhoff direction: forward or backward [default: forward]
    #[arg(long)]
    pub direction: Option<String>,
    /// Observable family: default (cos/sin pairs) or cosine [default: cosine]
    #[arg(long)]
    pub family: Option<String>,
    /// Single-linkage radius ρ [default: 0.1]
    #[arg(long)]
    pub linking_radius: Option<f64>,
    /// Ball radius for recurrence [default: 0.05]
    #[arg(long)]
    pub radius: Option<f64>,
    /// Ball centre for recurrence [default: 0.3,0.3]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub center: Option<Vec<f64>>,
    /// Time horizon [default: recurrence 10000; nw-probe 50]
    #[arg(long)]
    pub horizon: Option<u64>,

    /// Fubini partition: vertical or unstable [default: vertical]
    #[arg(long)]
    pub partition: Option<String>,
    /// Unstable-segment box corner [default: 0,0]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub segment_corner: Option<Vec<f64>>,
    /// Unstable-segment box side [default: 0.5]
    #[arg(long)]
    pub segment_size: Option<f64>,
    /// Unstable-segment arclength [default: 0.1]
    #[arg(long)]
    pub segment_length: Option<f64>,
    /// Rectangle test set lower corner [default: 0,0]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub test_lo: Option<Vec<f64>>,
    /// Rectangle test set upper corner [default: 0.5,0.5]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub test_hi: Option<Vec<f64>>,
    /// Disc test set radius; replaces the rectangle when set, centred at --center
    #[arg(long)]
    pub test_radius: Option<f64>,
    /// Monte Carlo samples [default: fubini 1000000]
    #[arg(long)]
    pub samples: Option<u64>,

    /// Leaf: + (unstable) or - (stable) [default: +]
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<String>,
    /// Local half-width δ [default: 0.1]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Global window lower corner; with --window-hi switches `manifold` to global mode
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window_lo: Option<Vec<f64>>,
    /// Global window upper corner
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window_hi: Option<Vec<f64>>,
    /// Second point y for rate membership; switches `manifold` to rate mode
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Option<Vec<f64>>,

    /// Source transversal base [default: 0.3,0.2]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub from_base: Option<Vec<f64>>,
    /// Source transversal direction [default: the stable direction]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub from_dir: Option<Vec<f64>>,
    /// Target transversal base [default: 0.35,0.23090169943749475]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub to_base: Option<Vec<f64>>,
    /// Target transversal direction [default: the stable direction]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub to_dir: Option<Vec<f64>>,
    /// Transversal half-length [default: 0.05]
    #[arg(long)]
    pub half_length: Option<f64>,
    /// Density bound K [default: 10]
    #[arg(long)]
    pub density_bound: Option<f64>,

    /// Period n [default: 1]
    #[arg(long)]
    pub period: Option<u64>,
    /// Largest anchor period P [default: 1]
    #[arg(long)]
    pub max_period: Option<u64>,
    /// Periodic point p [default: 0,0]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Option<Vec<f64>>,
    /// Periodic point q [default: p]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<f64>>,
    /// Explicit integer translate; without it the minimal witness is searched
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub translate: Option<Vec<i64>>,
    /// Translate window |k| ≤ W [default: homoclinic 20; ehc, spectral 2]
    #[arg(long)]
    pub translate_window: Option<i64>,
    /// Grid cells per side [default: 32]
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Sub-samples per cell side [default: 16]
    #[arg(long)]
    pub samples_per_side: Option<usize>,

    /// Record file read by `export` [default: runs.jsonl]
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Export format: csv or json-lines [default: csv]
    #[arg(long)]
    pub format: Option<String>,
    /// Records to export: a command name, or `name#k` for its k-th record
    #[arg(long)]
    pub select: Option<String>,
}

impl Params {
    /// `self` over `file`, key by key.
    pub fn over(&self, file: &Params) -> anyhow::Result<Params> {
        let mut merged = serde_json::to_value(file)?;
        let top = serde_json::to_value(self)?;
        let (Some(m), Some(t)) = (merged.as_object_mut(), top.as_object()) else {
            unreachable!("params serialise to objects")
        };
        for (k, v) in t {
            if !v.is_null() {
                m.insert(k.clone(), v.clone());
            }
        }
        Ok(serde_json::from_value(merged)?)
    }

    /// Non-empty keys only, in a fixed order.
    pub fn snapshot(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("params serialise");
        if let Some(m) = v.as_object_mut() {
            m.retain(|_, x| !x.is_null());
        }
        v
    }
}

/// Reads a TOML config file; unknown keys are an error.
pub fn load_config(path: &Path) -> anyhow::Result<Params> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let table: toml::Table = text.parse().with_context(|| format!("parsing config {}", path.display()))?;
    // accept snake_case spellings of the flag names too
    let mut normalised = toml::Table::new();
    for (k, v) in table {
        let key = k.replace('_', "-");
        if key == "config" {
            bail!("config files cannot include other config files");
        }
        if normalised.insert(key.clone(), v).is_some() {
            bail!("key '{key}' given twice in {}", path.display());
        }
    }
    toml::Value::Table(normalised)
        .try_into()
        .with_context(|| format!("invalid key or value in config {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = Params { seed: Some(3), steps: Some(10), ..Default::default() };
        let flags = Params { steps: Some(20), ..Default::default() };
        let m = flags.over(&file).unwrap();
        assert_eq!(m.seed, Some(3));
        assert_eq!(m.steps, Some(20));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 4\nmax_period = 2\n").unwrap();
        let p = load_config(&path).unwrap();
        assert_eq!((p.seed, p.max_period), (Some(4), Some(2)));
        std::fs::write(&path, "seed = 4\nbogus = 1\n").unwrap();
        assert!(load_config(&path).is_err());
    }
}
