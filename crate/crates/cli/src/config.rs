use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Nats,
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. A TOML config file may set any of them;
/// flags given on the command line take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// TOML file with any of these keys.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Builtin state (zero, ones, ghz, maxmixed, haar(seed), mixture(eps, seed), optionally suffixed with n) or a matrix file.
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Gate-set description file; default is the built-in finite set.
    #[arg(long)]
    pub gates: Option<PathBuf>,
    /// all | chain
    #[arg(long)]
    pub connectivity: Option<String>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Directory for `<experiment>-<seed>.<format>` files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_enum)]
    pub units: Option<Units>,
    /// normalized | reduced
    #[arg(long)]
    pub variant: Option<String>,
    /// auto | enumeration | heuristic
    #[arg(long)]
    pub solver: Option<String>,
    /// Comma-separated circuit depths.
    #[arg(long)]
    pub depths: Option<String>,
    /// Comma-separated βE per qubit.
    #[arg(long)]
    pub energies: Option<String>,
    #[arg(long)]
    pub na: Option<usize>,
    #[arg(long)]
    pub nb: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long)]
    pub r0: Option<usize>,
    #[arg(long)]
    pub r1: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub coupling: Option<f64>,
    #[arg(long)]
    pub field: Option<f64>,
    #[arg(long)]
    pub periodic: Option<bool>,
    /// ones | plus
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// continuity | bound
    #[arg(long)]
    pub mode: Option<String>,
    /// haar | near:<scale> | finite
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub instances: Option<usize>,
    /// Also write the loaded state as a matrix file.
    #[arg(long)]
    #[serde(skip)]
    pub save_state: Option<PathBuf>,
}

fn overlay(base: serde_json::Value, top: serde_json::Value) -> serde_json::Value {
    match (base, top) {
        (serde_json::Value::Object(mut b), serde_json::Value::Object(t)) => {
            for (k, v) in t {
                if !v.is_null() {
                    b.insert(k, v);
                }
            }
            serde_json::Value::Object(b)
        }
        (b, _) => b,
    }
}

impl RunConfig {
    /// Merge with the config file, if any; flags win.
    pub fn resolve(self) -> Result<Self> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let file: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let merged = overlay(serde_json::to_value(file)?, serde_json::to_value(&self)?);
        let mut out: RunConfig = serde_json::from_value(merged)?;
        out.config = Some(path);
        Ok(out)
    }

    /// First 12 hex digits of SHA-256 over the settings that affect results.
    pub fn hash(&self, command: &str) -> String {
        let mut view = self.clone();
        view.threads = None;
        view.out = None;
        view.config = None;
        view.save_state = None;
        let text = format!("{command}\n{}", serde_json::to_string(&view).expect("plain data"));
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    pub fn units(&self) -> Units {
        self.units.unwrap_or(Units::Nats)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn eta_or(&self, default: f64) -> f64 {
        self.eta.unwrap_or(default)
    }

    pub fn out_dir(&self) -> Option<&Path> {
        self.out.as_deref()
    }
}

pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| anyhow::anyhow!("bad {what} entry `{s}`")))
        .collect()
}

pub fn require<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    match v {
        Some(x) => Ok(x),
        None => bail!("missing --{name}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "r = 3\neta = 0.5\nseed = 9\n").unwrap();
        let flags = RunConfig { config: Some(path), r: Some(1), ..Default::default() };
        let cfg = flags.resolve().unwrap();
        assert_eq!(cfg.r, Some(1));
        assert_eq!(cfg.eta, Some(0.5));
        assert_eq!(cfg.seed, Some(9));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "rr = 3\n").unwrap();
        assert!(RunConfig { config: Some(path), ..Default::default() }.resolve().is_err());
    }

    #[test]
    fn hash_ignores_threads_and_output() {
        let a = RunConfig { r: Some(2), threads: Some(1), ..Default::default() };
        let b = RunConfig { r: Some(2), threads: Some(8), out: Some("x".into()), ..Default::default() };
        assert_eq!(a.hash("transition"), b.hash("transition"));
        assert_ne!(a.hash("transition"), a.hash("quench"));
        assert_eq!(a.hash("transition").len(), 12);
    }
}
