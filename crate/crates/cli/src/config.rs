//! Sweep configuration, read from TOML.
//!
//! ```toml
//! [run]
//! spaces = ["euclidean", "h2"]
//! checks = ["axioms", "a_convex"]   # optional; default is every applicable check
//! output = "out"                    # optional; else $BICOMB_OUT, else ./bicomb-out
//! parallelism = 2                   # worker threads, default 1
//! skip_inapplicable = true          # default true
//!
//! [check.axioms]
//! n = 10000
//! tol = 1e-9                        # optional; default depends on the space
//! seed = 7
//!
//! [space.sl2r-model]
//! mesh = 96
//! ```
//!
//! Check tables may carry extra numeric keys (`beta`, `delta`, `grid`, ...)
//! that individual checks read.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "BICOMB_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub check: BTreeMap<String, CheckConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub space: BTreeMap<String, SpaceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spaces: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "one")]
    pub parallelism: usize,
    #[serde(default = "yes")]
    pub skip_inapplicable: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, toml::Value>,
}

impl CheckConfig {
    pub fn num(&self, key: &str) -> Result<Option<f64>> {
        match self.extra.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(v)) => Ok(Some(*v)),
            Some(toml::Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(other) => bail!("`{key}` must be a number, got {other}"),
        }
    }

    pub fn nums(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.extra.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    toml::Value::Float(x) => Ok(*x),
                    toml::Value::Integer(x) => Ok(*x as f64),
                    other => bail!("`{key}` entries must be numbers, got {other}"),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(other) => bail!("`{key}` must be an array of numbers, got {other}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    /// Mesh for the model space distance estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<usize>,
    /// Edge list (`u v [w]` per line) of the tree for the `tree` space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<String>,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).context("config does not match the schema")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        SweepConfig::parse(&text)
    }

    /// Canonical TOML text; hashed into the manifest and embedded in it.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> Result<()> {
        if self.run.spaces.is_empty() {
            bail!("[run] spaces must name at least one space");
        }
        if self.run.parallelism == 0 {
            bail!("[run] parallelism must be at least 1");
        }
        for (name, c) in &self.check {
            if let Some(tol) = c.tol {
                if !(tol > 0.0 && tol.is_finite()) {
                    bail!("[check.{name}] tol must be positive, got {tol}");
                }
            }
            if c.n == Some(0) {
                bail!("[check.{name}] n must be at least 1");
            }
        }
        Ok(())
    }

    /// Output directory: the config's, else `$BICOMB_OUT`, else `bicomb-out`.
    pub fn output_dir(&self, base: &Path) -> PathBuf {
        match &self.run.output {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => base.join(p),
            None => default_out(),
        }
    }
}

pub fn default_out() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("bicomb-out"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = SweepConfig::parse("[run]\nspaces = [\"h2\"]\n").unwrap();
        assert_eq!(c.run.parallelism, 1);
        assert!(c.run.skip_inapplicable);
        assert!(c.run.checks.is_empty());
    }

    #[test]
    fn extra_keys_and_round_trip() {
        let text = "[run]\nspaces = [\"h2\"]\n[check.contraction]\nn = 5\nbeta = 2\ndeltas = [1, 0.1]\n";
        let c = SweepConfig::parse(text).unwrap();
        let check = &c.check["contraction"];
        assert_eq!(check.num("beta").unwrap(), Some(2.0));
        assert_eq!(check.nums("deltas").unwrap(), Some(vec![1.0, 0.1]));
        assert_eq!(SweepConfig::parse(&c.canonical()).unwrap(), c);
    }

    #[test]
    fn bad_configs_are_rejected() {
        assert!(SweepConfig::parse("[run]\nspaces = []\n").is_err());
        assert!(SweepConfig::parse("[run]\nspaces = [\"h2\"]\nbogus = 1\n").is_err());
        assert!(SweepConfig::parse("[run]\nspaces = [\"h2\"]\n[check.axioms]\ntol = -1.0\n").is_err());
        assert!(SweepConfig::parse("not toml [").is_err());
    }
}
