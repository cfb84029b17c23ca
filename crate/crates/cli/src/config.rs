//! Resolved run configuration: the echo block every JSON artifact carries,
//! and the flat key=value config-file loader that can reproduce a run.

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Every computational parameter of a run, resolved. Serialized as the
/// `config` echo of each JSON artifact; a run fed the same echo through
/// `--config` reproduces its outputs byte for byte.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_opt: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<u64>,
}

impl RunConfig {
    /// Loads a flat key=value file. Unknown keys and malformed values are
    /// validation errors.
    pub fn from_flat_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {} is not key=value: {raw:?}", lineno + 1);
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let mut cfg = RunConfig::default();
        for (key, value) in map {
            cfg.set(&key, &value)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        macro_rules! num {
            () => {
                Some(value.parse().map_err(|e| {
                    anyhow::anyhow!("config key {key}: bad value {value:?} ({e})")
                })?)
            };
        }
        match key {
            "command" => self.command = value.to_string(),
            "kind" => self.kind = Some(value.to_string()),
            "family" => self.family = Some(value.to_string()),
            "direction" => self.direction = Some(value.to_string()),
            "alpha" => self.alpha = num!(),
            "alphas" => self.alphas = Some(value.to_string()),
            "r" => self.r = num!(),
            "c" => self.c = num!(),
            "c_opt" => self.c_opt = Some(value.to_string()),
            "coeffs" => self.coeffs = Some(value.to_string()),
            "theta" => self.theta = num!(),
            "tol" => self.tol = num!(),
            "seed" => self.seed = num!(),
            "t" => self.t = num!(),
            "t_min" => self.t_min = num!(),
            "t_max" => self.t_max = num!(),
            "k" => self.k = num!(),
            "degree" => self.degree = num!(),
            "restarts" => self.restarts = num!(),
            "limit" => self.limit = num!(),
            "bound" => self.bound = num!(),
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Renders the flat key=value form that [`Self::from_flat_file`] reads.
    #[cfg(test)]
    pub fn to_flat(&self) -> String {
        let mut out = format!("command={}\n", self.command);
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push_str(&format!("{k}={v}\n"));
            }
        };
        push("kind", self.kind.clone());
        push("family", self.family.clone());
        push("direction", self.direction.clone());
        push("alpha", self.alpha.map(|v| format!("{v:e}")));
        push("alphas", self.alphas.clone());
        push("r", self.r.map(|v| v.to_string()));
        push("c", self.c.map(|v| format!("{v:e}")));
        push("c_opt", self.c_opt.clone());
        push("coeffs", self.coeffs.clone());
        push("theta", self.theta.map(|v| format!("{v:e}")));
        push("tol", self.tol.map(|v| format!("{v:e}")));
        push("seed", self.seed.map(|v| v.to_string()));
        push("t", self.t.map(|v| format!("{v:e}")));
        push("t_min", self.t_min.map(|v| format!("{v:e}")));
        push("t_max", self.t_max.map(|v| format!("{v:e}")));
        push("k", self.k.map(|v| v.to_string()));
        push("degree", self.degree.map(|v| v.to_string()));
        push("restarts", self.restarts.map(|v| v.to_string()));
        push("limit", self.limit.map(|v| v.to_string()));
        push("bound", self.bound.map(|v| v.to_string()));
        out
    }
}
