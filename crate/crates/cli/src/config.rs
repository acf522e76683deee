//! Config file plus flag overrides.

use std::path::{Path, PathBuf};

use inclusive_irl::experiments::ExperimentConfig;
use inclusive_irl::{EnvSpec, MethodId};
use serde::{Deserialize, Serialize};

/// Contents of a `--config` TOML file. Unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliConfig {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub experiment: ExperimentConfig,
}

/// Flag values that replace whatever the file says.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub env: Option<String>,
    pub methods: Option<String>,
    pub beta_grid: Option<String>,
    pub n_demos: Option<usize>,
    pub seeds: Option<String>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), String> {
        let exp = &mut self.experiment;
        if let Some(name) = &o.env {
            if exp.env.name() != name {
                exp.env = EnvSpec::by_name(name).map_err(|e| e.to_string())?;
            }
        }
        if let Some(list) = &o.methods {
            exp.methods = parse_methods(list)?;
        }
        if let Some(list) = &o.beta_grid {
            exp.beta_grid = parse_list(list, "beta")?;
        }
        if let Some(n) = o.n_demos {
            exp.n_demos = n;
        }
        if let Some(s) = &o.seeds {
            exp.seeds = parse_seeds(s)?;
        }
        if o.out.is_some() {
            self.out.clone_from(&o.out);
        }
        if o.jobs.is_some() {
            self.jobs = o.jobs;
        }
        Ok(())
    }
}

pub fn parse_methods(list: &str) -> Result<Vec<MethodId>, String> {
    list.split(',')
        .map(|m| m.trim().parse::<MethodId>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_list(list: &str, what: &str) -> Result<Vec<f64>, String> {
    list.split(',')
        .map(|b| b.trim().parse::<f64>().map_err(|e| format!("bad {what} `{b}`: {e}")))
        .collect()
}

/// `a..b` (inclusive) or a comma list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad seed `{t}`: {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(format!("empty seed range `{s}`"));
        }
        Ok((a..=b).collect())
    } else {
        s.split(',').map(num).collect()
    }
}
