use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{Method, TheoremTag};
use crate::error::{Error, Result};
use crate::problems::Params;

/// Experiment description, read from a TOML file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Prefix of every output file; defaults to the config file stem.
    #[serde(default)]
    pub id: Option<String>,
    pub problem: ProblemSection,
    pub algorithm: AlgorithmSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: String,
    #[serde(default)]
    pub params: Params,
}

/// Algorithm and schedule. Any schedule field set here overrides the theorem value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    pub theorem: TheoremTag,
    /// Required for manual schedules; otherwise implied by the theorem.
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub iterations: Option<u64>,
    #[serde(default)]
    pub batch: Option<usize>,
    /// Apply one mini-batch post-processing step after the run.
    #[serde(default)]
    pub postprocess: bool,
    #[serde(default)]
    pub post_batch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartPolicy {
    /// `"default"` (the problem's documented start) or `"uniform"` (uniform in X per seed).
    Named(String),
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub base_seed: u64,
    /// Number of seeds `0..seeds`; ignored when `seed_list` is given.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub seed_list: Option<Vec<u64>>,
    #[serde(default = "default_start")]
    pub x0: StartPolicy,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    /// Compute the envelope-based Lyapunov value at checkpoints.
    #[serde(default = "yes")]
    pub lyapunov: bool,
    #[serde(default = "default_inner_tol")]
    pub inner_tol: f64,
    #[serde(default)]
    pub skip_diagnostics: bool,
}

fn default_seeds() -> usize {
    20
}
fn default_start() -> StartPolicy {
    StartPolicy::Named("default".into())
}
fn default_checkpoints() -> usize {
    100
}
fn yes() -> bool {
    true
}
fn default_inner_tol() -> f64 {
    crate::envelope::DEFAULT_INNER_TOL
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            base_seed: 0,
            seeds: default_seeds(),
            seed_list: None,
            x0: default_start(),
            checkpoints: default_checkpoints(),
            lyapunov: true,
            inner_tol: default_inner_tol(),
            skip_diagnostics: false,
        }
    }
}

impl RunSection {
    pub fn seed_values(&self) -> Vec<u64> {
        match &self.seed_list {
            Some(v) => v.clone(),
            None => (0..self.seeds as u64).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub epsilons: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; the id defaults to the file stem.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Configuration(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if cfg.id.is_none() {
            cfg.id = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    pub fn run_id(&self) -> String {
        self.id.clone().unwrap_or_else(|| "run".into())
    }

    pub fn method(&self) -> Result<Method> {
        match (self.algorithm.theorem.method(), self.algorithm.method) {
            (Some(m), None) => Ok(m),
            (Some(m), Some(n)) if m == n => Ok(m),
            (Some(m), Some(n)) => Err(Error::Configuration(format!(
                "method {n:?} contradicts theorem {:?} (which governs {m:?})",
                self.algorithm.theorem
            ))),
            (None, Some(n)) => Ok(n),
            (None, None) => Err(Error::Configuration("manual schedules need algorithm.method".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.method()?;
        let a = &self.algorithm;
        if a.theorem == TheoremTag::Manual {
            if a.eta.is_none() || a.iterations.is_none() {
                return Err(Error::Configuration("manual schedules need algorithm.eta and algorithm.iterations".into()));
            }
        } else if a.epsilon.is_none() && self.sweep.is_none() {
            return Err(Error::Configuration("algorithm.epsilon is required".into()));
        }
        if let Some(e) = a.epsilon {
            if !(e > 0.0) {
                return Err(Error::Configuration(format!("algorithm.epsilon must be positive, got {e}")));
            }
        }
        if self.run.seed_values().is_empty() {
            return Err(Error::Configuration("at least one seed is required".into()));
        }
        if let StartPolicy::Named(n) = &self.run.x0 {
            if n != "default" && n != "uniform" {
                return Err(Error::Configuration(format!("run.x0 must be 'default', 'uniform' or a point, got '{n}'")));
            }
        }
        if !(self.run.inner_tol > 0.0) {
            return Err(Error::Configuration("run.inner_tol must be positive".into()));
        }
        if let Some(id) = &self.id {
            if id.is_empty() || id.contains(['/', '\\']) {
                return Err(Error::Configuration(format!("id '{id}' is not a valid file prefix")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [problem]
        name = "cosine"
        params = { delta = 1.5, sigma = 0.1 }

        [algorithm]
        theorem = "psgd_strongly_convex"
        epsilon = 0.05
    "#;

    #[test]
    fn parses_minimal() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.method().unwrap(), Method::Psgd);
        assert_eq!(c.run.seed_values().len(), 20);
        assert_eq!(c.run.checkpoints, 100);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = MINIMAL.replace("epsilon = 0.05", "epsilon = 0.05\nstep = 3");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Configuration(_))));
        let text = format!("{MINIMAL}\n[run]\nseedz = 3\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn manual_needs_fields() {
        let text = MINIMAL.replace("psgd_strongly_convex", "manual");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = text.replace("epsilon = 0.05", "method = \"psgd\"\neta = 0.1\niterations = 10");
        assert!(ExperimentConfig::from_toml(&text).is_ok());
    }

    #[test]
    fn start_policies() {
        let text = format!("{MINIMAL}\n[run]\nx0 = [2.0]\n");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(c.run.x0, StartPolicy::Fixed(vec![2.0]));
        let text = format!("{MINIMAL}\n[run]\nx0 = \"middle\"\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }
}
