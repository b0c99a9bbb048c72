//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use isac_precoder::bfim::ObjectiveConfig;
use isac_precoder::optimizer::OptimizerConfig;
use isac_precoder::sampler::{default_weight_matrix, ScenarioSpec};
use isac_precoder::system::{resource_grid, ChannelParams, SystemConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Rectangular OFDM allocation, subcarriers `0..subcarriers`, symbols `0..symbols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDims {
    pub subcarriers: usize,
    pub symbols: usize,
}

impl Default for GridDims {
    fn default() -> Self {
        Self {
            subcarriers: 128,
            symbols: 14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentKind {
    /// Objective and gradient-norm traces for several per-iteration sample counts.
    Convergence {
        #[serde(default = "default_n_list")]
        n_list: Vec<usize>,
    },
    /// Sensing/communication terms of precoders optimized for each `α`.
    Tradeoff {
        #[serde(default = "default_alpha_list")]
        alpha_list: Vec<f64>,
        #[serde(default = "default_eval_samples")]
        eval_samples: usize,
    },
    /// Analytic vs finite-difference gradients on random instances.
    Gradcheck {
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_fd_step")]
        fd_step: f64,
        /// Added to every analytic gradient entry; a negative control for the
        /// threshold check. Leave at zero.
        #[serde(default)]
        perturbation: f64,
    },
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Convergence { .. } => "convergence",
            Self::Tradeoff { .. } => "tradeoff",
            Self::Gradcheck { .. } => "gradcheck",
        }
    }
}

fn default_n_list() -> Vec<usize> {
    vec![1, 5, 10, 20]
}

fn default_alpha_list() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

fn default_eval_samples() -> usize {
    100
}

fn default_trials() -> usize {
    20
}

fn default_fd_step() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub grid: GridDims,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Trade-off factor for convergence runs; ignored by the α sweep.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_runs")]
    pub monte_carlo_runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub experiment: ExperimentKind,
}

fn default_alpha() -> f64 {
    0.5
}

fn default_runs() -> usize {
    20
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    /// Full-scale defaults for the given experiment.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            system: SystemConfig::default(),
            scenario: ScenarioSpec::default(),
            grid: GridDims::default(),
            optimizer: OptimizerConfig::default(),
            alpha: default_alpha(),
            monte_carlo_runs: default_runs(),
            base_seed: 0,
            output_dir: default_output_dir(),
            experiment,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.scenario.validate()?;
        self.optimizer.validate()?;
        if self.grid.subcarriers == 0 || self.grid.symbols == 0 {
            bail!("grid dimensions must be positive");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            bail!("alpha must lie in [0, 1], got {}", self.alpha);
        }
        match &self.experiment {
            ExperimentKind::Convergence { n_list } => {
                if n_list.is_empty() || n_list.contains(&0) {
                    bail!("n_list must be non-empty with entries >= 1");
                }
            }
            ExperimentKind::Tradeoff {
                alpha_list,
                eval_samples,
            } => {
                if alpha_list.is_empty() || alpha_list.iter().any(|a| !(0.0..=1.0).contains(a)) {
                    bail!("alpha_list must be non-empty with entries in [0, 1]");
                }
                if *eval_samples == 0 {
                    bail!("eval_samples must be at least 1");
                }
            }
            ExperimentKind::Gradcheck {
                fd_step,
                perturbation,
                ..
            } => {
                if !(fd_step.is_finite() && *fd_step > 0.0) {
                    bail!("fd_step must be positive");
                }
                if !perturbation.is_finite() {
                    bail!("perturbation must be finite");
                }
            }
        }
        Ok(())
    }

    /// First 12 hex digits of the SHA-256 of the resolved config, ignoring
    /// `output_dir` so the hash names the run, not where it is written.
    pub fn config_hash(&self) -> String {
        let mut resolved = self.clone();
        resolved.output_dir = PathBuf::new();
        let digest = Sha256::digest(resolved.to_toml().as_bytes());
        hex::encode(digest)[..12].to_string()
    }

    /// Objective configuration for one scenario, with the scenario as prior mean.
    pub fn objective_config(&self, mean: &ChannelParams, alpha: f64) -> Result<ObjectiveConfig> {
        let oc = ObjectiveConfig {
            alpha,
            system: self.system.clone(),
            prior: self.scenario.prior_for(mean)?,
            weights: default_weight_matrix(
                self.scenario.path_count,
                self.system.subcarrier_spacing,
            ),
            grid: resource_grid(self.grid.subcarriers, self.grid.symbols)?,
        };
        oc.validate()?;
        Ok(oc)
    }
}
