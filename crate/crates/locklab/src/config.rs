//! Workbench configuration: one TOML file shared by every subcommand.
//! Unknown keys are rejected; every field has a default mirroring the
//! published hyperparameters.

use std::path::Path;

use locklab_core::extract::{DepthMode, ExtractionParams};
use locklab_core::locking::Scheme;
use locklab_core::neuroevo::{EvolutionConfig, FitnessMode};
use locklab_core::transform::Pass;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Schema(String),
    #[error("config: unknown optimizer pass '{0}'")]
    UnknownPass(String),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub extraction: ExtractionSection,
    pub locking: LockingSection,
    pub dataset: DatasetSection,
    pub optimize: OptimizeSection,
    pub model: ModelSection,
    pub evolution: EvolutionSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractionSection {
    pub backward_depth: usize,
    pub forward_depth: usize,
    pub fan_in: usize,
    pub fan_out: usize,
    pub depth_mode: DepthMode,
    pub vector_length: usize,
}

impl Default for ExtractionSection {
    fn default() -> Self {
        ExtractionSection {
            backward_depth: 5,
            forward_depth: 5,
            fan_in: 2,
            fan_out: 3,
            depth_mode: DepthMode::Levels,
            vector_length: 400,
        }
    }
}

impl ExtractionSection {
    pub fn params(&self) -> ExtractionParams {
        ExtractionParams {
            d_b: self.backward_depth,
            d_f: self.forward_depth,
            f_in: self.fan_in,
            f_out: self.fan_out,
            depth_mode: self.depth_mode,
            l_vec: self.vector_length,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LockingSection {
    pub scheme: Scheme,
    pub key_bits: usize,
}

impl Default for LockingSection {
    fn default() -> Self {
        LockingSection {
            scheme: Scheme::Epic,
            key_bits: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    /// GSS: locks per training netlist.
    pub locks_per_netlist: usize,
    /// SRS: relocked copies of the target.
    pub relocks: usize,
    /// SRS: additional key bits per relock.
    pub relock_key_bits: usize,
    /// Holdout fraction for `split`.
    pub holdout_fraction: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            locks_per_netlist: 1000,
            relocks: 1000,
            relock_key_bits: 64,
            holdout_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeSection {
    /// Run the resynthesis stand-in after locking.
    pub enabled: bool,
    /// Pass names, applied in order to fixpoint.
    pub passes: Vec<String>,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        OptimizeSection {
            enabled: true,
            passes: Pass::all().iter().map(|p| p.name().to_string()).collect(),
        }
    }
}

impl OptimizeSection {
    pub fn pass_list(&self) -> Result<Vec<Pass>, ConfigError> {
        self.passes
            .iter()
            .map(|s| {
                s.parse::<Pass>()
                    .map_err(|_| ConfigError::UnknownPass(s.clone()))
            })
            .collect()
    }

    /// `Some(passes)` when enabled, `None` for the pre-resynthesis case.
    pub fn maybe_passes(&self) -> Result<Option<Vec<Pass>>, ConfigError> {
        if self.enabled {
            self.pass_list().map(Some)
        } else {
            Ok(None)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Mlp,
    CnnFixed,
    CnnEvolved,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Mlp => "mlp",
            ModelKind::CnnFixed => "cnn-fixed",
            ModelKind::CnnEvolved => "cnn-evolved",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub kind: ModelKind,
    /// Deployment training epochs.
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            kind: ModelKind::Mlp,
            epochs: 100,
            batch_size: 128,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
        }
    }
}

impl ModelSection {
    pub fn train_config(&self, epochs: usize, seed: u64) -> locklab_core::ann::TrainConfig {
        locklab_core::ann::TrainConfig {
            epochs,
            batch_size: self.batch_size,
            seed,
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSection {
    pub population: usize,
    pub generations: usize,
    pub mutation_prob: f64,
    pub crossover_prob: f64,
    pub tournament: usize,
    pub epochs_per_fitness: usize,
    pub fitness_mode: FitnessMode,
    pub holdout_fraction: f64,
    pub elitism: bool,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        EvolutionSection {
            population: 10,
            generations: 20,
            mutation_prob: 0.1,
            crossover_prob: 0.9,
            tournament: 3,
            epochs_per_fitness: 44,
            fitness_mode: FitnessMode::TrainSet,
            holdout_fraction: 0.1,
            elitism: true,
        }
    }
}

impl EvolutionSection {
    pub fn evolution_config(&self, batch_size: usize, seed: u64) -> EvolutionConfig {
        EvolutionConfig {
            population: self.population,
            generations: self.generations,
            mutation_prob: self.mutation_prob,
            crossover_prob: self.crossover_prob,
            tournament: self.tournament,
            epochs_per_fitness: self.epochs_per_fitness,
            batch_size,
            fitness_mode: self.fitness_mode,
            holdout_fraction: self.holdout_fraction,
            elitism: self.elitism,
            seed,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))?;
        cfg.optimize.pass_list()?;
        cfg.params_checked()?;
        Ok(cfg)
    }

    fn params_checked(&self) -> Result<(), ConfigError> {
        self.extraction
            .params()
            .check()
            .map_err(|e| ConfigError::Schema(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_the_published_parameters() {
        let c = Config::default();
        assert_eq!(c.extraction.params(), ExtractionParams::default());
        assert_eq!(c.locking.key_bits, 64);
        assert_eq!(c.dataset.locks_per_netlist, 1000);
        assert_eq!(c.model.epochs, 100);
        assert_eq!(c.model.batch_size, 128);
        assert_eq!(c.model.learning_rate, 1e-3);
        assert_eq!(c.evolution.population, 10);
        assert_eq!(c.evolution.generations, 20);
        assert_eq!(c.evolution.epochs_per_fitness, 44);
    }

    #[test]
    fn partial_files_fill_in_defaults() {
        let c = Config::parse("[locking]\nkey_bits = 16\n").unwrap();
        assert_eq!(c.locking.key_bits, 16);
        assert_eq!(c.extraction.vector_length, 400);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Config::parse("[locking]\nkey_bitz = 16\n").unwrap_err();
        assert!(matches!(err, ConfigError::Schema(_)), "{err}");
        let err = Config::parse("[surprise]\nx = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Schema(_)), "{err}");
    }

    #[test]
    fn bad_pass_names_are_rejected() {
        let err = Config::parse("[optimize]\npasses = [\"despaghettify\"]\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownPass(p) if p == "despaghettify"));
    }

    #[test]
    fn bad_geometry_is_rejected() {
        let err = Config::parse("[extraction]\nfan_in = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Schema(_)));
    }
}
