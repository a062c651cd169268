use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datasets::NoiseKind;
use crate::error::{Error, Result};
use crate::neuralnet::{DecoderKind, LayerSpec, LossKind, Regularizer, TrainConfig};

/// Environment variable naming the default dataset root.
pub const DATA_DIR_ENV: &str = "MINSYN_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    /// A directory written by `dataset-build`.
    Words,
    /// A directory holding MNIST IDX files.
    Mnist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    /// Defaults to the directory in `MINSYN_DATA_DIR`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_limit: Option<usize>,
}

impl DatasetConfig {
    pub fn resolve_path(&self) -> Result<PathBuf> {
        match &self.path {
            Some(p) => Ok(p.clone()),
            None => std::env::var_os(DATA_DIR_ENV)
                .map(PathBuf::from)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "dataset.path is not set and {DATA_DIR_ENV} is undefined"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Dense encoder; the last layer is the latent code.
    Autoencoder {
        encoder: Vec<LayerSpec>,
        decoder_kind: DecoderKind,
    },
    Pca {
        components: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    #[serde(default)]
    pub regularizer: Regularizer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<f64>,
    /// Rebuild MinSyn statistics with the final encoder after training.
    #[serde(default)]
    pub refresh_stats: bool,
}

fn default_noise() -> Vec<NoiseKind> {
    vec![NoiseKind::None]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    pub loss: LossKind,
    #[serde(default = "default_noise")]
    pub noise: Vec<NoiseKind>,
    #[serde(default)]
    pub noise_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Method name used in reports.
    pub name: String,
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training: Option<TrainingConfig>,
    pub evaluation: EvaluationConfig,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("config does not match the schema: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("name must not be empty".into()));
        }
        if self.evaluation.noise.is_empty() {
            return Err(Error::Config(
                "evaluation.noise must list at least one kind".into(),
            ));
        }
        match &self.model {
            ModelConfig::Pca { components } => {
                if *components == 0 {
                    return Err(Error::Config("pca needs at least one component".into()));
                }
                if self.training.is_some() {
                    return Err(Error::Config("pca takes no training section".into()));
                }
                Ok(())
            }
            ModelConfig::Autoencoder { .. } => {
                self.train_config()?.validate()?;
                Ok(())
            }
        }
    }

    /// Training settings for an autoencoder model.
    pub fn train_config(&self) -> Result<TrainConfig> {
        let ModelConfig::Autoencoder {
            encoder,
            decoder_kind,
        } = &self.model
        else {
            return Err(Error::Config("only autoencoders are trained".into()));
        };
        let t = self
            .training
            .as_ref()
            .ok_or_else(|| Error::Config("autoencoder models need a training section".into()))?;
        let cfg = TrainConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            seed: t.seed,
            lr: t.lr,
            decoder_kind: *decoder_kind,
            regularizer: t.regularizer,
            encoder: encoder.clone(),
            momentum: t
                .momentum
                .unwrap_or(crate::minsyn_decoder::DEFAULT_MOMENTUM),
            refresh_stats: t.refresh_stats,
        };
        if *decoder_kind == DecoderKind::MinsynBinary
            && encoder.last().map(|l| l.activation) != Some(crate::neuralnet::Activation::Sigmoid)
        {
            return Err(Error::Config(
                "minsyn_binary needs a sigmoid latent layer".into(),
            ));
        }
        Ok(cfg)
    }
}
