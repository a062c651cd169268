//! Binary checkpoint files.
//!
//! Layout, all integers little-endian:
//!
//! | offset   | size | content                                  |
//! |----------|------|------------------------------------------|
//! | 0        | 8    | magic `MINSYNCK`                         |
//! | 8        | 4    | format version (u32)                     |
//! | 12       | 8    | header length `H` in bytes (u64)         |
//! | 20       | H    | UTF-8 JSON header                        |
//! | 20 + H   | 8·N  | `N` f64 values, tensors in header order  |
//!
//! The header lists every tensor's name and shape; the payload holds them
//! back to back in row-major order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::metrics::Reconstructor;
use crate::minsyn_decoder::{Moments, MovingAverageState, StatsKind};
use crate::neuralnet::{
    Activation, AutoencoderModel, Decoder, DecoderKind, DenseLayer, LossKind, Pca, Regularizer,
};

pub const MAGIC: &[u8; 8] = b"MINSYNCK";
pub const FORMAT_VERSION: u32 = 1;
const PREFIX: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Autoencoder(AutoencoderModel),
    Pca(Pca),
}

impl TrainedModel {
    /// `n x m` decoder weights (pixel by factor) used for the ACC score.
    pub fn decoder_weights(&self) -> Result<Array2<f64>> {
        match self {
            TrainedModel::Autoencoder(m) => m.decoder_weights(),
            TrainedModel::Pca(p) => Ok(p.components.t().to_owned()),
        }
    }

    pub fn inputs(&self) -> usize {
        match self {
            TrainedModel::Autoencoder(m) => m.inputs(),
            TrainedModel::Pca(p) => p.mean.len(),
        }
    }
}

impl Reconstructor for TrainedModel {
    fn reconstruct_batch(&self, x: ndarray::ArrayView2<f64>) -> Result<Array2<f64>> {
        match self {
            TrainedModel::Autoencoder(m) => m.reconstruct(x),
            TrainedModel::Pca(p) => p.reconstruct(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ExperimentConfig,
    pub model: TrainedModel,
    /// Mean training loss per epoch.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ModelHeader {
    Autoencoder {
        decoder_kind: DecoderKind,
        loss_kind: LossKind,
        regularizer: Regularizer,
        encoder_activations: Vec<Activation>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decoder_activation: Option<Activation>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        moving_average: Option<MovingAverageHeader>,
    },
    Pca,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MovingAverageHeader {
    momentum: f64,
    step_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stats: Option<StatsKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    version: u32,
    config: ExperimentConfig,
    epochs_completed: usize,
    model: ModelHeader,
    tensors: Vec<TensorEntry>,
}

struct Writer {
    entries: Vec<TensorEntry>,
    payload: Vec<f64>,
}

impl Writer {
    fn push(&mut self, name: String, shape: Vec<usize>, values: &[f64]) {
        self.entries.push(TensorEntry { name, shape });
        self.payload.extend_from_slice(values);
    }

    fn layer(&mut self, prefix: &str, layer: &DenseLayer) {
        let (o, i) = layer.weights.dim();
        self.push(
            format!("{prefix}.weights"),
            vec![o, i],
            layer.weights.as_slice().expect("standard"),
        );
        self.push(
            format!("{prefix}.bias"),
            vec![o],
            layer.bias.as_slice().expect("standard"),
        );
    }
}

fn malformed(message: impl Into<String>) -> Error {
    Error::Parse {
        offset: 0,
        message: format!("checkpoint: {}", message.into()),
    }
}

struct Tensors(BTreeMap<String, (Vec<usize>, Vec<f64>)>);

impl Tensors {
    fn take(&mut self, name: &str) -> Result<(Vec<usize>, Vec<f64>)> {
        self.0
            .remove(name)
            .ok_or_else(|| malformed(format!("missing tensor {name}")))
    }

    fn vector(&mut self, name: &str) -> Result<Array1<f64>> {
        let (shape, data) = self.take(name)?;
        if shape.len() != 1 {
            return Err(malformed(format!("{name} must be a vector")));
        }
        Ok(Array1::from(data))
    }

    fn matrix(&mut self, name: &str) -> Result<Array2<f64>> {
        let (shape, data) = self.take(name)?;
        if shape.len() != 2 {
            return Err(malformed(format!("{name} must be a matrix")));
        }
        Array2::from_shape_vec((shape[0], shape[1]), data).map_err(|e| malformed(e.to_string()))
    }

    fn layer(&mut self, prefix: &str, activation: Activation) -> Result<DenseLayer> {
        Ok(DenseLayer {
            weights: self.matrix(&format!("{prefix}.weights"))?,
            bias: self.vector(&format!("{prefix}.bias"))?,
            activation,
        })
    }
}

const MOMENT_NAMES: [&str; 5] = ["mean_x", "mean_z", "mean_x2", "mean_z2", "mean_xz"];

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = Writer {
            entries: Vec::new(),
            payload: Vec::new(),
        };
        w.push("history".into(), vec![self.history.len()], &self.history);
        let model = match &self.model {
            TrainedModel::Autoencoder(m) => {
                for (l, layer) in m.encoder.iter().enumerate() {
                    w.layer(&format!("encoder.{l}"), layer);
                }
                let (decoder_activation, moving_average) = match &m.decoder {
                    Decoder::Learned(layer) => {
                        w.layer("decoder", layer);
                        (Some(layer.activation), None)
                    }
                    Decoder::MinSyn(ma) => {
                        if let Some(run) = ma.running() {
                            for (name, shape, values) in run.arrays() {
                                w.push(format!("moving_average.{name}"), shape, values);
                            }
                        }
                        let header = MovingAverageHeader {
                            momentum: ma.momentum,
                            step_count: ma.step_count,
                            stats: ma.running().map(|r| r.kind),
                        };
                        (None, Some(header))
                    }
                };
                ModelHeader::Autoencoder {
                    decoder_kind: m.decoder_kind,
                    loss_kind: m.loss_kind,
                    regularizer: m.regularizer,
                    encoder_activations: m.encoder.iter().map(|l| l.activation).collect(),
                    decoder_activation,
                    moving_average,
                }
            }
            TrainedModel::Pca(p) => {
                let (k, n) = p.components.dim();
                w.push(
                    "pca.components".into(),
                    vec![k, n],
                    p.components.as_slice().expect("standard"),
                );
                w.push(
                    "pca.mean".into(),
                    vec![n],
                    p.mean.as_slice().expect("standard"),
                );
                w.push(
                    "pca.variances".into(),
                    vec![k],
                    p.variances.as_slice().expect("standard"),
                );
                ModelHeader::Pca
            }
        };
        let header = Header {
            version: FORMAT_VERSION,
            config: self.config.clone(),
            epochs_completed: self.history.len(),
            model,
            tensors: w.entries,
        };
        let json = serde_json::to_vec(&header)?;
        let mut out = Vec::with_capacity(PREFIX + json.len() + 8 * w.payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for v in &w.payload {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < PREFIX {
            return Err(Error::Parse {
                offset: bytes.len(),
                message: "checkpoint: truncated prefix".into(),
            });
        }
        if &bytes[..8] != MAGIC {
            return Err(Error::Parse {
                offset: 0,
                message: "checkpoint: bad magic".into(),
            });
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::Parse {
                offset: 8,
                message: format!("checkpoint: unsupported version {version}"),
            });
        }
        let hlen = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
        let body = PREFIX
            .checked_add(hlen)
            .filter(|&e| e <= bytes.len())
            .ok_or(Error::Parse {
                offset: bytes.len(),
                message: "checkpoint: truncated header".into(),
            })?;
        let header: Header = serde_json::from_slice(&bytes[PREFIX..body])
            .map_err(|e| malformed(format!("header: {e}")))?;
        let mut tensors = BTreeMap::new();
        let mut at = body;
        for entry in &header.tensors {
            let count: usize = entry.shape.iter().product();
            let end = at + 8 * count;
            if end > bytes.len() {
                return Err(Error::Parse {
                    offset: bytes.len(),
                    message: format!("checkpoint: payload truncated in {}", entry.name),
                });
            }
            let values = bytes[at..end]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            if tensors
                .insert(entry.name.clone(), (entry.shape.clone(), values))
                .is_some()
            {
                return Err(malformed(format!("duplicate tensor {}", entry.name)));
            }
            at = end;
        }
        if at != bytes.len() {
            return Err(Error::Parse {
                offset: at,
                message: "checkpoint: trailing bytes".into(),
            });
        }
        let mut t = Tensors(tensors);
        let history = t.vector("history")?.to_vec();
        if history.len() != header.epochs_completed {
            return Err(malformed(
                "epochs_completed disagrees with the history length",
            ));
        }
        let model = match header.model {
            ModelHeader::Autoencoder {
                decoder_kind,
                loss_kind,
                regularizer,
                encoder_activations,
                decoder_activation,
                moving_average,
            } => {
                let encoder = encoder_activations
                    .iter()
                    .enumerate()
                    .map(|(l, &a)| t.layer(&format!("encoder.{l}"), a))
                    .collect::<Result<Vec<_>>>()?;
                let decoder = match (decoder_activation, moving_average) {
                    (Some(a), None) => Decoder::Learned(t.layer("decoder", a)?),
                    (None, Some(ma)) => {
                        let running = match ma.stats {
                            None => None,
                            Some(kind) => {
                                let mut v = MOMENT_NAMES
                                    .map(|n| format!("moving_average.{n}"))
                                    .into_iter();
                                let mut next = || v.next().expect("five names");
                                Some(Moments {
                                    kind,
                                    mean_x: t.vector(&next())?,
                                    mean_z: t.vector(&next())?,
                                    mean_x2: t.vector(&next())?,
                                    mean_z2: t.vector(&next())?,
                                    mean_xz: t.matrix(&next())?,
                                })
                            }
                        };
                        Decoder::MinSyn(
                            MovingAverageState::restore(ma.momentum, ma.step_count, running)
                                .map_err(|e| malformed(e.to_string()))?,
                        )
                    }
                    _ => return Err(malformed("decoder description is inconsistent")),
                };
                let model = AutoencoderModel {
                    encoder,
                    decoder_kind,
                    decoder,
                    loss_kind,
                    regularizer,
                };
                model.validate().map_err(|e| malformed(e.to_string()))?;
                TrainedModel::Autoencoder(model)
            }
            ModelHeader::Pca => {
                let pca = Pca {
                    components: t.matrix("pca.components")?,
                    mean: t.vector("pca.mean")?,
                    variances: t.vector("pca.variances")?,
                };
                if pca.components.ncols() != pca.mean.len()
                    || pca.components.nrows() != pca.variances.len()
                {
                    return Err(malformed("pca tensor shapes disagree"));
                }
                TrainedModel::Pca(pca)
            }
        };
        if let Some(extra) = t.0.keys().next() {
            return Err(malformed(format!("unexpected tensor {extra}")));
        }
        Ok(Self {
            config: header.config,
            model,
            history,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
