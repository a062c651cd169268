use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::model::{AutoencoderModel, DecoderKind, LayerSpec, Regularizer};
use crate::error::{Error, Result};
use crate::minsyn_decoder::{Moments, MovingAverageState, DEFAULT_MOMENTUM};

const INIT_STREAM: u64 = 0;
const SHUFFLE_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

fn default_momentum() -> f64 {
    DEFAULT_MOMENTUM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub lr: f64,
    pub decoder_kind: DecoderKind,
    #[serde(default)]
    pub regularizer: Regularizer,
    /// Hidden layers followed by the latent layer.
    pub encoder: Vec<LayerSpec>,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    /// After the last epoch, replace the moving average with the moments of
    /// the whole training set under the final encoder.
    #[serde(default)]
    pub refresh_stats: bool,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::Config(format!(
                "batch_size must be at least 2, got {}",
                self.batch_size
            )));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!(
                "lr {} must be finite and >= 0",
                self.lr
            )));
        }
        if !(self.momentum > 0.0 && self.momentum < 1.0) {
            return Err(Error::Config(format!(
                "momentum {} is not in (0, 1)",
                self.momentum
            )));
        }
        if self.encoder.is_empty() || self.encoder.iter().any(|l| l.size == 0) {
            return Err(Error::Config(
                "encoder layers must be nonempty with positive sizes".into(),
            ));
        }
        self.regularizer.validate()
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// The model training starts from; depends only on the seed and shapes.
    pub fn init_model(&self, inputs: usize) -> Result<AutoencoderModel> {
        self.validate()?;
        AutoencoderModel::new(
            inputs,
            &self.encoder,
            self.decoder_kind,
            self.regularizer,
            self.momentum,
            &mut self.rng(INIT_STREAM),
        )
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: AutoencoderModel,
    /// Sample-weighted mean training loss of each epoch.
    pub history: Vec<f64>,
    pub steps: u64,
}

/// Minibatch Adam training. Each epoch reshuffles the rows.
pub fn train_autoencoder(config: &TrainConfig, data: ArrayView2<f64>) -> Result<TrainOutcome> {
    if data.nrows() == 0 || data.ncols() == 0 {
        return Err(Error::Shape("training data is empty".into()));
    }
    let mut model = config.init_model(data.ncols())?;
    let minsyn = config.decoder_kind.is_minsyn();
    if minsyn && data.nrows() < 2 {
        return Err(Error::BatchSize(data.nrows()));
    }
    let shapes: Vec<usize> = model.parameters_mut().iter().map(|p| p.len()).collect();
    let mut adam = AdamState::new(config.lr, &shapes)?;
    let mut shuffle_rng = config.rng(SHUFFLE_STREAM);
    let mut noise_rng = config.rng(NOISE_STREAM);
    let mut order: Vec<usize> = (0..data.nrows()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut steps = 0u64;

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        let mut seen = 0usize;
        for (batch, idx) in order.chunks(config.batch_size).enumerate() {
            if minsyn && idx.len() < 2 {
                log::info!("epoch {epoch}: dropping trailing batch of size 1");
                continue;
            }
            let x = data.select(Axis(0), idx);
            let (loss, grads, fwd) = model.gradients(x.view(), &mut noise_rng)?;
            if !loss.is_finite()
                || grads
                    .tensors()
                    .iter()
                    .any(|t| t.iter().any(|g| !g.is_finite()))
            {
                return Err(Error::NonFiniteLoss { epoch, batch });
            }
            if let (Some(ma), Some(moments)) = (model.moving_average_mut(), fwd.moments.as_ref()) {
                ma.update(moments)?;
            }
            adam.step(&mut model.parameters_mut(), &grads.tensors())?;
            steps += 1;
            total += loss * idx.len() as f64;
            seen += idx.len();
        }
        let mean = total / seen.max(1) as f64;
        log::debug!("epoch {epoch}: loss {mean:.6}");
        history.push(mean);
    }
    if minsyn && config.refresh_stats {
        refresh_statistics(&mut model, data)?;
    }
    Ok(TrainOutcome {
        model,
        history,
        steps,
    })
}

/// Replaces a MinSyn model's moving average by the moments of all of
/// `data` under the current encoder (the statistics the average tracks once
/// the encoder stops changing).
pub fn refresh_statistics(model: &mut AutoencoderModel, data: ArrayView2<f64>) -> Result<()> {
    let Some(kind) = model.decoder_kind.stats_kind() else {
        return Ok(());
    };
    let z = model.encode(data)?;
    let moments = Moments::from_batch(kind, data, z.view())?;
    let ma = model.moving_average_mut().expect("minsyn model");
    *ma = MovingAverageState::restore(ma.momentum, ma.step_count, Some(moments))?;
    Ok(())
}
