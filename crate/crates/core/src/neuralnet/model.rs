use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::layer::{sigmoid, Activation, DenseLayer};
use crate::error::{Error, Result};
use crate::minsyn_decoder::{DecoderParams, Moments, MovingAverageState, StatsKind};

/// Lower/upper clamp applied to reconstructions inside the cross-entropy.
pub const BCE_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    /// Trained dense layer with sigmoid outputs (cross-entropy loss).
    LearnedSigmoid,
    /// Trained dense layer with linear outputs (squared loss).
    LearnedLinear,
    /// Binary CI decoder computed from batch statistics.
    MinsynBinary,
    /// Gaussian CI decoder computed from batch statistics.
    MinsynGaussian,
}

impl DecoderKind {
    pub fn loss_kind(self) -> LossKind {
        match self {
            DecoderKind::LearnedSigmoid | DecoderKind::MinsynBinary => LossKind::Bce,
            DecoderKind::LearnedLinear | DecoderKind::MinsynGaussian => LossKind::Mse,
        }
    }

    pub fn stats_kind(self) -> Option<StatsKind> {
        match self {
            DecoderKind::MinsynBinary => Some(StatsKind::Binary),
            DecoderKind::MinsynGaussian => Some(StatsKind::Gaussian),
            _ => None,
        }
    }

    pub fn is_minsyn(self) -> bool {
        self.stats_kind().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Bce,
    Mse,
}

/// Train-time perturbation. Evaluation never applies it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Regularizer {
    #[default]
    None,
    /// Inverted dropout on the latent units.
    Dropout { p: f64 },
    /// Gaussian noise on the inputs while the targets stay clean (denoising).
    InputGaussianNoise { sigma: f64 },
    /// Gaussian noise added to the latent units.
    LatentGaussianNoise { sigma: f64 },
}

impl Regularizer {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Regularizer::Dropout { p } if !(0.0..1.0).contains(&p) => Err(Error::Config(format!(
                "dropout probability {p} is not in [0, 1)"
            ))),
            Regularizer::InputGaussianNoise { sigma }
            | Regularizer::LatentGaussianNoise { sigma }
                if !(sigma >= 0.0 && sigma.is_finite()) =>
            {
                Err(Error::Config(format!(
                    "noise sigma {sigma} must be finite and >= 0"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decoder {
    Learned(DenseLayer),
    /// Parameters come from batch statistics during training and from the
    /// moving average at evaluation time.
    MinSyn(MovingAverageState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderModel {
    pub encoder: Vec<DenseLayer>,
    pub decoder_kind: DecoderKind,
    pub decoder: Decoder,
    pub loss_kind: LossKind,
    pub regularizer: Regularizer,
}

/// Encoder layer description used to build a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub size: usize,
    pub activation: Activation,
}

/// Gradients of one dense layer, same shapes as the layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub encoder: Vec<LayerGrad>,
    pub decoder: Option<LayerGrad>,
}

impl Gradients {
    /// Flat views in the same order as [`AutoencoderModel::parameters_mut`].
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out = Vec::new();
        for g in self.encoder.iter().chain(self.decoder.iter()) {
            out.push(g.weights.as_slice().expect("standard layout"));
            out.push(g.bias.as_slice().expect("standard layout"));
        }
        out
    }
}

/// Everything the backward pass needs from a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    /// Latent codes after the regularizer (what the decoder consumed).
    pub z: Array2<f64>,
    pub xbar: Array2<f64>,
    /// Decoder parameters used for a MinSyn decoder.
    pub params: Option<DecoderParams>,
    /// Batch moments for a MinSyn decoder in training mode.
    pub moments: Option<Moments>,
    layer_inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
    post: Vec<Array2<f64>>,
    dropout_scale: Option<Array2<f64>>,
}

fn gaussian_like<R: Rng + ?Sized>(shape: (usize, usize), sigma: f64, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn(shape, || {
        let n: f64 = StandardNormal.sample(rng);
        sigma * n
    })
}

impl AutoencoderModel {
    /// Freshly initialized model for `inputs`-dimensional data. The last
    /// encoder layer is the latent code.
    pub fn new<R: Rng + ?Sized>(
        inputs: usize,
        encoder: &[LayerSpec],
        decoder_kind: DecoderKind,
        regularizer: Regularizer,
        momentum: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if encoder.is_empty() {
            return Err(Error::Config("the encoder needs at least one layer".into()));
        }
        if inputs == 0 || encoder.iter().any(|l| l.size == 0) {
            return Err(Error::Config("layer sizes must be positive".into()));
        }
        regularizer.validate()?;
        let mut layers = Vec::with_capacity(encoder.len());
        let mut fan_in = inputs;
        for spec in encoder {
            layers.push(DenseLayer::glorot(fan_in, spec.size, spec.activation, rng));
            fan_in = spec.size;
        }
        let decoder = match decoder_kind {
            DecoderKind::LearnedSigmoid => {
                Decoder::Learned(DenseLayer::glorot(fan_in, inputs, Activation::Sigmoid, rng))
            }
            DecoderKind::LearnedLinear => Decoder::Learned(DenseLayer::glorot(
                fan_in,
                inputs,
                Activation::Identity,
                rng,
            )),
            DecoderKind::MinsynBinary | DecoderKind::MinsynGaussian => {
                Decoder::MinSyn(MovingAverageState::new(momentum)?)
            }
        };
        let model = Self {
            encoder: layers,
            decoder_kind,
            decoder,
            loss_kind: decoder_kind.loss_kind(),
            regularizer,
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks the structural invariants (shape chaining, decoder/loss pairing).
    pub fn validate(&self) -> Result<()> {
        let first = self
            .encoder
            .first()
            .ok_or_else(|| Error::Config("the encoder needs at least one layer".into()))?;
        let mut width = first.inputs();
        for (l, layer) in self.encoder.iter().enumerate() {
            if layer.inputs() != width || layer.bias.len() != layer.outputs() {
                return Err(Error::Shape(format!("encoder layer {l} does not chain")));
            }
            width = layer.outputs();
        }
        match (&self.decoder, self.decoder_kind) {
            (Decoder::Learned(d), DecoderKind::LearnedSigmoid | DecoderKind::LearnedLinear) => {
                let act = if self.decoder_kind == DecoderKind::LearnedSigmoid {
                    Activation::Sigmoid
                } else {
                    Activation::Identity
                };
                if d.inputs() != width || d.outputs() != first.inputs() || d.activation != act {
                    return Err(Error::Shape(
                        "decoder layer does not match the encoder".into(),
                    ));
                }
            }
            (Decoder::MinSyn(ma), DecoderKind::MinsynBinary | DecoderKind::MinsynGaussian) => {
                let last = self.encoder.last().expect("nonempty encoder").activation;
                if self.decoder_kind == DecoderKind::MinsynBinary && last != Activation::Sigmoid {
                    return Err(Error::Config(
                        "minsyn_binary needs sigmoid latents (they are read as probabilities)"
                            .into(),
                    ));
                }
                if let Some(run) = ma.running() {
                    if run.shape() != (first.inputs(), width)
                        || Some(run.kind) != self.decoder_kind.stats_kind()
                    {
                        return Err(Error::Shape(
                            "moving-average statistics do not match the model".into(),
                        ));
                    }
                }
            }
            _ => return Err(Error::Config("decoder does not match decoder_kind".into())),
        }
        if self.loss_kind != self.decoder_kind.loss_kind() {
            return Err(Error::Config(format!(
                "{:?} outputs require {:?} loss",
                self.decoder_kind,
                self.decoder_kind.loss_kind()
            )));
        }
        self.regularizer.validate()
    }

    pub fn inputs(&self) -> usize {
        self.encoder[0].inputs()
    }

    pub fn latents(&self) -> usize {
        self.encoder.last().expect("nonempty encoder").outputs()
    }

    /// Decoder weights (`n x m`) as used for evaluation.
    pub fn decoder_weights(&self) -> Result<Array2<f64>> {
        match &self.decoder {
            Decoder::Learned(layer) => Ok(layer.weights.clone()),
            Decoder::MinSyn(ma) => Ok(ma.decoder_params()?.weights),
        }
    }

    pub fn moving_average(&self) -> Option<&MovingAverageState> {
        match &self.decoder {
            Decoder::MinSyn(ma) => Some(ma),
            Decoder::Learned(_) => None,
        }
    }

    pub fn moving_average_mut(&mut self) -> Option<&mut MovingAverageState> {
        match &mut self.decoder {
            Decoder::MinSyn(ma) => Some(ma),
            Decoder::Learned(_) => None,
        }
    }

    /// Mutable flat views of every learned tensor: each encoder layer's
    /// weights then bias, then the decoder's if it is learned.
    pub fn parameters_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        let decoder = match &mut self.decoder {
            Decoder::Learned(layer) => Some(layer),
            Decoder::MinSyn(_) => None,
        };
        for layer in self.encoder.iter_mut().chain(decoder) {
            out.push(layer.weights.as_slice_mut().expect("standard layout"));
            out.push(layer.bias.as_slice_mut().expect("standard layout"));
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        let mut total: usize = self
            .encoder
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum();
        if let Decoder::Learned(layer) = &self.decoder {
            total += layer.weights.len() + layer.bias.len();
        }
        total
    }

    /// Latent codes of a batch (no regularizer).
    pub fn encode(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(x)?;
        let mut h = x.to_owned();
        for layer in &self.encoder {
            h = layer.forward(h.view());
        }
        Ok(h)
    }

    /// Evaluation-mode reconstruction.
    pub fn reconstruct(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut unused = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        Ok(self.forward(x, Mode::Eval, &mut unused)?.xbar)
    }

    fn check_input(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.inputs() {
            return Err(Error::Shape(format!(
                "batch has {} features, model expects {}",
                x.ncols(),
                self.inputs()
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::Shape("empty batch".into()));
        }
        Ok(())
    }

    /// Runs the network. In training mode the regularizer is applied and a
    /// MinSyn decoder is built from this batch's statistics; in evaluation
    /// mode it comes from the moving average.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        x: ArrayView2<f64>,
        mode: Mode,
        rng: &mut R,
    ) -> Result<Forward> {
        self.run(x, mode, rng, None)
    }

    /// Training-mode pass with the decoder parameters held at `params`.
    ///
    /// This is the function whose gradient [`Self::gradients`] computes for
    /// MinSyn decoders: decoder parameters act as constants.
    pub fn forward_frozen<R: Rng + ?Sized>(
        &self,
        x: ArrayView2<f64>,
        rng: &mut R,
        params: &DecoderParams,
    ) -> Result<Forward> {
        self.run(x, Mode::Train, rng, Some(params))
    }

    fn run<R: Rng + ?Sized>(
        &self,
        x: ArrayView2<f64>,
        mode: Mode,
        rng: &mut R,
        frozen: Option<&DecoderParams>,
    ) -> Result<Forward> {
        self.check_input(x)?;
        let train = mode == Mode::Train;
        let mut h = match self.regularizer {
            Regularizer::InputGaussianNoise { sigma } if train && sigma > 0.0 => {
                &x + &gaussian_like(x.dim(), sigma, rng)
            }
            _ => x.to_owned(),
        };
        let mut layer_inputs = Vec::with_capacity(self.encoder.len() + 1);
        let mut pre = Vec::with_capacity(self.encoder.len() + 1);
        let mut post = Vec::with_capacity(self.encoder.len() + 1);
        for layer in &self.encoder {
            let a = layer.pre_activation(h.view());
            let out = layer.activation.apply(&a);
            layer_inputs.push(h);
            pre.push(a);
            h = out.clone();
            post.push(out);
        }
        let clean_z = h;
        let mut dropout_scale = None;
        let z = match self.regularizer {
            Regularizer::Dropout { p } if train && p > 0.0 => {
                let keep = 1.0 / (1.0 - p);
                let scale = Array2::from_shape_simple_fn(clean_z.dim(), || {
                    if rng.random::<f64>() < p {
                        0.0
                    } else {
                        keep
                    }
                });
                let dropped = &clean_z * &scale;
                dropout_scale = Some(scale);
                dropped
            }
            Regularizer::LatentGaussianNoise { sigma } if train && sigma > 0.0 => {
                &clean_z + &gaussian_like(clean_z.dim(), sigma, rng)
            }
            _ => clean_z.clone(),
        };

        let mut moments = None;
        let mut params = None;
        let (dec_pre, xbar) = match &self.decoder {
            Decoder::Learned(layer) => {
                let a = layer.pre_activation(z.view());
                let out = layer.activation.apply(&a);
                (a, out)
            }
            Decoder::MinSyn(ma) => {
                let p = match (mode, frozen) {
                    (Mode::Train, Some(p)) => p.clone(),
                    (Mode::Train, None) => {
                        let kind = self.decoder_kind.stats_kind().expect("minsyn kind");
                        let batch = Moments::from_batch(kind, x, clean_z.view())?;
                        let p = batch.decoder_params()?;
                        moments = Some(batch);
                        p
                    }
                    (Mode::Eval, _) => ma.decoder_params()?,
                };
                let a = p.affine(z.view());
                let out = match self.decoder_kind {
                    DecoderKind::MinsynBinary => a.mapv(sigmoid),
                    _ => a.clone(),
                };
                params = Some(p);
                (a, out)
            }
        };
        layer_inputs.push(z.clone());
        pre.push(dec_pre);
        post.push(xbar.clone());
        Ok(Forward {
            z,
            xbar,
            params,
            moments,
            layer_inputs,
            pre,
            post,
            dropout_scale,
        })
    }

    /// Loss and exact gradients for one training batch. MinSyn decoder
    /// parameters are recomputed from the batch but treated as constants.
    pub fn gradients<R: Rng + ?Sized>(
        &self,
        x: ArrayView2<f64>,
        rng: &mut R,
    ) -> Result<(f64, Gradients, Forward)> {
        let fwd = self.forward(x, Mode::Train, rng)?;
        let loss_value = loss(x, fwd.xbar.view(), self.loss_kind)?;
        let grads = self.backward(x, &fwd);
        Ok((loss_value, grads, fwd))
    }

    /// Gradients against a fixed set of MinSyn decoder parameters; see
    /// [`Self::forward_frozen`].
    pub fn gradients_frozen<R: Rng + ?Sized>(
        &self,
        x: ArrayView2<f64>,
        rng: &mut R,
        params: &DecoderParams,
    ) -> Result<(f64, Gradients)> {
        let fwd = self.forward_frozen(x, rng, params)?;
        let loss_value = loss(x, fwd.xbar.view(), self.loss_kind)?;
        Ok((loss_value, self.backward(x, &fwd)))
    }

    fn backward(&self, x: ArrayView2<f64>, fwd: &Forward) -> Gradients {
        let b = x.nrows() as f64;
        let factor = match self.loss_kind {
            LossKind::Bce => 1.0 / b,
            LossKind::Mse => 2.0 / b,
        };
        // Sigmoid + cross-entropy and linear + squared loss both give
        // d loss / d pre-activation proportional to (x̄ - x).
        let mut delta = (&fwd.xbar - &x) * factor;
        let last = fwd.pre.len() - 1;
        let mut decoder_grad = None;
        let mut delta_z = match &self.decoder {
            Decoder::Learned(layer) => {
                decoder_grad = Some(LayerGrad {
                    weights: delta.t().dot(&fwd.layer_inputs[last]),
                    bias: delta.sum_axis(Axis(0)),
                });
                delta.dot(&layer.weights)
            }
            Decoder::MinSyn(_) => {
                let p = fwd.params.as_ref().expect("minsyn forward carries params");
                delta.dot(&p.weights)
            }
        };
        if let Some(scale) = &fwd.dropout_scale {
            delta_z *= scale;
        }
        let mut encoder = Vec::with_capacity(self.encoder.len());
        delta = delta_z;
        for (l, layer) in self.encoder.iter().enumerate().rev() {
            layer
                .activation
                .backprop(&mut delta, &fwd.pre[l], &fwd.post[l]);
            encoder.push(LayerGrad {
                weights: delta.t().dot(&fwd.layer_inputs[l]),
                bias: delta.sum_axis(Axis(0)),
            });
            if l > 0 {
                delta = delta.dot(&layer.weights);
            }
        }
        encoder.reverse();
        Gradients {
            encoder,
            decoder: decoder_grad,
        }
    }
}

/// Reconstruction loss summed over features and averaged over the batch.
pub fn loss(x: ArrayView2<f64>, xbar: ArrayView2<f64>, kind: LossKind) -> Result<f64> {
    if x.dim() != xbar.dim() {
        return Err(Error::Shape(format!(
            "targets are {:?}, reconstructions {:?}",
            x.dim(),
            xbar.dim()
        )));
    }
    if x.nrows() == 0 {
        return Err(Error::Shape("empty batch".into()));
    }
    let mut total = 0.0;
    match kind {
        LossKind::Bce => {
            for (&t, &y) in x.iter().zip(xbar.iter()) {
                if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&y) {
                    return Err(Error::Domain(format!(
                        "cross-entropy needs values in [0, 1], got target {t} and output {y}"
                    )));
                }
                let y = y.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                total -= t * y.ln() + (1.0 - t) * (1.0 - y).ln();
            }
        }
        LossKind::Mse => {
            for (&t, &y) in x.iter().zip(xbar.iter()) {
                total += (t - y) * (t - y);
            }
        }
    }
    Ok(total / x.nrows() as f64)
}
