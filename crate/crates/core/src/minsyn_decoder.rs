//! Decoder parameters that minimize CI synergy, derived from pairwise batch
//! statistics between outputs `X_i` and latents `Z_j`.
//!
//! Statistics are accumulated as raw moments (means, second moments, joint
//! means) so that a moving average over batches stays linear; correlations and
//! conditional probabilities are derived from the moments on demand.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_info::gaussian_ci_posterior;

/// Clamp applied to correlations (`±(1-ε)`) and probabilities (`[ε, 1-ε]`).
pub const STAT_CLAMP: f64 = 1e-4;

/// Standard deviations are floored here; a floored column has zero correlation.
pub const STD_FLOOR: f64 = 1e-6;

pub const DEFAULT_MOMENTUM: f64 = 0.99;

/// Which CI decoder a set of statistics feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatsKind {
    Gaussian,
    Binary,
}

/// Raw batch moments. `mean_xz` is `n x m`; the second moments are only
/// tracked for the Gaussian decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub kind: StatsKind,
    pub mean_x: Array1<f64>,
    pub mean_z: Array1<f64>,
    pub mean_x2: Array1<f64>,
    pub mean_z2: Array1<f64>,
    pub mean_xz: Array2<f64>,
}

fn check_batch(x: ArrayView2<f64>, z: ArrayView2<f64>) -> Result<f64> {
    if x.nrows() != z.nrows() {
        return Err(Error::Shape(format!(
            "x has {} rows but z has {}",
            x.nrows(),
            z.nrows()
        )));
    }
    if x.nrows() < 2 {
        return Err(Error::BatchSize(x.nrows()));
    }
    Ok(x.nrows() as f64)
}

impl Moments {
    pub fn gaussian(x: ArrayView2<f64>, z: ArrayView2<f64>) -> Result<Self> {
        let b = check_batch(x, z)?;
        Ok(Self {
            kind: StatsKind::Gaussian,
            mean_x: x.mean_axis(Axis(0)).expect("nonempty"),
            mean_z: z.mean_axis(Axis(0)).expect("nonempty"),
            mean_x2: x.mapv(|v| v * v).mean_axis(Axis(0)).expect("nonempty"),
            mean_z2: z.mapv(|v| v * v).mean_axis(Axis(0)).expect("nonempty"),
            mean_xz: x.t().dot(&z) / b,
        })
    }

    pub fn binary(x: ArrayView2<f64>, z: ArrayView2<f64>) -> Result<Self> {
        let b = check_batch(x, z)?;
        for (name, data) in [("x", &x), ("z", &z)] {
            if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Domain(format!(
                    "{name} entry {v} is not a probability in [0, 1]"
                )));
            }
        }
        Ok(Self {
            kind: StatsKind::Binary,
            mean_x: x.mean_axis(Axis(0)).expect("nonempty"),
            mean_z: z.mean_axis(Axis(0)).expect("nonempty"),
            mean_x2: Array1::zeros(0),
            mean_z2: Array1::zeros(0),
            mean_xz: x.t().dot(&z) / b,
        })
    }

    pub fn from_batch(kind: StatsKind, x: ArrayView2<f64>, z: ArrayView2<f64>) -> Result<Self> {
        match kind {
            StatsKind::Gaussian => Self::gaussian(x, z),
            StatsKind::Binary => Self::binary(x, z),
        }
    }

    /// `(n, m)`.
    pub fn shape(&self) -> (usize, usize) {
        self.mean_xz.dim()
    }

    fn same_layout(&self, other: &Moments) -> bool {
        self.kind == other.kind
            && self.mean_xz.dim() == other.mean_xz.dim()
            && self.mean_x2.len() == other.mean_x2.len()
            && self.mean_z2.len() == other.mean_z2.len()
    }

    /// Every array, in a fixed order (used for serialization).
    pub fn arrays(&self) -> [(&'static str, Vec<usize>, &[f64]); 5] {
        let (n, m) = self.shape();
        [
            (
                "mean_x",
                vec![self.mean_x.len()],
                self.mean_x.as_slice().unwrap(),
            ),
            (
                "mean_z",
                vec![self.mean_z.len()],
                self.mean_z.as_slice().unwrap(),
            ),
            (
                "mean_x2",
                vec![self.mean_x2.len()],
                self.mean_x2.as_slice().unwrap(),
            ),
            (
                "mean_z2",
                vec![self.mean_z2.len()],
                self.mean_z2.as_slice().unwrap(),
            ),
            ("mean_xz", vec![n, m], self.mean_xz.as_slice().unwrap()),
        ]
    }

    pub fn gaussian_stats(&self) -> Result<GaussianStats> {
        if self.kind != StatsKind::Gaussian {
            return Err(Error::Domain(
                "binary moments carry no second moments".into(),
            ));
        }
        Ok(GaussianStats::from_moments(self))
    }

    pub fn binary_stats(&self) -> BinaryStats {
        BinaryStats::from_moments(self)
    }

    pub fn decoder_params(&self) -> Result<DecoderParams> {
        match self.kind {
            StatsKind::Gaussian => Ok(gaussian_decoder_params(&self.gaussian_stats()?)),
            StatsKind::Binary => Ok(binary_decoder_params(&self.binary_stats())),
        }
    }
}

/// Standardization parameters plus output/latent correlations `rho` (`n x m`).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats {
    pub rho: Array2<f64>,
    pub x_mean: Array1<f64>,
    pub x_std: Array1<f64>,
    pub z_mean: Array1<f64>,
    pub z_std: Array1<f64>,
}

fn floored_std(mean: &Array1<f64>, mean_sq: &Array1<f64>) -> (Array1<f64>, Vec<bool>) {
    let mut dead = Vec::with_capacity(mean.len());
    let std = ndarray::Zip::from(mean)
        .and(mean_sq)
        .map_collect(|&mu, &sq| {
            let sd = (sq - mu * mu).max(0.0).sqrt();
            dead.push(sd <= STD_FLOOR);
            sd.max(STD_FLOOR)
        });
    (std, dead)
}

impl GaussianStats {
    fn from_moments(m: &Moments) -> Self {
        let (x_std, x_dead) = floored_std(&m.mean_x, &m.mean_x2);
        let (z_std, z_dead) = floored_std(&m.mean_z, &m.mean_z2);
        let limit = 1.0 - STAT_CLAMP;
        let rho = Array2::from_shape_fn(m.mean_xz.dim(), |(i, j)| {
            if x_dead[i] || z_dead[j] {
                return 0.0;
            }
            let cov = m.mean_xz[(i, j)] - m.mean_x[i] * m.mean_z[j];
            (cov / (x_std[i] * z_std[j])).clamp(-limit, limit)
        });
        Self {
            rho,
            x_mean: m.mean_x.clone(),
            x_std,
            z_mean: m.mean_z.clone(),
            z_std,
        }
    }
}

/// Correlations of a batch: `x` is `B x n`, `z` is `B x m`.
pub fn gaussian_batch_stats(x: ArrayView2<f64>, z: ArrayView2<f64>) -> Result<GaussianStats> {
    Ok(GaussianStats::from_moments(&Moments::gaussian(x, z)?))
}

/// Marginal and conditional Bernoulli parameters, all clamped to `[ε, 1-ε]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryStats {
    /// `p(X_i = 1)`.
    pub px1: Array1<f64>,
    /// `p(Z_j = 1 | X_i = 1)`, `n x m`.
    pub pz1_given_x1: Array2<f64>,
    /// `p(Z_j = 1 | X_i = 0)`, `n x m`.
    pub pz1_given_x0: Array2<f64>,
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(STAT_CLAMP, 1.0 - STAT_CLAMP)
}

/// `num / den`, or `fallback` when the conditioning event never occurs.
fn ratio(num: f64, den: f64, fallback: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        fallback
    }
}

impl BinaryStats {
    fn from_moments(m: &Moments) -> Self {
        let dim = m.mean_xz.dim();
        let pz1_given_x1 = Array2::from_shape_fn(dim, |(i, j)| {
            clamp_prob(ratio(m.mean_xz[(i, j)], m.mean_x[i], m.mean_z[j]))
        });
        let pz1_given_x0 = Array2::from_shape_fn(dim, |(i, j)| {
            clamp_prob(ratio(
                m.mean_z[j] - m.mean_xz[(i, j)],
                1.0 - m.mean_x[i],
                m.mean_z[j],
            ))
        });
        Self {
            px1: m.mean_x.mapv(clamp_prob),
            pz1_given_x1,
            pz1_given_x0,
        }
    }
}

/// Treats entries of `x` (`B x n`) and `z` (`B x m`) as Bernoulli parameters.
pub fn binary_batch_stats(x: ArrayView2<f64>, z: ArrayView2<f64>) -> Result<BinaryStats> {
    Ok(BinaryStats::from_moments(&Moments::binary(x, z)?))
}

/// Affine decoder `x̄ = f(weights · z + bias)`; `weights` is `n x m`.
///
/// The Gaussian decoder is linear and also reports each output's posterior
/// variance; the binary decoder feeds a sigmoid.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderParams {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub variance: Option<Array1<f64>>,
}

impl DecoderParams {
    /// Pre-activation `z · weightsᵀ + bias` for a `B x m` batch.
    pub fn affine(&self, z: ArrayView2<f64>) -> Array2<f64> {
        z.dot(&self.weights.t()) + &self.bias
    }
}

/// CI posterior mean for every output, mapped back to raw units:
/// `x̄_i = x_mean_i + x_std_i · sum_j u_ij (z_j - z_mean_j) / z_std_j`.
pub fn gaussian_decoder_params(stats: &GaussianStats) -> DecoderParams {
    let (n, m) = stats.rho.dim();
    let mut weights = Array2::zeros((n, m));
    let mut bias = Array1::zeros(n);
    let mut variance = Array1::zeros(n);
    for i in 0..n {
        let row = stats.rho.row(i).to_vec();
        let post = gaussian_ci_posterior(&row).expect("correlations are clamped");
        let mut offset = 0.0;
        for j in 0..m {
            let w = stats.x_std[i] * post.weights[j] / stats.z_std[j];
            weights[(i, j)] = w;
            offset += w * stats.z_mean[j];
        }
        bias[i] = stats.x_mean[i] - offset;
        variance[i] = stats.x_std[i] * stats.x_std[i] * post.variance;
    }
    DecoderParams {
        weights,
        bias,
        variance: Some(variance),
    }
}

/// Naive-Bayes logit parameters of the binary CI decoder:
///
/// `b_i = ln(p(X_i=1)/p(X_i=0)) + sum_j ln(p(Z_j=0|X_i=1) / p(Z_j=0|X_i=0))`
/// `w_ij = ln(p(Z_j=1|X_i=1) p(Z_j=0|X_i=0) / (p(Z_j=0|X_i=1) p(Z_j=1|X_i=0)))`
pub fn binary_decoder_params(stats: &BinaryStats) -> DecoderParams {
    let (n, m) = stats.pz1_given_x1.dim();
    let mut weights = Array2::zeros((n, m));
    let mut bias = Array1::zeros(n);
    for i in 0..n {
        let p = stats.px1[i];
        let mut b = (p / (1.0 - p)).ln();
        for j in 0..m {
            let on = stats.pz1_given_x1[(i, j)];
            let off = stats.pz1_given_x0[(i, j)];
            weights[(i, j)] = ((on * (1.0 - off)) / ((1.0 - on) * off)).ln();
            b += ((1.0 - on) / (1.0 - off)).ln();
        }
        bias[i] = b;
    }
    DecoderParams {
        weights,
        bias,
        variance: None,
    }
}

/// Exponential moving average of batch moments. The first update copies the
/// batch; later ones blend `running ← momentum·running + (1-momentum)·batch`.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingAverageState {
    pub momentum: f64,
    pub step_count: u64,
    running: Option<Moments>,
}

impl MovingAverageState {
    pub fn new(momentum: f64) -> Result<Self> {
        if !(momentum > 0.0 && momentum < 1.0) {
            return Err(Error::Domain(format!(
                "momentum {momentum} is not in (0, 1)"
            )));
        }
        Ok(Self {
            momentum,
            step_count: 0,
            running: None,
        })
    }

    /// Rebuilds a state from stored parts.
    pub fn restore(momentum: f64, step_count: u64, running: Option<Moments>) -> Result<Self> {
        let mut state = Self::new(momentum)?;
        state.step_count = step_count;
        state.running = running;
        Ok(state)
    }

    pub fn running(&self) -> Option<&Moments> {
        self.running.as_ref()
    }

    pub fn update(&mut self, batch: &Moments) -> Result<()> {
        match &mut self.running {
            None => self.running = Some(batch.clone()),
            Some(run) => {
                if !run.same_layout(batch) {
                    return Err(Error::Shape(format!(
                        "running {:?} statistics are {:?}, batch is {:?} {:?}",
                        run.kind,
                        run.shape(),
                        batch.kind,
                        batch.shape()
                    )));
                }
                let mu = self.momentum;
                let blend = |r: &mut f64, b: &f64| *r = mu * *r + (1.0 - mu) * *b;
                run.mean_x.zip_mut_with(&batch.mean_x, blend);
                run.mean_z.zip_mut_with(&batch.mean_z, blend);
                run.mean_x2.zip_mut_with(&batch.mean_x2, blend);
                run.mean_z2.zip_mut_with(&batch.mean_z2, blend);
                run.mean_xz.zip_mut_with(&batch.mean_xz, blend);
            }
        }
        self.step_count += 1;
        Ok(())
    }

    pub fn decoder_params(&self) -> Result<DecoderParams> {
        self.running
            .as_ref()
            .ok_or(Error::Untrained)?
            .decoder_params()
    }
}
