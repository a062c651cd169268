//! Dense autoencoders trained with Adam, plus a PCA baseline.

mod adam;
mod layer;
mod model;
mod pca;
mod train;

pub use adam::{AdamState, BETA1, BETA2, EPSILON};
pub use layer::{sigmoid, softplus, Activation, DenseLayer};
pub use model::{
    loss, AutoencoderModel, Decoder, DecoderKind, Forward, Gradients, LayerGrad, LayerSpec,
    LossKind, Mode, Regularizer, BCE_CLAMP,
};
pub use pca::{pca_fit, Pca};
pub use train::{refresh_statistics, train_autoencoder, TrainConfig, TrainOutcome};
