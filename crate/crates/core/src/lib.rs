pub mod cli;
pub mod datasets;
pub mod discrete_info;
pub mod error;
pub mod gaussian_info;
pub mod metrics;
pub mod minsyn_decoder;
pub mod neuralnet;

pub use error::{Error, Result};
