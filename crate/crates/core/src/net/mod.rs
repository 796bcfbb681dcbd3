//! Spectral classifier: per-shell zonal convolution in the harmonic domain,
//! PReLU on real and imaginary parts, coefficient magnitudes, a PReLU dense
//! layer and a linear classification layer, trained with softmax
//! cross-entropy and adaptive moments.
//!
//! An inverse-transform head (spatial maps instead of magnitudes) and a
//! descriptor-only head are available for comparisons.

mod checkpoint;
mod config;
mod layers;
mod model;
mod params;
mod train;


pub use checkpoint::{
    checkpoint_config, checkpoint_from_bytes, checkpoint_from_bytes_expecting, checkpoint_to_bytes,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use config::{FeatureMode, NetConfig, TrainConfig};
pub use layers::{conv_gain, inverse_after_conv, magnitude_features, zonal_conv, SpectralMaps, ZonalKernel};
pub use model::{softmax, Classifier, Encoded, LossAndGradients, Model, Network};
pub use params::{Layout, ModelParams, TensorRole, TensorSpec};
pub use train::{evaluate, evaluate_params, train, train_augment, train_with, EpochStats, Evaluation, TrainOutcome};
