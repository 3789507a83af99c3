//! Dense sparse autoencoder: forward/backward passes, Adam, and training.

mod activation;
mod adam;
mod model;
mod train;

pub use activation::Activation;
pub use adam::{adam_step, AdamState};
pub use model::{DenseLayer, DsaeConfig, DsaeModel, ForwardPass, Gradients, LayerSpec, Loss};
pub use train::{train, TrainingConfig};
