//! Feature selection for imbalanced binary data with an ensemble of deep
//! sparse autoencoders.
//!
//! Each ensemble component is trained on majority-class rows only and then
//! reconstructs a balanced test sample. Features where the minority class is
//! reconstructed markedly worse than the majority class are selected.
//!
//! - [`nn`]: dense autoencoder with an L1 code penalty, trained by Adam.
//! - [`sampling`]: per-component majority-only training set and balanced test set.
//! - [`ensemble`]: runs the components, builds the reconstruction-error matrix,
//!   and thresholds the per-feature class difference.
//! - [`eval`]: classifiers, AUROC/sensitivity, chi-squared baseline, and the
//!   subset evaluation protocol.
//! - [`io`]: CSV/IDX loading, scaling, dataset splits, run configuration and
//!   result files.
//! - [`pipeline`]: end-to-end select, evaluate and benchmark runs.
//! - [`synthetic`]: planted-feature benchmark data.

pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod io;
pub mod nn;
pub mod pipeline;
pub mod sampling;
pub mod seed;
pub mod synthetic;

pub use dataset::{LabeledDataset, MAJORITY, MINORITY};
pub use ensemble::{
    class_mean_re, delta_re, run_ensemble, select_at_thresholds, select_features, Aggregation,
    EnsembleConfig, FeatureSelection, REMatrix, SelectionResult,
};
pub use error::{Error, ErrorKind, Result};
pub use nn::{Activation, DsaeConfig, DsaeModel, LayerSpec, TrainingConfig};
pub use sampling::{build_component_split, ComponentSplit};
