//! Fixtures shared by the criterion benchmarks.

use dsaee_core::synthetic::{planted_dataset, PlantedSpec};
use dsaee_core::{Activation, DsaeConfig, EnsembleConfig, LabeledDataset, TrainingConfig};
use ndarray::Array2;

/// Planted-feature data with `features` columns, scaled to `[0, 1]`.
pub fn planted(majority: usize, minority: usize, features: usize) -> LabeledDataset {
    let mut d = planted_dataset(&PlantedSpec {
        majority,
        minority,
        features,
        planted: (features / 10).max(1),
        shift: 2.0,
        seed: 1,
    })
    .data;
    let lo = d.x.fold(f64::INFINITY, |a, &b| a.min(b));
    let hi = d.x.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    d.x.mapv_inplace(|v| (v - lo) / (hi - lo));
    d
}

/// `J - J/2 - J/5 - J/2 - J` autoencoder with tanh hidden layers.
pub fn default_architecture(features: usize) -> DsaeConfig {
    DsaeConfig::from_widths(
        features,
        &[(features / 2, Activation::Tanh), (features / 5, Activation::Tanh)],
        &[(features / 2, Activation::Tanh)],
        Activation::Sigmoid,
        1e-5,
        0,
    )
    .expect("valid architecture")
}

pub fn ensemble(features: usize, components: usize, epochs: usize) -> EnsembleConfig {
    EnsembleConfig {
        components,
        dsae: default_architecture(features),
        training: TrainingConfig {
            epochs,
            ..TrainingConfig::default()
        },
        master_seed: 0,
        parallelism: 1,
    }
}

/// Deterministic pseudo-random scores and labels for metric benchmarks.
pub fn scores(n: usize) -> (Vec<f64>, Vec<u8>) {
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut next = || {
        state = dsaee_core::seed::splitmix64(state);
        state
    };
    let scores = (0..n).map(|_| (next() >> 11) as f64 / (1u64 << 53) as f64).collect();
    // Roughly 10% minority; the first two rows fix one of each class.
    let labels = (0..n)
        .map(|i| match i {
            0 => 0,
            1 => 1,
            _ => (next() % 10 == 0) as u8,
        })
        .collect();
    (scores, labels)
}

pub fn batch(rows: usize, features: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, features), |(r, c)| ((r * 31 + c * 17) % 97) as f64 / 96.0)
}
