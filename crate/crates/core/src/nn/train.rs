//! Mini-batch Adam training loop.

use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::model::DsaeModel;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 100,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::InvalidConfig(format!("{name} must lie in (0, 1)")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Trains `model` in place and returns the mean training loss of each epoch.
///
/// Rows are reshuffled every epoch from a stream derived from the model's
/// seed. The trailing partial batch is kept. A batch size larger than the
/// data is clamped to the data size.
pub fn train(
    model: &mut DsaeModel,
    data: ArrayView2<f64>,
    cfg: &TrainingConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = data.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("training matrix has no rows".into()));
    }
    if data.ncols() != model.input_width() {
        return Err(Error::shape(
            format!("{} columns", model.input_width()),
            format!("{} columns", data.ncols()),
        ));
    }
    let batch_size = if cfg.batch_size > n {
        log::warn!(
            "batch size {} exceeds training set size {n}; clamping",
            cfg.batch_size
        );
        n
    } else {
        cfg.batch_size
    };

    let mut rng = rng_from_seed(derive_seed(model.config().seed, 1));
    let mut state = AdamState::new(model);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch_size) {
            let batch = data.select(Axis(0), chunk);
            let pass = model.forward(batch.view())?;
            let loss = model.loss_from_pass(&pass);
            let grads = model.backward(&pass);
            adam_step(model, &grads, &mut state, cfg)?;
            epoch_loss += loss.total * chunk.len() as f64;
        }
        history.push(epoch_loss / n as f64);
    }
    Ok(history)
}
