use ndarray::{Array1, Array2, Zip};

use super::model::{DsaeModel, Gradients};
use super::train::TrainingConfig;
use crate::error::{Error, Result};

/// First and second moment accumulators, shaped like the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m_weights: Vec<Array2<f64>>,
    pub m_biases: Vec<Array1<f64>>,
    pub v_weights: Vec<Array2<f64>>,
    pub v_biases: Vec<Array1<f64>>,
    pub t: u64,
}

impl AdamState {
    pub fn new(model: &DsaeModel) -> Self {
        let zeros = Gradients::zeros_like(model);
        Self {
            m_weights: zeros.weights.clone(),
            m_biases: zeros.biases.clone(),
            v_weights: zeros.weights,
            v_biases: zeros.biases,
            t: 0,
        }
    }
}

/// One bias-corrected Adam update.
pub fn adam_step(
    model: &mut DsaeModel,
    grads: &Gradients,
    state: &mut AdamState,
    cfg: &TrainingConfig,
) -> Result<()> {
    let n = model.layers().len();
    if grads.weights.len() != n || state.m_weights.len() != n {
        return Err(Error::shape(
            format!("{n} layers"),
            format!(
                "{} gradient layers, {} state layers",
                grads.weights.len(),
                state.m_weights.len()
            ),
        ));
    }
    state.t += 1;
    let (b1, b2, eps, lr) = (cfg.beta1, cfg.beta2, cfg.epsilon, cfg.learning_rate);
    let c1 = 1.0 - b1.powf(state.t as f64);
    let c2 = 1.0 - b2.powf(state.t as f64);
    let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: &f64| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    };
    for (k, layer) in model.layers_mut().iter_mut().enumerate() {
        if layer.weights.dim() != grads.weights[k].dim() || layer.bias.dim() != grads.biases[k].dim()
        {
            return Err(Error::shape(
                format!("layer {k} gradient shaped like its parameters"),
                "mismatched gradient",
            ));
        }
        Zip::from(&mut layer.weights)
            .and(&mut state.m_weights[k])
            .and(&mut state.v_weights[k])
            .and(&grads.weights[k])
            .for_each(update);
        Zip::from(&mut layer.bias)
            .and(&mut state.m_biases[k])
            .and(&mut state.v_biases[k])
            .and(&grads.biases[k])
            .for_each(update);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, DsaeConfig};
    use ndarray::array;

    fn scalar_model(w: f64) -> DsaeModel {
        let cfg = DsaeConfig::from_widths(1, &[(1, Activation::Linear)], &[], Activation::Linear, 0.0, 0)
            .unwrap();
        DsaeModel::from_parameters(
            cfg,
            vec![(array![[w]], array![0.0]), (array![[1.0]], array![0.0])],
        )
        .unwrap()
    }

    fn grads_on_first_weight(model: &DsaeModel, g: f64) -> Gradients {
        let mut grads = Gradients::zeros_like(model);
        grads.weights[0][(0, 0)] = g;
        grads
    }

    fn cfg() -> TrainingConfig {
        TrainingConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            ..TrainingConfig::default()
        }
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut model = scalar_model(0.5);
        let mut state = AdamState::new(&model);
        let g = grads_on_first_weight(&model, 1.0);
        adam_step(&mut model, &g, &mut state, &cfg()).unwrap();
        let w = model.layers()[0].weights[(0, 0)];
        assert!((0.5 - w - 0.001 / (1.0 + 1e-8)).abs() < 1e-15);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut model = scalar_model(0.5);
        let before = model.clone();
        let mut state = AdamState::new(&model);
        let g = Gradients::zeros_like(&model);
        adam_step(&mut model, &g, &mut state, &cfg()).unwrap();
        assert_eq!(model, before);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn two_steps_follow_unrolled_recurrence() {
        let mut model = scalar_model(0.0);
        let mut state = AdamState::new(&model);
        for g in [1.0, 2.0] {
            let grads = grads_on_first_weight(&model, g);
            adam_step(&mut model, &grads, &mut state, &cfg()).unwrap();
        }
        // step 1: m = 0.1, v = 0.001, m_hat = 1, v_hat = 1
        let p1 = 0.0 - 0.001 * 1.0 / (1.0 + 1e-8);
        // step 2: m = 0.09 + 0.2, v = 0.000999 + 0.004
        let m2: f64 = 0.9 * 0.1 + 0.1 * 2.0;
        let v2: f64 = 0.999 * 0.001 + 0.001 * 4.0;
        let m_hat = m2 / (1.0 - 0.81);
        let v_hat = v2 / (1.0 - 0.998001);
        let p2 = p1 - 0.001 * m_hat / (v_hat.sqrt() + 1e-8);
        let w = model.layers()[0].weights[(0, 0)];
        assert!((w - p2).abs() < 1e-15, "{w} vs {p2}");
        assert!((m_hat - 1.526_315_789_473_684).abs() < 1e-12);
    }
}
