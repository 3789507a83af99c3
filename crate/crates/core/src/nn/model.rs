//! Dense autoencoder with an L1 activity penalty on the innermost code layer.
//!
//! Layer `k` computes `a_k = f_k(a_{k-1} W_k^T + b_k)` on a row-major batch,
//! with `W_k` stored as `(output_width, input_width)`. Encoder layers come
//! first, decoder layers follow; the code activation is the output of the last
//! encoder layer.
//!
//! Per-batch loss:
//!
//! - `mse = sum((x - x_hat)^2) / (n * J)`
//! - `penalty = lambda * sum(|h_code|) / n`
//! - `total = mse + penalty`

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::Activation;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_width: usize,
    pub output_width: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(input_width: usize, output_width: usize, activation: Activation) -> Self {
        Self {
            input_width,
            output_width,
            activation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsaeConfig {
    pub encoder_layers: Vec<LayerSpec>,
    pub decoder_layers: Vec<LayerSpec>,
    /// Weight of the L1 penalty on the code activation.
    pub lambda: f64,
    /// Index (into the full layer stack) of the penalized code layer.
    pub code_layer_index: usize,
    pub seed: u64,
}

impl DsaeConfig {
    pub fn new(
        encoder_layers: Vec<LayerSpec>,
        decoder_layers: Vec<LayerSpec>,
        lambda: f64,
        seed: u64,
    ) -> Result<Self> {
        let config = Self {
            code_layer_index: encoder_layers.len().saturating_sub(1),
            encoder_layers,
            decoder_layers,
            lambda,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Builds a chained architecture from layer widths.
    ///
    /// `encoder` lists `(width, activation)` for every encoder layer, the last
    /// one being the code layer. `decoder_hidden` lists the decoder layers
    /// before the output layer, whose width is `input_width`.
    pub fn from_widths(
        input_width: usize,
        encoder: &[(usize, Activation)],
        decoder_hidden: &[(usize, Activation)],
        output_activation: Activation,
        lambda: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut encoder_layers = Vec::with_capacity(encoder.len());
        let mut width = input_width;
        for &(out, act) in encoder {
            encoder_layers.push(LayerSpec::new(width, out, act));
            width = out;
        }
        let mut decoder_layers = Vec::with_capacity(decoder_hidden.len() + 1);
        for &(out, act) in decoder_hidden {
            decoder_layers.push(LayerSpec::new(width, out, act));
            width = out;
        }
        decoder_layers.push(LayerSpec::new(width, input_width, output_activation));
        Self::new(encoder_layers, decoder_layers, lambda, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.encoder_layers.is_empty() || self.decoder_layers.is_empty() {
            return Err(Error::InvalidConfig(
                "autoencoder needs at least one encoder and one decoder layer".into(),
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be a non-negative finite number, got {}",
                self.lambda
            )));
        }
        if self.code_layer_index + 1 != self.encoder_layers.len() {
            return Err(Error::InvalidConfig(format!(
                "code layer index {} must be the last encoder layer ({})",
                self.code_layer_index,
                self.encoder_layers.len() - 1
            )));
        }
        let layers: Vec<&LayerSpec> = self.layers().collect();
        for (k, spec) in layers.iter().enumerate() {
            if spec.input_width == 0 || spec.output_width == 0 {
                return Err(Error::InvalidConfig(format!("layer {k} has zero width")));
            }
            if k > 0 && layers[k - 1].output_width != spec.input_width {
                return Err(Error::InvalidConfig(format!(
                    "layer {} outputs {} values but layer {k} expects {}",
                    k - 1,
                    layers[k - 1].output_width,
                    spec.input_width
                )));
            }
        }
        let input = self.input_width();
        let output = layers[layers.len() - 1].output_width;
        if input != output {
            return Err(Error::InvalidConfig(format!(
                "autoencoder must reconstruct its input: input width {input}, output width {output}"
            )));
        }
        Ok(())
    }

    pub fn layers(&self) -> impl Iterator<Item = &LayerSpec> {
        self.encoder_layers.iter().chain(self.decoder_layers.iter())
    }

    pub fn input_width(&self) -> usize {
        self.encoder_layers[0].input_width
    }

    pub fn code_width(&self) -> usize {
        self.encoder_layers[self.code_layer_index].output_width
    }

    pub fn parameter_count(&self) -> usize {
        self.layers()
            .map(|l| l.output_width * (l.input_width + 1))
            .sum()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// Shape `(output_width, input_width)`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

/// Per-layer values recorded by [`DsaeModel::forward`]; enough for backprop.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// `pre_activations[k]` is the input of layer `k`'s activation function.
    pub pre_activations: Vec<Array2<f64>>,
    /// `activations[0]` is the batch; `activations[k + 1]` is layer `k`'s output.
    pub activations: Vec<Array2<f64>>,
    code_layer_index: usize,
}

impl ForwardPass {
    pub fn input(&self) -> &Array2<f64> {
        &self.activations[0]
    }

    pub fn reconstruction(&self) -> &Array2<f64> {
        self.activations.last().expect("at least one layer")
    }

    pub fn code(&self) -> &Array2<f64> {
        &self.activations[self.code_layer_index + 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loss {
    pub total: f64,
    pub mse: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &DsaeModel) -> Self {
        Self {
            weights: model
                .layers
                .iter()
                .map(|l| Array2::zeros(l.weights.raw_dim()))
                .collect(),
            biases: model
                .layers
                .iter()
                .map(|l| Array1::zeros(l.bias.raw_dim()))
                .collect(),
        }
    }

    /// All entries in layer order: weights (row-major) then bias, per layer.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter().copied());
            out.extend(b.iter().copied());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DsaeModel {
    layers: Vec<DenseLayer>,
    config: DsaeConfig,
}

impl DsaeModel {
    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases,
    /// drawn from `config.seed`.
    pub fn new(config: DsaeConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rng_from_seed(config.seed);
        let layers = config
            .layers()
            .map(|spec| {
                let limit = (6.0 / (spec.input_width + spec.output_width) as f64).sqrt();
                let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
                let weights = Array2::from_shape_simple_fn((spec.output_width, spec.input_width), || {
                    dist.sample(&mut rng)
                });
                DenseLayer {
                    weights,
                    bias: Array1::zeros(spec.output_width),
                    activation: spec.activation,
                }
            })
            .collect();
        Ok(Self { layers, config })
    }

    /// Builds a model from explicit `(weights, bias)` pairs, one per layer.
    pub fn from_parameters(
        config: DsaeConfig,
        parameters: Vec<(Array2<f64>, Array1<f64>)>,
    ) -> Result<Self> {
        config.validate()?;
        let specs: Vec<LayerSpec> = config.layers().copied().collect();
        if specs.len() != parameters.len() {
            return Err(Error::shape(
                format!("{} layers", specs.len()),
                format!("{} layers", parameters.len()),
            ));
        }
        let mut layers = Vec::with_capacity(specs.len());
        for (k, (spec, (weights, bias))) in specs.iter().zip(parameters).enumerate() {
            if weights.dim() != (spec.output_width, spec.input_width)
                || bias.len() != spec.output_width
            {
                return Err(Error::shape(
                    format!(
                        "layer {k}: weights {}x{}, bias {}",
                        spec.output_width, spec.input_width, spec.output_width
                    ),
                    format!(
                        "weights {}x{}, bias {}",
                        weights.nrows(),
                        weights.ncols(),
                        bias.len()
                    ),
                ));
            }
            if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NumericOverflow { layer: k });
            }
            layers.push(DenseLayer {
                weights,
                bias,
                activation: spec.activation,
            });
        }
        Ok(Self { layers, config })
    }

    pub fn config(&self) -> &DsaeConfig {
        &self.config
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_width(&self) -> usize {
        self.config.input_width()
    }

    fn check_input(&self, batch: &ArrayView2<f64>) -> Result<()> {
        let j = self.input_width();
        if batch.ncols() != j {
            return Err(Error::shape(
                format!("{j} columns"),
                format!("{} columns", batch.ncols()),
            ));
        }
        Ok(())
    }

    pub fn forward(&self, batch: ArrayView2<f64>) -> Result<ForwardPass> {
        self.check_input(&batch)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pre_activations = Vec::with_capacity(self.layers.len());
        activations.push(batch.to_owned());
        for (k, layer) in self.layers.iter().enumerate() {
            let z = activations[k].dot(&layer.weights.t()) + &layer.bias;
            let act = layer.activation;
            let a = z.mapv(|v| act.apply(v));
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericOverflow { layer: k });
            }
            pre_activations.push(z);
            activations.push(a);
        }
        Ok(ForwardPass {
            pre_activations,
            activations,
            code_layer_index: self.config.code_layer_index,
        })
    }

    /// Forward pass that keeps only the output.
    pub fn reconstruct(&self, batch: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&batch)?;
        let mut current = batch.to_owned();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = current.dot(&layer.weights.t()) + &layer.bias;
            let act = layer.activation;
            z.mapv_inplace(|v| act.apply(v));
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericOverflow { layer: k });
            }
            current = z;
        }
        Ok(current)
    }

    pub fn loss_from_pass(&self, pass: &ForwardPass) -> Loss {
        let x = pass.input();
        let n = x.nrows().max(1) as f64;
        let j = x.ncols() as f64;
        let mut sq = 0.0;
        Zip::from(x).and(pass.reconstruction()).for_each(|&a, &b| {
            let d = a - b;
            sq += d * d;
        });
        let mse = sq / (n * j);
        let penalty = if self.config.lambda == 0.0 {
            0.0
        } else {
            self.config.lambda * pass.code().iter().map(|h| h.abs()).sum::<f64>() / n
        };
        Loss {
            total: mse + penalty,
            mse,
            penalty,
        }
    }

    pub fn loss_with_penalty(&self, batch: ArrayView2<f64>) -> Result<Loss> {
        let pass = self.forward(batch)?;
        Ok(self.loss_from_pass(&pass))
    }

    /// Gradients of [`Loss::total`] for the batch recorded in `pass`.
    pub fn backward(&self, pass: &ForwardPass) -> Gradients {
        self.backward_terms(pass, 1.0, 1.0)
    }

    /// Gradient of `mse_weight * mse + penalty_weight * penalty`.
    pub(crate) fn backward_terms(
        &self,
        pass: &ForwardPass,
        mse_weight: f64,
        penalty_weight: f64,
    ) -> Gradients {
        let x = pass.input();
        let n = x.nrows().max(1) as f64;
        let scale = 2.0 * mse_weight / (n * x.ncols() as f64);
        let mut delta = (pass.reconstruction() - x) * scale;

        let code = self.config.code_layer_index;
        let l1_scale = penalty_weight * self.config.lambda / n;
        let mut weights = Vec::with_capacity(self.layers.len());
        let mut biases = Vec::with_capacity(self.layers.len());

        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            if k == code && l1_scale != 0.0 {
                // d|h|/dh with the subgradient at 0 taken as 0.
                Zip::from(&mut delta)
                    .and(&pass.activations[k + 1])
                    .for_each(|d, &h| {
                        if h > 0.0 {
                            *d += l1_scale;
                        } else if h < 0.0 {
                            *d -= l1_scale;
                        }
                    });
            }
            let act = layer.activation;
            Zip::from(&mut delta)
                .and(&pass.pre_activations[k])
                .and(&pass.activations[k + 1])
                .for_each(|d, &z, &a| *d *= act.derivative(z, a));
            weights.push(delta.t().dot(&pass.activations[k]));
            biases.push(delta.sum_axis(Axis(0)));
            if k > 0 {
                delta = delta.dot(&layer.weights);
            }
        }
        weights.reverse();
        biases.reverse();
        Gradients { weights, biases }
    }

    /// Element-wise squared reconstruction error `(x - x_hat)^2`.
    pub fn reconstruction_errors(&self, matrix: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut out = self.reconstruct(matrix)?;
        Zip::from(&mut out).and(&matrix).for_each(|r, &x| {
            let d = x - *r;
            *r = d * d;
        });
        Ok(out)
    }

    /// Flat parameter vector in the same order as [`Gradients::to_flat`].
    pub fn parameters_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.config.parameter_count());
        for l in &self.layers {
            out.extend(l.weights.iter().copied());
            out.extend(l.bias.iter().copied());
        }
        out
    }

    pub fn set_parameter(&mut self, index: usize, value: f64) {
        let mut idx = index;
        for l in &mut self.layers {
            let nw = l.weights.len();
            if idx < nw {
                let cols = l.weights.ncols();
                l.weights[(idx / cols, idx % cols)] = value;
                return;
            }
            idx -= nw;
            if idx < l.bias.len() {
                l.bias[idx] = value;
                return;
            }
            idx -= l.bias.len();
        }
        panic!("parameter index {index} out of range");
    }

    /// Overwrites every weight and bias with a uniform draw from `[-scale, scale]`.
    pub fn random_uniform_parameters<R: Rng>(&mut self, rng: &mut R, scale: f64) {
        let dist = Uniform::new_inclusive(-scale, scale).expect("finite scale");
        for l in &mut self.layers {
            l.weights.mapv_inplace(|_| dist.sample(rng));
            l.bias.mapv_inplace(|_| dist.sample(rng));
        }
    }
}
