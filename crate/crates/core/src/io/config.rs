//! Run configuration: a TOML document with `[data]`, `[split]`, `[ensemble]`,
//! `[training]`, `[selection]` and `[eval]` sections.
//!
//! Values given on the command line override the file, which overrides a
//! dataset preset, which overrides built-in defaults. [`RunConfig::resolve`]
//! fills every gap so the resolved document can be written back as a
//! manifest that reproduces the run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fsds::DatasetSplitSpec;
use super::idx::IdxSelection;
use super::scaling::ScalingMode;
use super::table::{LabelColumn, LabelSpec};
use crate::ensemble::{Aggregation, EnsembleConfig, DEFAULT_DELTA_GRID};
use crate::error::{Error, Result};
use crate::eval::EvalProtocol;
use crate::nn::{Activation, DsaeConfig, TrainingConfig};
use crate::synthetic::PlantedSpec;

pub const DEFAULT_LAMBDA: f64 = 1e-5;
pub const DEFAULT_COMPONENTS: usize = 25;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    #[default]
    Csv,
    Idx,
    /// Generated planted-feature data, see [`PlantedSpec`].
    Planted,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default)]
    pub format: DataFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub label_column: LabelColumn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minority_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<IdxSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<PlantedSpec>,
}

impl DataConfig {
    pub fn label_spec(&self) -> LabelSpec {
        LabelSpec {
            column: self.label_column.clone(),
            minority: self.minority_label.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let need = |p: &Option<PathBuf>, key: &str| -> Result<()> {
            match p {
                None => Err(Error::InvalidConfig(format!(
                    "[data] {key} is required for format `{}`",
                    self.format_name()
                ))),
                Some(path) if !path.exists() => Err(Error::InvalidConfig(format!(
                    "[data] {key} `{}` does not exist",
                    path.display()
                ))),
                Some(_) => Ok(()),
            }
        };
        match self.format {
            DataFormat::Csv => need(&self.path, "path"),
            DataFormat::Idx => {
                need(&self.images, "images")?;
                need(&self.labels, "labels")?;
                if self.classes.is_none() {
                    return Err(Error::InvalidConfig("[data.classes] is required for format `idx`".into()));
                }
                Ok(())
            }
            DataFormat::Planted => match self.planted {
                Some(_) => Ok(()),
                None => Err(Error::InvalidConfig("[data.planted] is required for format `planted`".into())),
            },
        }
    }

    fn format_name(&self) -> &'static str {
        match self.format {
            DataFormat::Csv => "csv",
            DataFormat::Idx => "idx",
            DataFormat::Planted => "planted",
        }
    }

    fn absolutize(&mut self, base: &Path) {
        for p in [&mut self.path, &mut self.images, &mut self.labels].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// One layer of an architecture description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerWidth {
    pub width: usize,
    pub activation: Activation,
}

fn layers(spec: &[(usize, Activation)]) -> Vec<LayerWidth> {
    spec.iter()
        .map(|&(width, activation)| LayerWidth { width, activation })
        .collect()
}

/// Published architectures and training schedules for benchmark datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Isolet,
    Gisette,
    Mnist,
    Fmnist,
    EpilepticSeizure,
}

pub struct PresetValues {
    pub input_width: usize,
    pub encoder: Vec<LayerWidth>,
    pub decoder: Vec<LayerWidth>,
    pub output_activation: Activation,
    pub epochs: usize,
    pub batch_size: usize,
    pub components: usize,
}

impl Preset {
    pub fn values(self) -> PresetValues {
        use Activation::{Relu, Sigmoid, Tanh};
        let (input_width, encoder, decoder, output_activation, epochs, batch_size, components) = match self {
            Preset::Isolet => (
                617,
                layers(&[(600, Tanh), (500, Tanh), (250, Tanh), (200, Relu)]),
                layers(&[(250, Tanh), (500, Tanh), (600, Tanh)]),
                Tanh,
                100,
                10,
                25,
            ),
            Preset::Gisette => (
                5000,
                layers(&[(1000, Sigmoid), (500, Sigmoid), (250, Relu), (250, Relu)]),
                layers(&[(250, Relu), (500, Sigmoid), (1000, Sigmoid)]),
                Sigmoid,
                50,
                1000,
                25,
            ),
            Preset::Mnist => (
                784,
                layers(&[(700, Sigmoid), (500, Sigmoid), (250, Sigmoid), (200, Sigmoid)]),
                layers(&[(250, Sigmoid), (500, Sigmoid), (700, Sigmoid)]),
                Sigmoid,
                50,
                100,
                50,
            ),
            Preset::Fmnist => (
                784,
                layers(&[(700, Tanh), (500, Tanh), (250, Tanh), (200, Relu)]),
                layers(&[(250, Tanh), (500, Tanh), (700, Tanh)]),
                Tanh,
                100,
                100,
                50,
            ),
            Preset::EpilepticSeizure => (
                178,
                layers(&[(132, Tanh), (64, Tanh), (32, Tanh)]),
                layers(&[(64, Tanh), (132, Tanh)]),
                Tanh,
                200,
                1000,
                30,
            ),
        };
        PresetValues {
            input_width,
            encoder,
            decoder,
            output_activation,
            epochs,
            batch_size,
            components,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
    pub master_seed: u64,
    pub parallelism: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub aggregation: Aggregation,
    /// Encoder layers; the last one is the penalized code layer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub encoder: Option<Vec<LayerWidth>>,
    /// Decoder layers before the output layer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoder: Option<Vec<LayerWidth>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_activation: Option<Activation>,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            preset: None,
            components: None,
            master_seed: 0,
            parallelism: 1,
            lambda: None,
            aggregation: Aggregation::Mean,
            encoder: None,
            decoder: None,
            output_activation: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelectionSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub data: DataConfig,
    #[serde(default)]
    pub split: DatasetSplitSpec,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub selection: SelectionSection,
    #[serde(default)]
    pub eval: EvalProtocol,
}

/// Everything a run needs, with no gaps left.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    /// Fully explicit configuration, suitable as a manifest.
    pub config: RunConfig,
    pub scaling: ScalingMode,
    pub ensemble: EnsembleConfig,
    pub aggregation: Aggregation,
    pub deltas: Vec<f64>,
    pub split: DatasetSplitSpec,
    pub eval: EvalProtocol,
}

impl RunConfig {
    /// Parses a document; relative paths are taken relative to `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("invalid config: {e}")))?;
        cfg.data.absolutize(base_dir);
        if let Some(out) = &cfg.output_dir {
            if out.is_relative() {
                cfg.output_dir = Some(base_dir.join(out));
            }
        }
        Ok(cfg)
    }

    /// Parses a config file without checking that data paths exist.
    /// Relative paths are resolved against the file's directory.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
        let base = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let base = std::fs::canonicalize(base).map_err(|e| Error::io(base, e))?;
        Self::from_toml_str(&text, &base)
    }

    /// Reads a config file and checks that its data paths exist.
    pub fn load(path: &Path) -> Result<Self> {
        let cfg = Self::read(path)?;
        cfg.data.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Fills every unset value for a dataset with `n_features` columns.
    pub fn resolve(&self, n_features: usize) -> Result<ResolvedRun> {
        if n_features == 0 {
            return Err(Error::InvalidConfig("dataset has no features".into()));
        }
        self.split.validate()?;
        self.eval.validate()?;
        let e = &self.ensemble;
        if e.parallelism == 0 {
            return Err(Error::InvalidConfig("parallelism must be at least 1".into()));
        }
        let preset = e.preset.map(Preset::values);
        if let Some(p) = &preset {
            if p.input_width != n_features {
                return Err(Error::InvalidConfig(format!(
                    "preset `{:?}` expects {} features but the data has {n_features}",
                    e.preset.expect("preset present"),
                    p.input_width
                )));
            }
        }

        let half = (n_features / 2).max(1);
        let fifth = (n_features / 5).max(1);
        let encoder = e
            .encoder
            .clone()
            .or_else(|| preset.as_ref().map(|p| p.encoder.clone()))
            .unwrap_or_else(|| layers(&[(half, Activation::Tanh), (fifth, Activation::Tanh)]));
        let decoder = e
            .decoder
            .clone()
            .or_else(|| preset.as_ref().map(|p| p.decoder.clone()))
            .unwrap_or_else(|| layers(&[(half, Activation::Tanh)]));
        let chosen_output = e.output_activation.or(preset.as_ref().map(|p| p.output_activation));
        let scaling = self.data.scaling.unwrap_or(match chosen_output {
            Some(Activation::Tanh) | Some(Activation::Linear) => ScalingMode::SymmetricUnit,
            _ => ScalingMode::UnitInterval,
        });
        let output_activation = chosen_output.unwrap_or(scaling.output_activation());
        let lambda = e.lambda.unwrap_or(DEFAULT_LAMBDA);
        let components = e
            .components
            .or(preset.as_ref().map(|p| p.components))
            .unwrap_or(DEFAULT_COMPONENTS);

        let t = &self.training;
        let base = TrainingConfig::default();
        let training = TrainingConfig {
            epochs: t.epochs.or(preset.as_ref().map(|p| p.epochs)).unwrap_or(base.epochs),
            batch_size: t
                .batch_size
                .or(preset.as_ref().map(|p| p.batch_size))
                .unwrap_or(base.batch_size),
            learning_rate: t.learning_rate.unwrap_or(base.learning_rate),
            beta1: t.beta1.unwrap_or(base.beta1),
            beta2: t.beta2.unwrap_or(base.beta2),
            epsilon: t.epsilon.unwrap_or(base.epsilon),
        };
        training.validate()?;

        let pairs = |v: &[LayerWidth]| v.iter().map(|l| (l.width, l.activation)).collect::<Vec<_>>();
        let dsae = DsaeConfig::from_widths(
            n_features,
            &pairs(&encoder),
            &pairs(&decoder),
            output_activation,
            lambda,
            0,
        )?;
        let ensemble = EnsembleConfig {
            components,
            dsae,
            training,
            master_seed: e.master_seed,
            parallelism: e.parallelism,
        };
        ensemble.validate()?;

        let deltas = self
            .selection
            .deltas
            .clone()
            .unwrap_or_else(|| DEFAULT_DELTA_GRID.to_vec());
        if deltas.is_empty() {
            return Err(Error::InvalidConfig("[selection] deltas must not be empty".into()));
        }
        if let Some(bad) = deltas.iter().find(|d| !(0.0..1.0).contains(*d)) {
            return Err(Error::InvalidConfig(format!("delta {bad} must lie in [0, 1)")));
        }

        let mut config = self.clone();
        config.data.scaling = Some(scaling);
        config.ensemble = EnsembleSection {
            preset: e.preset,
            components: Some(components),
            master_seed: e.master_seed,
            parallelism: e.parallelism,
            lambda: Some(lambda),
            aggregation: e.aggregation,
            encoder: Some(encoder),
            decoder: Some(decoder),
            output_activation: Some(output_activation),
        };
        config.training = TrainingSection {
            epochs: Some(training.epochs),
            batch_size: Some(training.batch_size),
            learning_rate: Some(training.learning_rate),
            beta1: Some(training.beta1),
            beta2: Some(training.beta2),
            epsilon: Some(training.epsilon),
        };
        config.selection.deltas = Some(deltas.clone());

        Ok(ResolvedRun {
            config,
            scaling,
            ensemble,
            aggregation: e.aggregation,
            deltas,
            split: self.split,
            eval: self.eval.clone(),
        })
    }
}
