//! Ensemble of sparse autoencoders and the reconstruction-error selection rule.
//!
//! For each component `b`: build its split, train an autoencoder on the
//! majority-only rows, and record squared reconstruction errors of the
//! balanced test rows. Stacking those blocks gives `Q` (K x J, K = 2|O|B) with
//! a label per row. Per-feature class means of `Q` give `l_min` and `l_maj`;
//! their difference `delta` is thresholded at its empirical `δ`-quantile and
//! features strictly above the threshold are selected.

use ndarray::{concatenate, Array2, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, MAJORITY, MINORITY};
use crate::error::{Error, Result};
use crate::nn::{train, DsaeConfig, DsaeModel, TrainingConfig};
use crate::sampling::build_component_split;
use crate::seed::derive_seed;

/// δ values evaluated in the subset-performance experiments.
pub const DEFAULT_DELTA_GRID: [f64; 9] = [0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.97, 0.99];

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    /// Number of components `B`.
    pub components: usize,
    /// Architecture template; its seed is replaced per component.
    pub dsae: DsaeConfig,
    pub training: TrainingConfig,
    pub master_seed: u64,
    /// Maximum number of components trained concurrently.
    pub parallelism: usize,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.components == 0 {
            return Err(Error::InvalidConfig("number of components must be >= 1".into()));
        }
        if self.parallelism == 0 {
            return Err(Error::InvalidConfig("parallelism must be >= 1".into()));
        }
        self.dsae.validate()?;
        self.training.validate()
    }

    /// Seed of component `index`; drives both its sample and its model.
    pub fn component_seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }
}

/// Stacked per-feature reconstruction errors with row labels.
#[derive(Debug, Clone, PartialEq)]
pub struct REMatrix {
    pub q: Array2<f64>,
    pub labels: Vec<u8>,
}

impl REMatrix {
    pub fn new(q: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        if q.nrows() != labels.len() {
            return Err(Error::shape(
                format!("{} labels", q.nrows()),
                format!("{} labels", labels.len()),
            ));
        }
        let minority = labels.iter().filter(|&&l| l == MINORITY).count();
        let majority = labels.iter().filter(|&&l| l == MAJORITY).count();
        if minority + majority != labels.len() {
            return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
        }
        if minority == 0 {
            return Err(Error::ClassMissing(MINORITY));
        }
        if majority == 0 {
            return Err(Error::ClassMissing(MAJORITY));
        }
        if q.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "reconstruction errors must be non-negative".into(),
            ));
        }
        Ok(Self { q, labels })
    }

    /// Total number of rows `K`.
    pub fn k(&self) -> usize {
        self.q.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.q.ncols()
    }

    fn class_rows(&self, class: u8) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect()
    }
}

struct ComponentOutput {
    errors: Array2<f64>,
    labels: Vec<u8>,
}

fn run_component(data: &LabeledDataset, cfg: &EnsembleConfig, index: usize) -> Result<ComponentOutput> {
    let seed = cfg.component_seed(index);
    let split = build_component_split(data, seed)?;
    let mut model = DsaeModel::new(cfg.dsae.with_seed(derive_seed(seed, 0)))?;
    let history = train(&mut model, split.train.view(), &cfg.training)?;
    if let Some(last) = history.last() {
        log::debug!("component {index}: final training loss {last:.6e}");
    }
    let errors = model.reconstruction_errors(split.test.view())?;
    Ok(ComponentOutput {
        errors,
        labels: split.test_labels,
    })
}

/// Trains every component and stacks their test reconstruction errors.
///
/// Rows are ordered by component index, minority rows first inside each
/// block. The result does not depend on `parallelism`.
pub fn run_ensemble(data: &LabeledDataset, cfg: &EnsembleConfig) -> Result<REMatrix> {
    cfg.validate()?;
    data.validate_imbalanced()?;
    if cfg.dsae.input_width() != data.n_features() {
        return Err(Error::shape(
            format!("{} features (autoencoder input width)", cfg.dsae.input_width()),
            format!("{} features", data.n_features()),
        ));
    }

    let tag = |index: usize| move |e: Error| Error::Component {
        index,
        source: Box::new(e),
    };
    let outputs: Vec<ComponentOutput> = if cfg.parallelism == 1 {
        (0..cfg.components)
            .map(|b| run_component(data, cfg, b).map_err(tag(b)))
            .collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallelism)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
        pool.install(|| {
            (0..cfg.components)
                .into_par_iter()
                .map(|b| run_component(data, cfg, b).map_err(tag(b)))
                .collect::<Result<_>>()
        })?
    };

    let views: Vec<_> = outputs.iter().map(|o| o.errors.view()).collect();
    let q = concatenate(Axis(0), &views).expect("blocks share the feature width");
    let labels = outputs.into_iter().flat_map(|o| o.labels).collect();
    REMatrix::new(q, labels)
}

/// Per-class central estimator of the reconstruction error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    Median,
}

fn median(column: ArrayView1<f64>, rows: &[usize]) -> f64 {
    let mut v: Vec<f64> = rows.iter().map(|&r| column[r]).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `(l_min, l_maj)` under the chosen estimator.
pub fn class_aggregate_re(q: &REMatrix, aggregation: Aggregation) -> (Vec<f64>, Vec<f64>) {
    let min_rows = q.class_rows(MINORITY);
    let maj_rows = q.class_rows(MAJORITY);
    let estimate = |rows: &[usize]| -> Vec<f64> {
        q.q.columns()
            .into_iter()
            .map(|col| match aggregation {
                Aggregation::Mean => rows.iter().map(|&r| col[r]).sum::<f64>() / rows.len() as f64,
                Aggregation::Median => median(col, rows),
            })
            .collect()
    };
    (estimate(&min_rows), estimate(&maj_rows))
}

/// Per-feature mean reconstruction error of the minority and majority rows.
pub fn class_mean_re(q: &REMatrix) -> (Vec<f64>, Vec<f64>) {
    class_aggregate_re(q, Aggregation::Mean)
}

pub fn delta_re(l_min: &[f64], l_maj: &[f64]) -> Result<Vec<f64>> {
    if l_min.len() != l_maj.len() {
        return Err(Error::shape(
            format!("{} entries", l_min.len()),
            format!("{} entries", l_maj.len()),
        ));
    }
    Ok(l_min.iter().zip(l_maj).map(|(a, b)| a - b).collect())
}

/// Empirical quantile with linear interpolation between order statistics at
/// position `(n - 1) * level` of the ascending sort.
pub fn quantile_linear(values: &[f64], level: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = (sorted.len() - 1) as f64 * level;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub delta_quantile: f64,
    pub threshold: f64,
    /// Ascending feature indices with `delta > threshold`.
    pub selected: Vec<usize>,
}

fn check_level(delta_quantile: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta_quantile) {
        return Err(Error::InvalidParameter(format!(
            "quantile level must lie in [0, 1), got {delta_quantile}"
        )));
    }
    Ok(())
}

pub fn select_features(delta: &[f64], delta_quantile: f64) -> Result<FeatureSelection> {
    check_level(delta_quantile)?;
    if delta.is_empty() {
        return Err(Error::EmptyInput("delta vector is empty".into()));
    }
    if delta.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("delta contains non-finite values".into()));
    }
    let threshold = quantile_linear(delta, delta_quantile);
    let selected = delta
        .iter()
        .enumerate()
        .filter(|(_, &d)| d > threshold)
        .map(|(j, _)| j)
        .collect();
    Ok(FeatureSelection {
        delta_quantile,
        threshold,
        selected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub delta_quantile: f64,
    pub threshold: f64,
    pub selected: Vec<usize>,
    pub l_min: Vec<f64>,
    pub l_maj: Vec<f64>,
    pub delta: Vec<f64>,
}

impl SelectionResult {
    pub fn n_selected(&self) -> usize {
        self.selected.len()
    }
}

pub fn select_at_thresholds(q: &REMatrix, deltas: &[f64]) -> Result<Vec<SelectionResult>> {
    select_at_thresholds_with(q, deltas, Aggregation::Mean)
}

pub fn select_at_thresholds_with(
    q: &REMatrix,
    deltas: &[f64],
    aggregation: Aggregation,
) -> Result<Vec<SelectionResult>> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("no quantile levels given".into()));
    }
    for &d in deltas {
        check_level(d)?;
    }
    let (l_min, l_maj) = class_aggregate_re(q, aggregation);
    let delta = delta_re(&l_min, &l_maj)?;
    deltas
        .iter()
        .map(|&level| {
            let s = select_features(&delta, level)?;
            Ok(SelectionResult {
                delta_quantile: s.delta_quantile,
                threshold: s.threshold,
                selected: s.selected,
                l_min: l_min.clone(),
                l_maj: l_maj.clone(),
                delta: delta.clone(),
            })
        })
        .collect()
}
