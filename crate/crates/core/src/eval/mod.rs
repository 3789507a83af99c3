//! Subset evaluation: classifiers trained on the classification dataset
//! restricted to a feature set, scored by AUROC and sensitivity.

mod chi2;
mod classifiers;
mod metrics;
mod split;

pub use chi2::{chi2_rank, chi2_scores};
pub use classifiers::{
    fit_classifier, fit_gaussian_nb, fit_knn, fit_logistic_regression, logistic_objective, Classifier,
    ClassifierKind, ClassifierParams, GaussianNb, Knn, LogisticConfig, LogisticRegression,
};
pub use metrics::{auroc, sensitivity};
pub use split::{stratified_indices, stratified_split};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::ensemble::SelectionResult;
use crate::error::{Error, Result};
use crate::seed::derive_seed;

pub const DEFAULT_CUTOFF: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalProtocol {
    pub train_fraction: f64,
    pub split_seed: u64,
    pub classifiers: Vec<ClassifierKind>,
    pub trials: usize,
    pub knn_k: usize,
    /// Score threshold for sensitivity.
    pub cutoff: f64,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            split_seed: 0,
            classifiers: ClassifierKind::ALL.to_vec(),
            trials: 5,
            knn_k: 5,
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

impl EvalProtocol {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be positive".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::InvalidConfig("at least one classifier is required".into()));
        }
        if self.knn_k == 0 {
            return Err(Error::InvalidConfig("knn_k must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.cutoff) {
            return Err(Error::InvalidConfig(format!("cutoff must lie in [0, 1], got {}", self.cutoff)));
        }
        Ok(())
    }

    fn classifier_params(&self) -> ClassifierParams {
        ClassifierParams {
            knn_k: self.knn_k,
            ..ClassifierParams::default()
        }
    }

    /// Split seed used by trial `t`.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.split_seed, trial as u64)
    }
}

/// A named feature subset to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub method: String,
    pub delta_quantile: Option<f64>,
    pub features: Vec<usize>,
}

impl FeatureSet {
    pub fn all_features(n_features: usize) -> Self {
        Self {
            method: "all".into(),
            delta_quantile: None,
            features: (0..n_features).collect(),
        }
    }

    pub fn from_selection(method: &str, selection: &SelectionResult) -> Self {
        Self {
            method: method.into(),
            delta_quantile: Some(selection.delta_quantile),
            features: selection.selected.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub method: String,
    pub delta_quantile: Option<f64>,
    pub classifier: ClassifierKind,
    pub trial: usize,
    pub n_features: usize,
    pub auroc: f64,
    pub sensitivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub method: String,
    pub delta_quantile: Option<f64>,
    pub classifier: ClassifierKind,
    pub n_features: usize,
    pub trials: usize,
    pub auroc_mean: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub auroc_std: f64,
    pub sensitivity_mean: f64,
    pub sensitivity_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalWarning {
    pub method: String,
    pub delta_quantile: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub records: Vec<EvalRecord>,
    pub summaries: Vec<EvalSummary>,
    pub warnings: Vec<EvalWarning>,
}

impl EvalReport {
    /// Summary row for a method / level / classifier triple.
    pub fn summary(&self, method: &str, delta_quantile: Option<f64>, classifier: ClassifierKind) -> Option<&EvalSummary> {
        self.summaries
            .iter()
            .find(|s| s.method == method && s.delta_quantile == delta_quantile && s.classifier == classifier)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Evaluates every feature set with every classifier over all trials.
///
/// Trial `t` uses the same stratified split for every set, so identical
/// feature sets produce identical metrics. Empty sets are skipped with a
/// warning.
pub fn evaluate_feature_sets(cds: &LabeledDataset, sets: &[FeatureSet], protocol: &EvalProtocol) -> Result<EvalReport> {
    protocol.validate()?;
    let j = cds.n_features();
    let mut warnings = Vec::new();
    let mut active = Vec::new();
    for set in sets {
        if let Some(&bad) = set.features.iter().find(|&&f| f >= j) {
            return Err(Error::InvalidParameter(format!(
                "feature index {bad} out of range for {j} features ({} set)",
                set.method
            )));
        }
        if set.features.is_empty() {
            log::warn!("{} selection at {:?} is empty; skipping", set.method, set.delta_quantile);
            warnings.push(EvalWarning {
                method: set.method.clone(),
                delta_quantile: set.delta_quantile,
                message: "empty selection; evaluation skipped".into(),
            });
        } else {
            active.push(set);
        }
    }

    let splits = (0..protocol.trials)
        .map(|t| stratified_indices(&cds.y, protocol.train_fraction, protocol.trial_seed(t)))
        .collect::<Result<Vec<_>>>()?;

    let params = protocol.classifier_params();
    let tasks: Vec<(usize, usize, ClassifierKind)> = active
        .iter()
        .enumerate()
        .flat_map(|(s, _)| {
            protocol
                .classifiers
                .iter()
                .flat_map(move |&c| (0..protocol.trials).map(move |t| (s, t, c)))
        })
        .collect();

    let records = tasks
        .par_iter()
        .map(|&(s, t, kind)| {
            let set = active[s];
            let (train_rows, test_rows) = &splits[t];
            let restricted = cds.select_columns(&set.features);
            let train = restricted.select_rows(train_rows);
            let test = restricted.select_rows(test_rows);
            let model = fit_classifier(kind, &train, &params)?;
            let scores = model.predict_scores(test.x.view())?;
            Ok(EvalRecord {
                method: set.method.clone(),
                delta_quantile: set.delta_quantile,
                classifier: kind,
                trial: t,
                n_features: set.features.len(),
                auroc: auroc(&scores, &test.y)?,
                sensitivity: sensitivity(&scores, &test.y, protocol.cutoff)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let summaries = records
        .chunks(protocol.trials)
        .map(|group| {
            let first = &group[0];
            let a: Vec<f64> = group.iter().map(|r| r.auroc).collect();
            let s: Vec<f64> = group.iter().map(|r| r.sensitivity).collect();
            let (auroc_mean, auroc_std) = mean_std(&a);
            let (sensitivity_mean, sensitivity_std) = mean_std(&s);
            EvalSummary {
                method: first.method.clone(),
                delta_quantile: first.delta_quantile,
                classifier: first.classifier,
                n_features: first.n_features,
                trials: group.len(),
                auroc_mean,
                auroc_std,
                sensitivity_mean,
                sensitivity_std,
            }
        })
        .collect();

    Ok(EvalReport {
        records,
        summaries,
        warnings,
    })
}

/// Evaluates DSAEE selections plus an all-features baseline.
pub fn evaluate_selection(
    cds: &LabeledDataset,
    selections: &[SelectionResult],
    protocol: &EvalProtocol,
) -> Result<EvalReport> {
    let mut sets = vec![FeatureSet::all_features(cds.n_features())];
    sets.extend(selections.iter().map(|s| FeatureSet::from_selection("dsaee", s)));
    evaluate_feature_sets(cds, &sets, protocol)
}
