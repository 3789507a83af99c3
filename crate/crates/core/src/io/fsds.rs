//! Partition of a dataset into the feature selection dataset (FSDS) and the
//! held-out classification dataset (CDS).

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, MAJORITY, MINORITY};
use crate::error::{Error, Result};
use crate::eval::stratified_indices;
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSplitSpec {
    /// Share of each class assigned to the FSDS.
    pub fsds_fraction: f64,
    pub split_seed: u64,
    /// Minority rows kept (uniformly at random) before splitting.
    pub minority_subsample: Option<usize>,
}

impl Default for DatasetSplitSpec {
    fn default() -> Self {
        Self {
            fsds_fraction: 0.75,
            split_seed: 0,
            minority_subsample: None,
        }
    }
}

impl DatasetSplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.fsds_fraction > 0.0 && self.fsds_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "fsds_fraction must lie in (0, 1), got {}",
                self.fsds_fraction
            )));
        }
        if self.minority_subsample == Some(0) {
            return Err(Error::InvalidConfig("minority_subsample must be positive".into()));
        }
        Ok(())
    }
}

/// Row indices of the FSDS and CDS, each ascending. Rows dropped by minority
/// subsampling appear in neither.
pub fn fsds_cds_indices(labels: &[u8], spec: &DatasetSplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    let minority: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == MINORITY).collect();
    let mut kept: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == MAJORITY).collect();
    match spec.minority_subsample {
        Some(m) if m > minority.len() => {
            return Err(Error::InvalidParameter(format!(
                "minority_subsample {m} exceeds the {} minority rows available",
                minority.len()
            )))
        }
        Some(m) => {
            let mut rng = rng_from_seed(derive_seed(spec.split_seed, 0));
            kept.extend(sample(&mut rng, minority.len(), m).into_iter().map(|i| minority[i]));
        }
        None => kept.extend(&minority),
    }
    kept.sort_unstable();
    let kept_labels: Vec<u8> = kept.iter().map(|&i| labels[i]).collect();
    let (a, b) = stratified_indices(&kept_labels, spec.fsds_fraction, derive_seed(spec.split_seed, 1))?;
    Ok((a.into_iter().map(|i| kept[i]).collect(), b.into_iter().map(|i| kept[i]).collect()))
}

pub fn build_fsds_cds(data: &LabeledDataset, spec: &DatasetSplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let (fsds, cds) = fsds_cds_indices(&data.y, spec)?;
    Ok((data.select_rows(&fsds), data.select_rows(&cds)))
}
