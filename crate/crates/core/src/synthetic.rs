//! Planted-feature benchmark data.
//!
//! Every feature is standard normal; minority rows are shifted by `shift`
//! standard deviations on a known subset of features.

use ndarray::Array2;
use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantedSpec {
    pub majority: usize,
    pub minority: usize,
    pub features: usize,
    /// Size of the shifted feature set.
    pub planted: usize,
    pub shift: f64,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            majority: 2000,
            minority: 100,
            features: 100,
            planted: 10,
            shift: 2.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedData {
    /// Majority rows first, then minority rows.
    pub data: LabeledDataset,
    /// Shifted feature indices, ascending.
    pub planted: Vec<usize>,
}

pub fn planted_dataset(spec: &PlantedSpec) -> PlantedData {
    try_planted_dataset(spec).expect("invalid planted spec")
}

pub fn try_planted_dataset(spec: &PlantedSpec) -> Result<PlantedData> {
    if spec.planted > spec.features {
        return Err(Error::InvalidParameter(format!(
            "cannot plant {} of {} features",
            spec.planted, spec.features
        )));
    }
    if spec.majority == 0 || spec.minority == 0 {
        return Err(Error::InvalidParameter("both classes need at least one row".into()));
    }
    let mut planted = sample(&mut rng_from_seed(derive_seed(spec.seed, 0)), spec.features, spec.planted).into_vec();
    planted.sort_unstable();

    let n = spec.majority + spec.minority;
    let mut rng = rng_from_seed(derive_seed(spec.seed, 1));
    let mut x: Array2<f64> = Array2::from_shape_simple_fn((n, spec.features), || StandardNormal.sample(&mut rng));
    for r in spec.majority..n {
        for &f in &planted {
            x[(r, f)] += spec.shift;
        }
    }
    let y = (0..n).map(|r| (r >= spec.majority) as u8).collect();
    let names = (0..spec.features).map(|f| format!("f{f}")).collect();
    Ok(PlantedData {
        data: LabeledDataset::with_names(x, y, Some(names))?,
        planted,
    })
}
