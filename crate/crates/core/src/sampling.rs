//! Per-component data split.
//!
//! The test set holds every minority row plus an equal number of majority rows
//! drawn uniformly without replacement; the training set is the remaining
//! majority rows. Draws are independent across components, so a majority row
//! may serve in several components' test sets.

use ndarray::{Array2, Axis};
use rand::seq::index;

use crate::dataset::{LabeledDataset, MAJORITY, MINORITY};
use crate::error::Result;
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSplit {
    /// Majority-only training rows, `(|M| - |O|) x J`.
    pub train: Array2<f64>,
    /// Minority rows first, then the sampled majority rows; `2|O| x J`.
    pub test: Array2<f64>,
    pub test_labels: Vec<u8>,
    pub component_seed: u64,
    /// Dataset row indices behind `train`, ascending.
    pub train_indices: Vec<usize>,
    /// Dataset row indices behind the majority part of `test`, ascending.
    pub test_majority_indices: Vec<usize>,
}

pub fn build_component_split(data: &LabeledDataset, component_seed: u64) -> Result<ComponentSplit> {
    data.validate_imbalanced()?;
    let minority = data.class_indices(MINORITY);
    let majority = data.class_indices(MAJORITY);
    let o = minority.len();

    let mut rng = rng_from_seed(component_seed);
    let mut picked = vec![false; majority.len()];
    for i in index::sample(&mut rng, majority.len(), o) {
        picked[i] = true;
    }
    let mut test_majority_indices = Vec::with_capacity(o);
    let mut train_indices = Vec::with_capacity(majority.len() - o);
    for (&row, &p) in majority.iter().zip(&picked) {
        if p {
            test_majority_indices.push(row);
        } else {
            train_indices.push(row);
        }
    }

    let test_rows: Vec<usize> = minority
        .iter()
        .chain(test_majority_indices.iter())
        .copied()
        .collect();
    let mut test_labels = vec![MINORITY; o];
    test_labels.extend(std::iter::repeat_n(MAJORITY, o));

    Ok(ComponentSplit {
        train: data.x.select(Axis(0), &train_indices),
        test: data.x.select(Axis(0), &test_rows),
        test_labels,
        component_seed,
        train_indices,
        test_majority_indices,
    })
}
