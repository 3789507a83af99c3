//! Labeled binary dataset: a row-major feature matrix with 0/1 labels.
//!
//! Label `1` is the minority class throughout the crate.

use ndarray::{Array2, Axis};
use crate::error::{Error, Result};

pub const MAJORITY: u8 = 0;
pub const MINORITY: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: Array2<f64>,
    pub y: Vec<u8>,
    pub feature_names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn new(x: Array2<f64>, y: Vec<u8>) -> Result<Self> {
        Self::with_names(x, y, None)
    }

    pub fn with_names(
        x: Array2<f64>,
        y: Vec<u8>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::shape(
                format!("{} labels", x.nrows()),
                format!("{} labels", y.len()),
            ));
        }
        if let Some(bad) = y.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParameter(format!(
                "labels must be 0 or 1, found {bad}"
            )));
        }
        if let Some(names) = &feature_names {
            if names.len() != x.ncols() {
                return Err(Error::shape(
                    format!("{} feature names", x.ncols()),
                    format!("{} feature names", names.len()),
                ));
            }
        }
        Ok(Self {
            x,
            y,
            feature_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn class_indices(&self, class: u8) -> Vec<usize> {
        self.y
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn class_count(&self, class: u8) -> usize {
        self.y.iter().filter(|&&l| l == class).count()
    }

    /// Checks that both classes are present and the minority is strictly smaller.
    pub fn validate_imbalanced(&self) -> Result<()> {
        let minority = self.class_count(MINORITY);
        let majority = self.class_count(MAJORITY);
        if minority == 0 {
            return Err(Error::ClassMissing(MINORITY));
        }
        if majority == 0 {
            return Err(Error::ClassMissing(MAJORITY));
        }
        if majority <= minority {
            return Err(Error::InsufficientMajority { majority, minority });
        }
        Ok(())
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Self {
            x: self.x.select(Axis(1), columns),
            y: self.y.clone(),
            feature_names: self
                .feature_names
                .as_ref()
                .map(|names| columns.iter().map(|&c| names[c].clone()).collect()),
        }
    }

    /// Feature names, falling back to `f0`, `f1`, ... when none were loaded.
    pub fn names(&self) -> Vec<String> {
        match &self.feature_names {
            Some(names) => names.clone(),
            None => (0..self.n_features()).map(|j| format!("f{j}")).collect(),
        }
    }
}
