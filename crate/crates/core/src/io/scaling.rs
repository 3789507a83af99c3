//! Per-feature min-max scaling fit on one matrix and applied to others.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Activation;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    /// `[0, 1]`
    #[default]
    UnitInterval,
    /// `[-1, 1]`
    SymmetricUnit,
}

impl ScalingMode {
    pub fn range(self) -> (f64, f64) {
        match self {
            ScalingMode::UnitInterval => (0.0, 1.0),
            ScalingMode::SymmetricUnit => (-1.0, 1.0),
        }
    }

    pub fn midpoint(self) -> f64 {
        let (lo, hi) = self.range();
        0.5 * (lo + hi)
    }

    /// Output activation whose range matches the scaled data.
    pub fn output_activation(self) -> Activation {
        match self {
            ScalingMode::UnitInterval => Activation::Sigmoid,
            ScalingMode::SymmetricUnit => Activation::Tanh,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalingMode::UnitInterval => "unit_interval",
            ScalingMode::SymmetricUnit => "symmetric_unit",
        }
    }
}

impl std::str::FromStr for ScalingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit_interval" => Ok(ScalingMode::UnitInterval),
            "symmetric_unit" => Ok(ScalingMode::SymmetricUnit),
            other => Err(Error::InvalidConfig(format!("unknown scaling mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub mode: ScalingMode,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_scaling(x: ArrayView2<f64>, mode: ScalingMode) -> Result<ScalingParams> {
    if x.nrows() == 0 {
        return Err(Error::EmptyInput("cannot fit scaling on an empty matrix".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("cannot fit scaling on non-finite values".into()));
    }
    let min = x.fold_axis(Axis(0), f64::INFINITY, |a, &b| a.min(b)).to_vec();
    let max = x.fold_axis(Axis(0), f64::NEG_INFINITY, |a, &b| a.max(b)).to_vec();
    Ok(ScalingParams { mode, min, max })
}

impl ScalingParams {
    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    fn check(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.n_features() {
            return Err(Error::shape(
                format!("{} columns", self.n_features()),
                format!("{} columns", x.ncols()),
            ));
        }
        Ok(())
    }

    /// Maps each column into the mode's range, clipping values outside the
    /// fitted span. Constant columns map to the midpoint.
    pub fn apply(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(&x)?;
        let (lo, hi) = self.mode.range();
        let mid = self.mode.midpoint();
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (min, max) = (self.min[j], self.max[j]);
            let span = max - min;
            if span > 0.0 {
                col.mapv_inplace(|v| (lo + (hi - lo) * (v - min) / span).clamp(lo, hi));
            } else {
                col.fill(mid);
            }
        }
        Ok(out)
    }

    /// Inverse of [`apply`](Self::apply) for non-constant columns. Constant
    /// columns map back to their fitted value.
    pub fn unscale(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check(&x)?;
        let (lo, hi) = self.mode.range();
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (min, max) = (self.min[j], self.max[j]);
            col.mapv_inplace(|s| min + (s - lo) / (hi - lo) * (max - min));
        }
        Ok(out)
    }
}
