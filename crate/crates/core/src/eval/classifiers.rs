//! Small binary classifiers used to score selected feature subsets.
//!
//! Hyperparameters are fixed so evaluations are reproducible:
//!
//! - Gaussian naive Bayes: variance smoothing `1e-9 * max feature variance`.
//! - Logistic regression: full-batch gradient descent on the mean log-loss
//!   plus `||w||^2 / (2 C n)` with `C = 1`, step 0.1, at most 1000 iterations.
//! - k-nearest neighbours: `k = 5`, Euclidean distance.
//!
//! Every classifier returns a minority-class (label 1) score in `[0, 1]`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, MAJORITY, MINORITY};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    GaussianNb,
    LogisticRegression,
    Knn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [
        ClassifierKind::GaussianNb,
        ClassifierKind::LogisticRegression,
        ClassifierKind::Knn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::GaussianNb => "gaussian_nb",
            ClassifierKind::LogisticRegression => "logistic_regression",
            ClassifierKind::Knn => "knn",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian_nb" | "nb" => Ok(ClassifierKind::GaussianNb),
            "logistic_regression" | "lr" => Ok(ClassifierKind::LogisticRegression),
            "knn" => Ok(ClassifierKind::Knn),
            other => Err(Error::InvalidConfig(format!("unknown classifier `{other}`"))),
        }
    }
}

pub trait Classifier: Send + Sync {
    /// Minority-class score per row.
    fn predict_scores(&self, x: ArrayView2<f64>) -> Result<Vec<f64>>;
}

fn require_both_classes(train: &LabeledDataset) -> Result<()> {
    if train.n_rows() == 0 {
        return Err(Error::Fit("training set is empty".into()));
    }
    for class in [MAJORITY, MINORITY] {
        if train.class_count(class) == 0 {
            return Err(Error::Fit(format!("training data has no rows of class {class}")));
        }
    }
    Ok(())
}

fn check_width(expected: usize, x: &ArrayView2<f64>) -> Result<()> {
    if x.ncols() != expected {
        return Err(Error::shape(
            format!("{expected} columns"),
            format!("{} columns", x.ncols()),
        ));
    }
    Ok(())
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    /// Row `c` holds class `c`'s per-feature mean.
    pub means: Array2<f64>,
    pub variances: Array2<f64>,
    pub priors: [f64; 2],
}

pub fn fit_gaussian_nb(train: &LabeledDataset) -> Result<GaussianNb> {
    require_both_classes(train)?;
    let j = train.n_features();
    let max_var = train
        .x
        .var_axis(Axis(0), 0.0)
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    // All-constant data would otherwise divide by zero.
    let smoothing = if max_var > 0.0 { 1e-9 * max_var } else { 1e-9 };

    let mut means = Array2::zeros((2, j));
    let mut variances = Array2::zeros((2, j));
    let mut priors = [0.0; 2];
    for class in [MAJORITY, MINORITY] {
        let rows = train.x.select(Axis(0), &train.class_indices(class));
        let c = class as usize;
        means.row_mut(c).assign(&rows.mean_axis(Axis(0)).expect("class is non-empty"));
        variances
            .row_mut(c)
            .assign(&(rows.var_axis(Axis(0), 0.0) + smoothing));
        priors[c] = rows.nrows() as f64 / train.n_rows() as f64;
    }
    Ok(GaussianNb {
        means,
        variances,
        priors,
    })
}

impl GaussianNb {
    fn joint_log_likelihood(&self, row: ndarray::ArrayView1<f64>, class: usize) -> f64 {
        let mut ll = self.priors[class].ln();
        for ((&x, &mu), &var) in row
            .iter()
            .zip(self.means.row(class))
            .zip(self.variances.row(class))
        {
            ll -= 0.5 * (2.0 * PI * var).ln() + 0.5 * (x - mu) * (x - mu) / var;
        }
        ll
    }
}

impl Classifier for GaussianNb {
    fn predict_scores(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        check_width(self.means.ncols(), &x)?;
        Ok(x.rows()
            .into_iter()
            .map(|row| {
                sigmoid(self.joint_log_likelihood(row, 1) - self.joint_log_likelihood(row, 0))
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    /// Inverse L2 strength.
    pub c: f64,
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Stop once every gradient entry is below this in magnitude.
    pub tolerance: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            learning_rate: 0.1,
            max_iterations: 1000,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    pub weights: Array1<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Regularized mean log-loss and its gradient `(d/dw, d/db)`.
pub fn logistic_objective(
    x: ArrayView2<f64>,
    y: &[u8],
    weights: &Array1<f64>,
    intercept: f64,
    c: f64,
) -> (f64, Array1<f64>, f64) {
    let n = x.nrows() as f64;
    let z = x.dot(weights) + intercept;
    let mut loss = 0.0;
    let mut residual = Array1::zeros(z.len());
    for (i, &zi) in z.iter().enumerate() {
        let yi = y[i] as f64;
        // log(1 + e^z) - y z, evaluated without overflow
        let softplus = if zi > 0.0 {
            zi + (-zi).exp().ln_1p()
        } else {
            zi.exp().ln_1p()
        };
        loss += softplus - yi * zi;
        residual[i] = sigmoid(zi) - yi;
    }
    let penalty_scale = 1.0 / (c * n);
    let loss = loss / n + 0.5 * penalty_scale * weights.dot(weights);
    let grad_w = x.t().dot(&residual) / n + weights * penalty_scale;
    let grad_b = residual.sum() / n;
    (loss, grad_w, grad_b)
}

pub fn fit_logistic_regression(train: &LabeledDataset, cfg: &LogisticConfig) -> Result<LogisticRegression> {
    require_both_classes(train)?;
    let rate = train.class_count(MINORITY) as f64 / train.n_rows() as f64;
    let mut weights = Array1::zeros(train.n_features());
    // Start from the intercept-only optimum.
    let mut intercept = (rate / (1.0 - rate)).ln();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        let (_, gw, gb) = logistic_objective(train.x.view(), &train.y, &weights, intercept, cfg.c);
        let max_grad = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if max_grad < cfg.tolerance {
            converged = true;
            break;
        }
        weights.scaled_add(-cfg.learning_rate, &gw);
        intercept -= cfg.learning_rate * gb;
        iterations += 1;
    }
    if !converged {
        log::debug!(
            "logistic regression did not converge in {} iterations",
            cfg.max_iterations
        );
    }
    Ok(LogisticRegression {
        weights,
        intercept,
        iterations,
        converged,
    })
}

impl Classifier for LogisticRegression {
    fn predict_scores(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        check_width(self.weights.len(), &x)?;
        Ok((x.dot(&self.weights) + self.intercept)
            .iter()
            .map(|&z| sigmoid(z))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    x: Array2<f64>,
    y: Vec<u8>,
    k: usize,
}

/// Stores the training set; `k` is clamped to the number of training rows.
pub fn fit_knn(train: &LabeledDataset, k: usize) -> Result<Knn> {
    if train.n_rows() == 0 {
        return Err(Error::Fit("training set is empty".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    Ok(Knn {
        x: train.x.clone(),
        y: train.y.clone(),
        k: k.min(train.n_rows()),
    })
}

impl Classifier for Knn {
    fn predict_scores(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        check_width(self.x.ncols(), &x)?;
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.x.nrows());
        Ok(x.rows()
            .into_iter()
            .map(|q| {
                dist.clear();
                dist.extend(self.x.rows().into_iter().enumerate().map(|(i, r)| {
                    let d: f64 = r.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                    (d, i)
                }));
                // Equal distances resolve to the lower training index.
                let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
                if self.k < dist.len() {
                    dist.select_nth_unstable_by(self.k - 1, cmp);
                }
                let hits = dist[..self.k].iter().filter(|(_, i)| self.y[*i] == MINORITY).count();
                hits as f64 / self.k as f64
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierParams {
    pub knn_k: usize,
    pub logistic: LogisticConfig,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            knn_k: 5,
            logistic: LogisticConfig::default(),
        }
    }
}

pub fn fit_classifier(
    kind: ClassifierKind,
    train: &LabeledDataset,
    params: &ClassifierParams,
) -> Result<Box<dyn Classifier>> {
    Ok(match kind {
        ClassifierKind::GaussianNb => Box::new(fit_gaussian_nb(train)?),
        ClassifierKind::LogisticRegression => Box::new(fit_logistic_regression(train, &params.logistic)?),
        ClassifierKind::Knn => {
            require_both_classes(train)?;
            Box::new(fit_knn(train, params.knn_k)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{auroc, stratified_split};
    use crate::seed::rng_from_seed;
    use ndarray::array;
    use rand_distr::{Distribution, Normal};

    fn gaussian_1d(mu0: f64, mu1: f64, n_each: usize, seed: u64) -> LabeledDataset {
        let mut rng = rng_from_seed(seed);
        let d0 = Normal::new(mu0, 1.0).unwrap();
        let d1 = Normal::new(mu1, 1.0).unwrap();
        let mut x = Array2::zeros((2 * n_each, 1));
        let mut y = vec![0u8; 2 * n_each];
        for i in 0..n_each {
            x[(i, 0)] = d0.sample(&mut rng);
            x[(n_each + i, 0)] = d1.sample(&mut rng);
            y[n_each + i] = 1;
        }
        LabeledDataset::new(x, y).unwrap()
    }

    #[test]
    fn nb_separates_distant_gaussians() {
        let d = gaussian_1d(-5.0, 5.0, 100, 1);
        let (train, test) = stratified_split(&d, 0.7, 2).unwrap();
        let model = fit_gaussian_nb(&train).unwrap();
        let scores = model.predict_scores(test.x.view()).unwrap();
        assert!(auroc(&scores, &test.y).unwrap() > 0.99);
        assert!(scores.iter().all(|s| (0.0..=1.0).contains(s)));
    }

    #[test]
    fn nb_without_signal_is_near_chance() {
        let d = gaussian_1d(0.0, 0.0, 2000, 4);
        let (train, test) = stratified_split(&d, 0.7, 5).unwrap();
        let model = fit_gaussian_nb(&train).unwrap();
        let scores = model.predict_scores(test.x.view()).unwrap();
        let a = auroc(&scores, &test.y).unwrap();
        assert!((a - 0.5).abs() < 0.05, "{a}");
    }

    #[test]
    fn nb_posterior_matches_closed_form() {
        let d = LabeledDataset::new(array![[-1.0], [1.0], [9.0], [11.0]], vec![0, 0, 1, 1]).unwrap();
        let model = fit_gaussian_nb(&d).unwrap();
        let p = model.predict_scores(array![[10.0]].view()).unwrap()[0];

        // Closed form: equal priors, class means 0 and 10, population
        // variance 1 per class, smoothing 1e-9 * var{-1, 1, 9, 11} = 2.6e-8.
        let var = 1.0 + 1e-9 * 26.0;
        let pdf = |x: f64, mu: f64| (-(x - mu) * (x - mu) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
        let expected = pdf(10.0, 10.0) / (pdf(10.0, 10.0) + pdf(10.0, 0.0));
        assert!(p > 0.999);
        assert!((p - expected).abs() < 1e-15);
    }

    #[test]
    fn single_class_fit_fails() {
        let d = LabeledDataset::new(array![[1.0], [2.0]], vec![0, 0]).unwrap();
        assert!(matches!(fit_gaussian_nb(&d), Err(Error::Fit(_))));
        assert!(fit_logistic_regression(&d, &LogisticConfig::default()).is_err());
        assert!(fit_classifier(ClassifierKind::Knn, &d, &ClassifierParams::default()).is_err());
    }

    #[test]
    fn logistic_separates_separable_data() {
        let x = array![
            [0.0, 0.1], [0.1, 0.0], [0.2, 0.2], [0.1, 0.3], [0.3, 0.1], [0.0, 0.0],
            [0.9, 1.0], [1.0, 0.8], [0.8, 0.9]
        ];
        let y = vec![0, 0, 0, 0, 0, 0, 1, 1, 1];
        let d = LabeledDataset::new(x, y).unwrap();
        let model = fit_logistic_regression(&d, &LogisticConfig::default()).unwrap();
        let scores = model.predict_scores(d.x.view()).unwrap();
        for (s, &l) in scores.iter().zip(&d.y) {
            assert_eq!((*s > 0.5) as u8, l, "score {s}");
        }
    }

    #[test]
    fn logistic_on_zero_features_returns_class_rate() {
        let d = LabeledDataset::new(Array2::zeros((10, 3)), vec![0, 0, 0, 0, 0, 0, 0, 1, 1, 0]).unwrap();
        let model = fit_logistic_regression(&d, &LogisticConfig::default()).unwrap();
        assert!(model.converged);
        for s in model.predict_scores(Array2::zeros((4, 3)).view()).unwrap() {
            assert!((s - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let x = array![[0.2, -1.0], [1.5, 0.3], [-0.7, 0.8], [0.0, 2.0], [1.1, -0.4]];
        let y = [0u8, 1, 0, 1, 1];
        let w = array![0.3, -0.6];
        let b = 0.2;
        let (_, gw, gb) = logistic_objective(x.view(), &y, &w, b, 1.0);
        let h = 1e-6;
        for k in 0..2 {
            let mut up = w.clone();
            up[k] += h;
            let mut down = w.clone();
            down[k] -= h;
            let num = (logistic_objective(x.view(), &y, &up, b, 1.0).0
                - logistic_objective(x.view(), &y, &down, b, 1.0).0)
                / (2.0 * h);
            assert!((num - gw[k]).abs() / gw[k].abs().max(1e-8) < 1e-6);
        }
        let num = (logistic_objective(x.view(), &y, &w, b + h, 1.0).0
            - logistic_objective(x.view(), &y, &w, b - h, 1.0).0)
            / (2.0 * h);
        assert!((num - gb).abs() / gb.abs().max(1e-8) < 1e-6);
    }

    #[test]
    fn knn_with_k1_returns_own_label() {
        let d = LabeledDataset::new(array![[0.0, 0.0], [1.0, 1.0], [2.0, 0.5]], vec![0, 1, 0]).unwrap();
        let model = fit_knn(&d, 1).unwrap();
        assert_eq!(model.predict_scores(d.x.view()).unwrap(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn knn_with_k_n_returns_class_rate() {
        let d = LabeledDataset::new(array![[0.0], [1.0], [2.0], [3.0]], vec![0, 1, 0, 0]).unwrap();
        let model = fit_knn(&d, 4).unwrap();
        for s in model.predict_scores(array![[-10.0], [1.2], [50.0]].view()).unwrap() {
            assert_eq!(s, 0.25);
        }
    }

    #[test]
    fn knn_matches_exhaustive_search() {
        let train = LabeledDataset::new(
            array![[0.0, 0.0], [1.0, 0.0], [0.0, 2.0], [3.0, 3.0], [-1.0, -1.0], [2.0, 1.0]],
            vec![1, 0, 1, 0, 0, 1],
        )
        .unwrap();
        let queries = array![[0.5, 0.5], [2.5, 2.0], [-2.0, 0.0]];
        let model = fit_knn(&train, 3).unwrap();
        let scores = model.predict_scores(queries.view()).unwrap();
        for (qi, q) in queries.rows().into_iter().enumerate() {
            let mut all: Vec<(f64, usize)> = (0..6)
                .map(|i| {
                    let dx = train.x[(i, 0)] - q[0];
                    let dy = train.x[(i, 1)] - q[1];
                    ((dx * dx + dy * dy).sqrt(), i)
                })
                .collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let expected = all[..3].iter().filter(|(_, i)| train.y[*i] == 1).count() as f64 / 3.0;
            assert_eq!(scores[qi], expected);
        }
    }
}
