//! Univariate chi-squared filter for non-negative features.

use crate::dataset::{LabeledDataset, MAJORITY, MINORITY};
use crate::error::{Error, Result};

/// Per-feature chi-squared statistic between observed class totals and the
/// totals expected from class frequencies. Zero-sum features score 0.
pub fn chi2_scores(data: &LabeledDataset) -> Result<Vec<f64>> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyInput("dataset has no rows".into()));
    }
    if let Some(v) = data.x.iter().find(|v| **v < 0.0 || v.is_nan()) {
        return Err(Error::Domain(format!(
            "chi-squared scores need non-negative features (found {v}); use unit_interval scaling"
        )));
    }
    let n = data.n_rows() as f64;
    let j = data.n_features();
    let mut observed = [vec![0.0; j], vec![0.0; j]];
    for (row, &label) in data.x.rows().into_iter().zip(&data.y) {
        for (o, &v) in observed[label as usize].iter_mut().zip(row) {
            *o += v;
        }
    }
    let fractions = [
        data.class_count(MAJORITY) as f64 / n,
        data.class_count(MINORITY) as f64 / n,
    ];
    Ok((0..j)
        .map(|f| {
            let total = observed[0][f] + observed[1][f];
            if total == 0.0 {
                return 0.0;
            }
            (0..2)
                .filter(|&c| fractions[c] > 0.0)
                .map(|c| {
                    let expected = fractions[c] * total;
                    (observed[c][f] - expected).powi(2) / expected
                })
                .sum()
        })
        .collect())
}

/// Indices of the `n_select` highest-scoring features, ascending.
/// Equal scores prefer the lower index.
pub fn chi2_rank(data: &LabeledDataset, n_select: usize) -> Result<Vec<usize>> {
    let scores = chi2_scores(data)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(n_select);
    order.sort_unstable();
    Ok(order)
}
