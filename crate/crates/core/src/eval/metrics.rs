//! Ranking and threshold metrics for binary scores (label 1 = positive).

use crate::error::{Error, Result};

fn check(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::shape(
            format!("{} labels", scores.len()),
            format!("{} labels", labels.len()),
        ));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("scores contain NaN".into()));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.iter().filter(|&&l| l == 0).count();
    if pos + neg != labels.len() {
        return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
    }
    Ok((pos, neg))
}

/// Area under the ROC curve via the Mann-Whitney U statistic: the probability
/// that a random positive outscores a random negative, ties counting one half.
pub fn auroc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = check(scores, labels)?;
    if pos == 0 {
        return Err(Error::ClassMissing(1));
    }
    if neg == 0 {
        return Err(Error::ClassMissing(0));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Doubled average ranks keep every quantity an exact integer.
    let mut rank_sum_x2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j+1, doubled average = i + j + 2
        let avg_x2 = (i + j + 2) as u128;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_x2 += avg_x2;
            }
        }
        i = j + 1;
    }
    let p = pos as u128;
    // 2U = 2R - p(p+1)
    let u_x2 = rank_sum_x2 - p * (p + 1);
    Ok(u_x2 as f64 / (2 * pos * neg) as f64)
}

/// True-positive rate when rows scoring strictly above `cutoff` are called positive.
pub fn sensitivity(scores: &[f64], labels: &[u8], cutoff: f64) -> Result<f64> {
    let (pos, _) = check(scores, labels)?;
    if pos == 0 {
        return Err(Error::ClassMissing(1));
    }
    let tp = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &l)| l == 1 && s > cutoff)
        .count();
    Ok(tp as f64 / pos as f64)
}
