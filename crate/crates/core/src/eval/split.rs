use crate::dataset::{LabeledDataset, MAJORITY, MINORITY};
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;
use rand::seq::SliceRandom;

/// Splits row indices class by class so that each class contributes
/// `round(fraction * count)` rows to the first part (at least one row to
/// each part). Both parts are returned in ascending order.
pub fn stratified_indices(labels: &[u8], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut first = Vec::new();
    let mut second = Vec::new();
    for class in [MAJORITY, MINORITY] {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if idx.len() < 2 {
            return Err(Error::Split(format!(
                "class {class} has {} observation(s); at least 2 are needed",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let take = ((fraction * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        first.extend_from_slice(&idx[..take]);
        second.extend_from_slice(&idx[take..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

/// Class-stratified train/test split.
pub fn stratified_split(
    data: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = stratified_indices(&data.y, train_fraction, seed)?;
    Ok((data.select_rows(&train), data.select_rows(&test)))
}
