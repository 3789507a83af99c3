//! IDX image/label files (big-endian header, unsigned-byte payload).

use std::path::Path;

use ndarray::Array2;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// Class pair and optional per-class row counts to keep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdxSelection {
    pub majority_class: u8,
    pub minority_class: u8,
    #[serde(default)]
    pub majority_count: Option<usize>,
    #[serde(default)]
    pub minority_count: Option<usize>,
    /// Seed for choosing which rows to keep when a count is set.
    #[serde(default)]
    pub seed: u64,
}

fn be_u32(bytes: &[u8], offset: usize) -> u32 {
    u32::from_be_bytes(bytes[offset..offset + 4].try_into().expect("4 bytes"))
}

fn format_err(path: &Path, message: String) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message,
    }
}

fn header(bytes: &[u8], path: &Path, magic: u32, dims: usize) -> Result<Vec<usize>> {
    let header_len = 4 + 4 * dims;
    if bytes.len() < header_len {
        return Err(format_err(path, format!("file too short for an IDX header ({} bytes)", bytes.len())));
    }
    let found = be_u32(bytes, 0);
    if found != magic {
        return Err(format_err(
            path,
            format!("bad magic number 0x{found:08x}, expected 0x{magic:08x}"),
        ));
    }
    let shape: Vec<usize> = (0..dims).map(|d| be_u32(bytes, 4 + 4 * d) as usize).collect();
    let payload = shape.iter().product::<usize>();
    if bytes.len() - header_len != payload {
        return Err(format_err(
            path,
            format!(
                "payload holds {} bytes but the header declares {payload}",
                bytes.len() - header_len
            ),
        ));
    }
    Ok(shape)
}

/// Images flattened row-major into `rows * cols` features with raw pixel
/// values in `[0, 255]`.
pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<Array2<f64>> {
    let shape = header(bytes, path, IMAGE_MAGIC, 3)?;
    let (n, width) = (shape[0], shape[1] * shape[2]);
    let pixels = bytes[16..].iter().map(|&b| b as f64).collect();
    Ok(Array2::from_shape_vec((n, width), pixels).expect("payload size checked"))
}

pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>> {
    header(bytes, path, LABEL_MAGIC, 1)?;
    Ok(bytes[8..].to_vec())
}

fn pick(rows: Vec<usize>, count: Option<usize>, seed: u64, class: u8) -> Result<Vec<usize>> {
    match count {
        None => Ok(rows),
        Some(c) if c > rows.len() => Err(Error::InvalidParameter(format!(
            "requested {c} rows of class {class} but only {} exist",
            rows.len()
        ))),
        Some(c) => {
            let mut chosen: Vec<usize> = sample(&mut rng_from_seed(seed), rows.len(), c)
                .into_iter()
                .map(|i| rows[i])
                .collect();
            chosen.sort_unstable();
            Ok(chosen)
        }
    }
}

/// Loads a two-class subset of an IDX image set. Majority rows come first,
/// each class in file order.
pub fn load_idx_images(images: &Path, labels: &Path, selection: &IdxSelection) -> Result<LabeledDataset> {
    let image_bytes = std::fs::read(images).map_err(|e| Error::io(images, e))?;
    let label_bytes = std::fs::read(labels).map_err(|e| Error::io(labels, e))?;
    let x = parse_idx_images(&image_bytes, images)?;
    let raw = parse_idx_labels(&label_bytes, labels)?;
    if raw.len() != x.nrows() {
        return Err(format_err(
            labels,
            format!("{} labels for {} images", raw.len(), x.nrows()),
        ));
    }
    if selection.majority_class == selection.minority_class {
        return Err(Error::InvalidParameter("majority and minority classes must differ".into()));
    }
    let rows_of = |c: u8| (0..raw.len()).filter(|&i| raw[i] == c).collect::<Vec<_>>();
    let majority = pick(
        rows_of(selection.majority_class),
        selection.majority_count,
        crate::seed::derive_seed(selection.seed, 0),
        selection.majority_class,
    )?;
    let minority = pick(
        rows_of(selection.minority_class),
        selection.minority_count,
        crate::seed::derive_seed(selection.seed, 1),
        selection.minority_class,
    )?;
    let mut rows = majority.clone();
    rows.extend(&minority);
    let mut y = vec![0u8; majority.len()];
    y.extend(std::iter::repeat_n(1u8, minority.len()));
    let names = (0..x.ncols()).map(|i| format!("px{i}")).collect();
    LabeledDataset::with_names(x.select(ndarray::Axis(0), &rows), y, Some(names))
}
