//! Comma-delimited tables with a header row and one label column.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{LabeledDataset, MAJORITY, MINORITY};
use crate::error::{Error, Result};

/// Which column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("label".into())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSpec {
    pub column: LabelColumn,
    /// Raw label value of the minority class. When absent the less frequent
    /// value is used.
    pub minority: Option<String>,
}

impl LabelSpec {
    pub fn named(column: &str) -> Self {
        Self {
            column: LabelColumn::Name(column.into()),
            minority: None,
        }
    }

    pub fn with_minority(mut self, value: &str) -> Self {
        self.minority = Some(value.into());
        self
    }
}

pub fn load_csv(path: &Path, spec: &LabelSpec) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path, spec)
}

/// Parses a table from any reader; `source` is only used in error messages.
pub fn read_csv<R: Read>(reader: R, source: &Path, spec: &LabelSpec) -> Result<LabeledDataset> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: source.to_path_buf(),
        line,
        message,
    };
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect::<Vec<_>>();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Format {
            path: source.to_path_buf(),
            message: "missing header row".into(),
        });
    }
    let label_idx = match &spec.column {
        LabelColumn::Index(i) if *i < headers.len() => *i,
        LabelColumn::Index(i) => {
            return Err(parse_err(
                1,
                format!("label column index {i} out of range for {} columns", headers.len()),
            ))
        }
        LabelColumn::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, format!("no column named `{name}`")))?,
    };
    let width = headers.len();
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    let mut record = ::csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(parse_err(
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        for (i, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if i == label_idx {
                raw_labels.push(cell.to_string());
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    parse_err(line, format!("non-numeric value `{cell}` in column `{}`", headers[i]))
                })?;
                values.push(v);
            }
        }
    }
    if raw_labels.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no data rows", source.display())));
    }

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in &raw_labels {
        *counts.entry(l.as_str()).or_default() += 1;
    }
    let data_lines = || format!("lines 2-{}", raw_labels.len() + 1);
    if counts.len() != 2 {
        let shown: Vec<&str> = counts.keys().copied().take(5).collect();
        return Err(parse_err(
            1,
            format!(
                "label column must hold exactly two distinct values, found {} ({}) in {}",
                counts.len(),
                shown.join(", "),
                data_lines()
            ),
        ));
    }
    let values_by_count: Vec<(&str, usize)> = counts.into_iter().collect();
    let minority = match &spec.minority {
        Some(m) => {
            if !values_by_count.iter().any(|(v, _)| v == m) {
                return Err(parse_err(
                    1,
                    format!("minority label `{m}` does not occur in the label column"),
                ));
            }
            m.clone()
        }
        None => {
            let (a, b) = (values_by_count[0], values_by_count[1]);
            if a.1 == b.1 {
                return Err(parse_err(
                    1,
                    format!(
                        "labels `{}` and `{}` both occur {} times in {}; set the minority label explicitly",
                        a.0,
                        b.0,
                        a.1,
                        data_lines()
                    ),
                ));
            }
            if a.1 < b.1 { a.0 } else { b.0 }.to_string()
        }
    };
    let y = raw_labels
        .iter()
        .map(|l| if *l == minority { MINORITY } else { MAJORITY })
        .collect();
    let x = Array2::from_shape_vec((raw_labels.len(), width - 1), values).expect("row widths checked");
    LabeledDataset::with_names(x, y, Some(feature_names))
}

/// Writes features followed by a `label` column of 0/1 values.
pub fn save_csv(path: &Path, data: &LabeledDataset) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(&mut buf, data)?;
    super::write_atomic(path, &buf)
}

pub fn write_csv<W: Write>(writer: W, data: &LabeledDataset) -> Result<()> {
    let ser = |e: ::csv::Error| Error::Serialize(e.to_string());
    let mut w = ::csv::Writer::from_writer(writer);
    let mut header = data.names();
    header.push("label".into());
    w.write_record(&header).map_err(ser)?;
    let mut row = Vec::with_capacity(header.len());
    for (r, &label) in data.x.rows().into_iter().zip(&data.y) {
        row.clear();
        row.extend(r.iter().map(|v| v.to_string()));
        row.push(label.to_string());
        w.write_record(&row).map_err(ser)?;
    }
    w.flush().map_err(|e| Error::Serialize(e.to_string()))?;
    Ok(())
}
