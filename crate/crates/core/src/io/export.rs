//! Result files. Every write goes to a temporary sibling first and is then
//! renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ResolvedRun;
use crate::ensemble::{REMatrix, SelectionResult};
use crate::error::{Error, Result};
use crate::eval::EvalReport;

pub const SELECTION_PREFIX: &str = "selection_";

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("`{}` is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// On-disk form of one selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionFile {
    pub delta_quantile: f64,
    pub threshold: f64,
    pub n_selected: usize,
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    pub l_min: Vec<f64>,
    pub l_maj: Vec<f64>,
    pub delta: Vec<f64>,
}

fn selection_file(s: &SelectionResult, names: &[String]) -> SelectionFile {
    SelectionFile {
        delta_quantile: s.delta_quantile,
        threshold: s.threshold,
        n_selected: s.selected.len(),
        selected: s.selected.clone(),
        selected_names: s.selected.iter().map(|&i| names[i].clone()).collect(),
        l_min: s.l_min.clone(),
        l_maj: s.l_maj.clone(),
        delta: s.delta.clone(),
    }
}

pub fn selection_file_name(delta_quantile: f64) -> String {
    format!("{SELECTION_PREFIX}{delta_quantile}.json")
}

/// One JSON document per quantile level; returns the written paths.
pub fn write_selections(dir: &Path, selections: &[SelectionResult], names: &[String]) -> Result<Vec<PathBuf>> {
    selections
        .iter()
        .map(|s| {
            let path = dir.join(selection_file_name(s.delta_quantile));
            let mut text = serde_json::to_string_pretty(&selection_file(s, names))
                .map_err(|e| Error::Serialize(e.to_string()))?;
            text.push('\n');
            write_atomic(&path, text.as_bytes())?;
            Ok(path)
        })
        .collect()
}

pub fn read_selection(path: &Path) -> Result<SelectionResult> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let f: SelectionFile = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if f.selected.len() != f.n_selected {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("n_selected is {} but {} indices are listed", f.n_selected, f.selected.len()),
        });
    }
    Ok(SelectionResult {
        delta_quantile: f.delta_quantile,
        threshold: f.threshold,
        selected: f.selected,
        l_min: f.l_min,
        l_maj: f.l_maj,
        delta: f.delta,
    })
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    let ser = |e: ::csv::Error| Error::Serialize(e.to_string());
    w.write_record(header).map_err(ser)?;
    for row in rows {
        w.write_record(&row).map_err(ser)?;
    }
    w.into_inner().map_err(|e| Error::Serialize(e.to_string()))
}

/// Long table: one row per selected feature and level.
pub fn write_selection_table(path: &Path, selections: &[SelectionResult], names: &[String]) -> Result<()> {
    let rows = selections.iter().flat_map(|s| {
        s.selected.iter().map(move |&f| {
            vec![
                s.delta_quantile.to_string(),
                s.threshold.to_string(),
                f.to_string(),
                names[f].clone(),
                s.delta[f].to_string(),
            ]
        })
    });
    let bytes = csv_bytes(
        &["delta_quantile", "threshold", "feature_index", "feature_name", "delta"],
        rows,
    )?;
    write_atomic(path, &bytes)
}

/// Reconstruction-error matrix with one column per feature plus `label`.
pub fn write_q_csv(path: &Path, q: &REMatrix, names: &[String]) -> Result<()> {
    let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
    header.push("label");
    let rows = q.q.rows().into_iter().zip(&q.labels).map(|(r, l)| {
        let mut row: Vec<String> = r.iter().map(f64::to_string).collect();
        row.push(l.to_string());
        row
    });
    write_atomic(path, &csv_bytes(&header, rows)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|d| d.to_string()).unwrap_or_default()
}

/// Writes `{stem}.json` (the whole report), `{stem}.csv` (one row per
/// method, level and classifier, plus warning rows) and `{stem}_trials.csv`.
pub fn write_report(dir: &Path, stem: &str, report: &EvalReport) -> Result<()> {
    let mut json = serde_json::to_string_pretty(report).map_err(|e| Error::Serialize(e.to_string()))?;
    json.push('\n');
    write_atomic(&dir.join(format!("{stem}.json")), json.as_bytes())?;

    let mut rows: Vec<Vec<String>> = report
        .summaries
        .iter()
        .map(|s| {
            vec![
                s.method.clone(),
                opt(s.delta_quantile),
                s.classifier.name().into(),
                s.n_features.to_string(),
                s.trials.to_string(),
                s.auroc_mean.to_string(),
                s.auroc_std.to_string(),
                s.sensitivity_mean.to_string(),
                s.sensitivity_std.to_string(),
                String::new(),
            ]
        })
        .collect();
    rows.extend(report.warnings.iter().map(|w| {
        let mut row = vec![w.method.clone(), opt(w.delta_quantile), String::new(), "0".into()];
        row.extend(std::iter::repeat_n(String::new(), 5));
        row.push(w.message.clone());
        row
    }));
    let summary = csv_bytes(
        &[
            "method",
            "delta_quantile",
            "classifier",
            "n_features",
            "trials",
            "auroc_mean",
            "auroc_std",
            "sensitivity_mean",
            "sensitivity_std",
            "warning",
        ],
        rows,
    )?;
    write_atomic(&dir.join(format!("{stem}.csv")), &summary)?;

    let trials = csv_bytes(
        &["method", "delta_quantile", "classifier", "trial", "n_features", "auroc", "sensitivity"],
        report.records.iter().map(|r| {
            vec![
                r.method.clone(),
                opt(r.delta_quantile),
                r.classifier.name().into(),
                r.trial.to_string(),
                r.n_features.to_string(),
                r.auroc.to_string(),
                r.sensitivity.to_string(),
            ]
        }),
    )?;
    write_atomic(&dir.join(format!("{stem}_trials.csv")), &trials)
}

/// `manifest.toml`: the resolved configuration, preceded by comment lines
/// listing the derived component seeds.
pub fn write_manifest(dir: &Path, run: &ResolvedRun) -> Result<PathBuf> {
    let mut text = String::from("# Resolved configuration of this run.\n");
    for b in 0..run.ensemble.components {
        let _ = writeln!(text, "# component {b} seed {}", run.ensemble.component_seed(b));
    }
    text.push('\n');
    text.push_str(&run.config.to_toml_string()?);
    let path = dir.join("manifest.toml");
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}
