//! End-to-end runs: load, split into FSDS/CDS, scale, select, evaluate.

use std::path::Path;

use crate::dataset::LabeledDataset;
use crate::ensemble::{run_ensemble, select_at_thresholds_with, REMatrix, SelectionResult};
use crate::error::{Error, Result};
use crate::eval::{chi2_rank, evaluate_feature_sets, EvalProtocol, EvalReport, FeatureSet};
use crate::io::{
    build_fsds_cds, fit_scaling, load_csv, load_idx_images, read_selection, save_csv, write_atomic,
    write_manifest, write_q_csv, write_selection_table, write_selections, DataConfig, DataFormat, LabelSpec,
    ResolvedRun, ScalingMode, ScalingParams, SELECTION_PREFIX,
};
use crate::synthetic::try_planted_dataset;

pub const FSDS_FILE: &str = "fsds.csv";
pub const CDS_FILE: &str = "cds.csv";
pub const Q_FILE: &str = "q.csv";
pub const SELECTION_TABLE_FILE: &str = "selections.csv";
pub const SCALING_FILE: &str = "scaling.json";

pub fn load_dataset(data: &DataConfig) -> Result<LabeledDataset> {
    let missing = |key: &str| Error::InvalidConfig(format!("[data] {key} is not set"));
    match data.format {
        DataFormat::Csv => load_csv(data.path.as_deref().ok_or_else(|| missing("path"))?, &data.label_spec()),
        DataFormat::Idx => load_idx_images(
            data.images.as_deref().ok_or_else(|| missing("images"))?,
            data.labels.as_deref().ok_or_else(|| missing("labels"))?,
            data.classes.as_ref().ok_or_else(|| missing("classes"))?,
        ),
        DataFormat::Planted => Ok(try_planted_dataset(data.planted.as_ref().ok_or_else(|| missing("planted"))?)?.data),
    }
}

/// Scaled FSDS and CDS. Scaling is fit on the FSDS only.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub fsds: LabeledDataset,
    pub cds: LabeledDataset,
    pub scaling: ScalingParams,
}

pub fn prepare(run: &ResolvedRun, data: &LabeledDataset) -> Result<PreparedData> {
    data.validate_imbalanced()?;
    let (mut fsds, mut cds) = build_fsds_cds(data, &run.split)?;
    let scaling = fit_scaling(fsds.x.view(), run.scaling)?;
    fsds.x = scaling.apply(fsds.x.view())?;
    cds.x = scaling.apply(cds.x.view())?;
    Ok(PreparedData { fsds, cds, scaling })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRun {
    pub prepared: PreparedData,
    pub q: REMatrix,
    pub selections: Vec<SelectionResult>,
}

/// Trains the ensemble on the FSDS and thresholds at every configured level.
pub fn run_selection(run: &ResolvedRun, data: &LabeledDataset) -> Result<SelectionRun> {
    let prepared = prepare(run, data)?;
    let q = run_ensemble(&prepared.fsds, &run.ensemble)?;
    let selections = select_at_thresholds_with(&q, &run.deltas, run.aggregation)?;
    Ok(SelectionRun {
        prepared,
        q,
        selections,
    })
}

/// Writes the manifest, scaled FSDS/CDS, scaling parameters, one file per
/// selection level and the selection table; the Q matrix only on request.
pub fn write_selection_outputs(dir: &Path, run: &ResolvedRun, out: &SelectionRun, export_q: bool) -> Result<()> {
    write_manifest(dir, run)?;
    let names = out.prepared.fsds.names();
    save_csv(&dir.join(FSDS_FILE), &out.prepared.fsds)?;
    save_csv(&dir.join(CDS_FILE), &out.prepared.cds)?;
    let mut scaling = serde_json::to_string_pretty(&out.prepared.scaling).map_err(|e| Error::Serialize(e.to_string()))?;
    scaling.push('\n');
    write_atomic(&dir.join(SCALING_FILE), scaling.as_bytes())?;
    write_selections(dir, &out.selections, &names)?;
    write_selection_table(&dir.join(SELECTION_TABLE_FILE), &out.selections, &names)?;
    if export_q {
        write_q_csv(&dir.join(Q_FILE), &out.q, &names)?;
    }
    Ok(())
}

/// Reads a dataset written by [`write_selection_outputs`].
pub fn load_run_dataset(path: &Path) -> Result<LabeledDataset> {
    load_csv(path, &LabelSpec::named("label").with_minority("1"))
}

/// Every selection file in `dir`, ordered by quantile level.
pub fn load_run_selections(dir: &Path) -> Result<Vec<SelectionResult>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if name.starts_with(SELECTION_PREFIX) && name.ends_with(".json") {
            out.push(read_selection(&path)?);
        }
    }
    out.sort_by(|a, b| a.delta_quantile.total_cmp(&b.delta_quantile));
    Ok(out)
}

/// Chi-squared feature sets matched in size to each selection. Scores are
/// computed on the FSDS mapped to `[0, 1]`.
pub fn chi2_feature_sets(fsds: &LabeledDataset, selections: &[SelectionResult]) -> Result<Vec<FeatureSet>> {
    let unit = fit_scaling(fsds.x.view(), ScalingMode::UnitInterval)?;
    let scaled = LabeledDataset::new(unit.apply(fsds.x.view())?, fsds.y.clone())?;
    selections
        .iter()
        .map(|s| {
            Ok(FeatureSet {
                method: "chi2".into(),
                delta_quantile: Some(s.delta_quantile),
                features: chi2_rank(&scaled, s.selected.len())?,
            })
        })
        .collect()
}

/// All-features baseline, DSAEE selections and size-matched chi-squared
/// selections, evaluated on the CDS with a shared protocol.
pub fn run_benchmark(
    fsds: &LabeledDataset,
    cds: &LabeledDataset,
    selections: &[SelectionResult],
    protocol: &EvalProtocol,
) -> Result<EvalReport> {
    if fsds.n_features() != cds.n_features() {
        return Err(Error::shape(
            format!("{} CDS features", fsds.n_features()),
            format!("{} CDS features", cds.n_features()),
        ));
    }
    let mut sets = vec![FeatureSet::all_features(cds.n_features())];
    sets.extend(selections.iter().map(|s| FeatureSet::from_selection("dsaee", s)));
    sets.extend(chi2_feature_sets(fsds, selections)?);
    evaluate_feature_sets(cds, &sets, protocol)
}
