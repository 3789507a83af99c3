//! Dataset ingestion, scaling, dataset splits, run configuration and result
//! files.

mod config;
mod export;
mod fsds;
mod idx;
mod scaling;
mod table;

pub use config::{
    DataConfig, DataFormat, EnsembleSection, LayerWidth, Preset, ResolvedRun, RunConfig, SelectionSection,
    TrainingSection,
};
pub use export::{
    read_selection, selection_file_name, write_atomic, write_manifest, write_q_csv, write_report, write_selection_table,
    write_selections, SelectionFile, SELECTION_PREFIX,
};
pub use fsds::{build_fsds_cds, fsds_cds_indices, DatasetSplitSpec};
pub use idx::{load_idx_images, parse_idx_images, parse_idx_labels, IdxSelection, IMAGE_MAGIC, LABEL_MAGIC};
pub use scaling::{fit_scaling, ScalingMode, ScalingParams};
pub use table::{load_csv, read_csv, save_csv, write_csv, LabelColumn, LabelSpec};
