//! Experiment orchestration: configuration, runs, exports and reports.

pub mod ablation;
pub mod checkpoint;
pub mod config;
pub mod experiment;
pub mod export;
pub mod grid;
pub mod presets;
pub mod report;

pub use ablation::{ablate_least_connected, ablation_csv, AblationPoint};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
pub use config::{AblationConfig, CheckpointFormat, ConfigMap, ExperimentConfig, Method};
pub use experiment::{
    compression_rate, direct_dims, prepare_data, run_experiment, run_on_dataset, run_on_split,
    ExperimentResult, PreparedData, Summary,
};
pub use export::{export_metrics, metrics_csv, read_curves, read_summary, CurvePoint};
pub use grid::{expand_grid, run_grid, write_run, GridRun};
pub use presets::{DatasetPreset, PRESETS};
pub use report::report;
