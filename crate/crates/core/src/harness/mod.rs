//! Experiment registry, reporting and the command-line front end.

pub mod cli;
pub mod experiment;
pub mod presets;
pub mod report;

pub use experiment::{
    find_experiment, registry, run_experiment, select_experiments, Comparison, ExperimentKind, ExperimentResult, ExperimentSpec,
    Overrides, ResultCell, Series, WeightedReference, SE_MULTIPLIER,
};
pub use presets::{find_preset, presets, Preset};
pub use report::{emit_report, results_csv, svg_chart, ReportFiles, CSV_HEADER, REPORT_SCHEMA_VERSION};
