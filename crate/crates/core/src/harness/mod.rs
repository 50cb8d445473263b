//! Monte Carlo experiments: specs and figure presets, the parallel runner,
//! the versioned CSV format, summaries and the acceptance criteria.

pub mod acceptance;
mod rows;
mod run;
mod spec;
mod summary;

pub use rows::{header, read_rows, write_rows, ResultRow, BASE_COLUMNS, SCHEMA_LINE};
pub use run::{run_experiment, write_report, Incident, RunOptions, RunReport, INCIDENT_THRESHOLD};
pub use spec::{
    figure_scenarios, load_curve, preset_by_name, Algorithm, ExperimentSpec, SinrProfile, Sweep, SweepPoint,
    PRESET_NAMES,
};
pub use summary::{format_table, improvement_percent, summarize, GroupStats, Metric};
