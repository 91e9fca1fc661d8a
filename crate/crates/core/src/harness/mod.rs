//! Monte-Carlo experiments: NMSE metric, single trials, parameter sweeps and
//! result files.

mod metric;
mod output;
mod sweep;
mod trial;

pub use metric::{nmse_db, NMSE_FLOOR_DB};
pub use output::{emit_results, manifest_path, read_csv, write_plot, OutputFormat, RunManifest};
pub use sweep::{
    config_at, run_sweep, run_sweep_with_threads, trial_seed, PilotRule, SweepAxis, SweepRow,
    SweepSpec, SweepTable,
};
pub use trial::{run_trial, EstimatorKind, TrialResult};
