//! Experiment plumbing behind the `dsgc` binary: flat `key = value` config
//! files, named presets for the benchmark models, CSV output, and the
//! `run`, `sweep`, `table` and `mc` commands.

mod commands;
mod config;
mod csvio;
mod presets;

pub use commands::{
    cmd_mc, cmd_run, cmd_sweep, cmd_table, execute, exit_code, reference_cumulants, reference_curve, with_axis,
    ReferenceCurve, RunOutcome, StatsFn, SweepAxis, SweepRow, TableKind, TableOutput, TableRow,
};
pub use config::{parse_config, parse_marginals, Experiment, Reference};
pub use csvio::{read_numeric, stats_header, write_diagnostics, write_errors, write_stats, DIAGNOSTICS_HEADER};
pub use presets::Preset;
