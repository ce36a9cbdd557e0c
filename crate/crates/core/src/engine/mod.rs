//! The restart loop: propagate the current rule against the forcing rule
//! over one interval, compress the resulting cloud to a small signed rule,
//! repeat. Statistics are recorded along the way.

mod config;
mod initial;
mod metrics;
mod run;

pub use config::RunConfig;
pub use initial::{initial_rule, InitialSpec, Marginal};
pub use metrics::{error_series, ErrorSeries};
pub use run::{naive_run, run, RestartRecord, StatSeries};
