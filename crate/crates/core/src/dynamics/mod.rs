//! Benchmark SDE models, weak time steppers and propagation of the joint
//! particle cloud over one restart interval.

mod model;
mod propagate;
mod stepper;

pub use model::{ModelKind, ModelParams, SdeModel, CLAMP_FLOOR};
pub use propagate::{propagate_interval, propagate_observed, Checkpoint, ParticleCloud, Propagation};
pub use stepper::{Scratch, Stepper};
