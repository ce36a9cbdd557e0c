//! Dynamical sparse grid collocation (DSGC) for long-time moments of SDEs
//! driven by white noise.
//!
//! The forcing on every restart interval is a finite cosine expansion of
//! Brownian motion integrated with a fixed (sparse) Gauss-Hermite rule. The
//! solution is carried between restarts as a small signed quadrature rule
//! obtained by L1 minimization subject to moment constraints, so the number
//! of nodes never grows with time.
//!
//! Module map:
//!
//! * [`polyquad`] multi-indices, Gauss rules, tensor and Smolyak grids.
//! * [`forcing`] cosine basis, increment tables, forcing rule.
//! * [`dynamics`] benchmark models, weak steppers, particle propagation.
//! * [`momentlab`] moments, cumulants, whitening, orthonormal polynomials.
//! * [`sparseopt`] constraint assembly, simplex L1 solve, null-space extraction.
//! * [`engine`] the restart loop and error metrics.
//! * [`reference`] analytic, Fokker-Planck and Monte Carlo oracles.
//! * [`driver`] config files, presets, CSV output and the CLI commands.

pub mod driver;
pub mod dynamics;
pub mod engine;
mod error;
pub mod forcing;
pub mod momentlab;
pub mod par;
pub mod polyquad;
pub mod reference;
pub mod sparseopt;

pub use error::{Error, Result};
pub use par::Execution;
pub use polyquad::{MultiIndex, MultiIndexSet, QuadratureRule, Rule1D, RuleFamily, WeightedPoints};
