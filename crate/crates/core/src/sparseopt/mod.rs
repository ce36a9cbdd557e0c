//! Signed quadrature synthesis: the L1-minimal exact-moment weight problem,
//! null-space support reduction, and the composed rule builder used at each
//! restart.

mod build;
mod extract;
mod simplex;
mod system;

pub use build::{build_rule, build_rule_grouped, BuildOptions, Diagnostics, Precondition};
pub use extract::{extract_sparse, Extraction};
pub use simplex::{solve_l1, LpSolution};
pub use system::{assemble, ConstraintSystem};
