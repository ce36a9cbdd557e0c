//! Multi-index combinatorics, 1D Gauss rules, tensor products and the
//! isotropic Smolyak sparse grid.

mod gauss;
mod multi_index;
mod rule;

pub use gauss::{gauss_rule_1d, Rule1D, RuleFamily};
pub use multi_index::{binomial, MultiIndex, MultiIndexSet};
pub use rule::{integrate, smolyak_rule, tensor_rule, QuadratureRule, WeightedPoints};
