//! Moment estimation from weighted point sets, moment-to-cumulant
//! conversion, affine preconditioning and polynomial bases built from
//! moments.

mod basis;
mod cumulants;
mod moments;
mod transform;

pub use basis::{BasisKind, PolynomialBasis};
pub use cumulants::{cumulants_1d, cumulants_from_raw};
pub use moments::{estimate_moments, MomentVector};
pub use transform::{max_moment_scale, pushforward_moments, standardize, whiten, AffineTransform};
