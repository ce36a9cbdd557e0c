use nalgebra::{DMatrix, DVector};

use crate::momentlab::{MomentVector, PolynomialBasis};
use crate::polyquad::WeightedPoints;
use crate::{Error, Result};

/// Equality constraints `A w = b` with `A[k, p] = T_k(u_p)` and `b_k = E[T_k]`.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    condition_estimate: f64,
}

impl ConstraintSystem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch(format!("A has {} rows but b has {}", a.nrows(), b.len())));
        }
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidArgument("empty constraint system".into()));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("constraint system entry".into()));
        }
        let condition_estimate = condition_number(&a);
        Ok(ConstraintSystem { a, b, condition_estimate })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    /// Ratio of extreme singular values of `A`.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// `1e-9 · max(1, ‖b‖∞)`.
    pub fn tolerance(&self) -> f64 {
        1e-9 * self.b.amax().max(1.0)
    }

    pub fn residual(&self, w: &[f64]) -> f64 {
        let w = DVector::from_column_slice(w);
        (&self.a * w - &self.b).amax()
    }
}

fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = if a.nrows() <= a.ncols() { a.transpose().singular_values() } else { a.clone().singular_values() };
    let min = sv.min();
    if min > 0.0 {
        sv.max() / min
    } else {
        f64::INFINITY
    }
}

pub fn assemble<P: WeightedPoints + ?Sized>(
    cloud: &P,
    basis: &PolynomialBasis,
    moments: &MomentVector,
) -> Result<ConstraintSystem> {
    if cloud.dim() != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "cloud dimension {} vs basis dimension {}",
            cloud.dim(),
            basis.dim()
        )));
    }
    let m = basis.len();
    let n = cloud.len();
    if n < m {
        return Err(Error::DimensionMismatch(format!("{n} nodes cannot carry {m} constraints")));
    }
    let b = DVector::from_vec(basis.expectations(moments)?);
    let mut a = DMatrix::zeros(m, n);
    let mut mono = vec![0.0; m];
    let mut col = vec![0.0; m];
    for p in 0..n {
        basis.eval_into(cloud.point(p), &mut mono, &mut col);
        a.column_mut(p).copy_from_slice(&col);
    }
    ConstraintSystem::new(a, b)
}
