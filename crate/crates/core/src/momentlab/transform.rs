use nalgebra::{DMatrix, DVector};

use super::moments::MomentVector;
use crate::polyquad::QuadratureRule;
use crate::{Error, Result};

/// Map `u ↦ linear·(u − shift)/scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineTransform {
    shift: Vec<f64>,
    linear: DMatrix<f64>,
    scale: f64,
    inverse: DMatrix<f64>,
}

impl AffineTransform {
    pub fn new(shift: Vec<f64>, linear: DMatrix<f64>, scale: f64) -> Result<Self> {
        let d = shift.len();
        if linear.nrows() != d || linear.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "linear part is {}x{} for a shift of length {d}",
                linear.nrows(),
                linear.ncols()
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        let inverse =
            linear.clone().try_inverse().ok_or_else(|| Error::InvalidArgument("linear part is singular".into()))?;
        Ok(AffineTransform { shift, linear, scale, inverse })
    }

    pub fn identity(dim: usize) -> Self {
        AffineTransform {
            shift: vec![0.0; dim],
            linear: DMatrix::identity(dim, dim),
            scale: 1.0,
            inverse: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        AffineTransform::new(self.shift.clone(), self.linear.clone(), scale)
    }

    /// Spectral condition number of the linear part.
    pub fn condition_number(&self) -> f64 {
        let sv = self.linear.clone().singular_values();
        sv.max() / sv.min()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; d];
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += self.linear[(i, j)] * (u[j] - self.shift[j]);
            }
            out[i] = acc / self.scale;
        }
        out
    }

    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = self.shift.clone();
        for i in 0..d {
            for j in 0..d {
                out[i] += self.inverse[(i, j)] * y[j] * self.scale;
            }
        }
        out
    }

    pub fn apply_rule(&self, rule: &QuadratureRule) -> Result<QuadratureRule> {
        self.map_rule(rule, |u| self.apply(u))
    }

    pub fn invert_rule(&self, rule: &QuadratureRule) -> Result<QuadratureRule> {
        self.map_rule(rule, |y| self.invert(y))
    }

    fn map_rule(&self, rule: &QuadratureRule, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<QuadratureRule> {
        if rule.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "rule dimension {} vs transform dimension {}",
                rule.dim(),
                self.dim()
            )));
        }
        let nodes = (0..rule.len()).flat_map(|i| f(rule.node(i))).collect();
        QuadratureRule::new(rule.dim(), nodes, rule.weights().to_vec())
    }
}

/// Moments of `T(u)` expressed through the moments of `u` by expanding each
/// transformed monomial as a polynomial in `u`.
pub fn pushforward_moments(moments: &MomentVector, transform: &AffineTransform) -> Result<MomentVector> {
    let set = moments.index_set();
    let d = set.dim();
    if transform.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "transform dimension {} vs moment dimension {d}",
            transform.dim()
        )));
    }
    let a = &transform.linear / transform.scale;
    let c = -(&a * DVector::from_column_slice(&transform.shift));
    let m = set.len();
    let mut polys: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    for alpha in set.iter() {
        let e = alpha.entries();
        let poly = match e.iter().position(|&x| x > 0) {
            None => {
                let mut p = vec![0.0; m];
                p[0] = 1.0;
                p
            }
            Some(i) => {
                let mut parent = e.to_vec();
                parent[i] -= 1;
                let prev = &polys[set.index_of(&parent).expect("parent index in set")];
                let mut p = vec![0.0; m];
                for (b, &coef) in prev.iter().enumerate() {
                    if coef == 0.0 {
                        continue;
                    }
                    p[b] += coef * c[i];
                    let mut up = set.get(b).entries().to_vec();
                    for j in 0..d {
                        up[j] += 1;
                        let k = set.index_of(&up).expect("raised index in set");
                        p[k] += coef * a[(i, j)];
                        up[j] -= 1;
                    }
                }
                p
            }
        };
        out.push(poly.iter().zip(moments.values()).map(|(p, v)| p * v).sum());
        polys.push(poly);
    }
    MomentVector::new(set.clone(), out)
}

/// Scalar `s` with `max_{α≠0} |m_α|·s^{−|α|} = 1`.
///
/// The map `s ↦ max_α |m_α| s^{−|α|}` is strictly decreasing, and it is at
/// most one exactly when `s ≥ |m_α|^{1/|α|}` for every `α`, so the root is the
/// largest of these per-index values.
pub fn max_moment_scale(moments: &MomentVector) -> f64 {
    let s = moments
        .index_set()
        .iter()
        .zip(moments.values())
        .filter(|(a, _)| a.degree() > 0)
        .map(|(a, v)| v.abs().powf(1.0 / a.degree() as f64))
        .fold(0.0, f64::max);
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Mean-zero, identity-covariance transform `u ↦ L⁻¹(u − mean)` with
/// `C = L Lᵀ`.
pub fn whiten(moments: &MomentVector) -> Result<(AffineTransform, MomentVector)> {
    let cov = moments.covariance()?;
    let d = cov.nrows();
    let chol = nalgebra::Cholesky::new(cov.clone())
        .ok_or_else(|| Error::NotPositiveDefinite { min_eigenvalue: cov.clone().symmetric_eigenvalues().min() })?;
    let l = chol.l();
    let min_diag = (0..d).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
    let max_diag = (0..d).map(|i| l[(i, i)]).fold(0.0, f64::max);
    if !(min_diag > 1e-7 * max_diag) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: cov.symmetric_eigenvalues().min() });
    }
    let linear =
        l.solve_lower_triangular(&DMatrix::identity(d, d)).ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
    let t = AffineTransform::new(moments.mean(), linear, 1.0)?;
    let pushed = pushforward_moments(moments, &t)?;
    Ok((t, pushed))
}

/// Whitening followed by the scalar max-moment scaling.
pub fn standardize(moments: &MomentVector) -> Result<(AffineTransform, MomentVector)> {
    let (white, wm) = whiten(moments)?;
    let s = max_moment_scale(&wm);
    let t = white.with_scale(s)?;
    let pushed = pushforward_moments(moments, &t)?;
    Ok((t, pushed))
}
