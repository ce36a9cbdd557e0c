use crate::polyquad::{MultiIndexSet, WeightedPoints};
use crate::{Error, Result};

/// Estimated mixed moments `E[u^α]` for every `α` of an index set.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    index_set: MultiIndexSet,
    values: Vec<f64>,
}

impl MomentVector {
    pub fn new(index_set: MultiIndexSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != index_set.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} moment values for an index set of size {}",
                values.len(),
                index_set.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("moment {} is {}", index_set.get(i), values[i])));
        }
        Ok(MomentVector { index_set, values })
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    pub fn max_degree(&self) -> u32 {
        self.index_set.max_degree()
    }

    pub fn get(&self, alpha: &[u32]) -> Option<f64> {
        self.index_set.index_of(alpha).map(|i| self.values[i])
    }

    pub fn mean(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|k| {
                let mut a = vec![0; d];
                a[k] = 1;
                self.get(&a).unwrap_or(0.0)
            })
            .collect()
    }

    /// Covariance from the degree-one and degree-two moments.
    pub fn covariance(&self) -> Result<nalgebra::DMatrix<f64>> {
        if self.max_degree() < 2 {
            return Err(Error::InvalidArgument("covariance needs moments up to degree 2".into()));
        }
        let d = self.dim();
        let mean = self.mean();
        let mut c = nalgebra::DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut a = vec![0; d];
                a[i] += 1;
                a[j] += 1;
                c[(i, j)] = self.get(&a).expect("degree-2 moment present") - mean[i] * mean[j];
            }
        }
        Ok(c)
    }

    /// Raw moments `E[u_k^n]` for `n = 1..=order` of coordinate `k`.
    pub fn marginal(&self, k: usize, order: u32) -> Result<Vec<f64>> {
        if order > self.max_degree() {
            return Err(Error::InvalidArgument(format!(
                "marginal of order {order} needs moments up to that degree (have {})",
                self.max_degree()
            )));
        }
        let d = self.dim();
        Ok((1..=order)
            .map(|n| {
                let mut a = vec![0; d];
                a[k] = n;
                self.get(&a).expect("marginal index present")
            })
            .collect())
    }

    /// Restriction to a smaller index set of the same dimension.
    pub fn truncated(&self, max_degree: u32) -> Result<MomentVector> {
        let set = MultiIndexSet::new(self.dim(), max_degree.min(self.max_degree()))?;
        let values = self.values[..set.len()].to_vec();
        Ok(MomentVector { index_set: set, values })
    }
}

/// Weighted monomial sums `Σ_p w_p Π_i x_{p,i}^{α_i}`.
pub fn estimate_moments<P: WeightedPoints + ?Sized>(points: &P, index_set: &MultiIndexSet) -> Result<MomentVector> {
    let d = index_set.dim();
    if points.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "points have dimension {} but the index set has {d}",
            points.dim()
        )));
    }
    let deg = index_set.max_degree() as usize;
    let mut powers = vec![1.0; d * (deg + 1)];
    let mut values = vec![0.0; index_set.len()];
    for i in 0..points.len() {
        let x = points.point(i);
        for k in 0..d {
            let row = &mut powers[k * (deg + 1)..(k + 1) * (deg + 1)];
            for e in 1..=deg {
                row[e] = row[e - 1] * x[k];
            }
        }
        let w = points.weight(i);
        for (v, a) in values.iter_mut().zip(index_set.iter()) {
            let mut m = w;
            for (k, &e) in a.entries().iter().enumerate() {
                m *= powers[k * (deg + 1) + e as usize];
            }
            *v += m;
        }
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("moment {} overflowed", index_set.get(i))));
    }
    Ok(MomentVector { index_set: index_set.clone(), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyquad::{smolyak_rule, QuadratureRule, RuleFamily};
    use approx::assert_abs_diff_eq;

    #[test]
    fn point_at_origin() {
        let r = QuadratureRule::point_mass(&[0.0, 0.0]);
        let m = estimate_moments(&r, &MultiIndexSet::new(2, 3).unwrap()).unwrap();
        assert_eq!(m.values()[0], 1.0);
        assert!(m.values()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn symmetric_two_point() {
        let r = QuadratureRule::new(1, vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let m = estimate_moments(&r, &MultiIndexSet::new(1, 3).unwrap()).unwrap();
        assert_eq!(m.get(&[2]), Some(1.0));
        assert_eq!(m.get(&[3]), Some(0.0));
    }

    #[test]
    fn smolyak_product_moment() {
        let r = smolyak_rule(RuleFamily::GaussHermite, 2, 3).unwrap();
        let m = estimate_moments(&r, &MultiIndexSet::new(2, 4).unwrap()).unwrap();
        assert_abs_diff_eq!(m.get(&[2, 2]).unwrap(), 1.0, epsilon = 1e-12);
        let c = m.covariance().unwrap();
        assert_abs_diff_eq!(c[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn overflow_names_index() {
        let r = QuadratureRule::point_mass(&[1e200]);
        let err = estimate_moments(&r, &MultiIndexSet::new(1, 2).unwrap()).unwrap_err();
        assert!(err.to_string().contains("(2)"), "{err}");
    }

    #[test]
    fn truncation_and_marginals() {
        let r = QuadratureRule::new(2, vec![1.0, 2.0, 3.0, 4.0], vec![0.25, 0.75]).unwrap();
        let m = estimate_moments(&r, &MultiIndexSet::new(2, 4).unwrap()).unwrap();
        let t = m.truncated(2).unwrap();
        assert_eq!(t.index_set().len(), 6);
        assert_eq!(t.get(&[1, 1]), m.get(&[1, 1]));
        let marg = m.marginal(1, 3).unwrap();
        assert_abs_diff_eq!(marg[2], 0.25 * 8.0 + 0.75 * 64.0, epsilon = 1e-12);
        assert!(m.marginal(0, 5).is_err());
    }
}
