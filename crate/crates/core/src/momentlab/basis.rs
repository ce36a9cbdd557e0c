use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::moments::MomentVector;
use crate::polyquad::MultiIndexSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Monomial,
    Hermite,
    DataOrthonormal,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Monomial => "monomial",
            BasisKind::Hermite => "hermite",
            BasisKind::DataOrthonormal => "data_orthonormal",
        }
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monomial" => Ok(BasisKind::Monomial),
            "hermite" => Ok(BasisKind::Hermite),
            "data_orthonormal" | "orthonormal" => Ok(BasisKind::DataOrthonormal),
            other => Err(Error::InvalidArgument(format!(
                "unknown basis '{other}' (expected monomial, hermite or data_orthonormal)"
            ))),
        }
    }
}

/// Polynomials `T_k(u) = Σ_β coeffs[k, β] u^β` over a graded-lex index set.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialBasis {
    kind: BasisKind,
    index_set: MultiIndexSet,
    coeffs: DMatrix<f64>,
}

impl PolynomialBasis {
    pub fn monomial(index_set: MultiIndexSet) -> Self {
        let m = index_set.len();
        PolynomialBasis { kind: BasisKind::Monomial, index_set, coeffs: DMatrix::identity(m, m) }
    }

    /// Tensor products of orthonormal probabilists' Hermite polynomials.
    pub fn hermite(index_set: MultiIndexSet) -> Self {
        let n = index_set.max_degree() as usize;
        let table = normalized_hermite(n);
        let m = index_set.len();
        let mut coeffs = DMatrix::zeros(m, m);
        for (k, alpha) in index_set.iter().enumerate() {
            for (j, beta) in index_set.iter().enumerate() {
                let ok = alpha.entries().iter().zip(beta.entries()).all(|(a, b)| b <= a);
                if ok {
                    coeffs[(k, j)] = alpha
                        .entries()
                        .iter()
                        .zip(beta.entries())
                        .map(|(&a, &b)| table[a as usize][b as usize])
                        .product();
                }
            }
        }
        PolynomialBasis { kind: BasisKind::Hermite, index_set, coeffs }
    }

    /// Orthonormal basis of degree `degree` for the inner product
    /// `⟨u^α, u^β⟩ = m_{α+β}` defined by the supplied moments.
    pub fn gram_schmidt(moments: &MomentVector, degree: u32) -> Result<Self> {
        if moments.max_degree() < 2 * degree {
            return Err(Error::InvalidArgument(format!(
                "a degree-{degree} orthonormal basis needs moments up to degree {}, have {}",
                2 * degree,
                moments.max_degree()
            )));
        }
        let set = MultiIndexSet::new(moments.dim(), degree)?;
        let m = set.len();
        let gram = DMatrix::from_fn(m, m, |i, j| {
            let sum: Vec<u32> = set.get(i).entries().iter().zip(set.get(j).entries()).map(|(a, b)| a + b).collect();
            moments.get(&sum).expect("sum index within moment set")
        });
        let mut coeffs = DMatrix::zeros(m, m);
        let mut g_rows: Vec<DVector<f64>> = Vec::with_capacity(m);
        for k in 0..m {
            let mut v = DVector::zeros(m);
            v[k] = 1.0;
            for _ in 0..2 {
                for (j, gt) in g_rows.iter().enumerate() {
                    let proj = v.dot(gt);
                    for c in 0..=j {
                        v[c] -= proj * coeffs[(j, c)];
                    }
                }
            }
            let gv = &gram * &v;
            let norm2 = v.dot(&gv);
            if !(norm2 > 1e-13 * gram[(k, k)].abs()) || !norm2.is_finite() {
                return Err(Error::IllPosedMoments { degree: set.get(k).degree() });
            }
            let inv = 1.0 / norm2.sqrt();
            for c in 0..=k {
                coeffs[(k, c)] = v[c] * inv;
            }
            g_rows.push(gv * inv);
        }
        Ok(PolynomialBasis { kind: BasisKind::DataOrthonormal, index_set: set, coeffs })
    }

    pub fn build(kind: BasisKind, moments: &MomentVector, degree: u32) -> Result<Self> {
        match kind {
            BasisKind::Monomial => Ok(Self::monomial(MultiIndexSet::new(moments.dim(), degree)?)),
            BasisKind::Hermite => Ok(Self::hermite(MultiIndexSet::new(moments.dim(), degree)?)),
            BasisKind::DataOrthonormal => Self::gram_schmidt(moments, degree),
        }
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.index_set.max_degree()
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    /// Values `T_0(u), …, T_{M−1}(u)`.
    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        let mut mono = vec![0.0; self.len()];
        let mut out = vec![0.0; self.len()];
        self.eval_into(u, &mut mono, &mut out);
        out
    }

    /// Allocation-free evaluation; `mono` is scratch of length `M`.
    pub fn eval_into(&self, u: &[f64], mono: &mut [f64], out: &mut [f64]) {
        monomials_into(&self.index_set, u, mono);
        if self.kind == BasisKind::Monomial {
            out.copy_from_slice(mono);
            return;
        }
        for k in 0..self.len() {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.coeffs[(k, j)] * mono[j];
            }
            out[k] = acc;
        }
    }

    /// `E[T_k]` for each `k`, as `coeffs · moments`.
    pub fn expectations(&self, moments: &MomentVector) -> Result<Vec<f64>> {
        if moments.dim() != self.dim() || moments.max_degree() < self.degree() {
            return Err(Error::DimensionMismatch(format!(
                "basis of dimension {} and degree {} needs matching moments, got dimension {} degree {}",
                self.dim(),
                self.degree(),
                moments.dim(),
                moments.max_degree()
            )));
        }
        let mv = &moments.values()[..self.len()];
        Ok((0..self.len()).map(|k| (0..=k).map(|j| self.coeffs[(k, j)] * mv[j]).sum()).collect())
    }
}

/// Every monomial of the set at `u`, built by multiplying a parent monomial
/// by a single coordinate.
pub(crate) fn monomials_into(set: &MultiIndexSet, u: &[f64], out: &mut [f64]) {
    out[0] = 1.0;
    for (k, alpha) in set.iter().enumerate().skip(1) {
        let e = alpha.entries();
        let i = e.iter().position(|&x| x > 0).expect("nonzero index");
        let mut parent = e.to_vec();
        parent[i] -= 1;
        let p = set.index_of(&parent).expect("parent index in set");
        out[k] = out[p] * u[i];
    }
}

/// Coefficients of `He_n / √(n!)` for `n = 0..=max`.
fn normalized_hermite(max: usize) -> Vec<Vec<f64>> {
    let mut he = vec![vec![0.0; max + 1]; max + 1];
    he[0][0] = 1.0;
    if max >= 1 {
        he[1][1] = 1.0;
    }
    for n in 1..max {
        for k in 0..=max {
            let shifted = if k > 0 { he[n][k - 1] } else { 0.0 };
            he[n + 1][k] = shifted - n as f64 * he[n - 1][k];
        }
    }
    let mut fact = 1.0;
    for (n, row) in he.iter_mut().enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        let s = fact.sqrt();
        row.iter_mut().for_each(|c| *c /= s);
    }
    he
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentlab::estimate_moments;
    use crate::polyquad::{gauss_rule_1d, smolyak_rule, QuadratureRule, RuleFamily, WeightedPoints};
    use approx::assert_abs_diff_eq;

    fn moments_of(rule: &QuadratureRule, degree: u32) -> MomentVector {
        estimate_moments(rule, &MultiIndexSet::new(rule.dim(), degree).unwrap()).unwrap()
    }

    fn gram_under<P: WeightedPoints>(basis: &PolynomialBasis, rule: &P) -> DMatrix<f64> {
        let m = basis.len();
        let mut g = DMatrix::zeros(m, m);
        for p in 0..rule.len() {
            let v = basis.eval(rule.point(p));
            for i in 0..m {
                for j in 0..m {
                    g[(i, j)] += rule.weight(p) * v[i] * v[j];
                }
            }
        }
        g
    }

    #[test]
    fn gaussian_gives_hermite() {
        let gh = QuadratureRule::from_1d(&gauss_rule_1d(RuleFamily::GaussHermite, 10).unwrap());
        let b = PolynomialBasis::gram_schmidt(&moments_of(&gh, 6), 3).unwrap();
        let c = b.coeffs();
        assert_abs_diff_eq!(c[(3, 3)], 1.0 / 6f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c[(3, 1)], -3.0 / 6f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c[(2, 0)], -1.0 / 2f64.sqrt(), epsilon = 1e-12);
        let h = PolynomialBasis::hermite(MultiIndexSet::new(1, 3).unwrap());
        assert!((c - h.coeffs()).abs().max() < 1e-12);
    }

    #[test]
    fn uniform_gives_legendre() {
        let gl = QuadratureRule::from_1d(&gauss_rule_1d(RuleFamily::GaussLegendre, 6).unwrap());
        let b = PolynomialBasis::gram_schmidt(&moments_of(&gl, 4), 2).unwrap();
        let c = b.coeffs();
        // √5·(3x²−1)/2 and √3·x are orthonormal under U(−1,1)
        assert_abs_diff_eq!(c[(1, 1)], 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c[(2, 2)], 1.5 * 5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c[(2, 0)], -0.5 * 5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn point_mass_is_ill_posed() {
        let r = QuadratureRule::point_mass(&[0.7]);
        match PolynomialBasis::gram_schmidt(&moments_of(&r, 4), 2) {
            Err(Error::IllPosedMoments { degree }) => assert_eq!(degree, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn orthonormal_under_independent_quadrature() {
        let gen = smolyak_rule(RuleFamily::GaussHermite, 2, 6).unwrap();
        let mapped = gen.map_affine(&[3.0, -1.0], &[1.0, 0.5]);
        let b = PolynomialBasis::gram_schmidt(&moments_of(&mapped, 6), 3).unwrap();
        let tensor = crate::polyquad::tensor_rule(&[
            gauss_rule_1d(RuleFamily::GaussHermite, 8).unwrap(),
            gauss_rule_1d(RuleFamily::GaussHermite, 8).unwrap(),
        ])
        .unwrap()
        .map_affine(&[3.0, -1.0], &[1.0, 0.5]);
        let g = gram_under(&b, &tensor);
        assert!((g - DMatrix::identity(b.len(), b.len())).abs().max() < 1e-6);
    }

    #[test]
    fn eval_examples() {
        let mono = PolynomialBasis::monomial(MultiIndexSet::new(2, 3).unwrap());
        let v = mono.eval(&[0.0, 0.0]);
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
        let v = mono.eval(&[2.0, 3.0]);
        assert_eq!(v[mono.index_set().index_of(&[1, 2]).unwrap()], 18.0);

        let h = PolynomialBasis::hermite(MultiIndexSet::new(1, 2).unwrap());
        let v = h.eval(&[0.0]);
        assert_abs_diff_eq!(v[0], 1.0);
        assert_abs_diff_eq!(v[1], 0.0);
        assert_abs_diff_eq!(v[2], -1.0 / 2f64.sqrt(), epsilon = 1e-15);

        let a = h.eval(&[0.5])[1];
        let b = h.eval(&[1.5])[1];
        let c = h.eval(&[2.5])[1];
        assert_abs_diff_eq!(b - a, c - b, epsilon = 1e-15);
    }

    #[test]
    fn expectations_of_monomial_basis_are_moments() {
        let r = smolyak_rule(RuleFamily::GaussHermite, 2, 3).unwrap();
        let m = moments_of(&r, 4);
        let b = PolynomialBasis::monomial(MultiIndexSet::new(2, 2).unwrap());
        assert_eq!(b.expectations(&m).unwrap(), m.values()[..6].to_vec());
        let h = PolynomialBasis::hermite(MultiIndexSet::new(2, 2).unwrap());
        let e = h.expectations(&m).unwrap();
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-14);
        assert!(e[1..].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn basis_kind_parsing() {
        assert_eq!("hermite".parse::<BasisKind>().unwrap(), BasisKind::Hermite);
        assert!("legendre".parse::<BasisKind>().is_err());
    }
}
