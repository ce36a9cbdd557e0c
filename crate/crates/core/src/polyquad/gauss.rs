use crate::{Error, Result};

/// Orthogonality measure of a 1D Gauss rule. Both are probability measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleFamily {
    /// Standard normal, weight `exp(-x²/2)/√(2π)`.
    GaussHermite,
    /// Uniform on `[-1, 1]`, weight `1/2`.
    GaussLegendre,
}

impl RuleFamily {
    /// Off-diagonal of the Jacobi matrix; the diagonal is zero for both families.
    fn jacobi_offdiag(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            RuleFamily::GaussHermite => n.sqrt(),
            RuleFamily::GaussLegendre => n / (4.0 * n * n - 1.0).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule1D {
    pub family: RuleFamily,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss rule with `order` points via Golub-Welsch: eigenvalues of the Jacobi
/// matrix are the nodes, squared first eigenvector components the weights.
pub fn gauss_rule_1d(family: RuleFamily, order: usize) -> Result<Rule1D> {
    if order == 0 {
        return Err(Error::InvalidArgument("Gauss rule order must be >= 1".into()));
    }
    let mut diag = vec![0.0; order];
    let mut off: Vec<f64> = (1..=order).map(|k| if k < order { family.jacobi_offdiag(k) } else { 0.0 }).collect();
    let mut first_row = vec![0.0; order];
    first_row[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut first_row)?;

    let mut pairs: Vec<(f64, f64)> = diag.into_iter().zip(first_row.into_iter().map(|z| z * z)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Both measures are symmetric: enforce it exactly so that sparse-grid
    // merging sees bitwise-identical coordinates.
    let n = pairs.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Ok(Rule1D {
        family,
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1 / total).collect(),
    })
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
///
/// `diag` is overwritten with the eigenvalues. `off[i]` couples rows `i` and
/// `i + 1` (the last entry is scratch). Only the first row of the eigenvector
/// matrix is accumulated, into `z`, which must start as `e_1`.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NonFinite("tridiagonal QL did not converge".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}
