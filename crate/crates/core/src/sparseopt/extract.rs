use nalgebra::{DMatrix, DVector};

use super::system::ConstraintSystem;
use crate::{Error, Result};

/// Outcome of support reduction on a feasible weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    /// Full-length weights with at most `M` nonzeros when `warning` is unset.
    pub weights: Vec<f64>,
    /// Column indices of the nonzero weights, ascending.
    pub support: Vec<usize>,
    pub iterations: usize,
    /// Times the null vector had to be negated to find a sign mismatch.
    pub flips: usize,
    pub residual: f64,
    pub warning: Option<String>,
}

/// Repeatedly moves along `z ∈ null(A)` supported on the current nonzeros,
/// stepping until one weight reaches zero, until at most `M` remain.
pub fn extract_sparse(sys: &ConstraintSystem, w: &[f64]) -> Result<Extraction> {
    let (m, n) = (sys.rows(), sys.cols());
    if w.len() != n {
        return Err(Error::DimensionMismatch(format!("{} weights for {n} columns", w.len())));
    }
    let start = sys.residual(w);
    if start > sys.tolerance() {
        return Err(Error::Infeasible { residual: start });
    }
    let mut w = w.to_vec();
    let mut iterations = 0;
    let mut flips = 0;
    let mut warning = None;
    loop {
        let active: Vec<usize> = (0..n).filter(|&k| w[k] != 0.0).collect();
        if active.len() <= m {
            break;
        }
        let subset = &active[..m + 1];
        let sub = DMatrix::from_fn(m, m + 1, |i, j| sys.a()[(i, subset[j])]);
        let Some(mut z) = null_vector(&sub) else {
            warning = Some(format!("no null vector on {} active columns", active.len()));
            break;
        };
        let mut step = ratio(&w, subset, &z);
        if step.is_none() {
            z.neg_mut();
            flips += 1;
            step = ratio(&w, subset, &z);
        }
        let Some((kill, beta)) = step else {
            warning = Some("null vector has no usable entries".into());
            break;
        };
        for (j, &k) in subset.iter().enumerate() {
            w[k] += beta * z[j];
        }
        w[subset[kill]] = 0.0;
        iterations += 1;
    }
    refine(sys, &mut w);
    let support: Vec<usize> = (0..n).filter(|&k| w[k] != 0.0).collect();
    if let Some(msg) = &warning {
        log::warn!("sparse extraction stopped early: {msg}");
    }
    Ok(Extraction { residual: sys.residual(&w), weights: w, support, iterations, flips, warning })
}

/// `argmin |w_k / z_k|` over entries where `z_k` opposes `w_k`.
fn ratio(w: &[f64], subset: &[usize], z: &DVector<f64>) -> Option<(usize, f64)> {
    let zmax = z.amax();
    let mut best: Option<(usize, f64)> = None;
    for (j, &k) in subset.iter().enumerate() {
        let zk = z[j];
        if zk.abs() <= 1e-12 * zmax || zk.signum() == w[k].signum() {
            continue;
        }
        let r = (w[k] / zk).abs();
        if best.is_none_or(|(_, b)| r < b) {
            best = Some((j, r));
        }
    }
    best
}

/// Nonzero `z` with `a z = 0` for `a` of shape `m × (m+1)`, from a
/// Householder QR with column pivoting.
pub(crate) fn null_vector(a: &DMatrix<f64>) -> Option<DVector<f64>> {
    let (m, c) = a.shape();
    if c <= m {
        return None;
    }
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..c).collect();
    let scale = a.amax();
    if scale == 0.0 {
        let mut z = DVector::zeros(c);
        z[0] = 1.0;
        return Some(z);
    }
    let mut rank = 0;
    for k in 0..m {
        let (piv, norm) = (k..c)
            .map(|j| (j, r.view((k, j), (m - k, 1)).norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty column range");
        if norm <= 1e-13 * scale {
            break;
        }
        r.swap_columns(k, piv);
        perm.swap(k, piv);
        let mut v = r.view((k, k), (m - k, 1)).into_owned();
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2 = v.norm_squared();
        if vnorm2 > 0.0 {
            for j in k..c {
                let mut col = r.view_mut((k, j), (m - k, 1));
                let f = 2.0 * v.dot(&col) / vnorm2;
                col -= &v * f;
            }
        }
        rank += 1;
    }
    let r11 = r.view((0, 0), (rank, rank)).upper_triangle();
    let rhs = r.view((0, rank), (rank, 1)).into_owned();
    let y = r11.solve_upper_triangular(&rhs)?;
    let mut z = DVector::zeros(c);
    for i in 0..rank {
        z[perm[i]] = -y[i];
    }
    z[perm[rank]] = 1.0;
    let zmax = z.amax();
    Some(z / zmax)
}

/// One least-squares correction of the surviving weights toward `A w = b`,
/// kept only if it lowers the residual.
fn refine(sys: &ConstraintSystem, w: &mut [f64]) {
    let support: Vec<usize> = (0..w.len()).filter(|&k| w[k] != 0.0).collect();
    if support.is_empty() || support.len() > sys.rows() {
        return;
    }
    let sub = DMatrix::from_fn(sys.rows(), support.len(), |i, j| sys.a()[(i, support[j])]);
    let ws = DVector::from_iterator(support.len(), support.iter().map(|&k| w[k]));
    let res = sys.b() - &sub * &ws;
    let svd = sub.svd(true, true);
    let eps = 1e-13 * svd.singular_values.max();
    let Ok(delta) = svd.solve(&res, eps) else { return };
    let before = sys.residual(w);
    let old: Vec<f64> = support.iter().map(|&k| w[k]).collect();
    for (j, &k) in support.iter().enumerate() {
        w[k] += delta[j];
    }
    if sys.residual(w) >= before || support.iter().any(|&k| w[k] == 0.0) {
        for (j, &k) in support.iter().enumerate() {
            w[k] = old[j];
        }
    }
}
