#![allow(dead_code)]

use dsgc::momentlab::PolynomialBasis;
use dsgc::polyquad::MultiIndexSet;
use dsgc::sparseopt::ConstraintSystem;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Exact-moment system built from a random positive-weight cloud; the cloud
/// weights are returned as a feasible point.
pub fn random_system<R: Rng>(rng: &mut R, dim: usize, degree: u32, nodes: usize) -> (ConstraintSystem, Vec<f64>) {
    let set = MultiIndexSet::new(dim, degree).unwrap();
    let basis = if rng.random_bool(0.5) { PolynomialBasis::monomial(set) } else { PolynomialBasis::hermite(set) };
    let m = basis.len();
    let mut w: Vec<f64> = (0..nodes).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let mut a = DMatrix::zeros(m, nodes);
    for p in 0..nodes {
        let u: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal) * 1.5).collect();
        a.set_column(p, &DVector::from_vec(basis.eval(&u)));
    }
    let b = &a * DVector::from_column_slice(&w);
    (ConstraintSystem::new(a, b).unwrap(), w)
}

/// Minimum of `‖p − q‖₁` over every basic feasible solution of
/// `[A, −A](p, q) = b`, found by enumerating all column subsets.
pub fn brute_force_l1(sys: &ConstraintSystem) -> f64 {
    let (m, n) = (sys.rows(), sys.cols());
    let full = DMatrix::from_fn(m, 2 * n, |i, j| if j < n { sys.a()[(i, j)] } else { -sys.a()[(i, j - n)] });
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let b = DMatrix::from_fn(m, m, |i, j| full[(i, idx[j])]);
        if let Some(lu) = Some(b.lu()).filter(|lu| lu.is_invertible()) {
            if let Some(x) = lu.solve(sys.b()) {
                let resid = (DMatrix::from_fn(m, m, |i, j| full[(i, idx[j])]) * &x - sys.b()).amax();
                if x.iter().all(|&v| v >= -1e-12) && resid < 1e-9 {
                    best = best.min(x.iter().map(|v| v.max(0.0)).sum());
                }
            }
        }
        let mut k = m;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < 2 * n - (m - k) {
                idx[k] += 1;
                for j in k + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `E[b^{-j}]` for `b ~ U(lo, hi)`.
fn inverse_power_mean(j: i32, lo: f64, hi: f64) -> f64 {
    if j == 1 {
        (hi / lo).ln() / (hi - lo)
    } else {
        (lo.powi(1 - j) - hi.powi(1 - j)) / ((j - 1) as f64 * (hi - lo))
    }
}

/// Even cumulants `(κ₂, κ₄, κ₆)` of the centred Gaussian scale mixture
/// `u | b ~ N(0, σ²/(2b))`, `b ~ U(lo, hi)`.
pub fn damping_mixture_cumulants(sigma: f64, lo: f64, hi: f64) -> (f64, f64, f64) {
    let s = sigma * sigma / 2.0;
    let m2 = s * inverse_power_mean(1, lo, hi);
    let m4 = 3.0 * s * s * inverse_power_mean(2, lo, hi);
    let m6 = 15.0 * s * s * s * inverse_power_mean(3, lo, hi);
    (m2, m4 - 3.0 * m2 * m2, m6 - 15.0 * m4 * m2 + 30.0 * m2.powi(3))
}

/// Composite Simpson moments `∫ uⁿ p(u) du / ∫ p(u) du` for `n = 1..=6` on
/// `[-half_width, half_width]`.
pub fn simpson_moments(p: impl Fn(f64) -> f64, half_width: f64, panels: usize) -> [f64; 6] {
    let h = 2.0 * half_width / panels as f64;
    let mut acc = [0.0; 7];
    for i in 0..=panels {
        let u = -half_width + i as f64 * h;
        let w = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let f = w * p(u);
        let mut un = 1.0;
        for a in acc.iter_mut() {
            *a += f * un;
            un *= u;
        }
    }
    std::array::from_fn(|n| acc[n + 1] / acc[0])
}

/// Even cumulants `(κ₂, κ₄, κ₆)` of a symmetric law from its raw moments.
pub fn symmetric_cumulants(m: &[f64; 6]) -> (f64, f64, f64) {
    let (m2, m4, m6) = (m[1], m[3], m[5]);
    (m2, m4 - 3.0 * m2 * m2, m6 - 15.0 * m4 * m2 + 30.0 * m2.powi(3))
}

/// CIR mean and variance at `t` from a point start `u0`.
pub fn cir_exact(b: f64, mu: f64, sigma: f64, u0: f64, t: f64) -> (f64, f64) {
    let e = (-b * t).exp();
    let mean = mu + (u0 - mu) * e;
    let var = u0 * sigma * sigma / b * (e - e * e) + mu * sigma * sigma / (2.0 * b) * (1.0 - e).powi(2);
    (mean, var)
}

/// Reads a run's `diagnostics.csv` and checks every restart: nodes per
/// group within `binom(d_free + N, d_free)`, total nodes within
/// `groups` times that, and one forcing rule size for the whole run.
/// Returns the number of restarts checked.
pub fn check_diagnostics(dir: &std::path::Path, exp: &dsgc::driver::Experiment) -> Result<usize, String> {
    let (header, rows) = dsgc::driver::read_numeric(&dir.join("diagnostics.csv")).map_err(|e| e.to_string())?;
    let col = |name: &str| header.iter().position(|h| h == name).expect("diagnostics column");
    let (nodes, groups, per_group, forcing) =
        (col("node_count"), col("groups"), col("max_group_nodes"), col("forcing_nodes"));
    let d_free = (exp.run.initial.dim() - exp.run.fixed_coords().len()) as u64;
    let bound = dsgc::polyquad::binomial(d_free + exp.run.degree as u64, d_free) as f64;
    for (i, r) in rows.iter().enumerate() {
        if r[per_group] > bound || r[nodes] > r[groups] * bound {
            return Err(format!(
                "{}: restart {i} has {} nodes in {} groups, bound {bound} per group",
                exp.name, r[nodes], r[groups]
            ));
        }
        if r[forcing] != rows[0][forcing] {
            return Err(format!("{}: forcing rule size changed at restart {i}", exp.name));
        }
    }
    Ok(rows.len())
}
