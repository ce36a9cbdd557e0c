use nalgebra::{DMatrix, DVector};

use super::system::ConstraintSystem;
use crate::{Error, Result};

const REFACTOR_EVERY: usize = 50;
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const HARRIS_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub weights: Vec<f64>,
    /// `‖w‖₁`
    pub objective: f64,
    /// `‖A w − b‖∞`
    pub residual: f64,
    pub iterations: usize,
    /// Smallest reduced cost over nonbasic columns at termination.
    pub min_reduced_cost: f64,
}

/// Minimizes `‖w‖₁` subject to `A w = b` by writing `w = p − q` with
/// `p, q ≥ 0` and running a two-phase revised simplex. Pricing is Dantzig's rule,
/// switching to Bland's rule during runs of degenerate pivots.
pub fn solve_l1(sys: &ConstraintSystem) -> Result<LpSolution> {
    let tol = sys.tolerance();
    let ls = least_squares_residual(sys);
    if ls > tol {
        return Err(Error::Infeasible { residual: ls });
    }
    let mut lp = Tableau::new(sys);
    let cap = 50 * (sys.rows() + sys.cols());

    lp.run(Phase::One, cap)?;
    let infeasibility: f64 = (0..lp.m).filter(|&i| lp.is_artificial(lp.basis[i])).map(|i| lp.x[i].max(0.0)).sum();
    if infeasibility > 1e-9 * lp.b.amax().max(1.0) {
        return Err(Error::Infeasible { residual: infeasibility });
    }
    lp.drive_out_artificials();
    lp.run(Phase::Two, cap)?;
    lp.refactor();

    let weights = lp.weights();
    let residual = sys.residual(&weights);
    if !(residual <= tol) {
        return Err(Error::LpBreakdown { residual });
    }
    Ok(LpSolution {
        objective: weights.iter().map(|w| w.abs()).sum(),
        residual,
        iterations: lp.iterations,
        min_reduced_cost: lp.min_reduced_cost(),
        weights,
    })
}

fn least_squares_residual(sys: &ConstraintSystem) -> f64 {
    let a = sys.a();
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    match svd.solve(sys.b(), 1e-13 * smax) {
        Ok(w) => (a * w - sys.b()).amax(),
        Err(_) => f64::INFINITY,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

/// Revised-simplex state. Columns `0..n` are `p`, `n..2n` are `q`, and
/// `2n..2n+m` are artificials `sign(b_i)·e_i`. Rows are equilibrated.
struct Tableau {
    m: usize,
    n: usize,
    a: DMatrix<f64>,
    b: DVector<f64>,
    art_sign: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: DMatrix<f64>,
    x: DVector<f64>,
    iterations: usize,
    since_refactor: usize,
}

impl Tableau {
    fn new(sys: &ConstraintSystem) -> Self {
        let (m, n) = (sys.rows(), sys.cols());
        let mut a = sys.a().clone();
        let mut b = sys.b().clone();
        for i in 0..m {
            let s = a.row(i).amax();
            if s > 0.0 {
                a.row_mut(i).scale_mut(1.0 / s);
                b[i] /= s;
            }
        }
        let art_sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let basis: Vec<usize> = (0..m).map(|i| 2 * n + i).collect();
        let mut in_basis = vec![false; 2 * n + m];
        basis.iter().for_each(|&j| in_basis[j] = true);
        let binv = DMatrix::from_diagonal(&DVector::from_column_slice(&art_sign));
        let x = b.abs();
        Tableau { m, n, a, b, art_sign, basis, in_basis, binv, x, iterations: 0, since_refactor: 0 }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= 2 * self.n
    }

    fn cost(&self, phase: Phase, j: usize) -> f64 {
        match (phase, self.is_artificial(j)) {
            (Phase::One, true) | (Phase::Two, false) => 1.0,
            _ => 0.0,
        }
    }

    fn column(&self, j: usize) -> DVector<f64> {
        if j < self.n {
            self.a.column(j).into_owned()
        } else if j < 2 * self.n {
            -self.a.column(j - self.n)
        } else {
            let mut e = DVector::zeros(self.m);
            e[j - 2 * self.n] = self.art_sign[j - 2 * self.n];
            e
        }
    }

    fn duals(&self, phase: Phase) -> DVector<f64> {
        let cb = DVector::from_iterator(self.m, self.basis.iter().map(|&j| self.cost(phase, j)));
        self.binv.tr_mul(&cb)
    }

    fn refactor(&mut self) {
        let mut bmat = DMatrix::zeros(self.m, self.m);
        for (k, &j) in self.basis.iter().enumerate() {
            bmat.set_column(k, &self.column(j));
        }
        if let Some(inv) = bmat.try_inverse() {
            self.binv = inv;
            self.x = &self.binv * &self.b;
            for v in self.x.iter_mut() {
                if *v < 0.0 && *v > -1e-9 {
                    *v = 0.0;
                }
            }
        }
        self.since_refactor = 0;
    }

    /// Dantzig pricing (most negative reduced cost), or Bland's rule
    /// (smallest eligible index) when `bland` is set.
    fn entering(&self, phase: Phase, bland: bool) -> Option<usize> {
        let y = self.duals(phase);
        let g = self.a.tr_mul(&y);
        let c = if phase == Phase::Two { 1.0 } else { 0.0 };
        let reduced = |j: usize| if j < self.n { c - g[j] } else { c + g[j - self.n] };
        let eligible = (0..2 * self.n).filter(|&j| !self.in_basis[j] && reduced(j) < -COST_TOL);
        if bland {
            eligible.min()
        } else {
            eligible.min_by(|&i, &j| reduced(i).total_cmp(&reduced(j)))
        }
    }

    fn run(&mut self, phase: Phase, cap: usize) -> Result<()> {
        let mut degenerate = 0usize;
        loop {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            let Some(q) = self.entering(phase, degenerate > self.m) else { return Ok(()) };
            if self.iterations >= cap {
                return Err(Error::IterationCap { iterations: self.iterations, best_weights: self.weights() });
            }
            let col = &self.binv * self.column(q);
            let bland = degenerate > self.m;
            let Some((r, step)) = self.leaving(&col, bland) else {
                return Err(Error::Infeasible { residual: f64::INFINITY });
            };
            degenerate = if step <= 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(r, q, &col);
        }
    }

    /// Ratio test. Under Bland's rule ties go to the smallest basic index;
    /// otherwise a Harris pass picks the largest pivot among rows whose
    /// ratio is within a small tolerance of the minimum.
    fn leaving(&self, col: &DVector<f64>, bland: bool) -> Option<(usize, f64)> {
        let rows: Vec<usize> = (0..self.m).filter(|&i| col[i] > PIVOT_TOL).collect();
        let ratio = |i: usize| self.x[i].max(0.0) / col[i];
        let r = if bland {
            let best = rows.iter().map(|&i| ratio(i)).fold(f64::INFINITY, f64::min);
            rows.iter().copied().filter(|&i| ratio(i) <= best + 1e-12).min_by_key(|&i| self.basis[i])?
        } else {
            let bound = rows.iter().map(|&i| (self.x[i].max(0.0) + HARRIS_TOL) / col[i]).fold(f64::INFINITY, f64::min);
            rows.iter().copied().filter(|&i| ratio(i) <= bound).max_by(|&i, &j| col[i].total_cmp(&col[j]))?
        };
        Some((r, ratio(r)))
    }

    fn pivot(&mut self, r: usize, q: usize, col: &DVector<f64>) {
        let piv = col[r];
        let theta = self.x[r].max(0.0) / piv;
        for i in 0..self.m {
            if i != r {
                self.x[i] -= theta * col[i];
            }
        }
        self.x[r] = theta;
        let row_r = self.binv.row(r) / piv;
        for i in 0..self.m {
            if i != r && col[i] != 0.0 {
                let f = col[i];
                for c in 0..self.m {
                    self.binv[(i, c)] -= f * row_r[c];
                }
            }
        }
        self.binv.set_row(r, &row_r);
        self.in_basis[self.basis[r]] = false;
        self.in_basis[q] = true;
        self.basis[r] = q;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// Replaces zero-level basic artificials by structural columns where the
    /// row allows it; rows with no candidate are redundant and keep theirs.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let row = self.binv.row(r).transpose();
            let g = self.a.tr_mul(&row);
            let best = (0..self.n)
                .filter(|&j| !self.in_basis[j] && !self.in_basis[self.n + j])
                .max_by(|&i, &j| g[i].abs().total_cmp(&g[j].abs()));
            if let Some(j) = best {
                if g[j].abs() > PIVOT_TOL {
                    let col = &self.binv * self.column(j);
                    self.pivot(r, j, &col);
                }
            }
        }
        self.refactor();
    }

    fn weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                w[j] += self.x[i];
            } else if j < 2 * self.n {
                w[j - self.n] -= self.x[i];
            }
        }
        w
    }

    fn min_reduced_cost(&self) -> f64 {
        let y = self.duals(Phase::Two);
        let g = self.a.tr_mul(&y);
        let mut min = f64::INFINITY;
        for j in 0..self.n {
            if !self.in_basis[j] {
                min = min.min(1.0 - g[j]);
            }
            if !self.in_basis[self.n + j] {
                min = min.min(1.0 + g[j]);
            }
        }
        min
    }
}
