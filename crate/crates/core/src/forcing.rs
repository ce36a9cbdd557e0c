//! Cosine expansion of Brownian motion on a restart interval.
//!
//! On `[t0, t1]` with `Δt = t1 - t0` the orthonormal basis is
//! `m_1 = 1/√Δt` and `m_k = √(2/Δt) cos((k-1)π(t-t0)/Δt)` for `k ≥ 2`.
//! Modes are 1-based in the formulas and 0-based in storage: column `c` of an
//! [`IncrementTable`] holds mode `k = c + 1`.

use std::f64::consts::PI;

use crate::polyquad::{gauss_rule_1d, smolyak_rule, tensor_rule, QuadratureRule, RuleFamily};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBasis {
    t_start: f64,
    t_end: f64,
    modes: usize,
}

impl SpectralBasis {
    pub fn new(t_start: f64, t_end: f64, modes: usize) -> Result<Self> {
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidArgument(format!("empty interval [{t_start}, {t_end}]")));
        }
        if modes == 0 {
            return Err(Error::InvalidArgument("number of modes must be >= 1".into()));
        }
        Ok(SpectralBasis { t_start, t_end, modes })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn width(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// `m_k(t)` for 1-based `k`.
    pub fn eval(&self, k: usize, t: f64) -> f64 {
        let dt = self.width();
        if k <= 1 {
            1.0 / dt.sqrt()
        } else {
            (2.0 / dt).sqrt() * ((k - 1) as f64 * PI * (t - self.t_start) / dt).cos()
        }
    }

    /// `∫_a^b m_k(s) ds` in closed form, 1-based `k`.
    pub fn integral(&self, k: usize, a: f64, b: f64) -> Result<f64> {
        let slack = 1e-12 * self.width();
        if k == 0 || k > self.modes {
            return Err(Error::InvalidArgument(format!("mode {k} outside 1..={}", self.modes)));
        }
        if a < self.t_start - slack || b > self.t_end + slack || a > b + slack {
            return Err(Error::InvalidArgument(format!("[{a}, {b}] not inside [{}, {}]", self.t_start, self.t_end)));
        }
        let dt = self.width();
        if k == 1 {
            return Ok((b - a) / dt.sqrt());
        }
        let freq = (k - 1) as f64 * PI / dt;
        let phase = |t: f64| (freq * (t - self.t_start)).sin();
        Ok((2.0 / dt).sqrt() / freq * (phase(b) - phase(a)))
    }
}

/// Per-step mode integrals `∫_{τ_i}^{τ_{i+1}} m_k` on a uniform sub-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementTable {
    basis: SpectralBasis,
    tau: Vec<f64>,
    coeffs: Vec<f64>,
}

impl IncrementTable {
    pub fn new(basis: SpectralBasis, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument("increment table needs >= 1 step".into()));
        }
        let h = basis.width() / steps as f64;
        let tau: Vec<f64> =
            (0..=steps).map(|i| if i == steps { basis.t_end } else { basis.t_start + i as f64 * h }).collect();
        let mut coeffs = Vec::with_capacity(steps * basis.modes);
        for w in tau.windows(2) {
            for k in 1..=basis.modes {
                coeffs.push(basis.integral(k, w[0], w[1])?);
            }
        }
        Ok(IncrementTable { basis, tau, coeffs })
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn steps(&self) -> usize {
        self.tau.len() - 1
    }

    pub fn modes(&self) -> usize {
        self.basis.modes
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn step_size(&self) -> f64 {
        self.basis.width() / self.steps() as f64
    }

    /// Mode integrals over step `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.coeffs[i * self.basis.modes..(i + 1) * self.basis.modes]
    }

    /// `Σ_k ξ_k ∫_{τ_i}^{τ_{i+1}} m_k` for one driver's coefficient block.
    pub fn increment(&self, i: usize, xi: &[f64]) -> f64 {
        self.row(i).iter().zip(xi).map(|(c, x)| c * x).sum()
    }
}

/// Quadrature for the standard Gaussian forcing coefficients: an isotropic
/// Smolyak Gauss-Hermite grid, or the full tensor product of `level`-point
/// rules when `product` is set.
pub fn forcing_rule(dim: usize, level: usize, product: bool) -> Result<QuadratureRule> {
    if dim == 0 || level == 0 {
        return Err(Error::InvalidArgument("forcing rule needs dim >= 1 and level >= 1".into()));
    }
    if product {
        let r = gauss_rule_1d(RuleFamily::GaussHermite, level)?;
        tensor_rule(&vec![r; dim])
    } else {
        smolyak_rule(RuleFamily::GaussHermite, dim, level)
    }
}
