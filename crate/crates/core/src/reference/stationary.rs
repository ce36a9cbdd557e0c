use super::{gl10_adaptive, gl10_composite};
use crate::dynamics::{ModelKind, SdeModel};
use crate::momentlab::cumulants_1d;
use crate::{Error, Result};

/// Invariant density `∝ exp(−2V(u)/σ²)` of `du = −V′(u)dt + σ dW`,
/// truncated to where it exceeds `1e-16` of its peak.
pub struct StationaryDensity {
    log_density: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    lo: f64,
    hi: f64,
    peak: f64,
    normalization: f64,
}

impl std::fmt::Debug for StationaryDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StationaryDensity")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("normalization", &self.normalization)
            .finish()
    }
}

const TAIL: f64 = 36.841_361_487_904_734; // −ln(1e-16)

impl StationaryDensity {
    pub fn from_potential(potential: impl Fn(f64) -> f64 + Send + Sync + 'static, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::ParameterViolation(format!("sigma must be positive, got {sigma}")));
        }
        let s2 = sigma * sigma;
        let log_density = move |u: f64| -2.0 * potential(u) / s2;
        let mut half = 1.0;
        loop {
            let grid: Vec<f64> = (0..=4000).map(|i| -half + 2.0 * half * i as f64 / 4000.0).collect();
            let peak = grid.iter().map(|&u| log_density(u)).fold(f64::NEG_INFINITY, f64::max);
            if log_density(-half) < peak - TAIL && log_density(half) < peak - TAIL {
                let lo = grid.iter().copied().find(|&u| log_density(u) >= peak - TAIL).unwrap_or(-half);
                let hi = grid.iter().rev().copied().find(|&u| log_density(u) >= peak - TAIL).unwrap_or(half);
                let step = 2.0 * half / 4000.0;
                let mut d = StationaryDensity {
                    log_density: Box::new(log_density),
                    lo: lo - step,
                    hi: hi + step,
                    peak,
                    normalization: 1.0,
                };
                d.normalization = d.raw_integrals(None)[0];
                return Ok(d);
            }
            half *= 2.0;
            if half > 1e6 {
                return Err(Error::ParameterViolation("stationary density is not normalizable".into()));
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn density(&self, u: f64) -> f64 {
        ((self.log_density)(u) - self.peak).exp() / self.normalization
    }

    /// `∫ u^n e^{logp(u) − peak} du`, `n = 0..=6`, adaptive when `panels` is
    /// `None`, otherwise on a fixed composite grid.
    fn raw_integrals(&self, panels: Option<usize>) -> [f64; 7] {
        let f = |u: f64| {
            let p = ((self.log_density)(u) - self.peak).exp();
            let mut out = [0.0; 7];
            let mut x = p;
            for o in out.iter_mut() {
                *o = x;
                x *= u;
            }
            out
        };
        if let Some(n) = panels {
            return gl10_composite(&f, self.lo, self.hi, n);
        }
        let abs_f = |u: f64| f(u).map(f64::abs);
        let scale = gl10_composite(&abs_f, self.lo, self.hi, 64);
        let tol = scale.map(|s| 1e-13 * s);
        gl10_adaptive(&f, self.lo, self.hi, &tol)
    }

    /// Normalized raw moments `E[u^n]`, `n = 1..=6`.
    pub fn raw_moments(&self) -> [f64; 6] {
        normalize(self.raw_integrals(None))
    }

    /// As [`Self::raw_moments`] on a fixed composite grid.
    pub fn raw_moments_composite(&self, panels: usize) -> [f64; 6] {
        normalize(self.raw_integrals(Some(panels)))
    }
}

fn normalize(i: [f64; 7]) -> [f64; 6] {
    let mut m = [0.0; 6];
    for n in 0..6 {
        m[n] = i[n + 1] / i[0];
    }
    m
}

/// `κ_1..κ_6` of the invariant law for the 1D gradient models (cubic, OU).
pub fn stationary_cumulants_gradient(model: &SdeModel) -> Result<[f64; 6]> {
    let density = match *model.kind() {
        ModelKind::Cubic { sigma } => StationaryDensity::from_potential(|u| u.powi(4) / 4.0 + u * u / 2.0, sigma)?,
        ModelKind::Ou { b, mu, sigma } => {
            StationaryDensity::from_potential(move |u| b * (u - mu) * (u - mu) / 2.0, sigma)?
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "{} is not a 1D gradient system with additive noise",
                model.name()
            )))
        }
    };
    Ok(cumulants_1d(&density.raw_moments()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cubic_reference_values() {
        let k = stationary_cumulants_gradient(&SdeModel::cubic(2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(k[1], 0.731915, epsilon = 1e-6);
        assert_abs_diff_eq!(k[3], -0.339012, epsilon = 1e-6);
        assert_abs_diff_eq!(k[5], 0.964028, epsilon = 1e-6);
        for odd in [0, 2, 4] {
            assert!(k[odd].abs() < 1e-12, "κ{} = {}", odd + 1, k[odd]);
        }
    }

    #[test]
    fn gaussian_case() {
        let k = stationary_cumulants_gradient(&SdeModel::ou(2.0, 0.5, 3.0).unwrap()).unwrap();
        assert_abs_diff_eq!(k[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(k[1], 9.0 / 4.0, epsilon = 1e-11);
        assert_abs_diff_eq!(k[3], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(k[5], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn normalized_and_refinement_stable() {
        let d = StationaryDensity::from_potential(|u| u.powi(4) / 4.0 + u * u / 2.0, 2.0).unwrap();
        let (lo, hi) = d.support();
        assert!(d.density(lo) < 1e-15 && d.density(hi) < 1e-15);
        let coarse = cumulants_1d(&d.raw_moments_composite(200));
        let fine = cumulants_1d(&d.raw_moments_composite(400));
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).abs() < 1e-8);
        }
        let adaptive = stationary_cumulants_gradient(&SdeModel::cubic(2.0).unwrap()).unwrap();
        for (a, b) in adaptive.iter().zip(&fine) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_gradient_models() {
        assert!(stationary_cumulants_gradient(&SdeModel::cir(2.0, 0.6, 0.5).unwrap()).is_err());
        assert!(StationaryDensity::from_potential(|u| -u * u, 1.0).is_err());
    }
}
