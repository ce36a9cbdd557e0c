use super::gl10_adaptive;
use crate::momentlab::cumulants_1d;
use crate::{Error, Result};

/// Mean and variance of `du = b(μ − u)dt + σ dW` from a start with the
/// given mean and variance.
pub fn ou_stats(b: f64, mu: f64, sigma: f64, mean0: f64, var0: f64, t: f64) -> (f64, f64) {
    let e = (-b * t).exp();
    (mu + e * (mean0 - mu), e * e * var0 + sigma * sigma * (1.0 - e * e) / (2.0 * b))
}

/// Mean and variance of the CIR process `du = b(μ − u)dt + σ√u dW` from a
/// deterministic start.
pub fn cir_stats(b: f64, mu: f64, sigma: f64, u0: f64, t: f64) -> Result<(f64, f64)> {
    if !(b > 0.0 && mu > 0.0) || 2.0 * b * mu < sigma * sigma {
        return Err(Error::ParameterViolation(format!(
            "CIR needs b > 0, mu > 0 and 2 b mu >= sigma^2 (b={b}, mu={mu}, sigma={sigma})"
        )));
    }
    let e = (-b * t).exp();
    let s2b = sigma * sigma / b;
    Ok((mu + e * (u0 - mu), u0 * s2b * (e - e * e) + mu * s2b / 2.0 * (1.0 - e).powi(2)))
}

/// Mean and variance of `u` for the OU process whose damping `b` is drawn
/// from `U(lo, hi)` independently of a `N(mean0, var0)` start, averaged
/// over `b`.
pub fn ou_random_damping_stats(mu: f64, sigma: f64, mean0: f64, var0: f64, lo: f64, hi: f64, t: f64) -> (f64, f64) {
    if hi <= lo {
        let (m, v) = ou_stats(lo, mu, sigma, mean0, var0, t);
        return (m, v);
    }
    let f = |b: f64| {
        let (m, v) = ou_stats(b, mu, sigma, mean0, var0, t);
        [m, v + m * m]
    };
    let scale = mean0.abs().max(mu.abs()).max(1.0);
    let tol = [1e-15 * scale, 1e-15 * scale * scale.max(sigma * sigma)];
    let [m, s] = gl10_adaptive(&f, lo, hi, &tol);
    let w = hi - lo;
    let mean = m / w;
    (mean, s / w - mean * mean)
}

/// Cumulants of the stationary law of `u` for `du = −b u dt + σ dW` with
/// `b ~ U(lo, hi)`: a centered Gaussian scale mixture with variance
/// `σ²/(2b)`.
pub fn mixture_cumulants_random_damping(sigma: f64, lo: f64, hi: f64) -> Result<[f64; 6]> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::ParameterViolation(format!("damping law U({lo}, {hi}) needs 0 < lo <= hi")));
    }
    // E[b^{-k}] under U(lo, hi)
    let inv_moment = |k: i32| -> f64 {
        if hi == lo {
            lo.powi(-k)
        } else if k == 1 {
            (hi / lo).ln() / (hi - lo)
        } else {
            (lo.powi(1 - k) - hi.powi(1 - k)) / ((k - 1) as f64 * (hi - lo))
        }
    };
    let c = sigma * sigma / 2.0;
    let m2 = c * inv_moment(1);
    let m4 = 3.0 * c.powi(2) * inv_moment(2);
    let m6 = 15.0 * c.powi(3) * inv_moment(3);
    Ok(cumulants_1d(&[0.0, m2, 0.0, m4, 0.0, m6]))
}
