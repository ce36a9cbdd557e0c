use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{Scratch, SdeModel, Stepper};
use crate::engine::{Marginal, StatSeries};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Paths per reduction chunk; fixed so sums do not depend on thread count.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub model: SdeModel,
    pub stepper: Stepper,
    pub delta_tau: f64,
    pub t_final: f64,
    pub samples: usize,
    pub repeats: usize,
    pub seed: u64,
    pub initial: Vec<Marginal>,
    /// Record statistics every this many steps (and at `T`).
    pub cadence: usize,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    /// One series per independent repeat.
    pub repeats: Vec<StatSeries>,
    /// Across-repeat standard deviation of the terminal mean, per variable.
    pub spread_mean: Vec<f64>,
    /// Across-repeat standard deviation of the terminal variance.
    pub spread_variance: Vec<f64>,
}

impl McResult {
    /// Across-repeat average of the per-repeat series.
    pub fn averaged(&self) -> StatSeries {
        let r = self.repeats.len() as f64;
        let mut out = self.repeats[0].clone();
        for i in 0..out.times.len() {
            for k in 0..out.dim {
                out.mean[i][k] = self.repeats.iter().map(|s| s.mean[i][k]).sum::<f64>() / r;
                out.variance[i][k] = self.repeats.iter().map(|s| s.variance[i][k]).sum::<f64>() / r;
            }
        }
        out
    }
}

fn sample(m: &Marginal, rng: &mut ChaCha8Rng) -> f64 {
    match *m {
        Marginal::Normal { mean, var } => mean + var.sqrt() * rng.sample::<f64, _>(StandardNormal),
        Marginal::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
        Marginal::Point(x) => x,
    }
}

/// Pseudo-random Euler-type simulation. Path `p` of repeat `r` draws from
/// its own ChaCha stream, so results are reproducible from `seed` alone.
pub fn monte_carlo(cfg: &McConfig) -> Result<McResult> {
    let model = &cfg.model;
    let d = model.state_dim();
    let drivers = model.n_drivers();
    if cfg.samples < 1 || cfg.repeats < 1 || cfg.cadence < 1 {
        return Err(Error::InvalidArgument("samples, repeats and cadence must be at least 1".into()));
    }
    if cfg.initial.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} initial marginals for state dimension {d}",
            cfg.initial.len()
        )));
    }
    cfg.stepper.check_compatible(model)?;
    let ratio = cfg.t_final / cfg.delta_tau;
    let steps = ratio.round() as usize;
    if steps < 1 || (ratio - steps as f64).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("T/delta_tau = {ratio} is not a positive integer")));
    }
    let dt = cfg.t_final / steps as f64;
    let sqdt = dt.sqrt();
    let record: Vec<usize> = (0..=steps).filter(|s| s % cfg.cadence == 0 || *s == steps).collect();
    let slots = record.len();

    let mut repeats = Vec::with_capacity(cfg.repeats);
    for r in 0..cfg.repeats {
        let chunks = cfg.samples.div_ceil(CHUNK);
        // per chunk: slots x (sum x, sum x²) x d, plus clamp count
        let partial = par::try_map_indexed(chunks, cfg.execution, |c| {
            let mut sums = vec![0.0; slots * 2 * d];
            let mut clamps = 0usize;
            let mut scratch = Scratch::new(model);
            let mut u = vec![0.0; d];
            let mut dw = vec![0.0; drivers];
            for p in c * CHUNK..((c + 1) * CHUNK).min(cfg.samples) {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(((r as u64) << 40) | p as u64);
                for (x, m) in u.iter_mut().zip(&cfg.initial) {
                    *x = sample(m, &mut rng);
                }
                let mut slot = 0;
                for step in 0..=steps {
                    if step > 0 {
                        for w in dw.iter_mut() {
                            *w = sqdt * rng.sample::<f64, _>(StandardNormal);
                        }
                        if cfg.stepper.step(model, &mut u, &dw, dt, &mut scratch) {
                            clamps += 1;
                        }
                        if u.iter().any(|x| !x.is_finite()) {
                            return Err(Error::ParticleBlowup { p, q: r, step });
                        }
                    }
                    if slot < slots && record[slot] == step {
                        let base = slot * 2 * d;
                        for k in 0..d {
                            sums[base + k] += u[k];
                            sums[base + d + k] += u[k] * u[k];
                        }
                        slot += 1;
                    }
                }
            }
            Ok((sums, clamps))
        })?;
        let mut total = vec![0.0; slots * 2 * d];
        let mut clamps = 0;
        for (s, c) in &partial {
            total.iter_mut().zip(s).for_each(|(t, v)| *t += v);
            clamps += c;
        }
        let n = cfg.samples as f64;
        let mut series = StatSeries { dim: d, clamps, ..StatSeries::default() };
        for (slot, &step) in record.iter().enumerate() {
            let base = slot * 2 * d;
            let mean: Vec<f64> = (0..d).map(|k| total[base + k] / n).collect();
            let var = (0..d)
                .map(|k| {
                    if cfg.samples > 1 {
                        ((total[base + d + k] - n * mean[k] * mean[k]) / (n - 1.0)).max(0.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            series.times.push(step as f64 * dt);
            series.mean.push(mean);
            series.variance.push(var);
        }
        repeats.push(series);
    }

    let spread = |pick: &dyn Fn(&StatSeries) -> &[f64]| -> Vec<f64> {
        (0..d)
            .map(|k| {
                let vals: Vec<f64> = repeats.iter().map(|s| pick(s)[k] - pick(&repeats[0])[k]).collect();
                let m = vals.iter().sum::<f64>() / vals.len() as f64;
                if vals.len() < 2 {
                    0.0
                } else {
                    (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64).sqrt()
                }
            })
            .collect()
    };
    let spread_mean = spread(&|s| s.terminal_mean());
    let spread_variance = spread(&|s| s.terminal_variance());
    Ok(McResult { repeats, spread_mean, spread_variance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::ou_stats;

    fn ou_cfg(sigma: f64, samples: usize, repeats: usize) -> McConfig {
        McConfig {
            model: SdeModel::ou(1.0, 0.0, sigma).unwrap(),
            stepper: Stepper::Euler,
            delta_tau: 0.01,
            t_final: 1.0,
            samples,
            repeats,
            seed: 42,
            initial: vec![Marginal::Point(1.0)],
            cadence: 10,
            execution: Execution::Parallel,
        }
    }

    #[test]
    fn zero_noise_is_deterministic() {
        let r = monte_carlo(&ou_cfg(0.0, 50, 3)).unwrap();
        let s = &r.repeats[0];
        assert!((s.terminal_mean()[0] - 0.99f64.powi(100)).abs() < 1e-14);
        assert_eq!(r.spread_mean, vec![0.0]);
        assert_eq!(s.times.len(), 11);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let a = monte_carlo(&ou_cfg(1.0, 3000, 2)).unwrap();
        let mut c = ou_cfg(1.0, 3000, 2);
        c.execution = Execution::Sequential;
        assert_eq!(a, monte_carlo(&c).unwrap());
    }

    #[test]
    fn variance_within_clt_band() {
        let mut c = ou_cfg(1.0, 100_000, 1);
        c.delta_tau = 1e-3;
        c.cadence = 1000;
        let r = monte_carlo(&c).unwrap();
        let (_, v) = ou_stats(1.0, 0.0, 1.0, 1.0, 0.0, 1.0);
        // Gaussian: Var(s²) ≈ 2v²/n; Euler bias is O(Δτ)
        let se = (2.0 * v * v / 1e5).sqrt();
        let got = r.repeats[0].terminal_variance()[0];
        assert!((got - v).abs() < 3.0 * se + 2e-3 * v, "{got} vs {v} (se {se})");
    }

    #[test]
    fn spread_shrinks_like_root_samples() {
        let a = monte_carlo(&ou_cfg(1.0, 1000, 40)).unwrap();
        let b = monte_carlo(&ou_cfg(1.0, 2000, 40)).unwrap();
        let ratio = a.spread_variance[0] / b.spread_variance[0];
        assert!((1.1..=1.9).contains(&ratio), "ratio {ratio}");
    }
}
