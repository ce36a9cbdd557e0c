use std::sync::Arc;

use super::config::RunConfig;
use super::initial::initial_rule;
use crate::dynamics::propagate_observed;
use crate::forcing::{forcing_rule, IncrementTable, SpectralBasis};
use crate::momentlab::cumulants_1d;
use crate::polyquad::QuadratureRule;
use crate::sparseopt::{build_rule_grouped, Diagnostics};
use crate::{Error, Result};

/// Rule construction record for the restart at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartRecord {
    pub index: usize,
    pub t: f64,
    pub diagnostics: Diagnostics,
    /// CIR floor projections during the interval that ended at `t`.
    pub clamps: usize,
    pub forcing_nodes: usize,
}

/// Statistics of a run; `mean[i]` and `variance[i]` belong to `times[i]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatSeries {
    pub dim: usize,
    pub times: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub variance: Vec<Vec<f64>>,
    /// `κ_1..κ_6` of the first coordinate, aligned with `times`.
    pub cumulants: Option<Vec<[f64; 6]>>,
    pub restarts: Vec<RestartRecord>,
    /// Negative variances reset to zero for reporting.
    pub variance_clamps: usize,
    /// CIR floor projections over the whole run.
    pub clamps: usize,
    pub forcing_nodes: usize,
}

impl StatSeries {
    fn push(&mut self, t: f64, mean: Vec<f64>, second: &[f64], marginal: Option<[f64; 6]>) {
        let var = mean
            .iter()
            .zip(second)
            .map(|(m, s)| {
                let v = s - m * m;
                if v < 0.0 {
                    self.variance_clamps += 1;
                    0.0
                } else {
                    v
                }
            })
            .collect();
        self.times.push(t);
        self.mean.push(mean);
        self.variance.push(var);
        if let (Some(c), Some(raw)) = (self.cumulants.as_mut(), marginal) {
            c.push(cumulants_1d(&raw));
        }
    }

    pub fn terminal_mean(&self) -> &[f64] {
        self.mean.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terminal_variance(&self) -> &[f64] {
        self.variance.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terminal_cumulants(&self) -> Option<[f64; 6]> {
        self.cumulants.as_ref().and_then(|c| c.last().copied())
    }

    pub fn max_node_count(&self) -> usize {
        self.restarts.iter().map(|r| r.diagnostics.node_count).max().unwrap_or(0)
    }
}

fn rule_stats(rule: &QuadratureRule) -> (Vec<f64>, Vec<f64>, [f64; 6]) {
    let d = rule.dim();
    let mut mean = vec![0.0; d];
    let mut second = vec![0.0; d];
    let mut marginal = [0.0; 6];
    for i in 0..rule.len() {
        let (x, w) = (rule.node(i), rule.weights()[i]);
        for k in 0..d {
            mean[k] += w * x[k];
            second[k] += w * x[k] * x[k];
        }
        let mut p = w;
        for m in marginal.iter_mut() {
            p *= x[0];
            *m += p;
        }
    }
    (mean, second, marginal)
}

/// Runs the restart loop over `[0, T]` with restarts every `Δt`.
pub fn run(config: &RunConfig) -> Result<StatSeries> {
    config.validate()?;
    let intervals = config.intervals()?;
    let steps = config.steps_per_interval()?;
    let model = &config.model;
    let xi = Arc::new(forcing_rule(model.n_drivers() * config.modes, config.forcing_level, config.forcing_product)?);
    let table = IncrementTable::new(SpectralBasis::new(0.0, config.delta_t, config.modes)?, steps)?;
    let opts = config.build_options();
    let dtau = config.delta_t / steps as f64;

    let mut rule = initial_rule(&config.initial)?;
    let mut series = StatSeries {
        dim: model.state_dim(),
        cumulants: config.cumulants.then(Vec::new),
        forcing_nodes: xi.len(),
        ..StatSeries::default()
    };
    let (m0, s0, k0) = rule_stats(&rule);
    series.push(0.0, m0, &s0, Some(k0));

    for j in 0..intervals {
        let wrap = |e: Error| Error::Restart { index: j, source: Box::new(e) };
        let t0 = j as f64 * config.delta_t;
        let prop = propagate_observed(model, &rule, &xi, &table, config.stepper, config.cadence, config.execution)
            .map_err(wrap)?;
        for c in &prop.checkpoints {
            series.push(t0 + c.step as f64 * dtau, c.mean.clone(), &c.second, Some(c.marginal));
        }
        series.clamps += prop.clamps;
        if j + 1 == intervals {
            break;
        }
        let (next, diagnostics) = build_rule_grouped(&prop.cloud, &opts, config.fixed_coords()).map_err(wrap)?;
        log::debug!(
            "restart {} at t={:.6}: {} -> {} nodes, cond {:.3e}",
            j + 1,
            t0 + config.delta_t,
            diagnostics.input_nodes,
            diagnostics.node_count,
            diagnostics.cond_a
        );
        series.restarts.push(RestartRecord {
            index: j + 1,
            t: (j + 1) as f64 * config.delta_t,
            diagnostics,
            clamps: prop.clamps,
            forcing_nodes: xi.len(),
        });
        rule = next;
    }
    Ok(series)
}

/// Single interval over `[0, T]`: plain collocation without restarts.
pub fn naive_run(config: &RunConfig) -> Result<StatSeries> {
    let mut c = config.clone();
    c.delta_t = c.t_final;
    run(&c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{SdeModel, Stepper};
    use crate::engine::InitialSpec;
    use crate::momentlab::BasisKind;
    use crate::par::Execution;
    use crate::polyquad::binomial;

    fn ou_config(sigma: f64) -> RunConfig {
        let mut c = RunConfig::new(SdeModel::ou(1.0, 0.0, sigma).unwrap(), InitialSpec::point(&[1.0]));
        c.t_final = 1.0;
        c.delta_t = 0.25;
        c.delta_tau = 1e-3;
        c
    }

    #[test]
    fn deterministic_flow() {
        let s = run(&ou_config(0.0)).unwrap();
        for (t, (m, v)) in s.times.iter().zip(s.mean.iter().zip(&s.variance)) {
            assert!((m[0] - (-t).exp()).abs() < 1e-6, "t={t}: {}", m[0]);
            assert!(v[0] <= 1e-12);
        }
        assert!((s.times.last().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.restarts.len(), 3);
    }

    #[test]
    fn times_increase_and_bounded_rules() {
        let mut c = ou_config(1.0);
        c.degree = 3;
        c.basis = BasisKind::Monomial;
        c.stepper = Stepper::Euler;
        let s = run(&c).unwrap();
        assert!(s.times.windows(2).all(|w| w[1] > w[0]));
        let bound = binomial(1 + 3, 1) as usize;
        assert!(s.restarts.iter().all(|r| r.diagnostics.node_count <= bound));
        assert!(s.restarts.iter().all(|r| r.forcing_nodes == s.forcing_nodes));
    }

    #[test]
    fn deterministic_output() {
        let mut c = ou_config(1.0);
        c.cumulants = true;
        let a = run(&c).unwrap();
        c.execution = Execution::Sequential;
        let b = run(&c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn naive_matches_single_interval() {
        let mut c = ou_config(1.0);
        c.delta_t = 1.0;
        assert_eq!(run(&c).unwrap(), naive_run(&ou_config(1.0)).unwrap());
    }

    #[test]
    fn restart_failure_names_interval() {
        let mut c = ou_config(1.0);
        c.model = SdeModel::cubic(1.0).unwrap();
        c.initial = InitialSpec::point(&[1e200]);
        c.stepper = Stepper::Euler;
        match run(&c) {
            Err(Error::Restart { index: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
