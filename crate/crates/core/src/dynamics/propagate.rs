use super::model::SdeModel;
use super::stepper::{Scratch, Stepper};
use crate::forcing::IncrementTable;
use crate::par::{self, Execution};
use crate::polyquad::{QuadratureRule, WeightedPoints};
use crate::{Error, Result};

/// Product cloud `{u_j^p × ξ^q}` after one restart interval. Particle
/// `p * Q_ξ + q` carries weight `w^p w^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    dim: usize,
    states: Vec<f64>,
    provenance: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

impl ParticleCloud {
    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn provenance(&self) -> &[(usize, usize)] {
        &self.provenance
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_rule(&self) -> QuadratureRule {
        QuadratureRule::new(self.dim, self.states.clone(), self.weights.clone()).expect("cloud layout is consistent")
    }
}

impl WeightedPoints for ParticleCloud {
    fn dim(&self) -> usize {
        self.dim
    }
    fn len(&self) -> usize {
        self.weights.len()
    }
    fn point(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }
    fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Weighted first and second moments of the cloud after `step` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: usize,
    pub mean: Vec<f64>,
    pub second: Vec<f64>,
    /// `E[u_1^n]` for `n = 1..=6` (first state coordinate).
    pub marginal: [f64; 6],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub cloud: ParticleCloud,
    pub checkpoints: Vec<Checkpoint>,
    /// Number of (particle, step) pairs where the state was projected back
    /// onto the model's domain.
    pub clamps: usize,
}

/// Evolves every pair `(u^p, ξ^q)` across the interval covered by `table`.
pub fn propagate_interval(
    model: &SdeModel,
    u_rule: &QuadratureRule,
    xi_rule: &QuadratureRule,
    table: &IncrementTable,
    stepper: Stepper,
    exec: Execution,
) -> Result<ParticleCloud> {
    Ok(propagate_observed(model, u_rule, xi_rule, table, stepper, 0, exec)?.cloud)
}

/// As [`propagate_interval`], also recording weighted moments every
/// `record_every` steps (and at the final step). `record_every = 0` records
/// nothing.
pub fn propagate_observed(
    model: &SdeModel,
    u_rule: &QuadratureRule,
    xi_rule: &QuadratureRule,
    table: &IncrementTable,
    stepper: Stepper,
    record_every: usize,
    exec: Execution,
) -> Result<Propagation> {
    let d = model.state_dim();
    let drivers = model.n_drivers();
    let modes = table.modes();
    if u_rule.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "solution rule has dimension {} but model state has {d}",
            u_rule.dim()
        )));
    }
    if xi_rule.dim() != drivers * modes {
        return Err(Error::DimensionMismatch(format!(
            "forcing rule has dimension {} but {drivers} driver(s) x {modes} modes are needed",
            xi_rule.dim()
        )));
    }
    stepper.check_compatible(model)?;

    let steps = table.steps();
    let dt = table.step_size();
    let record_steps: Vec<usize> = if record_every == 0 {
        Vec::new()
    } else {
        (1..=steps).filter(|s| s % record_every == 0 || *s == steps).collect()
    };

    // Driver increments per forcing node: steps x drivers.
    let increments: Vec<Vec<f64>> = par::map_indexed(xi_rule.len(), exec, |q| {
        let xi = xi_rule.node(q);
        let mut out = Vec::with_capacity(steps * drivers);
        for i in 0..steps {
            for r in 0..drivers {
                out.push(table.increment(i, &xi[r * modes..(r + 1) * modes]));
            }
        }
        out
    });

    let n_xi = xi_rule.len();
    let n = u_rule.len() * n_xi;
    struct Trajectory {
        end: Vec<f64>,
        snapshots: Vec<f64>,
        clamps: usize,
    }
    let trajectories = par::try_map_indexed(n, exec, |idx| {
        let (p, q) = (idx / n_xi, idx % n_xi);
        let mut u = u_rule.node(p).to_vec();
        let mut scratch = Scratch::new(model);
        let mut snapshots = Vec::with_capacity(record_steps.len() * d);
        let mut next_record = 0;
        let mut clamps = 0;
        let dws = &increments[q];
        for i in 0..steps {
            if stepper.step(model, &mut u, &dws[i * drivers..(i + 1) * drivers], dt, &mut scratch) {
                clamps += 1;
            }
            if u.iter().any(|x| !x.is_finite()) {
                return Err(Error::ParticleBlowup { p, q, step: i });
            }
            if next_record < record_steps.len() && record_steps[next_record] == i + 1 {
                snapshots.extend_from_slice(&u);
                next_record += 1;
            }
        }
        Ok(Trajectory { end: u, snapshots, clamps })
    })?;

    let mut states = Vec::with_capacity(n * d);
    let mut provenance = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut clamps = 0;
    for (idx, t) in trajectories.iter().enumerate() {
        let (p, q) = (idx / n_xi, idx % n_xi);
        states.extend_from_slice(&t.end);
        provenance.push((p, q));
        weights.push(u_rule.weights()[p] * xi_rule.weights()[q]);
        clamps += t.clamps;
    }

    let checkpoints = record_steps
        .iter()
        .enumerate()
        .map(|(c, &step)| {
            let mut mean = vec![0.0; d];
            let mut second = vec![0.0; d];
            let mut marginal = [0.0; 6];
            for (t, &w) in trajectories.iter().zip(&weights) {
                let x = &t.snapshots[c * d..(c + 1) * d];
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
            Checkpoint { step, mean, second, marginal }
        })
        .collect();

    Ok(Propagation { cloud: ParticleCloud { dim: d, states, provenance, weights }, checkpoints, clamps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::{forcing_rule, SpectralBasis};
    use crate::polyquad::{gauss_rule_1d, tensor_rule, RuleFamily};
    use approx::assert_abs_diff_eq;

    fn table(t0: f64, t1: f64, modes: usize, steps: usize) -> IncrementTable {
        IncrementTable::new(SpectralBasis::new(t0, t1, modes).unwrap(), steps).unwrap()
    }

    fn weighted_mean(c: &ParticleCloud, k: usize) -> f64 {
        (0..c.len()).map(|i| c.weight(i) * c.point(i)[k]).sum()
    }

    #[test]
    fn zero_noise_follows_flow() {
        let m = SdeModel::ou(1.0, 0.0, 0.0).unwrap();
        let u = QuadratureRule::point_mass(&[1.0]);
        let xi = forcing_rule(3, 2, false).unwrap();
        let c =
            propagate_interval(&m, &u, &xi, &table(0.0, 0.5, 3, 500), Stepper::WeakRk2, Execution::Sequential).unwrap();
        assert_eq!(c.len(), xi.len());
        for i in 0..c.len() {
            assert_abs_diff_eq!(c.point(i)[0], (-0.5f64).exp(), epsilon = 1e-6);
        }
        assert_abs_diff_eq!(c.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn ou_mean_after_one_interval() {
        let (b, mu, sigma) = (10.0, 0.1, 4.0);
        let m = SdeModel::ou(b, mu, sigma).unwrap();
        let u =
            QuadratureRule::from_1d(&gauss_rule_1d(RuleFamily::GaussHermite, 3).unwrap()).map_affine(&[1.0], &[0.2]);
        let xi = forcing_rule(2, 2, true).unwrap();
        let dt = 0.1;
        let c =
            propagate_interval(&m, &u, &xi, &table(0.0, dt, 2, 200), Stepper::WeakRk2, Execution::Parallel).unwrap();
        assert_eq!(c.len(), 3 * 4);
        assert_eq!(c.provenance()[5], (1, 1));
        let exact = (-b * dt).exp() * (1.0 - mu) + mu;
        assert_abs_diff_eq!(weighted_mean(&c, 0), exact, epsilon = 1e-4);
    }

    #[test]
    fn deterministic_and_partition_independent() {
        let m = SdeModel::cubic(2.0).unwrap();
        let u = QuadratureRule::from_1d(&gauss_rule_1d(RuleFamily::GaussHermite, 4).unwrap());
        let xi = forcing_rule(2, 3, false).unwrap();
        let t = table(0.0, 0.04, 2, 40);
        let a = propagate_observed(&m, &u, &xi, &t, Stepper::WeakRk2, 10, Execution::Sequential).unwrap();
        let b = propagate_observed(&m, &u, &xi, &t, Stepper::WeakRk2, 10, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.checkpoints.len(), 4);
        assert_eq!(a.checkpoints[3].step, 40);
        assert_abs_diff_eq!(a.checkpoints[3].mean[0], weighted_mean(&a.cloud, 0), epsilon = 1e-14);
    }

    #[test]
    fn multi_driver_blocks() {
        // with a_u = 0 the v-equation is an OU process driven by the second block only
        let (bv, sv) = (0.5, 0.5);
        let m = SdeModel::intermittent2d(0.0, 1.2, bv, 0.0, sv).unwrap();
        let g = gauss_rule_1d(RuleFamily::GaussHermite, 1).unwrap();
        let u = tensor_rule(&[g.clone(), g]).unwrap().map_affine(&[1.0, 0.0], &[1.0, 1.0]);
        let xi = forcing_rule(4, 2, true).unwrap();
        let t_end = 0.2;
        let c = propagate_interval(&m, &u, &xi, &table(0.0, t_end, 2, 2000), Stepper::WeakRk2, Execution::Parallel)
            .unwrap();
        let var_v: f64 = (0..c.len()).map(|i| c.weight(i) * c.point(i)[1].powi(2)).sum();
        let exact = sv * sv * (1.0 - (-2.0 * bv * t_end).exp()) / (2.0 * bv);
        assert!((var_v - exact).abs() / exact < 1e-3, "{var_v} vs {exact}");
        // σ_u = 0: u is deterministic
        for i in 0..c.len() {
            assert_abs_diff_eq!(c.point(i)[0], (-1.2 * t_end).exp(), epsilon = 1e-6);
        }
    }

    #[test]
    fn dimension_checks() {
        let m = SdeModel::ou(1.0, 0.0, 1.0).unwrap();
        let u = QuadratureRule::point_mass(&[0.0]);
        let xi = forcing_rule(3, 2, false).unwrap();
        assert!(
            propagate_interval(&m, &u, &xi, &table(0.0, 1.0, 2, 10), Stepper::Euler, Execution::Sequential).is_err()
        );
        let u2 = QuadratureRule::point_mass(&[0.0, 1.0]);
        assert!(
            propagate_interval(&m, &u2, &xi, &table(0.0, 1.0, 3, 10), Stepper::Euler, Execution::Sequential).is_err()
        );
    }

    #[test]
    fn blowup_reports_particle() {
        let m = SdeModel::cubic(1.0).unwrap();
        let u = QuadratureRule::new(1, vec![0.0, 1e3], vec![0.5, 0.5]).unwrap();
        let xi = forcing_rule(1, 1, false).unwrap();
        let err = propagate_interval(&m, &u, &xi, &table(0.0, 1.0, 1, 10), Stepper::Euler, Execution::Sequential)
            .unwrap_err();
        assert!(matches!(err, Error::ParticleBlowup { p: 1, q: 0, .. }), "{err}");
    }
}
