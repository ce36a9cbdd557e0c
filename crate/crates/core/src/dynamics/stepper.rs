use super::model::{ModelKind, SdeModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stepper {
    /// Euler-Maruyama.
    Euler,
    /// Heun predictor-corrector on the drift, Euler on the noise. Weak order
    /// two for additive noise.
    WeakRk2,
    /// First-order Milstein specialised to the CIR diffusion `σ√u`.
    MilsteinCir,
}

impl Stepper {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "euler" => Ok(Stepper::Euler),
            "rk2" | "weak_rk2" => Ok(Stepper::WeakRk2),
            "milstein" | "milstein_cir" => Ok(Stepper::MilsteinCir),
            other => Err(Error::InvalidArgument(format!("unknown stepper `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stepper::Euler => "euler",
            Stepper::WeakRk2 => "rk2",
            Stepper::MilsteinCir => "milstein",
        }
    }

    pub fn check_compatible(self, model: &SdeModel) -> Result<()> {
        if self == Stepper::MilsteinCir && !matches!(model.kind(), ModelKind::Cir { .. }) {
            return Err(Error::InvalidArgument(format!(
                "the Milstein stepper is only available for cir, not {}",
                model.name()
            )));
        }
        Ok(())
    }

    /// Advances `u` in place by one step of size `dt` with driver increments
    /// `dw`. Returns true if the state had to be projected back onto the
    /// model's domain.
    pub fn step(self, model: &SdeModel, u: &mut [f64], dw: &[f64], dt: f64, s: &mut Scratch) -> bool {
        let d = u.len();
        let r = dw.len();
        match self {
            Stepper::Euler => {
                model.drift(u, &mut s.drift);
                model.diffusion(u, &mut s.diff);
                for i in 0..d {
                    u[i] += s.drift[i] * dt + noise(&s.diff, i, r, dw);
                }
            }
            Stepper::WeakRk2 => {
                model.drift(u, &mut s.drift);
                model.diffusion(u, &mut s.diff);
                for i in 0..d {
                    s.noise[i] = noise(&s.diff, i, r, dw);
                    s.pred[i] = u[i] + s.drift[i] * dt + s.noise[i];
                }
                model.drift(&s.pred, &mut s.drift_pred);
                for i in 0..d {
                    u[i] += 0.5 * dt * (s.drift[i] + s.drift_pred[i]) + s.noise[i];
                }
            }
            Stepper::MilsteinCir => {
                let ModelKind::Cir { b, mu, sigma } = *model.kind() else {
                    unreachable!("stepper compatibility is checked before propagation")
                };
                let x = u[0];
                let w = dw[0];
                u[0] = x
                    + b * (mu - x - sigma * sigma / (4.0 * b)) * dt
                    + sigma * x.max(0.0).sqrt() * w
                    + 0.25 * sigma * sigma * w * w;
            }
        }
        model.project(u)
    }
}

#[inline]
fn noise(diff: &[f64], row: usize, drivers: usize, dw: &[f64]) -> f64 {
    diff[row * drivers..(row + 1) * drivers].iter().zip(dw).map(|(a, b)| a * b).sum()
}

/// Per-trajectory work buffers.
#[derive(Debug, Clone)]
pub struct Scratch {
    drift: Vec<f64>,
    drift_pred: Vec<f64>,
    pred: Vec<f64>,
    noise: Vec<f64>,
    diff: Vec<f64>,
}

impl Scratch {
    pub fn new(model: &SdeModel) -> Self {
        let d = model.state_dim();
        Scratch {
            drift: vec![0.0; d],
            drift_pred: vec![0.0; d],
            pred: vec![0.0; d],
            noise: vec![0.0; d],
            diff: vec![0.0; d * model.n_drivers()],
        }
    }
}
