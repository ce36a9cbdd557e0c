use std::collections::BTreeMap;

use crate::{Error, Result};

/// Floor applied to CIR states after every step.
pub const CLAMP_FLOOR: f64 = 1e-12;

pub type ModelParams = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// `du = b(μ - u) dt + σ dW`.
    Ou { b: f64, mu: f64, sigma: f64 },
    /// State `(u, b)` with `du = b(μ - u) dt + σ dW`, `db = 0`.
    OuRandomDamping { mu: f64, sigma: f64 },
    /// `du = -(u² + 1) u dt + σ dW`.
    Cubic { sigma: f64 },
    /// `du = b(μ - u) dt + σ √u dW`.
    Cir { b: f64, mu: f64, sigma: f64 },
    /// `du = -(b_u + a_u v) u dt + σ_u dW_u`, `dv = -b_v v dt + σ_v dW_v`.
    Intermittent2d { a_u: f64, b_u: f64, b_v: f64, sigma_u: f64, sigma_v: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeModel {
    kind: ModelKind,
}

impl SdeModel {
    pub const NAMES: [&'static str; 5] = ["ou", "ou_random_damping", "cubic", "cir", "intermittent2d"];

    pub fn ou(b: f64, mu: f64, sigma: f64) -> Result<Self> {
        Self::new(ModelKind::Ou { b, mu, sigma })
    }

    pub fn cir(b: f64, mu: f64, sigma: f64) -> Result<Self> {
        Self::new(ModelKind::Cir { b, mu, sigma })
    }

    pub fn cubic(sigma: f64) -> Result<Self> {
        Self::new(ModelKind::Cubic { sigma })
    }

    pub fn ou_random_damping(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(ModelKind::OuRandomDamping { mu, sigma })
    }

    pub fn intermittent2d(a_u: f64, b_u: f64, b_v: f64, sigma_u: f64, sigma_v: f64) -> Result<Self> {
        Self::new(ModelKind::Intermittent2d { a_u, b_u, b_v, sigma_u, sigma_v })
    }

    pub fn new(kind: ModelKind) -> Result<Self> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match kind {
            ModelKind::Ou { b, mu, sigma } => finite(&[b, mu, sigma]),
            ModelKind::OuRandomDamping { mu, sigma } => finite(&[mu, sigma]),
            ModelKind::Cubic { sigma } => finite(&[sigma]),
            ModelKind::Cir { b, mu, sigma } => {
                if !finite(&[b, mu, sigma]) || b <= 0.0 || mu <= 0.0 {
                    return Err(Error::ParameterViolation("CIR needs b > 0 and mu > 0".into()));
                }
                if 2.0 * b * mu < sigma * sigma {
                    return Err(Error::ParameterViolation(format!(
                        "CIR condition 2 b mu >= sigma^2 fails: {} < {}",
                        2.0 * b * mu,
                        sigma * sigma
                    )));
                }
                true
            }
            ModelKind::Intermittent2d { a_u, b_u, b_v, sigma_u, sigma_v } => finite(&[a_u, b_u, b_v, sigma_u, sigma_v]),
        };
        if !ok {
            return Err(Error::ParameterViolation("model parameters must be finite".into()));
        }
        Ok(SdeModel { kind })
    }

    /// Names of the constants each model reads from a parameter map.
    pub fn param_keys(name: &str) -> Result<&'static [&'static str]> {
        Ok(match name {
            "ou" | "cir" => &["b", "mu", "sigma"],
            "ou_random_damping" => &["mu", "sigma"],
            "cubic" => &["sigma"],
            "intermittent2d" => &["a_u", "b_u", "b_v", "sigma_u", "sigma_v"],
            other => return Err(Error::UnknownModel(other.to_string())),
        })
    }

    pub fn from_name(name: &str, params: &ModelParams) -> Result<Self> {
        let keys = Self::param_keys(name)?;
        let get = |k: &str| {
            params
                .get(k)
                .copied()
                .ok_or_else(|| Error::ParameterViolation(format!("model `{name}` needs parameter `{k}`")))
        };
        let v: Vec<f64> = keys.iter().map(|k| get(k)).collect::<Result<_>>()?;
        let kind = match name {
            "ou" => ModelKind::Ou { b: v[0], mu: v[1], sigma: v[2] },
            "cir" => ModelKind::Cir { b: v[0], mu: v[1], sigma: v[2] },
            "ou_random_damping" => ModelKind::OuRandomDamping { mu: v[0], sigma: v[1] },
            "cubic" => ModelKind::Cubic { sigma: v[0] },
            _ => ModelKind::Intermittent2d { a_u: v[0], b_u: v[1], b_v: v[2], sigma_u: v[3], sigma_v: v[4] },
        };
        Self::new(kind)
    }

    /// The model constants keyed as in [`SdeModel::param_keys`].
    pub fn params(&self) -> ModelParams {
        let values: Vec<f64> = match self.kind {
            ModelKind::Ou { b, mu, sigma } | ModelKind::Cir { b, mu, sigma } => vec![b, mu, sigma],
            ModelKind::OuRandomDamping { mu, sigma } => vec![mu, sigma],
            ModelKind::Cubic { sigma } => vec![sigma],
            ModelKind::Intermittent2d { a_u, b_u, b_v, sigma_u, sigma_v } => vec![a_u, b_u, b_v, sigma_u, sigma_v],
        };
        let keys = Self::param_keys(self.name()).expect("every model name has parameter keys");
        keys.iter().map(|k| k.to_string()).zip(values).collect()
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Ou { .. } => "ou",
            ModelKind::OuRandomDamping { .. } => "ou_random_damping",
            ModelKind::Cubic { .. } => "cubic",
            ModelKind::Cir { .. } => "cir",
            ModelKind::Intermittent2d { .. } => "intermittent2d",
        }
    }

    pub fn state_dim(&self) -> usize {
        match self.kind {
            ModelKind::OuRandomDamping { .. } | ModelKind::Intermittent2d { .. } => 2,
            _ => 1,
        }
    }

    pub fn n_drivers(&self) -> usize {
        match self.kind {
            ModelKind::Intermittent2d { .. } => 2,
            _ => 1,
        }
    }

    /// Coordinates with zero drift and zero diffusion (random parameters).
    pub fn static_coords(&self) -> &'static [usize] {
        match self.kind {
            ModelKind::OuRandomDamping { .. } => &[1],
            _ => &[],
        }
    }

    pub fn drift(&self, u: &[f64], out: &mut [f64]) {
        match self.kind {
            ModelKind::Ou { b, mu, .. } | ModelKind::Cir { b, mu, .. } => out[0] = b * (mu - u[0]),
            ModelKind::OuRandomDamping { mu, .. } => {
                out[0] = u[1] * (mu - u[0]);
                out[1] = 0.0;
            }
            ModelKind::Cubic { .. } => out[0] = -(u[0] * u[0] + 1.0) * u[0],
            ModelKind::Intermittent2d { a_u, b_u, b_v, .. } => {
                out[0] = -(b_u + a_u * u[1]) * u[0];
                out[1] = -b_v * u[1];
            }
        }
    }

    /// Row-major `state_dim × n_drivers` diffusion matrix.
    pub fn diffusion(&self, u: &[f64], out: &mut [f64]) {
        match self.kind {
            ModelKind::Ou { sigma, .. } | ModelKind::Cubic { sigma } => out[0] = sigma,
            ModelKind::OuRandomDamping { sigma, .. } => {
                out[0] = sigma;
                out[1] = 0.0;
            }
            ModelKind::Cir { sigma, .. } => out[0] = sigma * u[0].max(0.0).sqrt(),
            ModelKind::Intermittent2d { sigma_u, sigma_v, .. } => {
                out[0] = sigma_u;
                out[1] = 0.0;
                out[2] = 0.0;
                out[3] = sigma_v;
            }
        }
    }

    /// Projects the state onto the admissible domain; returns true if it moved.
    pub fn project(&self, u: &mut [f64]) -> bool {
        if let ModelKind::Cir { .. } = self.kind {
            if u[0] < CLAMP_FLOOR {
                u[0] = CLAMP_FLOOR;
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cir_condition() {
        assert!(SdeModel::cir(2.0, 0.6, 0.5).is_ok());
        assert!(matches!(SdeModel::cir(2.0, 0.6, 3.0), Err(Error::ParameterViolation(_))));
    }

    #[test]
    fn cubic_drift() {
        let m = SdeModel::cubic(2.0).unwrap();
        let mut out = [0.0];
        m.drift(&[1.0], &mut out);
        assert_eq!(out[0], -2.0);
    }

    #[test]
    fn from_name() {
        let mut p = ModelParams::new();
        p.insert("b".into(), 2.0);
        p.insert("mu".into(), 0.6);
        p.insert("sigma".into(), 0.5);
        let m = SdeModel::from_name("cir", &p).unwrap();
        assert_eq!(m.name(), "cir");
        assert!(matches!(SdeModel::from_name("heston", &p), Err(Error::UnknownModel(_))));
        assert!(SdeModel::from_name("intermittent2d", &p).is_err());
        let back = SdeModel::from_name("cir", &m.params()).unwrap();
        assert_eq!(back, m);
        let m = SdeModel::ou_random_damping(0.2, 4.0).unwrap();
        assert_eq!((m.state_dim(), m.n_drivers()), (2, 1));
        assert_eq!(m.static_coords(), &[1]);
        let m = SdeModel::intermittent2d(1.0, 1.2, 0.5, 0.5, 0.5).unwrap();
        assert_eq!((m.state_dim(), m.n_drivers()), (2, 2));
    }

    #[test]
    fn cir_projection() {
        let m = SdeModel::cir(2.0, 0.6, 0.5).unwrap();
        let mut u = [-0.1];
        assert!(m.project(&mut u));
        assert_eq!(u[0], CLAMP_FLOOR);
        let mut u = [0.3];
        assert!(!m.project(&mut u));
    }
}
