use std::fmt;
use std::str::FromStr;

use crate::dynamics::{SdeModel, Stepper};
use crate::engine::{InitialSpec, Marginal, RunConfig};
use crate::momentlab::BasisKind;
use crate::{Error, Result};

use super::config::{Experiment, Reference};

/// Ready-made experiments for the benchmark models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// OU without restarts; the long-time degradation study.
    Fig1OuNaive,
    Ex1OuRandomDamping,
    Ex2Cubic,
    Ex3Cir,
    Ex4Intermittent,
    /// Random damping with `μ = 0` run to `T = 8` for the cumulant table.
    Table2OuRandomDamping,
    /// CIR with `b = 4` at `T = 1` and `Δτ = 1e-4` for the accuracy/timing table.
    Table4Cir,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Fig1OuNaive,
        Preset::Ex1OuRandomDamping,
        Preset::Ex2Cubic,
        Preset::Ex3Cir,
        Preset::Ex4Intermittent,
        Preset::Table2OuRandomDamping,
        Preset::Table4Cir,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1OuNaive => "fig1_ou_naive",
            Preset::Ex1OuRandomDamping => "ex1_ou_random_damping",
            Preset::Ex2Cubic => "ex2_cubic",
            Preset::Ex3Cir => "ex3_cir",
            Preset::Ex4Intermittent => "ex4_intermittent",
            Preset::Table2OuRandomDamping => "table2_ou_random_damping",
            Preset::Table4Cir => "table4_cir",
        }
    }

    pub fn experiment(self) -> Experiment {
        let model = |m: Result<SdeModel>| m.expect("preset model parameters are valid");
        let product =
            |m: Vec<Marginal>, l: Vec<usize>| InitialSpec::product(m, l).expect("preset initial rule is valid");
        match self {
            Preset::Fig1OuNaive => {
                let mut r = RunConfig::new(model(SdeModel::ou(10.0, 0.1, 4.0)), InitialSpec::point(&[1.0]));
                r.t_final = 1.0;
                r.delta_t = 1.0;
                r.modes = 16;
                r.forcing_level = 2;
                let mut e = Experiment::new(self.name(), r);
                e.naive = true;
                e
            }
            Preset::Ex1OuRandomDamping => {
                let init = product(
                    vec![Marginal::Normal { mean: 1.0, var: 0.04 }, Marginal::Uniform { a: 1.0, b: 3.0 }],
                    vec![3, 8],
                );
                let mut r = RunConfig::new(model(SdeModel::ou_random_damping(0.2, 4.0)), init);
                r.t_final = 4.0;
                r.delta_t = 0.05;
                r.delta_tau = 5e-4;
                r.forcing_level = 2;
                r.forcing_product = true;
                r.degree = 2;
                r.grouped = true;
                Experiment::new(self.name(), r)
            }
            Preset::Table2OuRandomDamping => {
                let mut e = Preset::Ex1OuRandomDamping.experiment();
                e.name = self.name().into();
                let r = &mut e.run;
                r.model = model(SdeModel::ou_random_damping(0.0, 4.0));
                r.t_final = 8.0;
                r.delta_t = 0.1;
                r.delta_tau = 1e-3;
                r.forcing_level = 4;
                r.forcing_product = false;
                r.degree = 6;
                r.cumulants = true;
                r.cadence = 100;
                e
            }
            Preset::Ex2Cubic => {
                let mut r = RunConfig::new(model(SdeModel::cubic(2.0)), InitialSpec::point(&[1.0]));
                r.t_final = 4.0;
                r.delta_t = 0.04;
                r.delta_tau = 2e-4;
                r.forcing_level = 3;
                r.degree = 8;
                r.cumulants = true;
                r.cadence = 50;
                Experiment::new(self.name(), r)
            }
            Preset::Ex3Cir => {
                let mut r = RunConfig::new(model(SdeModel::cir(2.0, 0.6, 0.5)), InitialSpec::point(&[1.0]));
                r.t_final = 3.0;
                r.delta_t = 0.1;
                r.forcing_level = 4;
                r.degree = 4;
                r.basis = BasisKind::DataOrthonormal;
                r.stepper = Stepper::MilsteinCir;
                Experiment::new(self.name(), r)
            }
            Preset::Table4Cir => {
                let mut e = Preset::Ex3Cir.experiment();
                e.name = self.name().into();
                let r = &mut e.run;
                r.model = model(SdeModel::cir(4.0, 0.6, 1.0));
                r.t_final = 1.0;
                r.delta_tau = 1e-4;
                r.cadence = 100;
                e
            }
            Preset::Ex4Intermittent => {
                let (a_u, b_u, b_v, s_u, s_v) = (1.0, 1.2, 0.5, 0.5, 0.5);
                let init = product(
                    vec![
                        Marginal::Normal { mean: 1.0, var: s_u * s_u / (8.0 * b_u) },
                        Marginal::Normal { mean: 0.0, var: s_v * s_v / (8.0 * b_v) },
                    ],
                    vec![3, 3],
                );
                let mut r = RunConfig::new(model(SdeModel::intermittent2d(a_u, b_u, b_v, s_u, s_v)), init);
                r.t_final = 8.0;
                r.delta_t = 0.02;
                r.modes = 2;
                r.forcing_level = 2;
                r.forcing_product = true;
                r.degree = 5;
                r.basis = BasisKind::Hermite;
                let mut e = Experiment::new(self.name(), r);
                e.reference = Reference::MonteCarlo;
                e.mc_samples = 20_000;
                e
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            Error::InvalidArgument(format!("unknown preset `{s}` (expected one of {})", names.join(", ")))
        })
    }
}
