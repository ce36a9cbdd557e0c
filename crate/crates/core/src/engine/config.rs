use crate::dynamics::{SdeModel, Stepper};
use crate::momentlab::BasisKind;
use crate::par::Execution;
use crate::sparseopt::{BuildOptions, Precondition};
use crate::{Error, Result};

use super::initial::InitialSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: SdeModel,
    pub t_final: f64,
    /// Restart interval.
    pub delta_t: f64,
    /// Integrator step.
    pub delta_tau: f64,
    /// Forcing modes per driver.
    pub modes: usize,
    pub forcing_level: usize,
    /// Full tensor forcing rule instead of a Smolyak grid.
    pub forcing_product: bool,
    /// Constraint degree.
    pub degree: u32,
    pub basis: BasisKind,
    pub precondition: Option<Precondition>,
    pub stepper: Stepper,
    pub initial: InitialSpec,
    /// Record statistics every this many integrator steps.
    pub cadence: usize,
    pub cumulants: bool,
    /// Compress separately for each value of the model's static coordinates.
    pub grouped: bool,
    pub execution: Execution,
}

fn integer_ratio(num: f64, den: f64, what: &str) -> Result<usize> {
    let r = num / den;
    let n = r.round();
    if !(n >= 1.0) || (r - n).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("{what} = {r} is not a positive integer")));
    }
    Ok(n as usize)
}

impl RunConfig {
    pub fn new(model: SdeModel, initial: InitialSpec) -> Self {
        RunConfig {
            model,
            t_final: 1.0,
            delta_t: 0.1,
            delta_tau: 1e-3,
            modes: 2,
            forcing_level: 2,
            forcing_product: false,
            degree: 2,
            basis: BasisKind::Hermite,
            precondition: None,
            stepper: Stepper::WeakRk2,
            initial,
            cadence: 10,
            cumulants: false,
            grouped: false,
            execution: Execution::default(),
        }
    }

    pub fn intervals(&self) -> Result<usize> {
        integer_ratio(self.t_final, self.delta_t, "T/delta_t")
    }

    pub fn steps_per_interval(&self) -> Result<usize> {
        integer_ratio(self.delta_t, self.delta_tau, "delta_t/delta_tau")
    }

    pub fn build_options(&self) -> BuildOptions {
        let mut o = BuildOptions::new(self.degree, self.basis);
        if let Some(p) = self.precondition {
            o.precondition = p;
        }
        o
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("T", self.t_final), ("delta_t", self.delta_t), ("delta_tau", self.delta_tau)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        self.intervals()?;
        self.steps_per_interval()?;
        if self.degree < 1 {
            return Err(Error::InvalidArgument("degree N must be at least 1".into()));
        }
        if self.modes < 1 || self.forcing_level < 1 {
            return Err(Error::InvalidArgument("K and the forcing level must be at least 1".into()));
        }
        if self.cadence < 1 {
            return Err(Error::InvalidArgument("cadence must be at least 1".into()));
        }
        if self.initial.dim() != self.model.state_dim() {
            return Err(Error::DimensionMismatch(format!(
                "initial condition has dimension {} but {} has state dimension {}",
                self.initial.dim(),
                self.model.name(),
                self.model.state_dim()
            )));
        }
        if self.grouped && self.model.static_coords().is_empty() {
            return Err(Error::InvalidArgument(format!("{} has no static coordinates to group by", self.model.name())));
        }
        self.stepper.check_compatible(&self.model)
    }

    /// Coordinates held fixed during rule construction.
    pub fn fixed_coords(&self) -> &'static [usize] {
        if self.grouped {
            self.model.static_coords()
        } else {
            &[]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Marginal;

    fn cfg() -> RunConfig {
        RunConfig::new(SdeModel::ou(1.0, 0.0, 1.0).unwrap(), InitialSpec::point(&[1.0]))
    }

    #[test]
    fn integer_schedule_required() {
        let mut c = cfg();
        c.validate().unwrap();
        assert_eq!(c.intervals().unwrap(), 10);
        assert_eq!(c.steps_per_interval().unwrap(), 100);
        c.delta_t = 0.3;
        assert!(c.validate().is_err());
    }

    #[test]
    fn initial_dimension_checked() {
        let mut c = cfg();
        c.initial = InitialSpec::product(vec![Marginal::Point(0.0), Marginal::Point(1.0)], vec![1, 1]).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn grouping_needs_static_coordinates() {
        let mut c = cfg();
        c.grouped = true;
        assert!(c.validate().is_err());
    }
}
