use std::collections::BTreeMap;
use std::str::FromStr;

use crate::dynamics::{ModelKind, ModelParams, SdeModel, Stepper};
use crate::engine::{InitialSpec, Marginal, RunConfig};
use crate::momentlab::BasisKind;
use crate::par::Execution;
use crate::reference::McConfig;
use crate::sparseopt::Precondition;
use crate::{Error, Result};

use super::presets::Preset;

/// Source of the statistics a run is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// Pick from the model: analytic where available, the stationary density
    /// for the cubic model, Monte Carlo otherwise.
    Auto,
    Analytic,
    Stationary,
    MonteCarlo,
    None,
}

impl FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Reference::Auto),
            "analytic" | "exact" => Ok(Reference::Analytic),
            "stationary" | "fokker_planck" => Ok(Reference::Stationary),
            "mc" | "monte_carlo" => Ok(Reference::MonteCarlo),
            "none" => Ok(Reference::None),
            other => Err(Error::InvalidArgument(format!("unknown reference `{other}`"))),
        }
    }
}

impl Reference {
    pub fn name(self) -> &'static str {
        match self {
            Reference::Auto => "auto",
            Reference::Analytic => "analytic",
            Reference::Stationary => "stationary",
            Reference::MonteCarlo => "mc",
            Reference::None => "none",
        }
    }

    /// Resolves `Auto` for the given model.
    pub fn resolve(self, model: &SdeModel) -> Reference {
        if self != Reference::Auto {
            return self;
        }
        match model.kind() {
            ModelKind::Ou { .. } | ModelKind::Cir { .. } | ModelKind::OuRandomDamping { .. } => Reference::Analytic,
            ModelKind::Cubic { .. } => Reference::Stationary,
            ModelKind::Intermittent2d { .. } => Reference::MonteCarlo,
        }
    }
}

/// A fully specified experiment: the DSGC run plus everything needed to
/// produce its reference statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub run: RunConfig,
    /// Single interval over `[0, T]` (no restarts).
    pub naive: bool,
    pub reference: Reference,
    pub seed: u64,
    pub mc_samples: usize,
    pub mc_repeats: usize,
}

impl Experiment {
    pub fn new(name: &str, run: RunConfig) -> Self {
        Experiment {
            name: name.to_string(),
            run,
            naive: false,
            reference: Reference::Auto,
            seed: 2024,
            mc_samples: 10_000,
            mc_repeats: 1,
        }
    }

    /// Monte Carlo configuration sharing model, stepper, `Δτ` and `T`.
    pub fn mc_config(&self) -> Result<McConfig> {
        let InitialSpec::Product { marginals, .. } = &self.run.initial else {
            return Err(Error::InvalidArgument("Monte Carlo needs an initial condition given by marginals".into()));
        };
        let dtau = self.run.delta_t / self.run.steps_per_interval()? as f64;
        Ok(McConfig {
            model: self.run.model,
            stepper: self.run.stepper,
            delta_tau: dtau,
            t_final: self.run.t_final,
            samples: self.mc_samples,
            repeats: self.mc_repeats,
            seed: self.seed,
            initial: marginals.clone(),
            cadence: self.run.cadence,
            execution: self.run.execution,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut run = self.run.clone();
        if self.naive {
            run.delta_t = run.t_final;
        }
        run.validate()
    }
}

const RUN_KEYS: [&str; 21] = [
    "T",
    "delta_t",
    "delta_tau",
    "K",
    "forcing_level",
    "forcing_product",
    "N",
    "basis",
    "precondition",
    "stepper",
    "u0",
    "u0_level",
    "cadence",
    "cumulants",
    "grouped",
    "naive",
    "execution",
    "reference",
    "seed",
    "mc_samples",
    "mc_repeats",
];

struct Entry {
    line: usize,
    value: String,
}

fn value_error(key: &str, message: impl Into<String>) -> Error {
    Error::ConfigValue { key: key.to_string(), message: message.into() }
}

fn parse_number<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse::<T>().map_err(|_| value_error(key, format!("cannot parse `{v}`")))
}

fn parse_float(key: &str, v: &str) -> Result<f64> {
    let x: f64 = parse_number(key, v)?;
    if !x.is_finite() {
        return Err(value_error(key, format!("`{v}` is not finite")));
    }
    Ok(x)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(value_error(key, format!("expected true or false, got `{v}`"))),
    }
}

/// Parses `u0 = normal(1,0.04); uniform(1,3)`.
pub fn parse_marginals(v: &str) -> Result<Vec<Marginal>> {
    v.split(';').map(|s| s.trim()).filter(|s| !s.is_empty()).map(Marginal::from_str).collect()
}

fn parse_levels(key: &str, v: &str) -> Result<Vec<usize>> {
    v.split(',').map(|s| parse_number::<usize>(key, s.trim())).collect()
}

/// Splits the document into `key -> (line, value)`.
fn tokenize(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(Error::ConfigParse { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::ConfigParse { line, message: "empty key".into() });
        }
        if v.is_empty() {
            return Err(Error::ConfigParse { line, message: format!("key `{k}` has no value") });
        }
        if let Some(prev) = out.insert(k.to_string(), Entry { line, value: v.to_string() }) {
            return Err(Error::ConfigParse { line, message: format!("key `{k}` already set on line {}", prev.line) });
        }
    }
    Ok(out)
}

/// Parses a flat `key = value` document into a validated experiment.
///
/// `model` and its constants are required unless `preset` names a base
/// experiment; every other key defaults to the [`RunConfig::new`] value or
/// the preset's value. `u0` holds `;`-separated marginals and `u0_level` one
/// Gauss rule size per coordinate (a single value applies to all).
pub fn parse_config(text: &str) -> Result<Experiment> {
    let mut entries = tokenize(text)?;
    let base = match entries.remove("preset") {
        Some(e) => Some(
            Preset::from_str(&e.value).map_err(|err| Error::ConfigParse { line: e.line, message: err.to_string() })?,
        ),
        None => None,
    };

    let model_name = match (entries.remove("model"), &base) {
        (Some(e), _) => {
            SdeModel::param_keys(&e.value)?;
            e.value
        }
        (None, Some(p)) => p.experiment().run.model.name().to_string(),
        (None, None) => {
            let mut missing = vec!["model".to_string()];
            if !entries.contains_key("u0") {
                missing.push("u0".into());
            }
            return Err(Error::MissingKeys(missing));
        }
    };
    let mut exp = match &base {
        Some(p) => p.experiment(),
        None => Experiment::new("custom", RunConfig::new(SdeModel::cubic(0.0)?, InitialSpec::point(&[0.0]))),
    };
    let same_model = base.is_some() && exp.run.model.name() == model_name;
    let mut params: ModelParams = if same_model { exp.run.model.params() } else { ModelParams::new() };
    let mut missing = Vec::new();
    for &k in SdeModel::param_keys(&model_name)? {
        match entries.remove(k) {
            Some(e) => {
                params.insert(k.to_string(), parse_float(k, &e.value)?);
            }
            None if params.contains_key(k) => {}
            None => missing.push(k.to_string()),
        }
    }
    if base.is_none() && !entries.contains_key("u0") {
        missing.push("u0".into());
    }
    if !missing.is_empty() {
        return Err(Error::MissingKeys(missing));
    }
    if let Some((k, e)) = entries.iter().find(|(k, _)| !RUN_KEYS.contains(&k.as_str())) {
        let hint = if SdeModel::NAMES
            .iter()
            .any(|m| SdeModel::param_keys(m).map(|ks| ks.contains(&k.as_str())).unwrap_or(false))
        {
            format!(" (not a parameter of model {model_name})")
        } else {
            String::new()
        };
        return Err(Error::ConfigParse { line: e.line, message: format!("unknown key `{k}`{hint}") });
    }
    exp.run.model = SdeModel::from_name(&model_name, &params)?;

    let get = |k: &str| entries.get(k).map(|e| e.value.as_str());
    let r = &mut exp.run;
    if let Some(v) = get("T") {
        r.t_final = parse_float("T", v)?;
    }
    if let Some(v) = get("delta_t") {
        r.delta_t = parse_float("delta_t", v)?;
    }
    if let Some(v) = get("delta_tau") {
        r.delta_tau = parse_float("delta_tau", v)?;
    }
    if let Some(v) = get("K") {
        r.modes = parse_number("K", v)?;
    }
    if let Some(v) = get("forcing_level") {
        r.forcing_level = parse_number("forcing_level", v)?;
    }
    if let Some(v) = get("forcing_product") {
        r.forcing_product = parse_bool("forcing_product", v)?;
    }
    if let Some(v) = get("N") {
        r.degree = parse_number("N", v)?;
    }
    if let Some(v) = get("basis") {
        r.basis = BasisKind::from_str(v).map_err(|e| value_error("basis", e.to_string()))?;
    }
    if let Some(v) = get("precondition") {
        r.precondition = Some(Precondition::from_str(v).map_err(|e| value_error("precondition", e.to_string()))?);
    }
    if let Some(v) = get("stepper") {
        r.stepper = Stepper::parse(v).map_err(|e| value_error("stepper", e.to_string()))?;
    }
    if get("u0").is_some() || get("u0_level").is_some() {
        let marginals = match get("u0") {
            Some(v) => parse_marginals(v).map_err(|e| value_error("u0", e.to_string()))?,
            None => match &r.initial {
                InitialSpec::Product { marginals, .. } => marginals.clone(),
                InitialSpec::Explicit(_) => return Err(value_error("u0_level", "initial condition is not a product")),
            },
        };
        let mut levels = match (get("u0_level"), &r.initial) {
            (Some(v), _) => parse_levels("u0_level", v)?,
            (None, InitialSpec::Product { levels, .. }) if base.is_some() && levels.len() == marginals.len() => {
                levels.clone()
            }
            (None, _) => vec![3],
        };
        if levels.len() == 1 {
            levels = vec![levels[0]; marginals.len()];
        }
        r.initial = InitialSpec::product(marginals, levels).map_err(|e| value_error("u0_level", e.to_string()))?;
    }
    if let Some(v) = get("cadence") {
        r.cadence = parse_number("cadence", v)?;
    }
    if let Some(v) = get("cumulants") {
        r.cumulants = parse_bool("cumulants", v)?;
    }
    if let Some(v) = get("grouped") {
        r.grouped = parse_bool("grouped", v)?;
    }
    if let Some(v) = get("execution") {
        r.execution = match v {
            "parallel" => Execution::Parallel,
            "sequential" => Execution::Sequential,
            other => return Err(value_error("execution", format!("expected parallel or sequential, got `{other}`"))),
        };
    }
    if let Some(v) = get("naive") {
        exp.naive = parse_bool("naive", v)?;
    }
    if let Some(v) = get("reference") {
        exp.reference = Reference::from_str(v).map_err(|e| value_error("reference", e.to_string()))?;
    }
    if let Some(v) = get("seed") {
        exp.seed = parse_number("seed", v)?;
    }
    if let Some(v) = get("mc_samples") {
        exp.mc_samples = parse_number("mc_samples", v)?;
    }
    if let Some(v) = get("mc_repeats") {
        exp.mc_repeats = parse_number("mc_repeats", v)?;
    }
    if base.is_none() {
        exp.name = model_name;
    }
    check_schedule(&exp)?;
    exp.validate()?;
    Ok(exp)
}

fn check_schedule(exp: &Experiment) -> Result<()> {
    let r = &exp.run;
    if !exp.naive {
        r.intervals().map_err(|e| value_error("delta_t", e.to_string()))?;
    }
    let dt = if exp.naive { r.t_final } else { r.delta_t };
    let ratio = dt / r.delta_tau;
    if !(ratio.round() >= 1.0) || (ratio - ratio.round()).abs() > 1e-9 {
        return Err(value_error(
            "delta_tau",
            format!("restart interval / delta_tau = {ratio} is not a positive integer"),
        ));
    }
    if exp.mc_samples == 0 || exp.mc_repeats == 0 {
        return Err(value_error("mc_samples", "Monte Carlo sample and repeat counts must be positive"));
    }
    Ok(())
}
