use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::dynamics::{ModelKind, SdeModel};
use crate::engine::{error_series, naive_run, run, ErrorSeries, InitialSpec, Marginal, StatSeries};
use crate::reference::{
    cir_stats, mixture_cumulants_random_damping, monte_carlo, ou_random_damping_stats, ou_stats,
    stationary_cumulants_gradient, McResult,
};
use crate::{Error, Result};

use super::config::{Experiment, Reference};
use super::csvio::{fmt_f64, write_diagnostics, write_errors, write_stats, write_table};
use super::presets::Preset;

/// Process exit status for a failed command: 1 for bad input, 2 for a
/// numerical failure.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_config_error() {
        1
    } else {
        2
    }
}

pub type StatsFn = Box<dyn Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync>;

/// Reference mean and variance as a function of time.
pub enum ReferenceCurve {
    Analytic(StatsFn),
    Constant(Vec<f64>, Vec<f64>),
    /// Piecewise linear in time through a simulated series.
    Tabulated(StatSeries),
}

impl fmt::Debug for ReferenceCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceCurve::Analytic(_) => f.write_str("Analytic(..)"),
            ReferenceCurve::Constant(m, v) => write!(f, "Constant({m:?}, {v:?})"),
            ReferenceCurve::Tabulated(s) => write!(f, "Tabulated({} points)", s.times.len()),
        }
    }
}

impl ReferenceCurve {
    pub fn at(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            ReferenceCurve::Analytic(f) => f(t),
            ReferenceCurve::Constant(m, v) => (m.clone(), v.clone()),
            ReferenceCurve::Tabulated(s) => {
                let i = s.times.partition_point(|&x| x < t).clamp(1, s.times.len().max(2) - 1);
                if s.times.len() < 2 {
                    return (s.mean[0].clone(), s.variance[0].clone());
                }
                let (t0, t1) = (s.times[i - 1], s.times[i]);
                let a = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                let lerp = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p + a * (q - p)).collect::<Vec<f64>>();
                (lerp(&s.mean[i - 1], &s.mean[i]), lerp(&s.variance[i - 1], &s.variance[i]))
            }
        }
    }
}

fn marginals(exp: &Experiment) -> Result<&[Marginal]> {
    match &exp.run.initial {
        InitialSpec::Product { marginals, .. } => Ok(marginals),
        InitialSpec::Explicit(_) => {
            Err(Error::InvalidArgument("the analytic reference needs a product initial law".into()))
        }
    }
}

/// Builds the reference selected by the experiment; `None` when disabled.
pub fn reference_curve(exp: &Experiment) -> Result<Option<ReferenceCurve>> {
    let model = exp.run.model;
    match exp.reference.resolve(&model) {
        Reference::None => Ok(None),
        Reference::Analytic => {
            let m = marginals(exp)?;
            let curve: StatsFn = match *model.kind() {
                ModelKind::Ou { b, mu, sigma } => {
                    let (m0, v0) = (m[0].mean(), m[0].variance());
                    Box::new(move |t| {
                        let (a, v) = ou_stats(b, mu, sigma, m0, v0, t);
                        (vec![a], vec![v])
                    })
                }
                ModelKind::Cir { b, mu, sigma } => {
                    let Marginal::Point(u0) = m[0] else {
                        return Err(Error::InvalidArgument("the CIR reference needs a deterministic u0".into()));
                    };
                    cir_stats(b, mu, sigma, u0, 0.0)?;
                    Box::new(move |t| {
                        let (a, v) = cir_stats(b, mu, sigma, u0, t).expect("CIR parameters checked above");
                        (vec![a], vec![v])
                    })
                }
                ModelKind::OuRandomDamping { mu, sigma } => {
                    let Marginal::Uniform { a: lo, b: hi } = m[1] else {
                        return Err(Error::InvalidArgument(
                            "the random damping reference needs a uniform damping law".into(),
                        ));
                    };
                    let (m0, v0) = (m[0].mean(), m[0].variance());
                    let (bm, bv) = (m[1].mean(), m[1].variance());
                    Box::new(move |t| {
                        let (a, v) = ou_random_damping_stats(mu, sigma, m0, v0, lo, hi, t);
                        (vec![a, bm], vec![v, bv])
                    })
                }
                _ => return Err(Error::InvalidArgument(format!("no analytic reference for {}", model.name()))),
            };
            Ok(Some(ReferenceCurve::Analytic(curve)))
        }
        Reference::Stationary => {
            let k = stationary_cumulants_gradient(&model)?;
            Ok(Some(ReferenceCurve::Constant(vec![k[0]], vec![k[1]])))
        }
        Reference::MonteCarlo => Ok(Some(ReferenceCurve::Tabulated(monte_carlo(&exp.mc_config()?)?.averaged()))),
        Reference::Auto => unreachable!("resolve never returns Auto"),
    }
}

/// Cumulants `κ_1..κ_6` of the invariant law of the first coordinate, when
/// known in closed form or by quadrature of the stationary density.
pub fn reference_cumulants(exp: &Experiment) -> Result<Option<[f64; 6]>> {
    let model = exp.run.model;
    match *model.kind() {
        ModelKind::Cubic { .. } | ModelKind::Ou { .. } => stationary_cumulants_gradient(&model).map(Some),
        ModelKind::OuRandomDamping { mu, sigma } if mu == 0.0 => match marginals(exp)?.get(1) {
            Some(&Marginal::Uniform { a, b }) => mixture_cumulants_random_damping(sigma, a, b).map(Some),
            _ => Ok(None),
        },
        _ => Ok(None),
    }
}

pub fn execute(exp: &Experiment) -> Result<StatSeries> {
    if exp.naive {
        naive_run(&exp.run)
    } else {
        run(&exp.run)
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub series: StatSeries,
    pub errors: Option<ErrorSeries>,
    pub wall_time: f64,
}

fn errors_against(series: &StatSeries, curve: &ReferenceCurve) -> ErrorSeries {
    error_series(series, |t| curve.at(t))
}

/// Runs one experiment and writes `stats.csv`, `diagnostics.csv` and, when a
/// reference is configured, `errors.csv` into `out`.
pub fn cmd_run(exp: &Experiment, out: &Path) -> Result<RunOutcome> {
    fs::create_dir_all(out)?;
    let start = Instant::now();
    let series = execute(exp)?;
    let wall_time = start.elapsed().as_secs_f64();
    write_stats(&out.join("stats.csv"), &series)?;
    write_diagnostics(&out.join("diagnostics.csv"), &series)?;
    let errors = match reference_curve(exp)? {
        Some(curve) => {
            let e = errors_against(&series, &curve);
            write_errors(&out.join("errors.csv"), &e)?;
            Some(e)
        }
        None => None,
    };
    log::info!("{}: {} restarts in {:.3} s", exp.name, series.restarts.len(), wall_time);
    Ok(RunOutcome { series, errors, wall_time })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Constraint degree `N`.
    Degree,
    /// Forcing quadrature level `λ_ξ`.
    ForcingLevel,
    /// Initial rule size of the static coordinate (`λ_b` for random damping).
    StaticLevel,
    DeltaT,
    /// Forcing modes `K`.
    Modes,
    FinalTime,
    /// Monte Carlo sample count.
    McSamples,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Degree => "N",
            SweepAxis::ForcingLevel => "lambda",
            SweepAxis::StaticLevel => "lambda_b",
            SweepAxis::DeltaT => "dt",
            SweepAxis::Modes => "K",
            SweepAxis::FinalTime => "T",
            SweepAxis::McSamples => "M_samp",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "N" => SweepAxis::Degree,
            "lambda" | "λ" | "forcing_level" => SweepAxis::ForcingLevel,
            "lambda_b" | "λ_b" => SweepAxis::StaticLevel,
            "dt" | "delta_t" | "Δt" => SweepAxis::DeltaT,
            "K" => SweepAxis::Modes,
            "T" => SweepAxis::FinalTime,
            "M_samp" | "mc_samples" => SweepAxis::McSamples,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown sweep axis `{other}` (expected N, lambda, lambda_b, dt, K, T or M_samp)"
                )))
            }
        })
    }
}

fn positive_integer(axis: SweepAxis, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidArgument(format!("axis {} needs positive integers, got {v}", axis.name())))
    }
}

/// The experiment with one parameter replaced.
pub fn with_axis(exp: &Experiment, axis: SweepAxis, v: f64) -> Result<Experiment> {
    let mut e = exp.clone();
    let r = &mut e.run;
    match axis {
        SweepAxis::Degree => r.degree = positive_integer(axis, v)? as u32,
        SweepAxis::ForcingLevel => r.forcing_level = positive_integer(axis, v)?,
        SweepAxis::Modes => r.modes = positive_integer(axis, v)?,
        SweepAxis::McSamples => e.mc_samples = positive_integer(axis, v)?,
        SweepAxis::StaticLevel => {
            let n = positive_integer(axis, v)?;
            let k = *r.model.static_coords().first().ok_or_else(|| {
                Error::InvalidArgument(format!("{} has no static coordinate for axis lambda_b", r.model.name()))
            })?;
            match &mut r.initial {
                InitialSpec::Product { levels, .. } => levels[k] = n,
                InitialSpec::Explicit(_) => {
                    return Err(Error::InvalidArgument("axis lambda_b needs a product initial law".into()))
                }
            }
        }
        SweepAxis::DeltaT => r.delta_t = v,
        SweepAxis::FinalTime => {
            r.t_final = v;
            if e.naive {
                r.delta_t = v;
            }
        }
    }
    e.validate()?;
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub eps_mean: Vec<f64>,
    pub eps_var: Vec<f64>,
    pub wall_time: f64,
    pub error: Option<String>,
}

/// Mean over repeats of the per-repeat relative error series.
fn mc_errors(mc: &McResult, curve: &ReferenceCurve) -> ErrorSeries {
    let per: Vec<ErrorSeries> = mc.repeats.iter().map(|s| errors_against(s, curve)).collect();
    let mut out = per[0].clone();
    let r = per.len() as f64;
    for i in 0..out.times.len() {
        for k in 0..out.mean[i].len() {
            out.mean[i][k] = per.iter().map(|e| e.mean[i][k]).sum::<f64>() / r;
            out.variance[i][k] = per.iter().map(|e| e.variance[i][k]).sum::<f64>() / r;
        }
    }
    out
}

fn value_label(v: f64) -> String {
    format!("{v}")
}

/// One run per value with per-run error CSVs and `summary.csv`. Failed runs
/// are recorded and the sweep continues.
pub fn cmd_sweep(exp: &Experiment, axis: SweepAxis, values: &[f64], out: &Path) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one value".into()));
    }
    let runs: Vec<Experiment> = values.iter().map(|&v| with_axis(exp, axis, v)).collect::<Result<_>>()?;
    let resolved = exp.reference.resolve(&exp.run.model);
    if resolved == Reference::None {
        return Err(Error::InvalidArgument(
            "sweep needs a reference (set reference to analytic, stationary or mc)".into(),
        ));
    }
    if axis == SweepAxis::McSamples && resolved == Reference::MonteCarlo {
        return Err(Error::InvalidArgument("an M_samp sweep needs an analytic or stationary reference".into()));
    }
    fs::create_dir_all(out)?;
    let shared = if axis == SweepAxis::FinalTime { None } else { reference_curve(exp)? };
    let dim = exp.run.model.state_dim();

    let mut rows = Vec::with_capacity(values.len());
    for (e, &v) in runs.iter().zip(values) {
        let start = Instant::now();
        let outcome = (|| -> Result<ErrorSeries> {
            let own;
            let curve = match &shared {
                Some(c) => c,
                None => {
                    own = reference_curve(e)?.expect("reference resolved above");
                    &own
                }
            };
            if axis == SweepAxis::McSamples {
                Ok(mc_errors(&monte_carlo(&e.mc_config()?)?, curve))
            } else {
                Ok(errors_against(&execute(e)?, curve))
            }
        })();
        let wall_time = start.elapsed().as_secs_f64();
        let row = match outcome {
            Ok(err) => {
                write_errors(&out.join(format!("{}_{}.csv", axis.name(), value_label(v))), &err)?;
                SweepRow {
                    value: v,
                    eps_mean: err.terminal_mean().to_vec(),
                    eps_var: err.terminal_variance().to_vec(),
                    wall_time,
                    error: None,
                }
            }
            Err(err) => {
                log::warn!("sweep {}={v} failed: {err}", axis.name());
                SweepRow {
                    value: v,
                    eps_mean: vec![f64::NAN; dim],
                    eps_var: vec![f64::NAN; dim],
                    wall_time,
                    error: Some(err.to_string()),
                }
            }
        };
        rows.push(row);
    }

    let mut header = vec![axis.name().to_string()];
    header.extend((1..=dim).map(|i| format!("eps_mean_{i}")));
    header.extend((1..=dim).map(|i| format!("eps_var_{i}")));
    header.extend(["wall_time_s".to_string(), "status".to_string()]);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut line = vec![value_label(r.value)];
            line.extend(r.eps_mean.iter().chain(&r.eps_var).map(|&x| fmt_f64(x)));
            line.push(fmt_f64(r.wall_time));
            line.push(r.error.clone().unwrap_or_else(|| "ok".into()));
            line
        })
        .collect();
    write_table(&out.join("summary.csv"), &header, &table)?;
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Table2,
    Table3,
    Table4DsgcColumn,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Table2 => "table2",
            TableKind::Table3 => "table3",
            TableKind::Table4DsgcColumn => "table4_dsgc_column",
        }
    }
}

impl FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table2" => Ok(TableKind::Table2),
            "table3" => Ok(TableKind::Table3),
            "table4" | "table4_dsgc_column" => Ok(TableKind::Table4DsgcColumn),
            other => Err(Error::InvalidArgument(format!(
                "unknown table `{other}` (expected table2, table3 or table4_dsgc_column)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub values: Vec<f64>,
    /// `NaN` for oracle rows.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableOutput {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<TableRow>,
}

impl TableOutput {
    pub fn row(&self, label: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

fn cumulant_table(base: Experiment, degrees: &[u32]) -> Result<(Vec<String>, Vec<TableRow>)> {
    let mut rows = Vec::new();
    for &n in degrees {
        let mut e = base.clone();
        e.run.degree = n;
        e.run.cumulants = true;
        let start = Instant::now();
        let s = execute(&e)?;
        let k = s.terminal_cumulants().expect("cumulants were requested");
        rows.push(TableRow {
            label: format!("dsgc_N{n}"),
            values: k.to_vec(),
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    if let Some(k) = reference_cumulants(&base)? {
        rows.push(TableRow { label: "fokker_planck".into(), values: k.to_vec(), wall_time: f64::NAN });
    }
    let mut header = vec!["row".to_string()];
    header.extend((1..=6).map(|i| format!("k{i}")));
    Ok((header, rows))
}

/// Relative variance errors at `T = 1` for CIR with `b = 4` over
/// `σ ∈ {0.5, 1, 2}` and `N ∈ {3, 4, 5, 6}`.
fn table4(base: Experiment) -> Result<(Vec<String>, Vec<TableRow>)> {
    let sigmas = [0.5, 1.0, 2.0];
    let ModelKind::Cir { b, mu, .. } = *base.run.model.kind() else { unreachable!("table4 preset is a CIR model") };
    let mut rows = Vec::new();
    for n in 3..=6u32 {
        let (mut values, mut wall) = (Vec::new(), 0.0);
        for &sigma in &sigmas {
            let mut e = base.clone();
            e.run.degree = n;
            e.run.model = SdeModel::cir(b, mu, sigma)?;
            let start = Instant::now();
            let s = execute(&e)?;
            wall += start.elapsed().as_secs_f64();
            let curve = reference_curve(&e)?.expect("CIR has an analytic reference");
            values.push(errors_against(&s, &curve).terminal_variance()[0]);
        }
        rows.push(TableRow { label: format!("dsgc_N{n}"), values, wall_time: wall });
    }
    let mut exact = Vec::new();
    for &sigma in &sigmas {
        let Marginal::Point(u0) = marginals(&base)?[0] else { unreachable!("table4 preset starts from a point") };
        exact.push(cir_stats(b, mu, sigma, u0, base.run.t_final)?.1);
    }
    rows.push(TableRow { label: "analytic_variance".into(), values: exact, wall_time: f64::NAN });
    let mut header = vec!["row".to_string()];
    header.extend(sigmas.iter().map(|s| format!("sigma_{s}")));
    Ok((header, rows))
}

/// Writes `<which>.csv` into `out` with DSGC rows followed by oracle rows.
pub fn cmd_table(which: TableKind, out: &Path) -> Result<TableOutput> {
    fs::create_dir_all(out)?;
    let (mut header, rows) = match which {
        TableKind::Table2 => cumulant_table(Preset::Table2OuRandomDamping.experiment(), &[4, 6])?,
        TableKind::Table3 => cumulant_table(Preset::Ex2Cubic.experiment(), &[4, 6, 8])?,
        TableKind::Table4DsgcColumn => table4(Preset::Table4Cir.experiment())?,
    };
    header.push("wall_time_s".into());
    let lines: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut l = vec![r.label.clone()];
            l.extend(r.values.iter().map(|&v| fmt_f64(v)));
            l.push(if r.wall_time.is_nan() { String::new() } else { fmt_f64(r.wall_time) });
            l
        })
        .collect();
    let path = out.join(format!("{}.csv", which.name()));
    write_table(&path, &header, &lines)?;
    Ok(TableOutput { path, header, rows })
}

/// Monte Carlo baseline: `mc_stats.csv` (repeat average), `mc_summary.csv`
/// (terminal statistics and across-repeat spread) and, with an analytic
/// reference, `mc_errors.csv` (repeat-averaged relative errors).
pub fn cmd_mc(exp: &Experiment, out: &Path) -> Result<McResult> {
    fs::create_dir_all(out)?;
    let start = Instant::now();
    let mc = monte_carlo(&exp.mc_config()?)?;
    let wall = start.elapsed().as_secs_f64();
    let avg = mc.averaged();
    write_stats(&out.join("mc_stats.csv"), &avg)?;
    let header: Vec<String> =
        ["coordinate", "terminal_mean", "terminal_var", "spread_mean", "spread_var", "wall_time_s"]
            .map(String::from)
            .to_vec();
    let rows: Vec<Vec<String>> = (0..avg.dim)
        .map(|k| {
            vec![
                (k + 1).to_string(),
                fmt_f64(avg.terminal_mean()[k]),
                fmt_f64(avg.terminal_variance()[k]),
                fmt_f64(mc.spread_mean[k]),
                fmt_f64(mc.spread_variance[k]),
                fmt_f64(wall),
            ]
        })
        .collect();
    write_table(&out.join("mc_summary.csv"), &header, &rows)?;
    let resolved = exp.reference.resolve(&exp.run.model);
    if matches!(resolved, Reference::Analytic | Reference::Stationary) {
        if let Some(curve) = reference_curve(exp)? {
            write_errors(&out.join("mc_errors.csv"), &mc_errors(&mc, &curve))?;
        }
    }
    Ok(mc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_names_round_trip() {
        for a in [
            SweepAxis::Degree,
            SweepAxis::ForcingLevel,
            SweepAxis::StaticLevel,
            SweepAxis::DeltaT,
            SweepAxis::Modes,
            SweepAxis::FinalTime,
            SweepAxis::McSamples,
        ] {
            assert_eq!(a.name().parse::<SweepAxis>().unwrap(), a);
        }
        assert!("Q".parse::<SweepAxis>().is_err());
    }

    #[test]
    fn axis_application() {
        let ex1 = Preset::Ex1OuRandomDamping.experiment();
        let e = with_axis(&ex1, SweepAxis::StaticLevel, 4.0).unwrap();
        assert!(matches!(&e.run.initial, InitialSpec::Product { levels, .. } if levels == &vec![3, 4]));
        assert!(with_axis(&ex1, SweepAxis::Degree, 2.5).is_err());
        assert!(with_axis(&ex1, SweepAxis::DeltaT, 0.03).is_err());
        let fig1 = Preset::Fig1OuNaive.experiment();
        let e = with_axis(&fig1, SweepAxis::FinalTime, 16.0).unwrap();
        assert_eq!((e.run.t_final, e.run.delta_t), (16.0, 16.0));
        assert!(with_axis(&Preset::Ex3Cir.experiment(), SweepAxis::StaticLevel, 2.0).is_err());
    }

    #[test]
    fn tabulated_reference_interpolates() {
        let s = StatSeries {
            dim: 1,
            times: vec![0.0, 1.0, 2.0],
            mean: vec![vec![0.0], vec![1.0], vec![3.0]],
            variance: vec![vec![1.0], vec![1.0], vec![0.0]],
            ..StatSeries::default()
        };
        let c = ReferenceCurve::Tabulated(s);
        assert_eq!(c.at(0.5), (vec![0.5], vec![1.0]));
        assert_eq!(c.at(1.5), (vec![2.0], vec![0.5]));
        assert_eq!(c.at(2.0), (vec![3.0], vec![0.0]));
        assert_eq!(c.at(0.0), (vec![0.0], vec![1.0]));
    }

    #[test]
    fn references_by_model() {
        let ex1 = Preset::Ex1OuRandomDamping.experiment();
        let c = reference_curve(&ex1).unwrap().unwrap();
        let (m, v) = c.at(0.0);
        assert!((m[0] - 1.0).abs() < 1e-12 && (v[0] - 0.04).abs() < 1e-12);
        assert!((m[1] - 2.0).abs() < 1e-12 && (v[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!(reference_cumulants(&ex1).unwrap().is_none());
        let k = reference_cumulants(&Preset::Table2OuRandomDamping.experiment()).unwrap().unwrap();
        assert!((k[1] - 4.0 * 3.0f64.ln()).abs() < 1e-9);
        let mut none = ex1.clone();
        none.reference = Reference::None;
        assert!(reference_curve(&none).unwrap().is_none());
        let mut cubic = Preset::Ex2Cubic.experiment();
        cubic.reference = Reference::Analytic;
        assert!(reference_curve(&cubic).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::MissingKeys(vec!["model".into()])), 1);
        assert_eq!(exit_code(&Error::Infeasible { residual: 1.0 }), 2);
    }
}
