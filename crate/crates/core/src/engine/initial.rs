use std::fmt;
use std::str::FromStr;

use crate::polyquad::{gauss_rule_1d, QuadratureRule, RuleFamily};
use crate::{Error, Result};

/// Law of one initial-state coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Normal { mean: f64, var: f64 },
    Uniform { a: f64, b: f64 },
    Point(f64),
}

impl Marginal {
    pub fn mean(&self) -> f64 {
        match *self {
            Marginal::Normal { mean, .. } => mean,
            Marginal::Uniform { a, b } => 0.5 * (a + b),
            Marginal::Point(x) => x,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Marginal::Normal { var, .. } => var,
            Marginal::Uniform { a, b } => (b - a).powi(2) / 12.0,
            Marginal::Point(_) => 0.0,
        }
    }

    fn rule(&self, points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        match *self {
            Marginal::Point(x) => Ok((vec![x], vec![1.0])),
            Marginal::Normal { mean, var } if var == 0.0 => Ok((vec![mean], vec![1.0])),
            Marginal::Normal { mean, var } => {
                let r = gauss_rule_1d(RuleFamily::GaussHermite, points)?;
                let s = var.sqrt();
                Ok((r.nodes.iter().map(|x| mean + s * x).collect(), r.weights))
            }
            Marginal::Uniform { a, b } => {
                let r = gauss_rule_1d(RuleFamily::GaussLegendre, points)?;
                let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
                Ok((r.nodes.iter().map(|x| c + h * x).collect(), r.weights))
            }
        }
    }
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marginal::Normal { mean, var } => write!(f, "normal({mean},{var})"),
            Marginal::Uniform { a, b } => write!(f, "uniform({a},{b})"),
            Marginal::Point(x) => write!(f, "point({x})"),
        }
    }
}

impl FromStr for Marginal {
    type Err = Error;

    /// `normal(mean,var)`, `uniform(a,b)`, `point(x)` or a bare number.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(x) = s.parse::<f64>() {
            return Ok(Marginal::Point(x));
        }
        let (name, rest) = s.split_once('(').ok_or_else(|| Error::UnknownDistribution(s.to_string()))?;
        let args = rest.strip_suffix(')').ok_or_else(|| Error::UnknownDistribution(s.to_string()))?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::UnknownDistribution(s.to_string()))?;
        match (name.trim(), nums.as_slice()) {
            ("normal", &[mean, var]) if var >= 0.0 => Ok(Marginal::Normal { mean, var }),
            ("uniform", &[a, b]) if a <= b => Ok(Marginal::Uniform { a, b }),
            ("point", &[x]) => Ok(Marginal::Point(x)),
            _ => Err(Error::UnknownDistribution(s.to_string())),
        }
    }
}

/// Initial condition as independent per-coordinate laws with per-coordinate
/// Gauss rule sizes, or an explicit rule.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Product { marginals: Vec<Marginal>, levels: Vec<usize> },
    Explicit(QuadratureRule),
}

impl InitialSpec {
    pub fn product(marginals: Vec<Marginal>, levels: Vec<usize>) -> Result<Self> {
        if marginals.is_empty() || marginals.len() != levels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} marginals with {} levels",
                marginals.len(),
                levels.len()
            )));
        }
        if levels.contains(&0) {
            return Err(Error::InvalidArgument("initial quadrature levels must be at least 1".into()));
        }
        Ok(InitialSpec::Product { marginals, levels })
    }

    pub fn point(x: &[f64]) -> Self {
        InitialSpec::Product { marginals: x.iter().map(|&v| Marginal::Point(v)).collect(), levels: vec![1; x.len()] }
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialSpec::Product { marginals, .. } => marginals.len(),
            InitialSpec::Explicit(r) => r.dim(),
        }
    }
}

/// Tensor product of per-coordinate Gauss rules (Hermite for normal,
/// Legendre for uniform); the first coordinate varies slowest.
pub fn initial_rule(spec: &InitialSpec) -> Result<QuadratureRule> {
    let (marginals, levels) = match spec {
        InitialSpec::Explicit(r) => return Ok(r.clone()),
        InitialSpec::Product { marginals, levels } => (marginals, levels),
    };
    let factors = marginals.iter().zip(levels).map(|(m, &l)| m.rule(l)).collect::<Result<Vec<_>>>()?;
    let d = factors.len();
    let mut nodes: Vec<Vec<f64>> = vec![Vec::new()];
    let mut weights = vec![1.0];
    for (xs, ws) in &factors {
        let mut n2 = Vec::with_capacity(nodes.len() * xs.len());
        let mut w2 = Vec::with_capacity(nodes.len() * xs.len());
        for (p, wp) in nodes.iter().zip(&weights) {
            for (x, w) in xs.iter().zip(ws) {
                let mut q = p.clone();
                q.push(*x);
                n2.push(q);
                w2.push(wp * w);
            }
        }
        nodes = n2;
        weights = w2;
    }
    QuadratureRule::new(d, nodes.concat(), weights)
}
