use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::DVector;

use super::extract::extract_sparse;
use super::simplex::{solve_l1, LpSolution};
use super::system::{assemble, ConstraintSystem};
use crate::momentlab::{
    estimate_moments, standardize, whiten, AffineTransform, BasisKind, MomentVector, PolynomialBasis,
};
use crate::polyquad::{binomial, MultiIndexSet, QuadratureRule, WeightedPoints};
use crate::{Error, Result};

/// Coordinate change applied before the constraint system is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Precondition {
    Raw,
    Whiten,
    WhitenScaled,
}

impl Precondition {
    pub fn name(self) -> &'static str {
        match self {
            Precondition::Raw => "raw",
            Precondition::Whiten => "whiten",
            Precondition::WhitenScaled => "whiten_scaled",
        }
    }

    pub fn default_for(basis: BasisKind) -> Self {
        match basis {
            BasisKind::Monomial => Precondition::WhitenScaled,
            BasisKind::Hermite | BasisKind::DataOrthonormal => Precondition::Whiten,
        }
    }
}

impl FromStr for Precondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" | "none" => Ok(Precondition::Raw),
            "whiten" => Ok(Precondition::Whiten),
            "whiten_scaled" | "standardize" => Ok(Precondition::WhitenScaled),
            other => Err(Error::InvalidArgument(format!(
                "unknown preconditioning '{other}' (expected raw, whiten or whiten_scaled)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    pub degree: u32,
    pub basis: BasisKind,
    pub precondition: Precondition,
}

impl BuildOptions {
    pub fn new(degree: u32, basis: BasisKind) -> Self {
        BuildOptions { degree, basis, precondition: Precondition::default_for(basis) }
    }
}

/// Per-restart record of the rule construction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub input_nodes: usize,
    pub merged_nodes: usize,
    pub cond_a: f64,
    pub l1_objective: f64,
    pub residual: f64,
    pub node_count: usize,
    pub lp_iterations: usize,
    pub extract_iterations: usize,
    pub min_reduced_cost: f64,
    /// True when the merged cloud was already small enough to keep as is.
    pub direct: bool,
    pub fallbacks: Vec<String>,
    /// Number of separately compressed groups (1 for a joint build).
    pub groups: usize,
    /// Largest node count of a single compressed group.
    pub max_group_nodes: usize,
}

/// Compresses a weighted cloud into a rule with at most `binom(d+N, d)`
/// nodes reproducing all cloud moments up to degree `N`.
pub fn build_rule<P: WeightedPoints + ?Sized>(cloud: &P, opts: &BuildOptions) -> Result<(QuadratureRule, Diagnostics)> {
    let d = cloud.dim();
    let n_deg = opts.degree;
    if n_deg == 0 {
        return Err(Error::InvalidArgument("rule degree must be at least 1".into()));
    }
    let m = binomial((d as u32 + n_deg) as u64, d as u64) as usize;
    let points: Vec<f64> = (0..cloud.len()).flat_map(|i| cloud.point(i).to_vec()).collect();
    let weights: Vec<f64> = (0..cloud.len()).map(|i| cloud.weight(i)).collect();
    let rule = QuadratureRule::new(d, points, weights)?;
    let span = rule.nodes().iter().fold(1.0f64, |s, x| s.max(x.abs()));
    let merged = rule.merged(1e-12 * span, 1e-14);

    let mut diag = Diagnostics { input_nodes: rule.len(), merged_nodes: merged.len(), ..Default::default() };
    if merged.len() <= m {
        diag.direct = true;
        diag.groups = 1;
        diag.max_group_nodes = merged.len();
        diag.node_count = merged.len();
        diag.l1_objective = merged.l1_norm();
        return Ok((merged, diag));
    }

    let set = MultiIndexSet::new(d, (2 * n_deg).max(2))?;
    let raw_moments = estimate_moments(&merged, &set)?;
    let transform = match precondition(&raw_moments, opts.precondition) {
        Ok(t) => t,
        Err(e) => {
            diag.fallbacks
                .push(format!("{} preconditioning failed ({e}); using raw coordinates", opts.precondition.name()));
            AffineTransform::identity(d)
        }
    };
    let t_cloud = transform.apply_rule(&merged)?;
    let t_moments = estimate_moments(&t_cloud, &set)?;
    let system_for = |kind: BasisKind| -> Result<ConstraintSystem> {
        let basis = PolynomialBasis::build(kind, &t_moments, n_deg)?;
        assemble(&t_cloud, &basis, &t_moments)
    };

    let attempt = system_for(opts.basis).and_then(|s| solve_l1(&s).map(|lp| (s, lp)));
    let (sys, lp): (ConstraintSystem, Option<LpSolution>) = match attempt {
        Ok((s, lp)) => (s, Some(lp)),
        Err(e) => {
            let alt =
                if opts.basis == BasisKind::DataOrthonormal { BasisKind::Hermite } else { BasisKind::DataOrthonormal };
            diag.fallbacks.push(format!("{} basis failed ({e}); retrying with {}", opts.basis.name(), alt.name()));
            match system_for(alt) {
                Ok(s) => match solve_l1(&s) {
                    Ok(lp) => (s, Some(lp)),
                    Err(e) => {
                        diag.fallbacks.push(format!("{} basis failed ({e}); least-squares projection", alt.name()));
                        (s, None)
                    }
                },
                Err(e) => {
                    diag.fallbacks.push(format!("{} basis failed ({e}); least-squares projection", alt.name()));
                    (system_for(opts.basis).or_else(|_| system_for(BasisKind::Monomial))?, None)
                }
            }
        }
    };
    diag.cond_a = sys.condition_estimate();
    let start = match &lp {
        Some(lp) => {
            diag.lp_iterations = lp.iterations;
            diag.min_reduced_cost = lp.min_reduced_cost;
            lp.weights.clone()
        }
        None => least_squares_weights(&sys, t_cloud.weights()),
    };
    let ext = extract_sparse(&sys, &start)?;
    if let Some(w) = &ext.warning {
        diag.fallbacks.push(format!("extraction: {w}"));
    }
    if ext.flips > 0 {
        diag.fallbacks.push(format!("extraction negated the null vector {} time(s)", ext.flips));
    }
    for f in &diag.fallbacks {
        log::info!("rule construction: {f}");
    }
    diag.extract_iterations = ext.iterations;
    diag.residual = ext.residual;
    diag.node_count = ext.support.len();
    diag.groups = 1;
    diag.max_group_nodes = diag.node_count;
    diag.l1_objective = ext.support.iter().map(|&k| ext.weights[k].abs()).sum();

    let nodes: Vec<f64> = ext.support.iter().flat_map(|&k| merged.node(k).to_vec()).collect();
    let w: Vec<f64> = ext.support.iter().map(|&k| ext.weights[k]).collect();
    Ok((QuadratureRule::new(d, nodes, w)?, diag))
}

/// Compresses the cloud separately for every distinct value of the
/// coordinates listed in `fixed`, which the dynamics leave unchanged. Each
/// group is reduced in the remaining coordinates with at most
/// `binom(d_free+N, d_free)` nodes and keeps its total weight, so every
/// moment of degree `≤ N` in the free coordinates is reproduced conditionally
/// on the fixed ones.
pub fn build_rule_grouped<P: WeightedPoints + ?Sized>(
    cloud: &P,
    opts: &BuildOptions,
    fixed: &[usize],
) -> Result<(QuadratureRule, Diagnostics)> {
    let d = cloud.dim();
    if fixed.is_empty() {
        return build_rule(cloud, opts);
    }
    if fixed.iter().any(|&k| k >= d) || fixed.len() >= d {
        return Err(Error::InvalidArgument(format!("fixed coordinates {fixed:?} invalid for dimension {d}")));
    }
    let free: Vec<usize> = (0..d).filter(|k| !fixed.contains(k)).collect();
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for i in 0..cloud.len() {
        let key = fixed.iter().map(|&k| (cloud.point(i)[k] + 0.0).to_bits()).collect();
        groups.entry(key).or_default().push(i);
    }

    let mut diag = Diagnostics { input_nodes: cloud.len(), groups: groups.len(), direct: true, ..Default::default() };
    let (mut nodes, mut weights) = (Vec::new(), Vec::new());
    for members in groups.values() {
        let anchor = cloud.point(members[0]);
        let total: f64 = members.iter().map(|&i| cloud.weight(i)).sum();
        let scale = if total.abs() > 1e-300 { total } else { 1.0 };
        let sub_nodes: Vec<f64> = members.iter().flat_map(|&i| free.iter().map(move |&k| cloud.point(i)[k])).collect();
        let sub_weights: Vec<f64> = members.iter().map(|&i| cloud.weight(i) / scale).collect();
        let sub = QuadratureRule::new(free.len(), sub_nodes, sub_weights)?;
        let (rule, g) = build_rule(&sub, opts)?;
        for i in 0..rule.len() {
            let mut x = anchor.to_vec();
            for (&k, &v) in free.iter().zip(rule.node(i)) {
                x[k] = v;
            }
            nodes.extend(x);
            weights.push(rule.weights()[i] * scale);
        }
        diag.merged_nodes += g.merged_nodes;
        diag.cond_a = diag.cond_a.max(g.cond_a);
        diag.l1_objective += g.l1_objective * scale.abs();
        diag.residual = diag.residual.max(g.residual * scale.abs());
        diag.node_count += g.node_count;
        diag.max_group_nodes = diag.max_group_nodes.max(g.node_count);
        diag.lp_iterations += g.lp_iterations;
        diag.extract_iterations += g.extract_iterations;
        diag.min_reduced_cost =
            if diag.direct { g.min_reduced_cost } else { diag.min_reduced_cost.min(g.min_reduced_cost) };
        diag.direct &= g.direct;
        diag.fallbacks.extend(g.fallbacks);
    }
    Ok((QuadratureRule::new(d, nodes, weights)?, diag))
}

fn precondition(moments: &MomentVector, kind: Precondition) -> Result<AffineTransform> {
    match kind {
        Precondition::Raw => Ok(AffineTransform::identity(moments.dim())),
        Precondition::Whiten => whiten(moments).map(|(t, _)| t),
        Precondition::WhitenScaled => {
            standardize(&moments.truncated((moments.max_degree() / 2).max(2))?).map(|(t, _)| t)
        }
    }
}

/// Minimum-norm correction of `w0` onto `A w = b`.
fn least_squares_weights(sys: &ConstraintSystem, w0: &[f64]) -> Vec<f64> {
    let w0 = DVector::from_column_slice(w0);
    let res = sys.b() - sys.a() * &w0;
    let svd = sys.a().clone().svd(true, true);
    let eps = 1e-13 * svd.singular_values.max();
    match svd.solve(&res, eps) {
        Ok(delta) => (w0 + delta).as_slice().to_vec(),
        Err(_) => w0.as_slice().to_vec(),
    }
}
