use std::collections::HashMap;

use super::gauss::{gauss_rule_1d, Rule1D, RuleFamily};
use super::multi_index::binomial;
use crate::{Error, Result};

/// Read access to a weighted point set (a quadrature rule or a particle cloud).
pub trait WeightedPoints {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn point(&self, i: usize) -> &[f64];
    fn weight(&self, i: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Discrete signed measure in `dim` dimensions. Nodes are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(dim: usize, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("rule dimension must be >= 1".into()));
        }
        if nodes.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} node coordinates for {} weights in dimension {dim}",
                nodes.len(),
                weights.len()
            )));
        }
        Ok(QuadratureRule { dim, nodes, weights })
    }

    pub fn from_points(points: &[Vec<f64>], weights: Vec<f64>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch("ragged node list".into()));
        }
        Self::new(dim, points.concat(), weights)
    }

    pub fn from_1d(rule: &Rule1D) -> Self {
        QuadratureRule { dim: 1, nodes: rule.nodes.clone(), weights: rule.weights.clone() }
    }

    pub fn point_mass(point: &[f64]) -> Self {
        QuadratureRule { dim: point.len(), nodes: point.to_vec(), weights: vec![1.0] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// Applies `x ↦ shift + scale ⊙ x` coordinate-wise.
    pub fn map_affine(&self, shift: &[f64], scale: &[f64]) -> QuadratureRule {
        let mut nodes = self.nodes.clone();
        for row in nodes.chunks_mut(self.dim) {
            for (k, x) in row.iter_mut().enumerate() {
                *x = shift[k] + scale[k] * *x;
            }
        }
        QuadratureRule { dim: self.dim, nodes, weights: self.weights.clone() }
    }

    /// Merges nodes whose coordinates agree within `tol` (absolute, per
    /// coordinate), summing their weights, and drops nodes whose merged
    /// weight cancels to below `drop_rel * max |w|`. First-seen order is kept.
    pub fn merged(&self, tol: f64, drop_rel: f64) -> QuadratureRule {
        let mut slots: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut nodes: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for i in 0..self.len() {
            let p = self.node(i);
            let key: Vec<i64> = p.iter().map(|&x| (x / tol).round() as i64).collect();
            match slots.get(&key) {
                Some(&s) => weights[s] += self.weights[i],
                None => {
                    slots.insert(key, weights.len());
                    nodes.extend_from_slice(p);
                    weights.push(self.weights[i]);
                }
            }
        }
        let wmax = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let mut out_nodes = Vec::with_capacity(nodes.len());
        let mut out_weights = Vec::with_capacity(weights.len());
        for (i, &w) in weights.iter().enumerate() {
            if w.abs() > drop_rel * wmax {
                out_nodes.extend_from_slice(&nodes[i * self.dim..(i + 1) * self.dim]);
                out_weights.push(w);
            }
        }
        QuadratureRule { dim: self.dim, nodes: out_nodes, weights: out_weights }
    }
}

impl WeightedPoints for QuadratureRule {
    fn dim(&self) -> usize {
        self.dim
    }
    fn len(&self) -> usize {
        self.weights.len()
    }
    fn point(&self, i: usize) -> &[f64] {
        self.node(i)
    }
    fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Full Cartesian product of 1D rules; the first rule varies slowest.
pub fn tensor_rule(rules: &[Rule1D]) -> Result<QuadratureRule> {
    if rules.is_empty() {
        return Err(Error::InvalidArgument("tensor rule needs at least one factor".into()));
    }
    let refs: Vec<&Rule1D> = rules.iter().collect();
    Ok(tensor_of(&refs))
}

fn tensor_of(rules: &[&Rule1D]) -> QuadratureRule {
    let dim = rules.len();
    let count: usize = rules.iter().map(|r| r.order()).product();
    let mut nodes = Vec::with_capacity(count * dim);
    let mut weights = Vec::with_capacity(count);
    let mut idx = vec![0usize; dim];
    for _ in 0..count {
        let mut w = 1.0;
        for (k, r) in rules.iter().enumerate() {
            nodes.push(r.nodes[idx[k]]);
            w *= r.weights[idx[k]];
        }
        weights.push(w);
        for k in (0..dim).rev() {
            idx[k] += 1;
            if idx[k] < rules[k].order() {
                break;
            }
            idx[k] = 0;
        }
    }
    QuadratureRule { dim, nodes, weights }
}

/// Isotropic Smolyak rule of level `level` in `dim` dimensions built on the
/// `m`-point Gauss rule as the `m`-th 1D level. Exact for total degree
/// `<= 2 level - 1`.
pub fn smolyak_rule(family: RuleFamily, dim: usize, level: usize) -> Result<QuadratureRule> {
    if dim == 0 {
        return Err(Error::InvalidArgument("Smolyak dimension must be >= 1".into()));
    }
    if level == 0 {
        return Err(Error::InvalidArgument("Smolyak level must be >= 1".into()));
    }
    let rules1d: Vec<Rule1D> = (1..=level).map(|m| gauss_rule_1d(family, m)).collect::<Result<_>>()?;

    // Levels α ≥ 1 with λ ≤ |α| ≤ λ+K−1; writing α = 1 + β, |β| ranges over
    // [max(0, λ−K), λ−1].
    let lo = level.saturating_sub(dim);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut beta = vec![0usize; dim];
    for excess in lo..level {
        let total = dim + excess;
        let sign = if (level + dim - total - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
        let coeff = sign * binomial(dim as u64 - 1, (total - level) as u64) as f64;
        for_each_composition(excess, &mut beta, 0, &mut |b| {
            let factors: Vec<&Rule1D> = b.iter().map(|&e| &rules1d[e]).collect();
            let t = tensor_of(&factors);
            nodes.extend_from_slice(&t.nodes);
            weights.extend(t.weights.iter().map(|w| coeff * w));
        });
    }
    let raw = QuadratureRule { dim, nodes, weights };
    Ok(raw.merged(1e-12, 1e-14))
}

fn for_each_composition(n: usize, buf: &mut [usize], pos: usize, emit: &mut dyn FnMut(&[usize])) {
    if pos + 1 == buf.len() {
        buf[pos] = n;
        emit(buf);
        buf[pos] = 0;
        return;
    }
    for k in 0..=n {
        buf[pos] = k;
        for_each_composition(n - k, buf, pos + 1, emit);
    }
    buf[pos] = 0;
}

/// `Σ_p w_p f(x_p)`; a non-finite integrand value is an error.
pub fn integrate<P: WeightedPoints + ?Sized>(rule: &P, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..rule.len() {
        let v = f(rule.point(i));
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("integrand is {v} at node {i}")));
        }
        acc += rule.weight(i) * v;
    }
    Ok(acc)
}
