use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result};

/// Exponent vector of a d-variate monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|α|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Evaluates `u^α`.
    pub fn monomial(&self, u: &[f64]) -> f64 {
        self.0.iter().zip(u).map(|(&e, &x)| x.powi(e as i32)).product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// All multi-indices of dimension `d` with total degree at most `N`, in
/// graded lexicographic order: by degree, then lexicographically descending
/// within a degree, so `(1,0)` precedes `(0,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndexSet {
    dim: usize,
    max_degree: u32,
    members: Vec<MultiIndex>,
    lookup: HashMap<Vec<u32>, usize>,
}

impl MultiIndexSet {
    pub fn new(dim: usize, max_degree: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("multi-index dimension must be >= 1".into()));
        }
        let mut members = Vec::with_capacity(binomial(dim as u64 + max_degree as u64, dim as u64) as usize);
        let mut buf = vec![0u32; dim];
        for n in 0..=max_degree {
            compositions_desc(n, 0, &mut buf, &mut |c| members.push(MultiIndex(c.to_vec())));
        }
        let lookup = members.iter().enumerate().map(|(i, a)| (a.0.clone(), i)).collect();
        Ok(MultiIndexSet { dim, max_degree, members, lookup })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[MultiIndex] {
        &self.members
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.members[i]
    }

    pub fn index_of(&self, entries: &[u32]) -> Option<usize> {
        self.lookup.get(entries).copied()
    }

    /// Number of members with degree `<= n` (the members are sorted by degree).
    pub fn count_up_to(&self, n: u32) -> usize {
        if n >= self.max_degree {
            return self.len();
        }
        binomial(self.dim as u64 + n as u64, self.dim as u64) as usize
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.members.iter()
    }
}

/// Enumerates compositions of `n` into `buf.len() - pos` non-negative parts,
/// largest leading entry first.
fn compositions_desc(n: u32, pos: usize, buf: &mut [u32], emit: &mut dyn FnMut(&[u32])) {
    if pos + 1 == buf.len() {
        buf[pos] = n;
        emit(buf);
        return;
    }
    for k in (0..=n).rev() {
        buf[pos] = k;
        compositions_desc(n - k, pos + 1, buf, emit);
    }
    buf[pos] = 0;
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
