//! Multi-indices over `d` variables in graded lexicographic order.
//!
//! Within one total degree, exponent vectors are compared left to right and
//! the larger exponent on the earlier variable comes first, so for `d = 2`
//! the order starts `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)`. Node, basis
//! and coefficient files all depend on this order.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector `alpha` of the monomial `xi_1^alpha_1 ... xi_d^alpha_d`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total_order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Component-wise sum, the exponent of a product of two monomials.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `alpha - e_i`, or `None` when `alpha_i == 0`.
    pub fn decrement(&self, i: usize) -> Option<MultiIndex> {
        let mut e = self.0.clone();
        e[i] = e[i].checked_sub(1)?;
        Some(MultiIndex(e))
    }

    /// Evaluates the monomial at `x` by repeated multiplication.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&a, &xi)| xi.powi(a as i32))
            .product()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_order()
            .cmp(&other.total_order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// `binom(n, k)` in `u64`, exact for the sizes used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of multi-indices in `d` variables with total order at most `q`.
pub fn count_indices(dim: usize, order: u32) -> usize {
    binomial(dim as u64 + order as u64, dim as u64) as usize
}

/// All multi-indices with `|alpha| <= order`, in graded lexicographic order.
pub fn enumerate_indices(dim: usize, order: u32) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(count_indices(dim, order));
    let mut buf = vec![0u32; dim];
    for degree in 0..=order {
        compositions(degree, 0, &mut buf, &mut out);
    }
    out
}

fn compositions(remaining: u32, pos: usize, buf: &mut [u32], out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex(buf.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        buf[pos] = e;
        compositions(remaining - e, pos + 1, buf, out);
    }
    buf[pos] = 0;
}

/// Ordered index set with position lookup.
#[derive(Clone, Debug)]
pub struct IndexSet {
    dim: usize,
    order: u32,
    indices: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl IndexSet {
    pub fn new(dim: usize, order: u32) -> Self {
        let indices = enumerate_indices(dim, order);
        let position = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        IndexSet {
            dim,
            order,
            indices,
            position,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.position.get(alpha).copied()
    }
}
