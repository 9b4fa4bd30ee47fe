//! Hard-sparsity primitives: top-`s` support extraction and truncation.

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted, duplicate-free set of coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    /// Builds a support set from arbitrary indices, sorting and deduplicating them.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        SupportSet(indices)
    }

    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    pub fn full(d: usize) -> Self {
        SupportSet((0..d).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    /// Largest index plus one, or zero for the empty set.
    pub fn bound(&self) -> usize {
        self.0.last().map_or(0, |&j| j + 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<usize> for SupportSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        SupportSet::new(iter.into_iter().collect())
    }
}

/// Indices of the `s` largest-magnitude entries of `beta`.
///
/// Equal magnitudes are ordered by index, so the smaller index wins a tie. A
/// zero vector therefore yields `{0, ..., s-1}`.
pub fn supp_top(beta: ArrayView1<'_, f64>, s: usize) -> Result<SupportSet> {
    let d = beta.len();
    if s > d {
        return Err(Error::invalid(format!(
            "sparsity {s} exceeds dimension {d}"
        )));
    }
    if s == d {
        return Ok(SupportSet::full(d));
    }
    let mut order: Vec<usize> = (0..d).collect();
    // stable sort on descending magnitude keeps ascending index among ties
    order.sort_by(|&a, &b| beta[b].abs().total_cmp(&beta[a].abs()));
    order.truncate(s);
    Ok(SupportSet::new(order))
}

/// Zeroes every coordinate of `beta` outside `support`.
pub fn trunc(beta: ArrayView1<'_, f64>, support: &SupportSet) -> Result<Array1<f64>> {
    if support.bound() > beta.len() {
        return Err(Error::invalid(format!(
            "support index {} out of range for dimension {}",
            support.bound() - 1,
            beta.len()
        )));
    }
    let mut out = Array1::zeros(beta.len());
    for j in support.iter() {
        out[j] = beta[j];
    }
    Ok(out)
}

/// Number of nonzero entries.
pub fn l0_norm(beta: ArrayView1<'_, f64>) -> usize {
    beta.iter().filter(|v| **v != 0.0).count()
}
