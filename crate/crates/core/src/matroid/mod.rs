//! Matroid oracles and the operations built on top of them.
//!
//! A matroid is accessed only through its rank function. Independence and
//! span membership are derived from rank unless a family provides a faster
//! route. All query sets are slices of distinct [`ElementId`]s; an unknown or
//! repeated id is rejected with an error instead of being silently ignored.

mod audit;
mod families;
pub mod io;
mod minor;

use std::cmp::Ordering;
use std::fmt;

pub use audit::{global_violation_count, AuditOracle, QueryKind, QueryLog};
pub use families::{
    Graphic, Laminar, LaminarSet, MatroidInstance, Partition, Transversal, Uniform,
};
pub use minor::MinorView;

use crate::error::{Error, Result};

/// Index of an element of the ground set `N = {0, .., n-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(pub usize);

impl ElementId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for ElementId {
    fn from(i: usize) -> Self {
        ElementId(i)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shorthand for building id lists in tests and examples.
pub fn ids(raw: &[usize]) -> Vec<ElementId> {
    raw.iter().copied().map(ElementId).collect()
}

/// Rank oracle over the ground set `0..ground_size()`.
///
/// Implementations must be immutable after construction so that many
/// trials can query one instance concurrently.
pub trait Matroid: Send + Sync {
    fn ground_size(&self) -> usize;

    /// Size of a largest independent subset of `set`.
    fn rank(&self, set: &[ElementId]) -> Result<usize>;

    fn is_independent(&self, set: &[ElementId]) -> Result<bool> {
        Ok(self.rank(set)? == set.len())
    }

    /// Whether `rank(set + e) == rank(set)`.
    fn span_contains(&self, set: &[ElementId], e: ElementId) -> Result<bool> {
        check_element(e, self.ground_size())?;
        if set.contains(&e) {
            validate(set, self.ground_size())?;
            return Ok(true);
        }
        let mut extended = Vec::with_capacity(set.len() + 1);
        extended.extend_from_slice(set);
        extended.push(e);
        Ok(self.rank(&extended)? == self.rank(set)?)
    }

    fn ground_set(&self) -> Vec<ElementId> {
        (0..self.ground_size()).map(ElementId).collect()
    }
}

pub(crate) fn check_element(e: ElementId, n: usize) -> Result<()> {
    if e.0 >= n {
        Err(Error::UnknownElement { id: e, n })
    } else {
        Ok(())
    }
}

/// Rejects out-of-range and repeated ids.
pub(crate) fn validate(set: &[ElementId], n: usize) -> Result<()> {
    if set.len() <= 1 {
        return set.iter().try_for_each(|&e| check_element(e, n));
    }
    let mut seen = vec![0u64; n.div_ceil(64)];
    for &e in set {
        check_element(e, n)?;
        let (word, bit) = (e.0 / 64, 1u64 << (e.0 % 64));
        if seen[word] & bit != 0 {
            return Err(Error::DuplicateElement(e));
        }
        seen[word] |= bit;
    }
    Ok(())
}

/// Rank computed by the greedy axiom: scan `set`, keep an element whenever the
/// kept elements stay independent. Independent of any family fast path.
pub fn greedy_rank<M: Matroid + ?Sized>(m: &M, set: &[ElementId]) -> Result<usize> {
    validate(set, m.ground_size())?;
    let mut kept = Vec::with_capacity(set.len());
    for &e in set {
        kept.push(e);
        if !m.is_independent(&kept)? {
            kept.pop();
        }
    }
    Ok(kept.len())
}

/// Strictly positive element weights, compared lexicographically by
/// `(weight, id)` so that equal input weights still give a strict order.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGroundSet {
    weights: Vec<f64>,
}

impl WeightedGroundSet {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::NoElements);
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidInstance(format!(
                "weight of element {i} must be positive and finite, got {w}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn weight(&self, e: ElementId) -> f64 {
        self.weights[e.0]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self, set: &[ElementId]) -> f64 {
        set.iter().fold(0.0, |acc, &e| acc + self.weight(e))
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::MAX, f64::min)
    }

    /// Total order used everywhere a "heavier" element is needed. Among equal
    /// weights the smaller id is heavier.
    pub fn compare(&self, a: ElementId, b: ElementId) -> Ordering {
        self.weight(a)
            .total_cmp(&self.weight(b))
            .then_with(|| b.0.cmp(&a.0))
    }

    /// `ids` sorted heaviest first.
    pub fn sorted_desc(&self, ids: &[ElementId]) -> Vec<ElementId> {
        let mut out = ids.to_vec();
        out.sort_by(|&a, &b| self.compare(b, a));
        out
    }
}

/// Max-weight independent subset of `candidates` via the matroid greedy
/// algorithm. With `candidates = N` this is OPT.
pub fn greedy_max_weight<M: Matroid + ?Sized>(
    m: &M,
    w: &WeightedGroundSet,
    candidates: &[ElementId],
) -> Result<Vec<ElementId>> {
    validate(candidates, m.ground_size())?;
    if w.len() != m.ground_size() {
        return Err(Error::InvalidInstance(format!(
            "{} weights for a ground set of size {}",
            w.len(),
            m.ground_size()
        )));
    }
    let mut chosen = Vec::new();
    for e in w.sorted_desc(candidates) {
        chosen.push(e);
        if !m.is_independent(&chosen)? {
            chosen.pop();
        }
    }
    Ok(chosen)
}

/// Iterates the members of a bitmask over `universe`.
pub(crate) fn subset_from_mask(universe: &[ElementId], mask: u64, out: &mut Vec<ElementId>) {
    out.clear();
    let mut bits = mask;
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        out.push(universe[i]);
        bits &= bits - 1;
    }
}
