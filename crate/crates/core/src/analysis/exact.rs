use rayon::prelude::*;

use super::ptable::{classes_of, Exact};
use crate::buckets::{Bucketing, RandomBucketingParams, WeightClassing};
use crate::error::{Error, Result};
use crate::matroid::{AuditOracle, ElementId, Matroid, WeightedGroundSet};
use crate::rng::TrialStreams;
use crate::secretary::{Arrival, ArrivalOrder, BucketingRun, Parity};

/// Largest ground set for exact selection enumeration.
pub const EXACT_SELECTION_BUDGET: usize = 14;

/// Which bucketings the enumeration averages over.
#[derive(Clone, Debug)]
pub enum BucketingMode {
    /// A single caller-chosen bucketing.
    Fixed(Bucketing),
    /// Every `(τ, Δ)`, weighted as the full algorithm draws them.
    AllParams,
}

/// Selection counts for one bucketing, summed over all `2^n` samples and
/// both parities.
#[derive(Clone, Debug)]
pub struct SelectionCell {
    pub params: Option<RandomBucketingParams>,
    pub bucketing: Bucketing,
    counts: Vec<u64>,
}

/// Exact `Pr[e ∈ T]` for the bucketing-based algorithm with sampling
/// probability 1/2, a fair parity coin, and a deterministic phase-2 order.
#[derive(Clone, Debug)]
pub struct ExactSelection {
    h: usize,
    classes: Vec<usize>,
    cells: Vec<SelectionCell>,
    /// `2^(n+1)`: samples times parities.
    outcomes: i128,
    violations: usize,
    infeasible: usize,
}

impl ExactSelection {
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, e: ElementId) -> usize {
        self.classes[e.0]
    }

    pub fn cells(&self) -> &[SelectionCell] {
        &self.cells
    }

    /// Oracle queries that touched unrevealed elements, over all runs.
    pub fn violations(&self) -> usize {
        self.violations
    }

    /// Runs whose selection was dependent, over all runs.
    pub fn infeasible(&self) -> usize {
        self.infeasible
    }

    /// `Pr[e ∈ T]` under one cell's bucketing.
    pub fn in_cell(&self, cell: usize, e: ElementId) -> Exact {
        Exact::new(self.cells[cell].counts[e.0] as i128, self.outcomes)
    }

    /// `Pr[e ∈ T | τ]`, averaging the cells with that `τ` uniformly.
    pub fn given_tau(&self, tau: u32, e: ElementId) -> Option<Exact> {
        let cells: Vec<usize> = (0..self.cells.len())
            .filter(|&c| self.cells[c].params.is_some_and(|p| p.tau == tau))
            .collect();
        if cells.is_empty() {
            return None;
        }
        let sum: Exact = cells.iter().map(|&c| self.in_cell(c, e)).sum();
        Some(sum / Exact::from_integer(cells.len() as i128))
    }

    /// `Pr[e ∈ T | τ ≥ 1]`, with `τ` uniform on `1..=K`.
    pub fn given_tau_positive(&self, e: ElementId) -> Option<Exact> {
        let k = RandomBucketingParams::max_tau(self.h);
        let parts: Option<Vec<Exact>> = (1..=k).map(|t| self.given_tau(t, e)).collect();
        parts.map(|p| p.into_iter().sum::<Exact>() / Exact::from_integer(k as i128))
    }

    /// `Pr[e ∈ T]` unconditionally: the fixed bucketing, or `τ` uniform on
    /// `0..=K` and `Δ` uniform given `τ`.
    pub fn overall(&self, e: ElementId) -> Exact {
        if self.cells.len() == 1 {
            return self.in_cell(0, e);
        }
        let k = RandomBucketingParams::max_tau(self.h);
        let sum: Exact = (0..=k)
            .map(|t| self.given_tau(t, e).expect("all params enumerated"))
            .sum();
        sum / Exact::from_integer(k as i128 + 1)
    }
}

/// Enumerates all `2^n` samples and both parities for every bucketing in
/// `mode`, running the algorithm with an audited oracle each time.
///
/// `order` must be deterministic; a random order is rejected.
pub fn exact_selection<M: Matroid>(
    m: &M,
    w: &WeightedGroundSet,
    classing: &WeightClassing,
    mode: &BucketingMode,
    order: &ArrivalOrder,
) -> Result<ExactSelection> {
    let n = w.len();
    if m.ground_size() != n {
        return Err(Error::InvalidInstance(format!(
            "{n} weights for a ground set of size {}",
            m.ground_size()
        )));
    }
    if n > EXACT_SELECTION_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "ground set",
            actual: n,
            limit: EXACT_SELECTION_BUDGET,
        });
    }
    if *order == ArrivalOrder::Random {
        return Err(Error::InvalidParams(
            "exact enumeration needs a deterministic order".into(),
        ));
    }
    let classes = classes_of(w, classing)?;
    let h = classing.h();
    let mut cells: Vec<SelectionCell> = match mode {
        BucketingMode::Fixed(b) => {
            if b.h() != h {
                return Err(Error::InvalidBucketing(format!(
                    "bucketing covers {} classes, instance has {h}",
                    b.h()
                )));
            }
            vec![SelectionCell {
                params: None,
                bucketing: b.clone(),
                counts: vec![0; n],
            }]
        }
        BucketingMode::AllParams => RandomBucketingParams::all(h)
            .into_iter()
            .map(|p| {
                Ok(SelectionCell {
                    params: Some(p),
                    bucketing: Bucketing::from_params(h, p)?,
                    counts: vec![0; n],
                })
            })
            .collect::<Result<_>>()?,
    };
    let mut base: Vec<ElementId> = (0..n).map(ElementId).collect();
    order.arrange(&mut base, w, &mut TrialStreams::new(0));

    let width = cells.len() * n;
    let identity = || (vec![0u64; width], 0usize, 0usize);
    let (counts, violations, infeasible) = (0..1u64 << n)
        .into_par_iter()
        .try_fold(identity, |(mut acc, mut viol, mut infeas), mask| {
            let in_sample = |e: ElementId| mask >> e.0 & 1 == 1;
            let sample: Vec<Arrival> = base
                .iter()
                .filter(|&&e| in_sample(e))
                .map(|&id| Arrival { id, weight: w.weight(id) })
                .collect();
            let sample_ids: Vec<ElementId> = sample.iter().map(|a| a.id).collect();
            let rest: Vec<ElementId> = base.iter().copied().filter(|&e| !in_sample(e)).collect();
            for (c, cell) in cells.iter().enumerate() {
                for parity in Parity::BOTH {
                    let mut run =
                        BucketingRun::new(*classing, cell.bucketing.clone(), parity, &sample);
                    let mut oracle = AuditOracle::new(m, &sample_ids)?;
                    for &e in &rest {
                        oracle.reveal(e)?;
                        run.offer(Arrival { id: e, weight: w.weight(e) }, &mut oracle)?;
                    }
                    viol += oracle.log().violations.len();
                    let selected = run.selected();
                    if !m.is_independent(&selected)? {
                        infeas += 1;
                    }
                    for e in selected {
                        acc[c * n + e.0] += 1;
                    }
                }
            }
            Ok::<_, Error>((acc, viol, infeas))
        })
        .try_reduce(identity, |(mut a, va, ia), (b, vb, ib)| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            Ok((a, va + vb, ia + ib))
        })?;
    for (c, cell) in cells.iter_mut().enumerate() {
        cell.counts.copy_from_slice(&counts[c * n..(c + 1) * n]);
    }
    Ok(ExactSelection {
        h,
        classes,
        cells,
        outcomes: 1i128 << (n + 1),
        violations,
        infeasible,
    })
}
