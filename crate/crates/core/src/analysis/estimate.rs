use rand::Rng;
use rayon::prelude::*;

use super::exact::BucketingMode;
use super::ptable::classes_of;
use crate::buckets::{sample_params, Bucketing, RandomBucketingParams, WeightClassing};
use crate::error::{Error, Result};
use crate::matroid::{AuditOracle, ElementId, Matroid, WeightedGroundSet};
use crate::rng::{trial_seed, Stream, TrialStreams};
use crate::secretary::{Arrival, ArrivalOrder, BucketingRun, Parity};

/// Monte Carlo counterpart of [`super::ExactSelection`]: per-bucketing
/// selection frequencies from independent runs.
#[derive(Clone, Debug)]
pub struct EstimatedSelection {
    pub(crate) h: usize,
    pub(crate) classes: Vec<usize>,
    pub(crate) params: Vec<Option<RandomBucketingParams>>,
    pub(crate) bucketings: Vec<Bucketing>,
    /// Runs that drew each bucketing.
    pub(crate) runs: Vec<u64>,
    /// `hits[c * n + e]`: runs with bucketing `c` that selected `e`.
    pub(crate) hits: Vec<u64>,
    pub(crate) trials: usize,
    pub(crate) violations: usize,
    pub(crate) infeasible: usize,
}

impl EstimatedSelection {
    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn violations(&self) -> usize {
        self.violations
    }

    pub fn infeasible(&self) -> usize {
        self.infeasible
    }

    pub fn runs_in_cell(&self, cell: usize) -> u64 {
        self.runs[cell]
    }

    pub fn frequency(&self, cell: usize, e: ElementId) -> f64 {
        let n = self.classes.len();
        match self.runs[cell] {
            0 => 0.0,
            r => self.hits[cell * n + e.0] as f64 / r as f64,
        }
    }
}

/// Runs the bucketing-based algorithm `trials` times with fresh samples,
/// parities, and (in [`BucketingMode::AllParams`]) bucketings.
pub fn estimate_selection<M: Matroid>(
    m: &M,
    w: &WeightedGroundSet,
    classing: &WeightClassing,
    mode: &BucketingMode,
    order: &ArrivalOrder,
    trials: usize,
    seed: u64,
) -> Result<EstimatedSelection> {
    let n = w.len();
    if m.ground_size() != n {
        return Err(Error::InvalidInstance(format!(
            "{n} weights for a ground set of size {}",
            m.ground_size()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParams("at least one trial is required".into()));
    }
    let classes = classes_of(w, classing)?;
    let h = classing.h();
    let (params, bucketings): (Vec<_>, Vec<_>) = match mode {
        BucketingMode::Fixed(b) => (vec![None], vec![b.clone()]),
        BucketingMode::AllParams => RandomBucketingParams::all(h)
            .into_iter()
            .map(|p| Ok((Some(p), Bucketing::from_params(h, p)?)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip(),
    };
    let cells = bucketings.len();
    let cell_of = |p: RandomBucketingParams| {
        params
            .iter()
            .position(|q| *q == Some(p))
            .expect("every legal pair is enumerated")
    };

    let identity = || (vec![0u64; cells], vec![0u64; cells * n], 0usize, 0usize);
    let (runs, hits, violations, infeasible) = (0..trials as u64)
        .into_par_iter()
        .try_fold(identity, |(mut runs, mut hits, mut viol, mut infeas), t| {
            let mut streams = TrialStreams::new(trial_seed(seed, t));
            let cell = match mode {
                BucketingMode::Fixed(_) => 0,
                BucketingMode::AllParams => cell_of(sample_params(h, streams.get(Stream::Bucketing))),
            };
            let parity = if streams.get(Stream::Parity).random_bool(0.5) {
                Parity::Odd
            } else {
                Parity::Even
            };
            let coins: Vec<bool> = {
                let rng = streams.get(Stream::Sample);
                (0..n).map(|_| rng.random_bool(0.5)).collect()
            };
            let sample_ids: Vec<ElementId> = (0..n).filter(|&i| coins[i]).map(ElementId).collect();
            let sample: Vec<Arrival> = sample_ids
                .iter()
                .map(|&id| Arrival { id, weight: w.weight(id) })
                .collect();
            let mut rest: Vec<ElementId> = (0..n).filter(|&i| !coins[i]).map(ElementId).collect();
            order.arrange(&mut rest, w, &mut streams);

            let mut run = BucketingRun::new(*classing, bucketings[cell].clone(), parity, &sample);
            let mut oracle = AuditOracle::new(m, &sample_ids)?;
            for e in rest {
                oracle.reveal(e)?;
                run.offer(Arrival { id: e, weight: w.weight(e) }, &mut oracle)?;
            }
            viol += oracle.log().violations.len();
            let selected = run.selected();
            if !m.is_independent(&selected)? {
                infeas += 1;
            }
            runs[cell] += 1;
            for e in selected {
                hits[cell * n + e.0] += 1;
            }
            Ok::<_, Error>((runs, hits, viol, infeas))
        })
        .try_reduce(identity, |(mut ra, mut ha, va, ia), (rb, hb, vb, ib)| {
            ra.iter_mut().zip(rb).for_each(|(x, y)| *x += y);
            ha.iter_mut().zip(hb).for_each(|(x, y)| *x += y);
            Ok((ra, ha, va + vb, ia + ib))
        })?;
    Ok(EstimatedSelection {
        h,
        classes,
        params,
        bucketings,
        runs,
        hits,
        trials,
        violations,
        infeasible,
    })
}
