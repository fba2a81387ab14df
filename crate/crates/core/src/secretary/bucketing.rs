use rand::Rng;

use super::{Arrival, RunTrace, SbmspAlgorithm};
use crate::buckets::{Bucketing, WeightClassing};
use crate::error::Result;
use crate::matroid::{AuditOracle, ElementId};
use crate::rng::{Stream, TrialStreams};

/// Which bucket indices the run selects from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Odd, Parity::Even];

    pub fn contains(self, bucket: usize) -> bool {
        (bucket % 2 == 1) == (self == Parity::Odd)
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Odd => "odd",
            Parity::Even => "even",
        }
    }
}

/// One phase-2 decision: enough to replay the acceptance test offline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub element: ElementId,
    pub bucket: usize,
    pub in_parity: bool,
    pub accepted: bool,
}

/// Deterministic core of the bucketing-based algorithm once the sample and
/// the parity are fixed.
///
/// Bucket `i` owns the minor `M_i`: `M` with `S ∩ B_{≥i+1}` contracted,
/// restricted to `B_1` when `i = 1` and to `B_i ∩ span(S ∩ B_{≥i-1})`
/// otherwise. Elements are accepted greedily into `T_i` while `T_i` stays
/// independent in `M_i`, which is decided from the sample and `T_i` alone.
#[derive(Clone, Debug)]
pub struct BucketingRun {
    classing: WeightClassing,
    bucketing: Bucketing,
    parity: Parity,
    /// `suffix[j] = S ∩ B_{≥j}` for `j` in `1..=b+1`; `suffix[0] = suffix[1]`.
    suffix: Vec<Vec<ElementId>>,
    taken: Vec<Vec<ElementId>>,
    decisions: Vec<Decision>,
    unclassed: usize,
    scratch: Vec<ElementId>,
}

impl BucketingRun {
    /// Sample elements outside the class range are dropped and counted.
    pub fn new(
        classing: WeightClassing,
        bucketing: Bucketing,
        parity: Parity,
        sample: &[Arrival],
    ) -> Self {
        let b = bucketing.len();
        let mut by_bucket = vec![Vec::new(); b + 2];
        let mut unclassed = 0;
        for a in sample {
            match classing.class_of(a.weight) {
                Ok(c) => by_bucket[bucketing.bucket_of_class(c)].push(a.id),
                Err(_) => unclassed += 1,
            }
        }
        let mut suffix = vec![Vec::new(); b + 2];
        for j in (1..=b).rev() {
            let mut s = suffix[j + 1].clone();
            s.extend_from_slice(&by_bucket[j]);
            suffix[j] = s;
        }
        suffix[0] = suffix[1].clone();
        Self {
            classing,
            bucketing,
            parity,
            suffix,
            taken: vec![Vec::new(); b + 1],
            decisions: Vec::new(),
            unclassed,
            scratch: Vec::new(),
        }
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn bucketing(&self) -> &Bucketing {
        &self.bucketing
    }

    pub fn classing(&self) -> &WeightClassing {
        &self.classing
    }

    /// Bucket holding an element of this weight, if it is classed at all.
    pub fn bucket_of(&self, weight: f64) -> Option<usize> {
        self.classing
            .class_of(weight)
            .ok()
            .map(|c| self.bucketing.bucket_of_class(c))
    }

    /// `S ∩ B_{≥j}` (empty for `j > b`).
    pub fn sample_from(&self, j: usize) -> &[ElementId] {
        self.suffix.get(j).map_or(&[], Vec::as_slice)
    }

    /// `T_i`.
    pub fn taken(&self, i: usize) -> &[ElementId] {
        &self.taken[i]
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn unclassed(&self) -> usize {
        self.unclassed
    }

    /// Whether `e ∈ B_i \ S` may join `T_i`:
    /// (a) `i = 1` or `e ∈ span(S ∩ B_{≥i-1})`, and
    /// (b) `e ∉ span(T_i ∪ (S ∩ B_{≥i+1}))`.
    pub fn accept_test(
        &mut self,
        e: ElementId,
        i: usize,
        oracle: &mut AuditOracle<'_>,
    ) -> Result<bool> {
        if i > 1 && !oracle.span_contains(&self.suffix[i - 1], e)? {
            return Ok(false);
        }
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.taken[i]);
        self.scratch.extend_from_slice(&self.suffix[i + 1]);
        Ok(!oracle.span_contains(&self.scratch, e)?)
    }

    pub fn offer(&mut self, arrival: Arrival, oracle: &mut AuditOracle<'_>) -> Result<bool> {
        let Some(i) = self.bucket_of(arrival.weight) else {
            self.unclassed += 1;
            return Ok(false);
        };
        let in_parity = self.parity.contains(i);
        let accepted = in_parity && self.accept_test(arrival.id, i, oracle)?;
        if accepted {
            self.taken[i].push(arrival.id);
        }
        self.decisions.push(Decision {
            element: arrival.id,
            bucket: i,
            in_parity,
            accepted,
        });
        Ok(accepted)
    }

    /// `T`, the union of all `T_i`.
    pub fn selected(&self) -> Vec<ElementId> {
        self.taken.iter().flatten().copied().collect()
    }

    pub fn trace(&self) -> RunTrace {
        RunTrace {
            h: Some(self.classing.h()),
            parity: Some(self.parity),
            bucketing: Some(self.bucketing.to_string()),
            promise_violations: self.unclassed,
            ..RunTrace::default()
        }
    }
}

/// The bucketing-based algorithm with a caller-supplied bucketing.
pub struct BucketingAlgorithm {
    classing: WeightClassing,
    bucketing: Bucketing,
    parity: Option<Parity>,
    sampling_probability: f64,
    run: Option<BucketingRun>,
}

impl BucketingAlgorithm {
    pub fn new(classing: WeightClassing, bucketing: Bucketing) -> Self {
        Self {
            classing,
            bucketing,
            parity: None,
            sampling_probability: 0.5,
            run: None,
        }
    }

    /// Fixes the parity instead of flipping a fair coin.
    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = Some(parity);
        self
    }

    /// Overrides the declared sampling probability (1/2 by default). The
    /// selection guarantees are only established for 1/2.
    pub fn with_sampling_probability(mut self, p: f64) -> Self {
        self.sampling_probability = p;
        self
    }

    pub fn run(&self) -> Option<&BucketingRun> {
        self.run.as_ref()
    }
}

pub(crate) fn draw_parity(streams: &mut TrialStreams) -> Parity {
    if streams.get(Stream::Parity).random_bool(0.5) {
        Parity::Odd
    } else {
        Parity::Even
    }
}

impl SbmspAlgorithm for BucketingAlgorithm {
    fn sampling_probability(&mut self, _streams: &mut TrialStreams) -> f64 {
        self.sampling_probability
    }

    fn observe_sample(
        &mut self,
        sample: &[Arrival],
        _oracle: &mut AuditOracle<'_>,
        streams: &mut TrialStreams,
    ) -> Result<()> {
        let parity = self.parity.unwrap_or_else(|| draw_parity(streams));
        self.run = Some(BucketingRun::new(
            self.classing,
            self.bucketing.clone(),
            parity,
            sample,
        ));
        Ok(())
    }

    fn offer(
        &mut self,
        arrival: Arrival,
        oracle: &mut AuditOracle<'_>,
        _streams: &mut TrialStreams,
    ) -> Result<bool> {
        let run = self
            .run
            .as_mut()
            .expect("observe_sample precedes every offer");
        run.offer(arrival, oracle)
    }

    fn trace(&self) -> RunTrace {
        self.run.as_ref().map(BucketingRun::trace).unwrap_or_default()
    }
}
