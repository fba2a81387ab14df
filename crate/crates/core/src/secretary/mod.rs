//! Online selection algorithms and the environments that drive them.
//!
//! Two interaction models are supported:
//!
//! * **Sample-based** ([`SbmspAlgorithm`]): the algorithm declares a sampling
//!   probability `p_s`, then sees a random sample `S` (each element
//!   independently with probability `p_s`) from which it may not select,
//!   then the remaining elements one at a time in an order chosen by the
//!   environment ([`ArrivalOrder`]), possibly depending on `S`.
//! * **Random order** ([`MspAlgorithm`]): the algorithm knows `n` and sees
//!   every element in uniformly random order.
//!
//! In both models the algorithm reaches the matroid only through an
//! [`AuditOracle`] that refuses to answer about elements that have not
//! arrived. Selections are recorded by the environment and are final.

mod bucketing;
mod classical;
mod full;
mod reductions;

use rand::seq::SliceRandom;
use rand::Rng;

pub use bucketing::{BucketingAlgorithm, BucketingRun, Decision, Parity};
pub use classical::ClassicalSecretary;
pub use full::{AidedPromise, FullAlgorithm, ParamsChoice};
pub use reductions::{AidedToUnaided, Branch, SbmspToMsp};

use crate::error::{Error, Result};
use crate::matroid::{AuditOracle, ElementId, Matroid, QueryLog, WeightedGroundSet};
use crate::rng::{Stream, TrialStreams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arrival {
    pub id: ElementId,
    pub weight: f64,
}

/// What an algorithm chose internally during one run. Fields that do not
/// apply to an algorithm stay `None`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    pub tau: Option<u32>,
    pub delta: Option<u64>,
    pub h: Option<usize>,
    pub parity: Option<Parity>,
    pub bucketing: Option<String>,
    pub branch: Option<Branch>,
    pub max_weight: Option<f64>,
    pub rho_tilde: Option<u64>,
    /// Elements rejected because their weight broke the aided promise.
    pub promise_violations: usize,
    /// Elements ignored by the aided reduction for being too light.
    pub ignored: usize,
    pub prefix_len: Option<usize>,
}

/// Algorithm for the sample-based problem. It never learns `n`.
pub trait SbmspAlgorithm {
    /// Declared before any element is seen.
    fn sampling_probability(&mut self, streams: &mut TrialStreams) -> f64;

    fn observe_sample(
        &mut self,
        sample: &[Arrival],
        oracle: &mut AuditOracle<'_>,
        streams: &mut TrialStreams,
    ) -> Result<()>;

    /// Irrevocable decision on one phase-2 arrival.
    fn offer(
        &mut self,
        arrival: Arrival,
        oracle: &mut AuditOracle<'_>,
        streams: &mut TrialStreams,
    ) -> Result<bool>;

    fn trace(&self) -> RunTrace {
        RunTrace::default()
    }
}

/// A sample-based algorithm that additionally relies on an [`AidedPromise`].
pub trait AidedAlgorithm: SbmspAlgorithm {
    /// Supplied after `sampling_probability` and before `observe_sample`.
    fn set_promise(&mut self, promise: AidedPromise);
}

/// Algorithm for the random-order problem. It knows `n` upfront.
pub trait MspAlgorithm {
    fn start(&mut self, n: usize, streams: &mut TrialStreams);

    fn offer(
        &mut self,
        arrival: Arrival,
        oracle: &mut AuditOracle<'_>,
        streams: &mut TrialStreams,
    ) -> Result<bool>;

    fn trace(&self) -> RunTrace {
        RunTrace::default()
    }
}

/// How the environment orders phase-2 arrivals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArrivalOrder {
    /// Uniformly random, from the trial's order stream.
    Random,
    /// Lightest first.
    Increasing,
    /// Heaviest first.
    Decreasing,
    /// A permutation of the ground set; phase 2 follows its relative order.
    Fixed(Vec<ElementId>),
}

impl ArrivalOrder {
    pub fn arrange(
        &self,
        elements: &mut [ElementId],
        w: &WeightedGroundSet,
        streams: &mut TrialStreams,
    ) {
        match self {
            ArrivalOrder::Random => elements.shuffle(streams.get(Stream::Order)),
            ArrivalOrder::Increasing => elements.sort_by(|&a, &b| w.compare(a, b)),
            ArrivalOrder::Decreasing => elements.sort_by(|&a, &b| w.compare(b, a)),
            ArrivalOrder::Fixed(perm) => {
                let mut pos = vec![usize::MAX; w.len()];
                for (i, e) in perm.iter().enumerate() {
                    pos[e.0] = i;
                }
                elements.sort_by_key(|e| pos[e.0]);
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ArrivalOrder::Random => "random",
            ArrivalOrder::Increasing => "increasing",
            ArrivalOrder::Decreasing => "decreasing",
            ArrivalOrder::Fixed(_) => "fixed",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub sample: Vec<ElementId>,
    pub selected: Vec<ElementId>,
    pub trace: RunTrace,
    pub log: QueryLog,
}

fn arrival(w: &WeightedGroundSet, id: ElementId) -> Arrival {
    Arrival {
        id,
        weight: w.weight(id),
    }
}

fn check_sizes(m: &dyn Matroid, w: &WeightedGroundSet) -> Result<()> {
    if m.ground_size() != w.len() {
        return Err(Error::InvalidInstance(format!(
            "{} weights for a ground set of size {}",
            w.len(),
            m.ground_size()
        )));
    }
    Ok(())
}

/// Runs a sample-based algorithm: draws `S` with the declared probability,
/// then streams `N \ S` in `order`.
pub fn run_sbmsp(
    m: &dyn Matroid,
    w: &WeightedGroundSet,
    alg: &mut dyn SbmspAlgorithm,
    order: &ArrivalOrder,
    streams: &mut TrialStreams,
) -> Result<Outcome> {
    check_sizes(m, w)?;
    let p = alg.sampling_probability(streams);
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!(
            "sampling probability {p} is outside [0, 1]"
        )));
    }
    let rng = streams.get(Stream::Sample);
    let in_sample: Vec<bool> = (0..w.len()).map(|_| rng.random_bool(p)).collect();
    let sample = (0..w.len())
        .filter(|&i| in_sample[i])
        .map(ElementId)
        .collect();
    run_sbmsp_with_sample(m, w, alg, sample, order, streams)
}

/// As [`run_sbmsp`] with a caller-chosen sample. The algorithm's declared
/// probability is still requested (it may draw coins there) but not used.
pub fn run_sbmsp_with_sample(
    m: &dyn Matroid,
    w: &WeightedGroundSet,
    alg: &mut dyn SbmspAlgorithm,
    sample: Vec<ElementId>,
    order: &ArrivalOrder,
    streams: &mut TrialStreams,
) -> Result<Outcome> {
    check_sizes(m, w)?;
    let mut oracle = AuditOracle::new(m, &sample)?;
    let mut in_sample = vec![false; w.len()];
    for &e in &sample {
        in_sample[e.0] = true;
    }
    let arrivals: Vec<Arrival> = sample.iter().map(|&e| arrival(w, e)).collect();
    alg.observe_sample(&arrivals, &mut oracle, streams)?;

    let mut rest: Vec<ElementId> = (0..w.len())
        .filter(|&i| !in_sample[i])
        .map(ElementId)
        .collect();
    order.arrange(&mut rest, w, streams);
    let mut selected = Vec::new();
    for e in rest {
        oracle.reveal(e)?;
        if alg.offer(arrival(w, e), &mut oracle, streams)? {
            selected.push(e);
        }
    }
    Ok(Outcome {
        sample,
        selected,
        trace: alg.trace(),
        log: oracle.into_log(),
    })
}

/// Runs a random-order algorithm on a uniformly random permutation.
pub fn run_msp(
    m: &dyn Matroid,
    w: &WeightedGroundSet,
    alg: &mut dyn MspAlgorithm,
    streams: &mut TrialStreams,
) -> Result<Outcome> {
    check_sizes(m, w)?;
    let mut order: Vec<ElementId> = (0..w.len()).map(ElementId).collect();
    order.shuffle(streams.get(Stream::Order));
    run_msp_in_order(m, w, alg, &order, streams)
}

/// As [`run_msp`] with a caller-chosen permutation.
pub fn run_msp_in_order(
    m: &dyn Matroid,
    w: &WeightedGroundSet,
    alg: &mut dyn MspAlgorithm,
    order: &[ElementId],
    streams: &mut TrialStreams,
) -> Result<Outcome> {
    check_sizes(m, w)?;
    let mut oracle = AuditOracle::new(m, &[])?;
    alg.start(w.len(), streams);
    let mut selected = Vec::new();
    for &e in order {
        oracle.reveal(e)?;
        if alg.offer(arrival(w, e), &mut oracle, streams)? {
            selected.push(e);
        }
    }
    let trace = alg.trace();
    let sample = trace
        .prefix_len
        .map(|x| order[..x].to_vec())
        .unwrap_or_default();
    Ok(Outcome {
        sample,
        selected,
        trace,
        log: oracle.into_log(),
    })
}
