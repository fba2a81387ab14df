use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{AidedAlgorithm, AidedPromise, Arrival, MspAlgorithm, RunTrace, SbmspAlgorithm};
use crate::error::Result;
use crate::matroid::{AuditOracle, ElementId};
use crate::rng::{Stream, TrialStreams};

/// Turns a sample-based algorithm into a random-order one: draw
/// `X ~ Binomial(n, p_s)` and treat the first `X` arrivals as the sample.
pub struct SbmspToMsp<A> {
    inner: A,
    prefix_len: usize,
    buffer: Vec<Arrival>,
    observed: bool,
}

impl<A: SbmspAlgorithm> SbmspToMsp<A> {
    pub fn new(inner: A) -> Self {
        Self {
            inner,
            prefix_len: 0,
            buffer: Vec::new(),
            observed: false,
        }
    }

    pub fn inner(&self) -> &A {
        &self.inner
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix_len
    }
}

impl<A: SbmspAlgorithm> MspAlgorithm for SbmspToMsp<A> {
    fn start(&mut self, n: usize, streams: &mut TrialStreams) {
        let p = self.inner.sampling_probability(streams).clamp(0.0, 1.0);
        let binomial = Binomial::new(n as u64, p).expect("p is clamped to [0, 1]");
        self.prefix_len = binomial.sample(streams.get(Stream::Prefix)) as usize;
        self.buffer.clear();
        self.observed = false;
    }

    fn offer(
        &mut self,
        arrival: Arrival,
        oracle: &mut AuditOracle<'_>,
        streams: &mut TrialStreams,
    ) -> Result<bool> {
        if self.buffer.len() < self.prefix_len {
            self.buffer.push(arrival);
            if self.buffer.len() == self.prefix_len {
                self.observed = true;
                self.inner.observe_sample(&self.buffer, oracle, streams)?;
            }
            return Ok(false);
        }
        if !self.observed {
            self.observed = true;
            self.inner.observe_sample(&[], oracle, streams)?;
        }
        self.inner.offer(arrival, oracle, streams)
    }

    fn trace(&self) -> RunTrace {
        RunTrace {
            prefix_len: Some(self.prefix_len),
            ..self.inner.trace()
        }
    }
}

/// Outcome of the reduction's fair coin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Select the first phase-2 element at least as heavy as the sample's
    /// heaviest.
    MaxElement,
    /// Run the aided algorithm with estimated `W` and `ρ̃`.
    Aided,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::MaxElement => "max-element",
            Branch::Aided => "aided",
        }
    }
}

/// Removes the need for an aided promise.
///
/// A fair coin is flipped before the sampling probability is declared. On
/// [`Branch::MaxElement`] the declared probability is 1/2 and the first
/// phase-2 element weighing at least `W = max_{e∈S} w(e)` is taken. On
/// [`Branch::Aided`] the declared probability is `(1 + p)/2`, where `p` is the
/// inner algorithm's; each sampled element is kept in the estimation sample
/// `S` with probability `1/(1+p)` and otherwise handed to the inner
/// algorithm as its own sample, so `S` holds every element independently
/// with probability 1/2. The inner algorithm then runs with
/// `W = max_{e∈S} w(e)` and `ρ̃ = 4·rank(S)`, and never sees elements of
/// weight `W/(8ρ̃)` or less.
///
/// If `S` is empty or has rank 0 the estimates are undefined; the run falls
/// back to the max-element rule with `W = 0`.
pub struct AidedToUnaided<A> {
    inner: A,
    branch: Option<Branch>,
    inner_p: f64,
    estimate: Option<AidedPromise>,
    estimation: Vec<ElementId>,
    threshold_weight: f64,
    fallback: bool,
    picked: bool,
    ignored: usize,
}

impl<A: AidedAlgorithm> AidedToUnaided<A> {
    pub fn new(inner: A) -> Self {
        Self {
            inner,
            branch: None,
            inner_p: 0.0,
            estimate: None,
            estimation: Vec::new(),
            threshold_weight: 0.0,
            fallback: false,
            picked: false,
            ignored: 0,
        }
    }

    pub fn branch(&self) -> Option<Branch> {
        self.branch
    }

    /// The `(W, ρ̃)` handed to the inner algorithm, when it ran.
    pub fn estimate(&self) -> Option<AidedPromise> {
        self.estimate
    }

    /// The part of the sample used to estimate `W` and `ρ̃` (aided branch).
    pub fn estimation_sample(&self) -> &[ElementId] {
        &self.estimation
    }

    /// Elements at or below this weight are never shown to the inner
    /// algorithm: `W/(8ρ̃)`.
    pub fn light_threshold(&self) -> Option<f64> {
        self.estimate
            .map(|p| p.max_weight / (8.0 * p.rho_tilde as f64))
    }

    pub fn inner(&self) -> &A {
        &self.inner
    }

    fn max_element_rule(
        &mut self,
        arrival: Arrival,
        oracle: &mut AuditOracle<'_>,
    ) -> Result<bool> {
        if self.picked || arrival.weight < self.threshold_weight {
            return Ok(false);
        }
        // a loop can never be selected on its own
        if !oracle.is_independent(&[arrival.id])? {
            return Ok(false);
        }
        self.picked = true;
        Ok(true)
    }
}

fn heaviest(sample: &[Arrival]) -> Option<f64> {
    sample.iter().map(|a| a.weight).reduce(f64::max)
}

impl<A: AidedAlgorithm> SbmspAlgorithm for AidedToUnaided<A> {
    fn sampling_probability(&mut self, streams: &mut TrialStreams) -> f64 {
        let branch = if streams.get(Stream::Branch).random_bool(0.5) {
            Branch::MaxElement
        } else {
            Branch::Aided
        };
        self.branch = Some(branch);
        match branch {
            Branch::MaxElement => 0.5,
            Branch::Aided => {
                self.inner_p = self.inner.sampling_probability(streams);
                (1.0 + self.inner_p) / 2.0
            }
        }
    }

    fn observe_sample(
        &mut self,
        sample: &[Arrival],
        oracle: &mut AuditOracle<'_>,
        streams: &mut TrialStreams,
    ) -> Result<()> {
        match self.branch.expect("sampling_probability is called first") {
            Branch::MaxElement => {
                self.threshold_weight = heaviest(sample).unwrap_or(0.0);
                Ok(())
            }
            Branch::Aided => {
                let keep = 1.0 / (1.0 + self.inner_p);
                let rng = streams.get(Stream::Split);
                let (estimation, handed): (Vec<Arrival>, Vec<Arrival>) =
                    sample.iter().partition(|_| rng.random_bool(keep));
                let ids: Vec<ElementId> = estimation.iter().map(|a| a.id).collect();
                let rank = oracle.rank(&ids)? as u64;
                self.estimation = ids;
                let Some(max_weight) = heaviest(&estimation).filter(|_| rank > 0) else {
                    self.fallback = true;
                    self.threshold_weight = 0.0;
                    return Ok(());
                };
                let promise = AidedPromise::new(4 * rank, max_weight)?;
                let floor = max_weight / (8.0 * promise.rho_tilde as f64);
                self.estimate = Some(promise);
                self.inner.set_promise(promise);
                let visible: Vec<Arrival> =
                    handed.into_iter().filter(|a| a.weight > floor).collect();
                self.inner.observe_sample(&visible, oracle, streams)
            }
        }
    }

    fn offer(
        &mut self,
        arrival: Arrival,
        oracle: &mut AuditOracle<'_>,
        streams: &mut TrialStreams,
    ) -> Result<bool> {
        if self.branch == Some(Branch::MaxElement) || self.fallback {
            return self.max_element_rule(arrival, oracle);
        }
        let floor = self.light_threshold().expect("aided branch has an estimate");
        if arrival.weight <= floor {
            self.ignored += 1;
            return Ok(false);
        }
        self.inner.offer(arrival, oracle, streams)
    }

    fn trace(&self) -> RunTrace {
        let mut trace = if self.estimate.is_some() {
            self.inner.trace()
        } else {
            RunTrace::default()
        };
        trace.branch = self.branch;
        trace.ignored = self.ignored;
        if let Some(p) = self.estimate {
            trace.max_weight = Some(p.max_weight);
            trace.rho_tilde = Some(p.rho_tilde);
        }
        trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{ids, Matroid, MatroidInstance, WeightedGroundSet};
    use crate::secretary::{run_msp, run_msp_in_order, run_sbmsp, ArrivalOrder, FullAlgorithm};

    /// Declares a fixed probability and never selects.
    struct Observer {
        p: f64,
        seen: Vec<ElementId>,
    }

    impl SbmspAlgorithm for Observer {
        fn sampling_probability(&mut self, _: &mut TrialStreams) -> f64 {
            self.p
        }
        fn observe_sample(
            &mut self,
            sample: &[Arrival],
            _: &mut AuditOracle<'_>,
            _: &mut TrialStreams,
        ) -> Result<()> {
            self.seen = sample.iter().map(|a| a.id).collect();
            Ok(())
        }
        fn offer(&mut self, _: Arrival, _: &mut AuditOracle<'_>, _: &mut TrialStreams) -> Result<bool> {
            Ok(true)
        }
    }

    #[test]
    fn prefix_extremes() {
        let m = MatroidInstance::uniform(5, 5).unwrap();
        let w = WeightedGroundSet::new(vec![1.0; 5]).unwrap();
        for seed in 0..20 {
            let mut none = SbmspToMsp::new(Observer { p: 0.0, seen: vec![] });
            let out = run_msp(&m, &w, &mut none, &mut TrialStreams::new(seed)).unwrap();
            assert_eq!(none.prefix_len(), 0);
            assert_eq!(out.selected.len(), 5);

            let mut all = SbmspToMsp::new(Observer { p: 1.0, seen: vec![] });
            let out = run_msp(&m, &w, &mut all, &mut TrialStreams::new(seed)).unwrap();
            assert_eq!(all.prefix_len(), 5);
            assert_eq!(all.inner().seen.len(), 5);
            assert!(out.selected.is_empty());
        }
    }

    #[test]
    fn prefix_is_the_first_arrivals() {
        let m = MatroidInstance::uniform(6, 6).unwrap();
        let w = WeightedGroundSet::new(vec![1.0; 6]).unwrap();
        let order = ids(&[4, 2, 5, 0, 1, 3]);
        let mut alg = SbmspToMsp::new(Observer { p: 0.5, seen: vec![] });
        let out = run_msp_in_order(&m, &w, &mut alg, &order, &mut TrialStreams::new(8)).unwrap();
        let x = alg.prefix_len();
        assert_eq!(alg.inner().seen, order[..x].to_vec());
        assert_eq!(out.sample, order[..x].to_vec());
        assert_eq!(out.selected, order[x..].to_vec());
    }

    #[test]
    fn estimated_rank_bound_is_four_times_sample_rank() {
        // free matroid on 6 elements; any 3 sampled estimation elements give ρ̃ = 12
        let m = MatroidInstance::uniform(6, 6).unwrap();
        let w = WeightedGroundSet::new(vec![6.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let mut seen_twelve = false;
        for seed in 0..400 {
            let mut alg = AidedToUnaided::new(FullAlgorithm::unconfigured());
            let out = run_sbmsp(&m, &w, &mut alg, &ArrivalOrder::Random, &mut TrialStreams::new(seed))
                .unwrap();
            assert!(m.is_independent(&out.selected).unwrap());
            if let Some(p) = alg.estimate() {
                assert_eq!(p.rho_tilde % 4, 0);
                assert!(out.sample.len() as u64 >= p.rho_tilde / 4);
                if p.rho_tilde == 12 {
                    seen_twelve = true;
                }
            }
        }
        assert!(seen_twelve);
    }

    #[test]
    fn max_element_branch_skips_loops() {
        let m = MatroidInstance::graphic(2, vec![(0, 0), (0, 1)]).unwrap();
        let w = WeightedGroundSet::new(vec![5.0, 1.0]).unwrap();
        let mut alg = AidedToUnaided::new(FullAlgorithm::unconfigured());
        alg.branch = Some(Branch::MaxElement);
        let mut oracle = AuditOracle::new(&m, &m.ground_set()).unwrap();
        let mut streams = TrialStreams::new(0);
        alg.observe_sample(&[], &mut oracle, &mut streams).unwrap();
        let a = |id: usize| Arrival {
            id: ElementId(id),
            weight: w.weight(ElementId(id)),
        };
        assert!(!alg.offer(a(0), &mut oracle, &mut streams).unwrap());
        assert!(alg.offer(a(1), &mut oracle, &mut streams).unwrap());
    }
}
