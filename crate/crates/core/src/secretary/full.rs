use super::bucketing::draw_parity;
use super::{AidedAlgorithm, Arrival, BucketingRun, Parity, RunTrace, SbmspAlgorithm};
use crate::buckets::{sample_params, Bucketing, RandomBucketingParams, WeightClassing};
use crate::error::{Error, Result};
use crate::matroid::{AuditOracle, Matroid, WeightedGroundSet};
use crate::rng::{Stream, TrialStreams};

/// Side information for aided algorithms: `ρ̃ >= ρ` and every weight in
/// `(W / (8ρ̃), W]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AidedPromise {
    pub rho_tilde: u64,
    pub max_weight: f64,
}

impl AidedPromise {
    pub fn new(rho_tilde: u64, max_weight: f64) -> Result<Self> {
        WeightClassing::new(max_weight, rho_tilde)?;
        Ok(Self {
            rho_tilde,
            max_weight,
        })
    }

    /// Tightest valid promise for a known instance: `W` is the largest
    /// weight, and `ρ̃` is the rank raised just enough for the lightest
    /// element to clear `W / (8ρ̃)`.
    pub fn derive<M: Matroid + ?Sized>(m: &M, w: &WeightedGroundSet) -> Result<Self> {
        let rank = m.rank(&m.ground_set())? as u64;
        let max_weight = w.max_weight();
        let min_weight = w.min_weight();
        let mut rho_tilde = rank.max((max_weight / (8.0 * min_weight)).floor() as u64 + 1);
        while min_weight <= max_weight / (8.0 * rho_tilde as f64) {
            rho_tilde += 1;
        }
        let promise = Self::new(rho_tilde, max_weight)?;
        promise.check(m, w)?;
        Ok(promise)
    }

    pub fn classing(&self) -> WeightClassing {
        WeightClassing::new(self.max_weight, self.rho_tilde)
            .expect("validated at construction")
    }

    /// Verifies both promises against the instance.
    pub fn check<M: Matroid + ?Sized>(&self, m: &M, w: &WeightedGroundSet) -> Result<()> {
        let rank = m.rank(&m.ground_set())? as u64;
        if self.rho_tilde < rank {
            return Err(Error::InvalidParams(format!(
                "rank bound {} is below the rank {rank}",
                self.rho_tilde
            )));
        }
        let classing = self.classing();
        match w.weights().iter().find(|&&x| !classing.within_promise(x)) {
            Some(&weight) => Err(Error::OutOfPromise {
                weight,
                low: classing.promise_floor(),
                high: self.max_weight,
            }),
            None => Ok(()),
        }
    }
}

/// How the full algorithm picks its bucketing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamsChoice {
    /// `τ` and `Δ` uniformly at random.
    Random,
    /// `τ` fixed, `Δ` uniform on `0..2^τ`.
    Tau(u32),
    Fixed(RandomBucketingParams),
}

/// The aided algorithm: draw a random bucketing of the weight classes and
/// run the bucketing-based algorithm with it.
///
/// Elements whose weight breaks the promise are rejected and counted.
pub struct FullAlgorithm {
    promise: Option<AidedPromise>,
    choice: ParamsChoice,
    parity: Option<Parity>,
    sampling_probability: f64,
    params: Option<RandomBucketingParams>,
    run: Option<BucketingRun>,
    violations: usize,
}

impl FullAlgorithm {
    pub fn new(promise: AidedPromise) -> Self {
        Self {
            promise: Some(promise),
            ..Self::unconfigured()
        }
    }

    /// Waits for a promise through [`AidedAlgorithm::set_promise`].
    pub fn unconfigured() -> Self {
        Self {
            promise: None,
            choice: ParamsChoice::Random,
            parity: None,
            sampling_probability: 0.5,
            params: None,
            run: None,
            violations: 0,
        }
    }

    pub fn with_params(mut self, choice: ParamsChoice) -> Self {
        self.choice = choice;
        self
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = Some(parity);
        self
    }

    /// Overrides the declared sampling probability (1/2 by default).
    pub fn with_sampling_probability(mut self, p: f64) -> Self {
        self.sampling_probability = p;
        self
    }

    pub fn params(&self) -> Option<RandomBucketingParams> {
        self.params
    }

    pub fn run(&self) -> Option<&BucketingRun> {
        self.run.as_ref()
    }
}

impl SbmspAlgorithm for FullAlgorithm {
    fn sampling_probability(&mut self, _streams: &mut TrialStreams) -> f64 {
        self.sampling_probability
    }

    fn observe_sample(
        &mut self,
        sample: &[Arrival],
        _oracle: &mut AuditOracle<'_>,
        streams: &mut TrialStreams,
    ) -> Result<()> {
        let promise = self
            .promise
            .ok_or_else(|| Error::InvalidParams("aided algorithm started without a promise".into()))?;
        let classing = promise.classing();
        let h = classing.h();
        let params = match self.choice {
            ParamsChoice::Random => sample_params(h, streams.get(Stream::Bucketing)),
            ParamsChoice::Tau(tau) => {
                use rand::Rng;
                let delta = streams.get(Stream::Bucketing).random_range(0..1u64 << tau);
                RandomBucketingParams { tau, delta }
            }
            ParamsChoice::Fixed(p) => p,
        };
        let bucketing = Bucketing::from_params(h, params)?;
        let kept: Vec<Arrival> = sample
            .iter()
            .copied()
            .filter(|a| classing.within_promise(a.weight))
            .collect();
        self.violations += sample.len() - kept.len();
        let parity = self.parity.unwrap_or_else(|| draw_parity(streams));
        self.params = Some(params);
        self.run = Some(BucketingRun::new(classing, bucketing, parity, &kept));
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
        if !run.classing().within_promise(arrival.weight) {
            self.violations += 1;
            return Ok(false);
        }
        run.offer(arrival, oracle)
    }

    fn trace(&self) -> RunTrace {
        let mut trace = self.run.as_ref().map(BucketingRun::trace).unwrap_or_default();
        trace.tau = self.params.map(|p| p.tau);
        trace.delta = self.params.map(|p| p.delta);
        trace.promise_violations += self.violations;
        if let Some(p) = self.promise {
            trace.max_weight = Some(p.max_weight);
            trace.rho_tilde = Some(p.rho_tilde);
        }
        trace
    }
}

impl AidedAlgorithm for FullAlgorithm {
    fn set_promise(&mut self, promise: AidedPromise) {
        self.promise = Some(promise);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{ElementId, MatroidInstance};
    use crate::secretary::{run_sbmsp, ArrivalOrder};

    #[test]
    fn derived_promise_holds() {
        let m = MatroidInstance::uniform(4, 2).unwrap();
        let w = WeightedGroundSet::new(vec![100.0, 1.0, 50.0, 3.0]).unwrap();
        let p = AidedPromise::derive(&m, &w).unwrap();
        assert_eq!(p.max_weight, 100.0);
        // 100 / (8 * 12) < 1 < 100 / (8 * 13) fails; need rho > 12.5
        assert_eq!(p.rho_tilde, 13);
        assert!(p.check(&m, &w).is_ok());
        assert!(AidedPromise::new(1, 100.0).unwrap().check(&m, &w).is_err());
    }

    #[test]
    fn out_of_promise_arrivals_are_rejected_and_counted() {
        let m = MatroidInstance::uniform(3, 3).unwrap();
        let w = WeightedGroundSet::new(vec![1.0, 0.01, 5.0]).unwrap();
        let promise = AidedPromise::new(1, 1.0).unwrap();
        let mut alg = FullAlgorithm::new(promise).with_params(ParamsChoice::Fixed(
            RandomBucketingParams { tau: 2, delta: 0 },
        ));
        let mut streams = TrialStreams::new(0);
        let out = crate::secretary::run_sbmsp_with_sample(
            &m,
            &w,
            &mut alg,
            vec![],
            &ArrivalOrder::Increasing,
            &mut streams,
        )
        .unwrap();
        assert_eq!(out.trace.promise_violations, 2);
        assert!(!out.selected.contains(&ElementId(1)));
        assert!(!out.selected.contains(&ElementId(2)));
    }

    #[test]
    fn trace_reports_bucketing() {
        let m = MatroidInstance::uniform(2, 1).unwrap();
        let w = WeightedGroundSet::new(vec![1.0, 0.9]).unwrap();
        let mut alg = FullAlgorithm::new(AidedPromise::new(2, 1.0).unwrap())
            .with_params(ParamsChoice::Tau(0));
        let out = run_sbmsp(&m, &w, &mut alg, &ArrivalOrder::Random, &mut TrialStreams::new(4))
            .unwrap();
        assert_eq!(out.trace.tau, Some(0));
        assert_eq!(out.trace.delta, Some(0));
        assert_eq!(out.trace.bucketing.as_deref(), Some("1:1,2:2,3:3,4:4"));
        assert!(m.is_independent(&out.selected).unwrap());
    }
}
