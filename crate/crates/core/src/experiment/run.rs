use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{AlgorithmChoice, ExperimentConfig, OrderChoice};
use crate::analysis::{competitive_bound, end_to_end_bound};
use crate::buckets::Bucketing;
use crate::error::{Error, Result};
use crate::matroid::{greedy_max_weight, ElementId, Matroid, MatroidInstance, WeightedGroundSet};
use crate::rng::{mix64, trial_seed, TrialStreams};
use crate::secretary::{
    run_msp, run_sbmsp, AidedPromise, AidedToUnaided, ArrivalOrder, BucketingAlgorithm,
    ClassicalSecretary, FullAlgorithm, Outcome, SbmspToMsp,
};

const INSTANCE_STREAM: u64 = 0x1a57_a9ce;
const WEIGHT_STREAM: u64 = 0x3e16_475f;

/// A configuration with its instance, weights, and offline optimum fixed.
pub struct Prepared {
    pub config: ExperimentConfig,
    pub matroid: MatroidInstance,
    pub weights: WeightedGroundSet,
    pub opt: Vec<ElementId>,
    pub w_opt: f64,
    pub rank: usize,
    promise: Option<AidedPromise>,
    bucketing: Option<Bucketing>,
}

impl Prepared {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix64(config.seed ^ INSTANCE_STREAM));
        let matroid = config.family.generate(&mut rng)?;
        let mut rng = ChaCha8Rng::seed_from_u64(mix64(config.seed ^ WEIGHT_STREAM));
        let weights = config.weights.generate(matroid.ground_size(), &mut rng)?;
        Self::with_instance(config, matroid, weights)
    }

    pub fn with_instance(
        config: &ExperimentConfig,
        matroid: MatroidInstance,
        weights: WeightedGroundSet,
    ) -> Result<Self> {
        if weights.len() != matroid.ground_size() {
            return Err(Error::InvalidInstance(format!(
                "{} weights for a ground set of size {}",
                weights.len(),
                matroid.ground_size()
            )));
        }
        let opt = greedy_max_weight(&matroid, &weights, &matroid.ground_set())?;
        let w_opt = weights.total(&opt);
        let rank = opt.len();
        let (promise, bucketing) = match config.algorithm {
            AlgorithmChoice::Full => (Some(AidedPromise::derive(&matroid, &weights)?), None),
            AlgorithmChoice::BucketingFixed(params) => {
                let promise = AidedPromise::derive(&matroid, &weights)?;
                let h = promise.classing().h();
                (Some(promise), Some(Bucketing::from_params(h, params)?))
            }
            _ => (None, None),
        };
        Ok(Self {
            config: config.clone(),
            matroid,
            weights,
            opt,
            w_opt,
            rank,
            promise,
            bucketing,
        })
    }

    /// Aided promise used by the sample-based algorithms.
    pub fn promise(&self) -> Option<AidedPromise> {
        self.promise
    }

    fn run_once(&self, order: &ArrivalOrder, streams: &mut TrialStreams) -> Result<Outcome> {
        let (m, w) = (&self.matroid, &self.weights);
        let p_s = self.config.sampling_probability;
        match self.config.algorithm {
            AlgorithmChoice::Full => {
                let mut alg = FullAlgorithm::new(self.promise.expect("derived at preparation"));
                if let Some(p) = p_s {
                    alg = alg.with_sampling_probability(p);
                }
                run_sbmsp(m, w, &mut alg, order, streams)
            }
            AlgorithmChoice::BucketingFixed(_) => {
                let classing = self.promise.expect("derived at preparation").classing();
                let bucketing = self.bucketing.clone().expect("built at preparation");
                let mut alg = BucketingAlgorithm::new(classing, bucketing);
                if let Some(p) = p_s {
                    alg = alg.with_sampling_probability(p);
                }
                run_sbmsp(m, w, &mut alg, order, streams)
            }
            AlgorithmChoice::AidedWrapped => {
                let mut alg = SbmspToMsp::new(AidedToUnaided::new(FullAlgorithm::unconfigured()));
                run_msp(m, w, &mut alg, streams)
            }
            AlgorithmChoice::ClassicalBaseline => {
                run_msp(m, w, &mut ClassicalSecretary::new(), streams)
            }
        }
    }

    /// Runs trial `trial`. Under a worst-of-k order, the same seed is
    /// replayed with resampled phase-2 orders and both monotone orders,
    /// and the lightest selection is kept.
    pub fn run_trial(&self, trial: u64) -> Result<TrialRecord> {
        let seed = trial_seed(self.config.seed, trial);
        let variants: Vec<(ArrivalOrder, u64)> = match self.config.order {
            OrderChoice::Random => vec![(ArrivalOrder::Random, 0)],
            OrderChoice::Increasing => vec![(ArrivalOrder::Increasing, 0)],
            OrderChoice::Decreasing => vec![(ArrivalOrder::Decreasing, 0)],
            OrderChoice::WorstOf(k) => (0..k as u64)
                .map(|v| (ArrivalOrder::Random, v))
                .chain([(ArrivalOrder::Increasing, 0), (ArrivalOrder::Decreasing, 0)])
                .collect(),
        };
        let mut worst: Option<(f64, Outcome)> = None;
        for (order, variant) in variants {
            let mut streams = TrialStreams::with_order_variant(seed, variant);
            let outcome = self.run_once(&order, &mut streams)?;
            if !self.matroid.is_independent(&outcome.selected)? {
                return Err(Error::InfeasibleSelection { trial });
            }
            let value = self.weights.total(&outcome.selected);
            if worst.as_ref().is_none_or(|(best, _)| value < *best) {
                worst = Some((value, outcome));
            }
        }
        let (w_selected, outcome) = worst.expect("at least one order");
        let trace = &outcome.trace;
        let mut selected = outcome.selected.clone();
        selected.sort();
        let mut opt = self.opt.clone();
        opt.sort();
        Ok(TrialRecord {
            trial,
            seed,
            family: self.matroid.family_name(),
            n: self.weights.len(),
            rank: self.rank,
            h: trace.h,
            tau: trace.tau,
            delta: trace.delta,
            parity: trace.parity.map(|p| p.name()),
            sample_size: outcome.sample.len(),
            selected_size: outcome.selected.len(),
            w_opt: self.w_opt,
            w_selected,
            promise_violations: trace.promise_violations,
            bucketing: trace.bucketing.clone(),
            order: self.config.order.label(),
            hit_opt: selected == opt,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub family: &'static str,
    pub n: usize,
    pub rank: usize,
    pub h: Option<usize>,
    pub tau: Option<u32>,
    pub delta: Option<u64>,
    pub parity: Option<&'static str>,
    pub sample_size: usize,
    pub selected_size: usize,
    pub w_opt: f64,
    pub w_selected: f64,
    pub promise_violations: usize,
    pub bucketing: Option<String>,
    pub order: String,
    /// `T` equals the offline optimum.
    pub hit_opt: bool,
}

impl TrialRecord {
    /// `w(OPT) / w(T)`: infinite when nothing was selected, 1 when both
    /// are zero.
    pub fn ratio(&self) -> f64 {
        if self.w_selected > 0.0 {
            self.w_opt / self.w_selected
        } else if self.w_opt > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    }
}

pub const TRIAL_CSV_HEADER: &str = "trial,seed,family,n,rank,h,tau,delta,parity,sample_size,\
selected_size,w_opt,w_selected,ratio,promise_violations,bucketing,order";

fn cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Quotes a field when it contains a separator, quote, or line break.
fn quoted(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRIAL_CSV_HEADER);
    out.push_str("\r\n");
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\r\n",
            r.trial,
            r.seed,
            r.family,
            r.n,
            r.rank,
            cell(r.h),
            cell(r.tau),
            cell(r.delta),
            cell(r.parity),
            r.sample_size,
            r.selected_size,
            r.w_opt,
            r.w_selected,
            r.ratio(),
            r.promise_violations,
            quoted(r.bucketing.as_deref().unwrap_or("")),
            quoted(&r.order),
        );
    }
    out
}

/// Aggregate statistics over a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub trials: usize,
    pub algorithm: &'static str,
    pub order: String,
    pub rank: usize,
    pub w_opt: f64,
    /// Mean of the finite per-trial ratios.
    pub mean_ratio: f64,
    pub median_ratio: f64,
    /// Trials that selected nothing (ratio recorded as infinite).
    pub zero_selections: usize,
    pub mean_selected_weight: f64,
    pub selected_weight_std_err: f64,
    /// `E[w(T)] / w(OPT)`.
    pub expected_fraction: f64,
    /// `w(OPT) / E[w(T)]`.
    pub observed_ratio: f64,
    pub opt_hit_rate: f64,
    /// Applicable guarantee on `w(OPT) / E[w(T)]` and its name.
    pub bound: Option<(&'static str, f64)>,
}

impl Summary {
    pub fn new(prep: &Prepared, records: &[TrialRecord]) -> Option<Self> {
        if records.is_empty() {
            return None;
        }
        let t = records.len() as f64;
        let mut finite: Vec<f64> = records.iter().map(TrialRecord::ratio).filter(|r| r.is_finite()).collect();
        finite.sort_by(f64::total_cmp);
        let median_ratio = match finite.len() {
            0 => f64::INFINITY,
            k if k % 2 == 1 => finite[k / 2],
            k => (finite[k / 2 - 1] + finite[k / 2]) / 2.0,
        };
        let mean_ratio = if finite.is_empty() {
            f64::INFINITY
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        };
        let mean = records.iter().map(|r| r.w_selected).sum::<f64>() / t;
        let var = records.iter().map(|r| (r.w_selected - mean).powi(2)).sum::<f64>() / (t - 1.0).max(1.0);
        let bound = match prep.config.algorithm {
            AlgorithmChoice::Full | AlgorithmChoice::BucketingFixed(_) => prep
                .promise
                .map(|p| ("aided", competitive_bound(p.classing().h()))),
            AlgorithmChoice::AidedWrapped if prep.rank > 0 => Some(("end-to-end", end_to_end_bound(prep.rank))),
            _ => None,
        };
        let (expected_fraction, observed_ratio) = if prep.w_opt > 0.0 {
            (mean / prep.w_opt, if mean > 0.0 { prep.w_opt / mean } else { f64::INFINITY })
        } else {
            (1.0, 1.0)
        };
        Some(Self {
            trials: records.len(),
            algorithm: prep.config.algorithm.name(),
            order: prep.config.order.label(),
            rank: prep.rank,
            w_opt: prep.w_opt,
            mean_ratio,
            median_ratio,
            zero_selections: records.len() - finite.len(),
            mean_selected_weight: mean,
            selected_weight_std_err: (var / t).sqrt(),
            expected_fraction,
            observed_ratio,
            opt_hit_rate: records.iter().filter(|r| r.hit_opt).count() as f64 / t,
            bound,
        })
    }

    /// One-sided check of `w(OPT) / E[w(T)] ≤ bound`, allowing `sigmas`
    /// standard errors of slack on `E[w(T)]`.
    pub fn within_bound(&self, sigmas: f64) -> Option<bool> {
        self.bound.map(|(_, b)| {
            let optimistic = self.mean_selected_weight + sigmas * self.selected_weight_std_err;
            self.w_opt <= 0.0 || (optimistic > 0.0 && self.w_opt / optimistic <= b)
        })
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("trials", self.trials.to_string());
        kv("algorithm", self.algorithm.to_string());
        kv("order", self.order.clone());
        kv("rank", self.rank.to_string());
        kv("w_opt", self.w_opt.to_string());
        kv("mean_ratio", self.mean_ratio.to_string());
        kv("median_ratio", self.median_ratio.to_string());
        kv("zero_selections", self.zero_selections.to_string());
        kv("mean_selected_weight", self.mean_selected_weight.to_string());
        kv("expected_fraction", self.expected_fraction.to_string());
        kv("observed_ratio", self.observed_ratio.to_string());
        kv("opt_hit_rate", self.opt_hit_rate.to_string());
        if let Some((name, b)) = self.bound {
            kv("bound_kind", name.to_string());
            kv("bound", b.to_string());
            kv("within_bound", self.within_bound(3.0).unwrap_or(true).to_string());
        }
        out
    }
}

/// Runs every trial on a pool of `config.workers` threads (all cores when
/// unset). Records come back in trial order, so the output does not depend
/// on the worker count.
pub fn run_trials(prep: &Prepared) -> Result<Vec<TrialRecord>> {
    let trials = prep.config.trials as u64;
    let work = || (0..trials).into_par_iter().map(|t| prep.run_trial(t)).collect();
    match prep.config.workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {k} workers: {e}")))?
            .install(work),
        None => work(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::Settings;

    fn prepared(text: &str) -> Prepared {
        Prepared::new(&Settings::parse(text).unwrap().to_config().unwrap()).unwrap()
    }

    #[test]
    fn records_are_feasible_and_ordered() {
        let prep = prepared("family = graphic\nn = 40\nvertices = 15\nseed = 5\ntrials = 50\n");
        let records = run_trials(&prep).unwrap();
        assert_eq!(records.len(), 50);
        assert!(records.iter().enumerate().all(|(i, r)| r.trial == i as u64));
        assert!(records.iter().all(|r| r.w_selected <= r.w_opt + 1e-9));
    }

    #[test]
    fn worst_of_k_never_beats_the_random_order() {
        let base = "family = uniform\nn = 30\nk = 5\nseed = 2\ntrials = 40\nweights = exponential-spread\n";
        let random = run_trials(&prepared(base)).unwrap();
        let worst = run_trials(&prepared(&format!("{base}order = worst-of-3\n"))).unwrap();
        for (r, w) in random.iter().zip(&worst) {
            assert_eq!(r.sample_size, w.sample_size);
            assert!(w.w_selected <= r.w_selected);
            assert_eq!(w.order, "worst-of-3-pessimistic");
        }
    }

    #[test]
    fn ratio_conventions() {
        let prep = prepared("family = uniform\nn = 3\nk = 1\nseed = 1\ntrials = 1\n");
        let mut r = prep.run_trial(0).unwrap();
        r.w_selected = 0.0;
        assert_eq!(r.ratio(), f64::INFINITY);
        r.w_opt = 0.0;
        assert_eq!(r.ratio(), 1.0);
    }

    #[test]
    fn csv_has_header_and_one_line_per_trial() {
        let prep = prepared("family = laminar\nn = 25\nk = 4\nseed = 8\ntrials = 7\nalgorithm = bucketing-fixed\ntau = 1\ndelta = 1\n");
        let csv = records_to_csv(&run_trials(&prep).unwrap());
        let lines: Vec<&str> = csv.split("\r\n").filter(|l| !l.is_empty()).collect();
        assert_eq!(lines.len(), 8);
        assert_eq!(lines[0], TRIAL_CSV_HEADER);
        // bucketing strings contain commas and are quoted
        assert!(lines[1].contains('"'));
    }
}
