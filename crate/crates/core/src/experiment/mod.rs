//! Batch experiments: instance generation, trial execution, bound
//! verification, and CSV reporting.

mod config;
mod generate;
mod run;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use config::{AlgorithmChoice, ExperimentConfig, OrderChoice, Settings};
pub use generate::{FamilySpec, WeightScheme, GEOMETRIC_TAIL_CAP};
pub use run::{records_to_csv, run_trials, Prepared, Summary, TrialRecord, TRIAL_CSV_HEADER};

use crate::analysis::{
    check_axioms, check_bounds, estimate_p_table, estimate_selection, exact_p_table,
    exact_selection, standard_orders, AxiomReport, BoundReport, BucketingMode,
    SpanProbabilityTable, EXACT_P_BUDGET, EXACT_SELECTION_BUDGET,
};
use crate::error::{Error, Result};
use crate::matroid::{greedy_max_weight, io, ElementId, Matroid, WeightedGroundSet};
use crate::rng::mix64;
use crate::secretary::ArrivalOrder;

/// Process exit status for an error, one per failure kind.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidParams(_) | Error::InvalidBucketing(_) => 2,
        Error::BudgetExceeded { .. } => 2,
        Error::InvalidInstance(_) => 3,
        Error::Io(_) => 4,
        Error::Parse { .. } | Error::NoElements => 5,
        Error::VerificationFailed(_) => 6,
        Error::InfeasibleSelection { .. } => 7,
        _ => 1,
    }
}

/// Result of [`run`]: the CSV text and the summary (`None` for zero trials).
pub struct RunOutput {
    pub csv: String,
    pub summary: Option<Summary>,
}

impl RunOutput {
    pub fn summary_text(&self) -> String {
        self.summary
            .as_ref()
            .map_or_else(|| "no trials\n".to_string(), Summary::to_key_values)
    }
}

/// Runs the configured trials and writes the CSV to `config.output` when set.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let prep = Prepared::new(config)?;
    let records = run_trials(&prep)?;
    let csv = records_to_csv(&records);
    if let Some(path) = &config.output {
        std::fs::write(path, &csv)?;
    }
    Ok(RunOutput {
        summary: Summary::new(&prep, &records),
        csv,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    /// Full enumeration; `n` must be within the exact budget.
    Exact,
    /// Estimates from `config.trials` runs, compared within 4σ.
    MonteCarlo,
    /// Exhaustive matroid axiom check.
    Axioms,
}

pub enum VerifyOutput {
    Bounds(BoundReport),
    Axioms(AxiomReport),
}

impl VerifyOutput {
    pub fn passed(&self) -> bool {
        match self {
            VerifyOutput::Bounds(r) => r.passed(),
            VerifyOutput::Axioms(r) => r.passed(),
        }
    }

    /// Bound rows as CSV, or the axiom report as `key=value` lines.
    pub fn to_text(&self) -> String {
        match self {
            VerifyOutput::Bounds(r) => r.to_csv(),
            VerifyOutput::Axioms(r) => {
                let mut out = format!(
                    "axioms_n={}\nsubsets={}\npass={}\n",
                    r.n,
                    r.subsets,
                    r.passed()
                );
                for f in &r.failures {
                    out.push_str(&format!("failure={f}\n"));
                }
                out
            }
        }
    }

    pub fn summary_text(&self) -> String {
        match self {
            VerifyOutput::Bounds(r) => format!(
                "rows={}\nfailures={}\nmin_slack={}\nviolations={}\ninfeasible={}\npass={}\n",
                r.rows.len(),
                r.failures().count(),
                r.min_slack().unwrap_or(0.0),
                r.violations,
                r.infeasible,
                r.passed()
            ),
            VerifyOutput::Axioms(r) => format!("pass={}\n", r.passed()),
        }
    }
}

/// Checks the selection lower bounds (or the matroid axioms) on the
/// configured instance. Random order in exact mode expands to the standard
/// set of fixed orders plus five seeded permutations.
pub fn verify(config: &ExperimentConfig, mode: VerifyMode) -> Result<VerifyOutput> {
    let prep = Prepared::new(&ExperimentConfig {
        algorithm: match config.algorithm {
            AlgorithmChoice::BucketingFixed(_) => config.algorithm,
            _ => AlgorithmChoice::Full,
        },
        ..config.clone()
    })?;
    let (m, w) = (&prep.matroid, &prep.weights);
    if mode == VerifyMode::Axioms {
        return Ok(VerifyOutput::Axioms(check_axioms(m)?));
    }
    let classing = prep.promise().expect("sample-based preparation").classing();
    let bucket_mode = match config.algorithm {
        AlgorithmChoice::BucketingFixed(p) => {
            BucketingMode::Fixed(crate::buckets::Bucketing::from_params(classing.h(), p)?)
        }
        _ => BucketingMode::AllParams,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(config.seed));
    let mut report = BoundReport::default();
    match mode {
        VerifyMode::Exact => {
            if w.len() > EXACT_SELECTION_BUDGET {
                return Err(Error::BudgetExceeded {
                    what: "ground set for exact verification (use --monte-carlo)",
                    actual: w.len(),
                    limit: EXACT_SELECTION_BUDGET,
                });
            }
            let table = exact_p_table(m, w, &classing)?;
            let orders = match config.order {
                OrderChoice::Random => standard_orders(w.len(), 5, &mut rng),
                OrderChoice::Increasing => vec![("increasing".into(), ArrivalOrder::Increasing)],
                OrderChoice::Decreasing => vec![("decreasing".into(), ArrivalOrder::Decreasing)],
                OrderChoice::WorstOf(_) => {
                    return Err(Error::Config("verify takes a single or random order".into()))
                }
            };
            for (label, order) in orders {
                let selection = exact_selection(m, w, &classing, &bucket_mode, &order)?;
                report.extend(check_bounds(m, w, &selection, &table)?.with_order(&label));
            }
            monotone_or_fail(&table)?;
        }
        VerifyMode::MonteCarlo => {
            if config.trials == 0 {
                return Err(Error::Config("monte-carlo verification needs trials >= 1".into()));
            }
            let table = if w.len() <= EXACT_P_BUDGET {
                exact_p_table(m, w, &classing)?
            } else {
                estimate_p_table(m, w, &classing, config.trials, &mut rng)?
            };
            let order = match config.order {
                OrderChoice::Increasing => ArrivalOrder::Increasing,
                OrderChoice::Decreasing => ArrivalOrder::Decreasing,
                _ => ArrivalOrder::Random,
            };
            let selection =
                estimate_selection(m, w, &classing, &bucket_mode, &order, config.trials, config.seed)?;
            report = check_bounds(m, w, &selection, &table)?.with_order(order.name());
        }
        VerifyMode::Axioms => unreachable!("handled above"),
    }
    Ok(VerifyOutput::Bounds(report))
}

fn monotone_or_fail(table: &SpanProbabilityTable) -> Result<()> {
    match table.monotonicity_violation() {
        Some((e, i)) => Err(Error::VerificationFailed(format!(
            "span probability of element {e} increases after class {i}"
        ))),
        None => Ok(()),
    }
}

/// Offline optimum of an instance file with a weights file.
pub fn opt(instance: &Path, weights: &Path) -> Result<(Vec<ElementId>, f64)> {
    let m = io::read_instance(instance)?;
    let w: WeightedGroundSet = io::read_weights(weights)?;
    if w.len() != m.ground_size() {
        return Err(Error::InvalidInstance(format!(
            "weights file has {} entries, instance has {} elements",
            w.len(),
            m.ground_size()
        )));
    }
    let mut basis = greedy_max_weight(&m, &w, &m.ground_set())?;
    let total = w.total(&basis);
    basis.sort();
    Ok((basis, total))
}
