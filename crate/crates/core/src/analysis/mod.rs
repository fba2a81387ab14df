//! Test oracles: exact and Monte Carlo span probabilities and selection
//! probabilities, the lower bounds they must satisfy, and exhaustive
//! structural checks.

mod bounds;
mod checks;
mod estimate;
mod exact;
mod ptable;

pub use bounds::{
    check_bounds, BoundCheck, BoundReport, BoundRow, Quantity, SelectionView, BOUND_CSV_HEADER,
    MONTE_CARLO_SIGMAS,
};
pub use checks::{
    audit_decisions, check_axioms, composition_trial, standard_orders, AxiomReport,
    CompositionDraw, DecisionAudit, AXIOM_BUDGET,
};
pub use estimate::{estimate_selection, EstimatedSelection};
pub use exact::{exact_selection, BucketingMode, ExactSelection, SelectionCell, EXACT_SELECTION_BUDGET};
pub use ptable::{
    estimate_p_table, exact_p_table, Exact, PMode, SpanProbabilityTable, EXACT_P_BUDGET,
};

use crate::buckets::RandomBucketingParams;

/// Competitive ratio of the aided algorithm with `h` weight classes:
/// `16 (⌈log₂(h+1)⌉ + 1)`.
pub fn competitive_bound(h: usize) -> f64 {
    assert!(h >= 1, "h must be positive");
    16.0 * (RandomBucketingParams::max_tau(h) as f64 + 1.0)
}

/// Competitive ratio of the unaided random-order algorithm on a matroid of
/// rank `rho`: `2560 (log₂ log₂ (4ρ) + 5)`.
pub fn end_to_end_bound(rho: usize) -> f64 {
    assert!(rho >= 1, "rank must be positive");
    2560.0 * ((4.0 * rho as f64).log2().log2() + 5.0)
}
