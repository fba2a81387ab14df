use std::fmt::Write as _;
use std::ops::{Add, Sub};

use super::estimate::EstimatedSelection;
use super::exact::ExactSelection;
use super::ptable::{to_f64, Exact, PMode, SpanProbabilityTable};
use crate::buckets::{Bucketing, RandomBucketingParams};
use crate::error::{Error, Result};
use crate::matroid::{greedy_max_weight, ElementId, Matroid, WeightedGroundSet};

/// Standard errors allowed below the bound in Monte Carlo checks.
pub const MONTE_CARLO_SIGMAS: f64 = 4.0;

/// A probability or expectation that is either exact or estimated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantity {
    exact: Option<Exact>,
    value: f64,
    variance: f64,
}

impl Quantity {
    pub fn exact(r: Exact) -> Self {
        Self {
            exact: Some(r),
            value: to_f64(&r),
            variance: 0.0,
        }
    }

    pub fn estimate(value: f64, std_err: f64) -> Self {
        Self {
            exact: None,
            value,
            variance: std_err * std_err,
        }
    }

    pub fn zero() -> Self {
        Self::exact(Exact::from_integer(0))
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact_value(&self) -> Option<Exact> {
        self.exact
    }

    pub fn std_err(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Multiplies by the rational `num / den`.
    pub fn scale(self, num: i128, den: i128) -> Self {
        let r = Exact::new(num, den);
        let f = to_f64(&r);
        Self {
            exact: self.exact.map(|x| x * r),
            value: self.value * f,
            variance: self.variance * f * f,
        }
    }
}

impl Add for Quantity {
    type Output = Quantity;

    fn add(self, rhs: Self) -> Self {
        Self {
            exact: self.exact.zip(rhs.exact).map(|(a, b)| a + b),
            value: self.value + rhs.value,
            variance: self.variance + rhs.variance,
        }
    }
}

impl Sub for Quantity {
    type Output = Quantity;

    fn sub(self, rhs: Self) -> Self {
        Self {
            exact: self.exact.zip(rhs.exact).map(|(a, b)| a - b),
            value: self.value - rhs.value,
            variance: self.variance + rhs.variance,
        }
    }
}

impl std::iter::Sum for Quantity {
    fn sum<I: Iterator<Item = Quantity>>(iter: I) -> Self {
        iter.fold(Quantity::zero(), Add::add)
    }
}

/// Selection probabilities per bucketing, exact or estimated.
pub trait SelectionView {
    fn h(&self) -> usize;
    fn class_of(&self, e: ElementId) -> usize;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn cell_count(&self) -> usize;
    fn cell_params(&self, cell: usize) -> Option<RandomBucketingParams>;
    fn cell_bucketing(&self, cell: usize) -> &Bucketing;
    /// `Pr[e ∈ T]` under one bucketing.
    fn in_cell(&self, cell: usize, e: ElementId) -> Quantity;
    fn mode_name(&self) -> &'static str;
    fn trials(&self) -> usize;
    fn violations(&self) -> usize;
    fn infeasible(&self) -> usize;

    /// `Pr[e ∈ T | τ]`: the cells with that `τ`, averaged uniformly.
    fn given_tau(&self, tau: u32, e: ElementId) -> Option<Quantity> {
        let cells: Vec<usize> = (0..self.cell_count())
            .filter(|&c| self.cell_params(c).is_some_and(|p| p.tau == tau))
            .collect();
        if cells.is_empty() {
            return None;
        }
        let sum: Quantity = cells.iter().map(|&c| self.in_cell(c, e)).sum();
        Some(sum.scale(1, cells.len() as i128))
    }

    /// `Pr[e ∈ T | τ ≥ 1]` with `τ` uniform on `1..=K`.
    fn given_tau_positive(&self, e: ElementId) -> Option<Quantity> {
        let k = RandomBucketingParams::max_tau(self.h());
        let parts: Option<Vec<Quantity>> = (1..=k).map(|t| self.given_tau(t, e)).collect();
        parts.map(|p| p.into_iter().sum::<Quantity>().scale(1, k as i128))
    }

    /// `Pr[e ∈ T]` with `τ` uniform on `0..=K` and `Δ` uniform given `τ`.
    fn overall(&self, e: ElementId) -> Option<Quantity> {
        let k = RandomBucketingParams::max_tau(self.h());
        let parts: Option<Vec<Quantity>> = (0..=k).map(|t| self.given_tau(t, e)).collect();
        parts.map(|p| p.into_iter().sum::<Quantity>().scale(1, k as i128 + 1))
    }
}

impl SelectionView for ExactSelection {
    fn h(&self) -> usize {
        ExactSelection::h(self)
    }
    fn class_of(&self, e: ElementId) -> usize {
        ExactSelection::class_of(self, e)
    }
    fn len(&self) -> usize {
        ExactSelection::len(self)
    }
    fn cell_count(&self) -> usize {
        self.cells().len()
    }
    fn cell_params(&self, cell: usize) -> Option<RandomBucketingParams> {
        self.cells()[cell].params
    }
    fn cell_bucketing(&self, cell: usize) -> &Bucketing {
        &self.cells()[cell].bucketing
    }
    fn in_cell(&self, cell: usize, e: ElementId) -> Quantity {
        Quantity::exact(ExactSelection::in_cell(self, cell, e))
    }
    fn mode_name(&self) -> &'static str {
        "exact"
    }
    fn trials(&self) -> usize {
        0
    }
    fn violations(&self) -> usize {
        ExactSelection::violations(self)
    }
    fn infeasible(&self) -> usize {
        ExactSelection::infeasible(self)
    }
}

impl SelectionView for EstimatedSelection {
    fn h(&self) -> usize {
        self.h
    }
    fn class_of(&self, e: ElementId) -> usize {
        self.classes[e.0]
    }
    fn len(&self) -> usize {
        self.classes.len()
    }
    fn cell_count(&self) -> usize {
        self.bucketings.len()
    }
    fn cell_params(&self, cell: usize) -> Option<RandomBucketingParams> {
        self.params[cell]
    }
    fn cell_bucketing(&self, cell: usize) -> &Bucketing {
        &self.bucketings[cell]
    }
    fn in_cell(&self, cell: usize, e: ElementId) -> Quantity {
        let runs = self.runs[cell].max(1) as f64;
        let p = self.frequency(cell, e);
        Quantity::estimate(p, (p * (1.0 - p) / runs).sqrt())
    }
    fn mode_name(&self) -> &'static str {
        "monte-carlo"
    }
    fn trials(&self) -> usize {
        self.trials
    }
    fn violations(&self) -> usize {
        self.violations
    }
    fn infeasible(&self) -> usize {
        self.infeasible
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundCheck {
    /// Per element of `B_i`: `Pr[e ∈ T] ≥ (p_{e,f(B_{i-1})} - p_{e,f(B_i)}) / 4`.
    ElementInBucket,
    /// Per bucket: `E|T ∩ B_i| ≥ ¼ Σ_{e ∈ B_i ∩ OPT} p_{e,f(B_{i-1})}`.
    BucketTotal,
    /// Per class, with one bucket per class: `E|T ∩ C_i| ≥ ¼ Σ_{C_i ∩ OPT} p_{e,i}`.
    ClassTotalSingletons,
    /// Per element of `C_i`: `Pr[e ∈ T | τ ≥ 1] ≥ (1 - p_{e,i}) / (8K)`.
    ElementShifted,
    /// Per element of `C_i`: `Pr[e ∈ T | τ ≥ 1] ≥ (p_{e,1} - p_{e,i}) / (8K)`.
    ///
    /// [`BoundCheck::ElementShifted`] can fail when the bucket before `e`'s
    /// is the clipped first bucket: then `e` must be spanned by
    /// `S ∩ C_{≥1}`, which happens with probability `p_{e,1}`, not 1. This
    /// weaker form survives that case.
    ElementShiftedFromFirstClass,
    /// Per class: `E|T ∩ C_i| ≥ |C_i ∩ OPT| / (8(K+1))`.
    ClassTotal,
}

impl BoundCheck {
    pub const ALL: [BoundCheck; 6] = [
        BoundCheck::ElementInBucket,
        BoundCheck::BucketTotal,
        BoundCheck::ClassTotalSingletons,
        BoundCheck::ElementShifted,
        BoundCheck::ElementShiftedFromFirstClass,
        BoundCheck::ClassTotal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundCheck::ElementInBucket => "element-in-bucket",
            BoundCheck::BucketTotal => "bucket-total",
            BoundCheck::ClassTotalSingletons => "class-total-tau0",
            BoundCheck::ElementShifted => "element-tau-positive",
            BoundCheck::ElementShiftedFromFirstClass => "element-tau-positive-from-class1",
            BoundCheck::ClassTotal => "class-total",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub check: BoundCheck,
    /// Phase-2 order label; empty unless set by the caller.
    pub order: String,
    pub element: Option<ElementId>,
    pub class: Option<usize>,
    pub bucket: Option<usize>,
    /// `tau:delta` of the bucketing the row refers to, or `fixed`/`all`.
    pub bucketing: String,
    pub observed: f64,
    pub bound: f64,
    pub slack: f64,
    pub mode: &'static str,
    pub trials: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub violations: usize,
    pub infeasible: usize,
}

pub const BOUND_CSV_HEADER: &str =
    "check,order,element_id,class,bucket,bucketing,observed,bound,slack,mode,trials,pass";

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.infeasible == 0 && self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn count(&self, check: BoundCheck) -> usize {
        self.rows.iter().filter(|r| r.check == check).count()
    }

    pub fn min_slack(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.slack).reduce(f64::min)
    }

    /// Labels every row with the phase-2 order it was computed under.
    pub fn with_order(mut self, order: &str) -> Self {
        for r in &mut self.rows {
            r.order = order.to_string();
        }
        self
    }

    pub fn extend(&mut self, other: BoundReport) {
        self.rows.extend(other.rows);
        self.violations += other.violations;
        self.infeasible += other.infeasible;
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(BOUND_CSV_HEADER);
        out.push('\n');
        let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.12},{:.12},{:.12},{},{},{}",
                r.check.name(),
                r.order,
                opt(r.element.map(|e| e.0)),
                opt(r.class),
                opt(r.bucket),
                r.bucketing,
                r.observed,
                r.bound,
                r.slack,
                r.mode,
                r.trials,
                r.pass
            );
        }
        out
    }
}

fn p_value(table: &SpanProbabilityTable, e: ElementId, i: usize) -> Quantity {
    match table.mode() {
        PMode::Exact => Quantity::exact(table.exact(e, i).expect("exact table")),
        PMode::MonteCarlo { .. } => Quantity::estimate(table.get(e, i), table.std_err(e, i)),
    }
}

fn judge(observed: Quantity, bound: Quantity) -> (f64, bool) {
    let slack = observed.value - bound.value;
    let pass = match (observed.exact, bound.exact) {
        (Some(o), Some(b)) => o >= b,
        _ => slack >= -MONTE_CARLO_SIGMAS * (observed.variance + bound.variance).sqrt(),
    };
    (slack, pass)
}

fn cell_label(params: Option<RandomBucketingParams>) -> String {
    params.map_or_else(|| "fixed".to_string(), |p| format!("{}:{}", p.tau, p.delta))
}

/// Checks every applicable selection bound against `selection`, using
/// `table` for the span probabilities and the greedy optimum as `OPT`.
///
/// Per-bucketing checks run on every cell. The class-level checks need all
/// `(τ, Δ)` cells and are skipped for a single fixed bucketing.
pub fn check_bounds<M: Matroid + ?Sized>(
    m: &M,
    w: &WeightedGroundSet,
    selection: &dyn SelectionView,
    table: &SpanProbabilityTable,
) -> Result<BoundReport> {
    let n = selection.len();
    if table.len() != n || table.h() != selection.h() {
        return Err(Error::InvalidParams(
            "span table and selection describe different instances".into(),
        ));
    }
    let h = selection.h();
    let opt = greedy_max_weight(m, w, &m.ground_set())?;
    let mut in_opt = vec![false; n];
    for e in &opt {
        in_opt[e.0] = true;
    }
    let elements: Vec<ElementId> = (0..n).map(ElementId).collect();
    let mode = selection.mode_name();
    let trials = selection.trials();
    let mut rows = Vec::new();
    let mut push = |check, element, class, bucket, bucketing: String, observed, bound| {
        let (slack, pass) = judge(observed, bound);
        rows.push(BoundRow {
            check,
            order: String::new(),
            element,
            class,
            bucket,
            bucketing,
            observed: observed.value,
            bound: bound.value,
            slack,
            mode,
            trials,
            pass,
        });
    };

    for cell in 0..selection.cell_count() {
        let b = selection.cell_bucketing(cell);
        let label = cell_label(selection.cell_params(cell));
        for i in 1..=b.len() {
            let prev = b.first_class(i as isize - 1);
            let first = b.first_class(i as isize);
            let members: Vec<ElementId> = elements
                .iter()
                .copied()
                .filter(|&e| b.bucket_of_class(selection.class_of(e)) == i)
                .collect();
            for &e in &members {
                let bound = (p_value(table, e, prev) - p_value(table, e, first)).scale(1, 4);
                push(
                    BoundCheck::ElementInBucket,
                    Some(e),
                    Some(selection.class_of(e)),
                    Some(i),
                    label.clone(),
                    selection.in_cell(cell, e),
                    bound,
                );
            }
            let observed: Quantity = members.iter().map(|&e| selection.in_cell(cell, e)).sum();
            let bound: Quantity = members
                .iter()
                .filter(|e| in_opt[e.0])
                .map(|&e| p_value(table, e, prev))
                .sum::<Quantity>()
                .scale(1, 4);
            push(BoundCheck::BucketTotal, None, None, Some(i), label.clone(), observed, bound);
        }
    }

    if selection.cell_params(0).is_some() {
        let k = RandomBucketingParams::max_tau(h) as i128;
        for i in 1..=h {
            let class: Vec<ElementId> = elements
                .iter()
                .copied()
                .filter(|&e| selection.class_of(e) == i)
                .collect();
            let opt_count = class.iter().filter(|e| in_opt[e.0]).count() as i128;

            let observed: Quantity = class
                .iter()
                .map(|&e| selection.given_tau(0, e).expect("tau 0 enumerated"))
                .sum();
            let bound: Quantity = class
                .iter()
                .filter(|e| in_opt[e.0])
                .map(|&e| p_value(table, e, i))
                .sum::<Quantity>()
                .scale(1, 4);
            push(BoundCheck::ClassTotalSingletons, None, Some(i), None, "0:0".into(), observed, bound);

            for &e in &class {
                let observed = selection.given_tau_positive(e).expect("all tau enumerated");
                let bound = (Quantity::exact(Exact::from_integer(1)) - p_value(table, e, i))
                    .scale(1, 8 * k);
                push(BoundCheck::ElementShifted, Some(e), Some(i), None, "tau>=1".into(), observed, bound);
                let weak = (p_value(table, e, 1) - p_value(table, e, i)).scale(1, 8 * k);
                push(
                    BoundCheck::ElementShiftedFromFirstClass,
                    Some(e),
                    Some(i),
                    None,
                    "tau>=1".into(),
                    observed,
                    weak,
                );
            }

            let observed: Quantity = class
                .iter()
                .map(|&e| selection.overall(e).expect("all tau enumerated"))
                .sum();
            let bound = Quantity::exact(Exact::new(opt_count, 8 * (k + 1)));
            push(BoundCheck::ClassTotal, None, Some(i), None, "all".into(), observed, bound);
        }
    }

    Ok(BoundReport {
        rows,
        violations: selection.violations(),
        infeasible: selection.infeasible(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{exact_p_table, exact_selection, BucketingMode};
    use crate::buckets::WeightClassing;
    use crate::matroid::MatroidInstance;
    use crate::secretary::ArrivalOrder;

    #[test]
    fn quantity_arithmetic_stays_exact() {
        let a = Quantity::exact(Exact::new(1, 3));
        let b = Quantity::exact(Exact::new(1, 6));
        assert_eq!((a - b).scale(1, 4).exact_value(), Some(Exact::new(1, 24)));
        let c = a + Quantity::estimate(0.5, 0.1);
        assert_eq!(c.exact_value(), None);
        assert!((c.std_err() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_element_meets_class_bound_with_equality() {
        // Pr[e ∈ T] = 1/24 = 1 / (8 (K+1)) with K = 2
        let m = MatroidInstance::uniform(1, 1).unwrap();
        let w = WeightedGroundSet::new(vec![1.0]).unwrap();
        let classing = WeightClassing::new(1.0, 1).unwrap();
        let sel = exact_selection(&m, &w, &classing, &BucketingMode::AllParams, &ArrivalOrder::Increasing)
            .unwrap();
        let table = exact_p_table(&m, &w, &classing).unwrap();
        let report = check_bounds(&m, &w, &sel, &table).unwrap();
        assert!(report.passed());
        let class_row = report
            .rows
            .iter()
            .find(|r| r.check == BoundCheck::ClassTotal && r.class == Some(3))
            .unwrap();
        assert_eq!(class_row.slack, 0.0);
    }

    /// Free matroid, `h = 7`, one element alone in the top class. Nothing
    /// spans it, so it is taken only when class 7 lies in bucket 1, which
    /// needs `τ = 3` and `Δ ∈ {0, 1}`:
    /// `Pr[e ∈ T | τ ≥ 1] = (1/3)(2/8)(1/4) = 1/48 < 1/24` and
    /// `Pr[e ∈ T] = (1/4)(2/8)(1/4) = 1/64 < 1/32`.
    #[test]
    fn top_class_element_of_a_free_matroid_breaks_the_shifted_bounds() {
        let m = MatroidInstance::uniform(2, 2).unwrap();
        let w = WeightedGroundSet::new(vec![1.0, 0.1]).unwrap();
        let classing = WeightClassing::new(1.0, 16).unwrap();
        assert_eq!(classing.h(), 7);
        let sel = exact_selection(&m, &w, &classing, &BucketingMode::AllParams, &ArrivalOrder::Increasing)
            .unwrap();
        let e = ElementId(0);
        assert_eq!(sel.given_tau_positive(e), Some(Exact::new(1, 48)));
        assert_eq!(sel.overall(e), Exact::new(1, 64));
        let table = exact_p_table(&m, &w, &classing).unwrap();
        let report = check_bounds(&m, &w, &sel, &table).unwrap();
        let failing: Vec<(BoundCheck, Option<usize>)> =
            report.failures().map(|r| (r.check, r.class)).collect();
        assert_eq!(
            failing,
            vec![(BoundCheck::ElementShifted, Some(7)), (BoundCheck::ClassTotal, Some(7))]
        );
    }

    #[test]
    fn fixed_mode_has_only_bucket_checks() {
        let m = MatroidInstance::uniform(3, 1).unwrap();
        let w = WeightedGroundSet::new(vec![1.0, 0.4, 0.2]).unwrap();
        let classing = WeightClassing::new(1.0, 1).unwrap();
        let b = Bucketing::singletons(3).unwrap();
        let sel = exact_selection(&m, &w, &classing, &BucketingMode::Fixed(b), &ArrivalOrder::Decreasing)
            .unwrap();
        let table = exact_p_table(&m, &w, &classing).unwrap();
        let report = check_bounds(&m, &w, &sel, &table).unwrap();
        assert!(report.passed());
        assert_eq!(report.count(BoundCheck::ElementInBucket), 3);
        assert_eq!(report.count(BoundCheck::BucketTotal), 3);
        assert_eq!(report.count(BoundCheck::ClassTotal), 0);
        assert!(report.to_csv().starts_with(BOUND_CSV_HEADER));
    }
}
