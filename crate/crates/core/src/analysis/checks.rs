use rand::seq::SliceRandom;
use rand::Rng;

use crate::buckets::{Bucketing, WeightClassing};
use crate::error::{Error, Result};
use crate::matroid::{greedy_rank, subset_from_mask, ElementId, Matroid, MinorView, WeightedGroundSet};
use crate::secretary::{ArrivalOrder, BucketingRun, Parity};

/// Largest ground set for the exhaustive axiom check.
pub const AXIOM_BUDGET: usize = 12;

/// Ground set of bucket `i`'s minor: `B_1` for `i = 1`, otherwise
/// `B_i ∩ span(S ∩ B_{≥i-1})`. Computed with full knowledge of `M`.
fn minor_ground<M: Matroid + ?Sized>(
    m: &M,
    bucket_of: &[usize],
    sample_from: impl Fn(usize) -> Vec<ElementId>,
    i: usize,
) -> Result<Vec<ElementId>> {
    let members = (0..bucket_of.len())
        .filter(|&e| bucket_of[e] == i)
        .map(ElementId);
    if i == 1 {
        return Ok(members.collect());
    }
    let spanning = sample_from(i - 1);
    let mut out = Vec::new();
    for e in members {
        if m.span_contains(&spanning, e)? {
            out.push(e);
        }
    }
    Ok(out)
}

fn buckets_of(w: &WeightedGroundSet, classing: &WeightClassing, b: &Bucketing) -> Result<Vec<usize>> {
    w.weights()
        .iter()
        .map(|&x| Ok(b.bucket_of_class(classing.class_of(x)?)))
        .collect()
}

fn sample_suffix(sample: &[ElementId], bucket_of: &[usize], j: usize) -> Vec<ElementId> {
    sample.iter().copied().filter(|e| bucket_of[e.0] >= j).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecisionAudit {
    pub checked: usize,
    pub mismatches: usize,
}

/// Replays every in-parity decision of a finished run against the direct
/// test "`e ∈ N_i` and `r_i(T_i + e) = |T_i| + 1`", where `r_i` is the rank
/// of the minor `(M / (S ∩ B_{≥i+1}))|_{N_i}` and `T_i` holds the elements
/// accepted in bucket `i` before `e`.
pub fn audit_decisions<M: Matroid + ?Sized>(
    m: &M,
    w: &WeightedGroundSet,
    sample: &[ElementId],
    run: &BucketingRun,
) -> Result<DecisionAudit> {
    let bucket_of = buckets_of(w, run.classing(), run.bucketing())?;
    let b = run.bucketing().len();
    let mut minors = Vec::with_capacity(b + 1);
    minors.push(None);
    for i in 1..=b {
        let ground = minor_ground(m, &bucket_of, |j| sample_suffix(sample, &bucket_of, j), i)?;
        let contracted = sample_suffix(sample, &bucket_of, i + 1);
        minors.push(Some(MinorView::new(m, contracted, ground)?));
    }
    let mut taken: Vec<Vec<ElementId>> = vec![Vec::new(); b + 1];
    let mut audit = DecisionAudit::default();
    for d in run.decisions().iter().filter(|d| d.in_parity) {
        let minor = minors[d.bucket].as_ref().expect("bucket in range");
        let direct = if minor.contains(d.element) {
            let mut with_e = taken[d.bucket].clone();
            with_e.push(d.element);
            minor.minor_rank(&with_e)? == taken[d.bucket].len() + 1
        } else {
            false
        };
        audit.checked += 1;
        if direct != d.accepted {
            audit.mismatches += 1;
        }
        if d.accepted {
            taken[d.bucket].push(d.element);
        }
    }
    Ok(audit)
}

/// One draw of the composition property: random `S`, parity, and a random
/// independent set `I_i` in every active bucket's minor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositionDraw {
    pub sample: Vec<ElementId>,
    pub parity: Parity,
    pub parts: Vec<Vec<ElementId>>,
    pub union_independent: bool,
}

pub fn composition_trial<M: Matroid + ?Sized, R: Rng + ?Sized>(
    m: &M,
    w: &WeightedGroundSet,
    classing: &WeightClassing,
    bucketing: &Bucketing,
    rng: &mut R,
) -> Result<CompositionDraw> {
    let bucket_of = buckets_of(w, classing, bucketing)?;
    let n = w.len();
    let sample: Vec<ElementId> = (0..n).filter(|_| rng.random_bool(0.5)).map(ElementId).collect();
    let parity = if rng.random_bool(0.5) { Parity::Odd } else { Parity::Even };
    let mut parts = Vec::new();
    for i in (1..=bucketing.len()).filter(|&i| parity.contains(i)) {
        let mut ground = minor_ground(m, &bucket_of, |j| sample_suffix(&sample, &bucket_of, j), i)?;
        let contracted = sample_suffix(&sample, &bucket_of, i + 1);
        ground.shuffle(rng);
        let minor = MinorView::new(m, contracted, ground.clone())?;
        let mut part = Vec::new();
        for e in ground {
            if rng.random_bool(0.5) {
                continue;
            }
            part.push(e);
            if !minor.is_independent(&part)? {
                part.pop();
            }
        }
        parts.push(part);
    }
    let union: Vec<ElementId> = parts.iter().flatten().copied().collect();
    let union_independent = m.is_independent(&union)?;
    Ok(CompositionDraw {
        sample,
        parity,
        parts,
        union_independent,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub n: usize,
    pub subsets: usize,
    pub failures: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Exhaustive check of the rank and independence axioms over all subsets,
/// plus agreement of `is_independent`, `span_contains`, and the greedy rank
/// with `rank`.
pub fn check_axioms<M: Matroid + ?Sized>(m: &M) -> Result<AxiomReport> {
    let n = m.ground_size();
    if n > AXIOM_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "ground set",
            actual: n,
            limit: AXIOM_BUDGET,
        });
    }
    let ground = m.ground_set();
    let size = 1usize << n;
    let mut rank = vec![0usize; size];
    let mut set = Vec::new();
    let mut failures = Vec::new();
    let mut fail = |msg: String| {
        if failures.len() < 20 {
            failures.push(msg);
        }
    };
    for (mask, r) in rank.iter_mut().enumerate() {
        subset_from_mask(&ground, mask as u64, &mut set);
        *r = m.rank(&set)?;
        if *r > set.len() {
            fail(format!("rank of {mask:#b} exceeds its size"));
        }
        if greedy_rank(m, &set)? != *r {
            fail(format!("greedy rank of {mask:#b} differs from rank"));
        }
        if m.is_independent(&set)? != (*r == set.len()) {
            fail(format!("independence of {mask:#b} disagrees with rank"));
        }
    }
    if rank[0] != 0 {
        fail("rank of the empty set is not zero".into());
    }
    let independent: Vec<bool> = (0..size).map(|x| rank[x] == x.count_ones() as usize).collect();
    for mask in 0..size {
        subset_from_mask(&ground, mask as u64, &mut set);
        for e in (0..n).filter(|e| mask >> e & 1 == 0) {
            let with_e = mask | 1 << e;
            if rank[with_e] < rank[mask] || rank[with_e] > rank[mask] + 1 {
                fail(format!("adding {e} to {mask:#b} changes rank by more than one"));
            }
            if independent[with_e] && !independent[mask] {
                fail(format!("{with_e:#b} is independent but its subset {mask:#b} is not"));
            }
            if m.span_contains(&set, ElementId(e))? != (rank[with_e] == rank[mask]) {
                fail(format!("span query for {e} over {mask:#b} disagrees with rank"));
            }
            for f in (e + 1..n).filter(|f| mask >> f & 1 == 0) {
                let with_f = mask | 1 << f;
                if rank[with_e] + rank[with_f] < rank[with_e | with_f] + rank[mask] {
                    fail(format!("submodularity fails at {mask:#b} with {e}, {f}"));
                }
            }
        }
    }
    // exchange: for independent I, J with |J| = |I| + 1 some e ∈ J \ I extends I
    let indep_masks: Vec<usize> = (0..size).filter(|&x| independent[x]).collect();
    for &i in &indep_masks {
        for &j in &indep_masks {
            if j.count_ones() != i.count_ones() + 1 {
                continue;
            }
            let extra = j & !i;
            if !(0..n).any(|e| extra >> e & 1 == 1 && independent[i | 1 << e]) {
                fail(format!("no element of {j:#b} extends {i:#b}"));
            }
        }
    }
    Ok(AxiomReport {
        n,
        subsets: size,
        failures,
    })
}

/// Fixed phase-2 orders used by the exact checks: identity, reverse,
/// increasing and decreasing weight, and `random` seeded permutations.
pub fn standard_orders<R: Rng + ?Sized>(n: usize, random: usize, rng: &mut R) -> Vec<(String, ArrivalOrder)> {
    let identity: Vec<ElementId> = (0..n).map(ElementId).collect();
    let mut reverse = identity.clone();
    reverse.reverse();
    let mut orders = vec![
        ("identity".to_string(), ArrivalOrder::Fixed(identity.clone())),
        ("reverse".to_string(), ArrivalOrder::Fixed(reverse)),
        ("increasing".to_string(), ArrivalOrder::Increasing),
        ("decreasing".to_string(), ArrivalOrder::Decreasing),
    ];
    for k in 0..random {
        let mut perm = identity.clone();
        perm.shuffle(rng);
        orders.push((format!("random-{k}"), ArrivalOrder::Fixed(perm)));
    }
    orders
}
