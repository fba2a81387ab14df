use num_rational::Ratio;
use rand::Rng;

use crate::buckets::WeightClassing;
use crate::error::{Error, Result};
use crate::matroid::{subset_from_mask, ElementId, Matroid, WeightedGroundSet};

/// Largest number of classed elements `exact_p_table` will enumerate over.
pub const EXACT_P_BUDGET: usize = 20;

pub type Exact = Ratio<i128>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PMode {
    Exact,
    MonteCarlo { trials: usize },
}

/// `p[e][i] = Pr[e ∈ span(S ∩ C_{≥i}) | e ∉ S]` for `i` in `0..=h`, where
/// `S` holds each element independently with probability 1/2.
/// `p[e][0] = 1` by convention.
#[derive(Clone, Debug)]
pub struct SpanProbabilityTable {
    h: usize,
    mode: PMode,
    values: Vec<Vec<f64>>,
    exact: Option<Vec<Vec<Exact>>>,
    std_err: Option<Vec<Vec<f64>>>,
}

impl SpanProbabilityTable {
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn mode(&self) -> PMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, e: ElementId, i: usize) -> f64 {
        self.values[e.0][i]
    }

    /// Exact rational value; `None` for Monte Carlo tables.
    pub fn exact(&self, e: ElementId, i: usize) -> Option<Exact> {
        self.exact.as_ref().map(|t| t[e.0][i])
    }

    /// Standard error `sqrt(p̂(1-p̂)/trials)`; zero for exact tables.
    pub fn std_err(&self, e: ElementId, i: usize) -> f64 {
        self.std_err.as_ref().map_or(0.0, |t| t[e.0][i])
    }

    /// First `(element, i)` where `p[e][i] < p[e][i+1]`, if any.
    pub fn monotonicity_violation(&self) -> Option<(ElementId, usize)> {
        self.values.iter().enumerate().find_map(|(e, row)| {
            row.windows(2)
                .position(|pair| pair[0] < pair[1])
                .map(|i| (ElementId(e), i))
        })
    }
}

pub(crate) fn classes_of(w: &WeightedGroundSet, classing: &WeightClassing) -> Result<Vec<usize>> {
    w.weights().iter().map(|&x| classing.class_of(x)).collect()
}

/// Elements whose class is at least `i`, excluding `skip`.
fn upper_classes(classes: &[usize], i: usize, skip: ElementId) -> Vec<ElementId> {
    classes
        .iter()
        .enumerate()
        .filter(|&(e, &c)| c >= i && e != skip.0)
        .map(|(e, _)| ElementId(e))
        .collect()
}

/// Exact table by enumerating every subset of `C_{≥i} \ {e}`.
///
/// Conditioning on `e ∉ S` is the same as dropping `e` from the universe,
/// because membership of the other elements is independent of `e`'s.
pub fn exact_p_table<M: Matroid + ?Sized>(
    m: &M,
    w: &WeightedGroundSet,
    classing: &WeightClassing,
) -> Result<SpanProbabilityTable> {
    let classes = classes_of(w, classing)?;
    if classes.len() > EXACT_P_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "classed elements",
            actual: classes.len(),
            limit: EXACT_P_BUDGET,
        });
    }
    let h = classing.h();
    let mut exact = Vec::with_capacity(classes.len());
    let mut subset = Vec::new();
    for e in (0..classes.len()).map(ElementId) {
        let mut row = vec![Exact::from_integer(1)];
        for i in 1..=h {
            let universe = upper_classes(&classes, i, e);
            let mut hits: i128 = 0;
            for mask in 0..1u64 << universe.len() {
                subset_from_mask(&universe, mask, &mut subset);
                if m.span_contains(&subset, e)? {
                    hits += 1;
                }
            }
            row.push(Exact::new(hits, 1i128 << universe.len()));
        }
        exact.push(row);
    }
    let values = exact
        .iter()
        .map(|row| row.iter().map(to_f64).collect())
        .collect();
    Ok(SpanProbabilityTable {
        h,
        mode: PMode::Exact,
        values,
        exact: Some(exact),
        std_err: None,
    })
}

/// Monte Carlo table: each trial draws a fresh `S` and, for every element,
/// uses `S \ {e}` as a draw from the conditional law of `S` given `e ∉ S`.
pub fn estimate_p_table<M: Matroid + ?Sized, R: Rng + ?Sized>(
    m: &M,
    w: &WeightedGroundSet,
    classing: &WeightClassing,
    trials: usize,
    rng: &mut R,
) -> Result<SpanProbabilityTable> {
    if trials == 0 {
        return Err(Error::InvalidParams("at least one trial is required".into()));
    }
    let classes = classes_of(w, classing)?;
    let h = classing.h();
    let n = classes.len();
    let mut hits = vec![vec![0usize; h + 1]; n];
    let mut sample_by_class: Vec<Vec<ElementId>> = vec![Vec::new(); h + 2];
    let mut set = Vec::new();
    for _ in 0..trials {
        sample_by_class.iter_mut().for_each(Vec::clear);
        for (e, &c) in classes.iter().enumerate() {
            if rng.random_bool(0.5) {
                sample_by_class[c].push(ElementId(e));
            }
        }
        for e in (0..n).map(ElementId) {
            set.clear();
            for i in (1..=h).rev() {
                set.extend(sample_by_class[i].iter().filter(|&&x| x != e));
                if m.span_contains(&set, e)? {
                    hits[e.0][i] += 1;
                }
            }
        }
    }
    let t = trials as f64;
    let mut values = vec![vec![1.0; h + 1]; n];
    let mut std_err = vec![vec![0.0; h + 1]; n];
    for e in 0..n {
        for i in 1..=h {
            let p = hits[e][i] as f64 / t;
            values[e][i] = p;
            std_err[e][i] = (p * (1.0 - p) / t).sqrt();
        }
    }
    Ok(SpanProbabilityTable {
        h,
        mode: PMode::MonteCarlo { trials },
        values,
        exact: None,
        std_err: Some(std_err),
    })
}

pub(crate) fn to_f64(r: &Exact) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
