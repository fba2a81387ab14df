//! Random instances and weight vectors.

use std::path::PathBuf;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matroid::{io, ElementId, LaminarSet, MatroidInstance, WeightedGroundSet};

/// Matroid family and its generator parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    /// `U(k, n)`.
    Uniform { n: usize, k: usize },
    /// `n` elements spread over `blocks` nonempty blocks of capacity `k`.
    Partition { n: usize, blocks: usize, k: usize },
    /// `n` random edges on `vertices` vertices, no self-loops.
    Graphic { n: usize, vertices: usize },
    /// Random laminar family; the whole ground set has capacity `k`.
    Laminar { n: usize, k: usize },
    /// `left` vertices, each adjacent to `degree` distinct random elements.
    Transversal { n: usize, left: usize, degree: usize },
    File(PathBuf),
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Uniform { .. } => "uniform",
            FamilySpec::Partition { .. } => "partition",
            FamilySpec::Graphic { .. } => "graphic",
            FamilySpec::Laminar { .. } => "laminar",
            FamilySpec::Transversal { .. } => "transversal",
            FamilySpec::File(_) => "file",
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MatroidInstance> {
        let infeasible = |msg: String| Err(Error::InvalidInstance(msg));
        match *self {
            FamilySpec::Uniform { n, k } => {
                if k > n {
                    return infeasible(format!("rank {k} exceeds n = {n}"));
                }
                MatroidInstance::uniform(n, k)
            }
            FamilySpec::Partition { n, blocks, k } => {
                if blocks == 0 || blocks > n {
                    return infeasible(format!("cannot split {n} elements into {blocks} nonempty blocks"));
                }
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(rng);
                let mut members = vec![Vec::new(); blocks];
                for (pos, &e) in perm.iter().enumerate() {
                    let b = if pos < blocks { pos } else { rng.random_range(0..blocks) };
                    members[b].push(ElementId(e));
                }
                for m in &mut members {
                    m.sort();
                }
                MatroidInstance::partition(n, members.into_iter().map(|m| (k, m)).collect())
            }
            FamilySpec::Graphic { n, vertices } => {
                if vertices < 2 {
                    return infeasible(format!("a graph with edges needs 2 vertices, got {vertices}"));
                }
                let edges = (0..n)
                    .map(|_| {
                        let u = rng.random_range(0..vertices);
                        let v = (u + rng.random_range(1..vertices)) % vertices;
                        (u.min(v), u.max(v))
                    })
                    .collect();
                MatroidInstance::graphic(vertices, edges)
            }
            FamilySpec::Laminar { n, k } => {
                if k == 0 || n == 0 {
                    return infeasible("laminar family needs n >= 1 and k >= 1".into());
                }
                let mut perm: Vec<ElementId> = (0..n).map(ElementId).collect();
                perm.shuffle(rng);
                let mut sets = vec![LaminarSet {
                    capacity: k.min(n),
                    members: sorted(&perm),
                }];
                split_laminar(&perm, k.min(n), rng, &mut sets);
                MatroidInstance::laminar(n, sets)
            }
            FamilySpec::Transversal { n, left, degree } => {
                if left == 0 || degree == 0 || degree > n {
                    return infeasible(format!(
                        "need left >= 1 and 1 <= degree <= n, got left {left}, degree {degree}"
                    ));
                }
                let all: Vec<ElementId> = (0..n).map(ElementId).collect();
                let adjacency = (0..left)
                    .map(|_| {
                        let mut row: Vec<ElementId> = all.choose_multiple(rng, degree).copied().collect();
                        row.sort();
                        row
                    })
                    .collect();
                MatroidInstance::transversal(n, adjacency)
            }
            FamilySpec::File(ref path) => io::read_instance(path),
        }
    }
}

fn sorted(ids: &[ElementId]) -> Vec<ElementId> {
    let mut v = ids.to_vec();
    v.sort();
    v
}

/// Splits `block` into two or three consecutive parts, gives each part of
/// size at least 2 a random capacity below its parent's, and recurses.
fn split_laminar<R: Rng + ?Sized>(
    block: &[ElementId],
    parent_cap: usize,
    rng: &mut R,
    sets: &mut Vec<LaminarSet>,
) {
    if block.len() < 4 || parent_cap <= 1 {
        return;
    }
    let parts = rng.random_range(2..=3usize).min(block.len() / 2);
    let mut cuts: Vec<usize> = (0..parts - 1).map(|_| rng.random_range(1..block.len())).collect();
    cuts.sort();
    cuts.dedup();
    let mut start = 0;
    for end in cuts.into_iter().chain(std::iter::once(block.len())) {
        let part = &block[start..end];
        start = end;
        if part.len() < 2 {
            continue;
        }
        let capacity = rng.random_range(1..=parent_cap.min(part.len()));
        sets.push(LaminarSet {
            capacity,
            members: sorted(part),
        });
        split_laminar(part, capacity, rng, sets);
    }
}

/// How element weights are produced.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightScheme {
    /// Independent draws from `(0, 1]`.
    UniformRandom,
    /// `base^-j` with `j` uniform on `0..⌈log_base(8n)⌉`, so that many
    /// weight classes are populated.
    ExponentialSpread { base: f64 },
    /// A random permutation `π` with `w_e = 2^-min(π(e), 48)`: one dominant
    /// element and a long geometric tail.
    AdversarialGeometric,
    FromFile(PathBuf),
}

/// Cap on the geometric tail so that weight ratios stay representable.
pub const GEOMETRIC_TAIL_CAP: i32 = 48;

impl WeightScheme {
    pub fn name(&self) -> &'static str {
        match self {
            WeightScheme::UniformRandom => "uniform-random",
            WeightScheme::ExponentialSpread { .. } => "exponential-spread",
            WeightScheme::AdversarialGeometric => "adversarial-geometric",
            WeightScheme::FromFile(_) => "from-file",
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<WeightedGroundSet> {
        let weights = match self {
            WeightScheme::UniformRandom => (0..n).map(|_| 1.0 - rng.random::<f64>()).collect(),
            WeightScheme::ExponentialSpread { base } => {
                if !(base.is_finite() && *base > 1.0) {
                    return Err(Error::Config(format!("spread base must exceed 1, got {base}")));
                }
                let levels = ((8.0 * n.max(1) as f64).ln() / base.ln()).ceil().max(1.0) as i32;
                (0..n).map(|_| base.powi(-rng.random_range(0..levels))).collect()
            }
            WeightScheme::AdversarialGeometric => {
                let mut perm: Vec<i32> = (0..n as i32).collect();
                perm.shuffle(rng);
                perm.into_iter()
                    .map(|p| 2f64.powi(-p.min(GEOMETRIC_TAIL_CAP)))
                    .collect()
            }
            WeightScheme::FromFile(path) => {
                let w = io::read_weights(path)?;
                if w.len() != n {
                    return Err(Error::InvalidInstance(format!(
                        "weights file has {} entries, instance has {n} elements",
                        w.len()
                    )));
                }
                return Ok(w);
            }
        };
        WeightedGroundSet::new(weights)
    }
}
