use super::{check_element, validate, ElementId, Matroid};
use crate::error::{Error, Result};

/// Every subset of size at most `k` is independent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Uniform {
    n: usize,
    k: usize,
}

impl Uniform {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k }
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Matroid for Uniform {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn rank(&self, set: &[ElementId]) -> Result<usize> {
        validate(set, self.n)?;
        Ok(set.len().min(self.k))
    }
}

/// Blocks partition the ground set; at most `capacity` elements per block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    capacities: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<(usize, Vec<ElementId>)>) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n];
        let mut capacities = Vec::with_capacity(blocks.len());
        for (b, (cap, members)) in blocks.into_iter().enumerate() {
            for e in members {
                check_element(e, n)?;
                if block_of[e.0] != usize::MAX {
                    return Err(Error::InvalidInstance(format!(
                        "element {e} belongs to more than one block"
                    )));
                }
                block_of[e.0] = b;
            }
            capacities.push(cap);
        }
        if let Some(e) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidInstance(format!(
                "element {e} is not covered by any block"
            )));
        }
        Ok(Self {
            block_of,
            capacities,
        })
    }

    pub fn blocks(&self) -> Vec<(usize, Vec<ElementId>)> {
        let mut out: Vec<(usize, Vec<ElementId>)> =
            self.capacities.iter().map(|&c| (c, Vec::new())).collect();
        for (e, &b) in self.block_of.iter().enumerate() {
            out[b].1.push(ElementId(e));
        }
        out
    }
}

impl Matroid for Partition {
    fn ground_size(&self) -> usize {
        self.block_of.len()
    }

    fn rank(&self, set: &[ElementId]) -> Result<usize> {
        validate(set, self.ground_size())?;
        let mut counts = vec![0usize; self.capacities.len()];
        for &e in set {
            counts[self.block_of[e.0]] += 1;
        }
        Ok(counts
            .iter()
            .zip(&self.capacities)
            .map(|(&c, &cap)| c.min(cap))
            .sum())
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

/// Edges of a multigraph; a set is independent iff it is a forest.
/// Self-loop edges are matroid loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graphic {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graphic {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if let Some((i, &(u, v))) = edges
            .iter()
            .enumerate()
            .find(|(_, &(u, v))| u >= vertices || v >= vertices)
        {
            return Err(Error::InvalidInstance(format!(
                "edge {i} ({u}, {v}) references a vertex outside 0..{vertices}"
            )));
        }
        Ok(Self { vertices, edges })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn forest_of(&self, set: &[ElementId]) -> (DisjointSets, usize) {
        let mut dsu = DisjointSets::new(self.vertices);
        let mut rank = 0;
        for &e in set {
            let (u, v) = self.edges[e.0];
            if dsu.union(u, v) {
                rank += 1;
            }
        }
        (dsu, rank)
    }
}

impl Matroid for Graphic {
    fn ground_size(&self) -> usize {
        self.edges.len()
    }

    fn rank(&self, set: &[ElementId]) -> Result<usize> {
        validate(set, self.ground_size())?;
        Ok(self.forest_of(set).1)
    }

    fn span_contains(&self, set: &[ElementId], e: ElementId) -> Result<bool> {
        check_element(e, self.ground_size())?;
        validate(set, self.ground_size())?;
        let (mut dsu, _) = self.forest_of(set);
        let (u, v) = self.edges[e.0];
        Ok(dsu.find(u) == dsu.find(v))
    }
}

/// One member of a laminar family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaminarSet {
    pub capacity: usize,
    pub members: Vec<ElementId>,
}

/// `I` is independent iff `|I ∩ A| <= cap(A)` for every set `A` of a laminar
/// family. Elements outside every set are unconstrained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Laminar {
    n: usize,
    sets: Vec<LaminarSet>,
    /// Set indices ordered children-first.
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    innermost: Vec<Option<usize>>,
}

impl Laminar {
    pub fn new(n: usize, sets: Vec<LaminarSet>) -> Result<Self> {
        let mut bitsets = Vec::with_capacity(sets.len());
        for (i, s) in sets.iter().enumerate() {
            validate(&s.members, n).map_err(|err| {
                Error::InvalidInstance(format!("laminar set {i}: {err}"))
            })?;
            let mut bits = vec![false; n];
            for &e in &s.members {
                bits[e.0] = true;
            }
            bitsets.push(bits);
        }
        let subset = |a: usize, b: usize| sets[a].members.iter().all(|e| bitsets[b][e.0]);
        for (a, set) in sets.iter().enumerate() {
            for (b, bits) in bitsets.iter().enumerate().skip(a + 1) {
                let meets = set.members.iter().any(|e| bits[e.0]);
                if meets && !subset(a, b) && !subset(b, a) {
                    return Err(Error::InvalidInstance(format!(
                        "sets {a} and {b} cross, family is not laminar"
                    )));
                }
            }
        }

        let mut order: Vec<usize> = (0..sets.len()).collect();
        order.sort_by_key(|&s| (sets[s].members.len(), s));
        let mut parent = vec![None; sets.len()];
        for (pos, &s) in order.iter().enumerate() {
            parent[s] = order[pos + 1..].iter().copied().find(|&t| subset(s, t));
        }
        let mut innermost = vec![None; n];
        for &s in order.iter().rev() {
            for &e in &sets[s].members {
                innermost[e.0] = Some(s);
            }
        }
        Ok(Self {
            n,
            sets,
            order,
            parent,
            innermost,
        })
    }

    pub fn sets(&self) -> &[LaminarSet] {
        &self.sets
    }
}

impl Matroid for Laminar {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn rank(&self, set: &[ElementId]) -> Result<usize> {
        validate(set, self.n)?;
        let mut inside = vec![0usize; self.sets.len()];
        let mut free = 0;
        for &e in set {
            match self.innermost[e.0] {
                Some(s) => inside[s] += 1,
                None => free += 1,
            }
        }
        let mut rank = free;
        for &s in &self.order {
            let r = inside[s].min(self.sets[s].capacity);
            match self.parent[s] {
                Some(p) => inside[p] += r,
                None => rank += r,
            }
        }
        Ok(rank)
    }
}

/// Ground set is the right side of a bipartite graph; a set is independent
/// iff it can be matched into the left side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transversal {
    left: Vec<Vec<ElementId>>,
    /// For each element, its adjacent left vertices.
    adjacency: Vec<Vec<usize>>,
}

impl Transversal {
    pub fn new(n: usize, left: Vec<Vec<ElementId>>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for (l, right) in left.iter().enumerate() {
            validate(right, n)
                .map_err(|err| Error::InvalidInstance(format!("left vertex {l}: {err}")))?;
            for &e in right {
                adjacency[e.0].push(l);
            }
        }
        Ok(Self { left, adjacency })
    }

    pub fn left(&self) -> &[Vec<ElementId>] {
        &self.left
    }

    fn augment(&self, e: ElementId, owner: &mut [Option<ElementId>], seen: &mut [bool]) -> bool {
        for &l in &self.adjacency[e.0] {
            if seen[l] {
                continue;
            }
            seen[l] = true;
            if owner[l].is_none_or(|other| self.augment(other, owner, seen)) {
                owner[l] = Some(e);
                return true;
            }
        }
        false
    }

    fn max_matching(&self, set: &[ElementId]) -> (Vec<Option<ElementId>>, usize) {
        let mut owner = vec![None; self.left.len()];
        let mut seen = vec![false; self.left.len()];
        let mut size = 0;
        for &e in set {
            seen.fill(false);
            if self.augment(e, &mut owner, &mut seen) {
                size += 1;
            }
        }
        (owner, size)
    }
}

impl Matroid for Transversal {
    fn ground_size(&self) -> usize {
        self.adjacency.len()
    }

    fn rank(&self, set: &[ElementId]) -> Result<usize> {
        validate(set, self.ground_size())?;
        Ok(self.max_matching(set).1)
    }

    fn span_contains(&self, set: &[ElementId], e: ElementId) -> Result<bool> {
        check_element(e, self.ground_size())?;
        validate(set, self.ground_size())?;
        if set.contains(&e) {
            return Ok(true);
        }
        // From a maximum matching of `set`, any augmenting path in `set + e`
        // must start at `e`.
        let (mut owner, _) = self.max_matching(set);
        let mut seen = vec![false; self.left.len()];
        Ok(!self.augment(e, &mut owner, &mut seen))
    }
}

/// The five concrete families behind one oracle type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatroidInstance {
    Uniform(Uniform),
    Partition(Partition),
    Graphic(Graphic),
    Laminar(Laminar),
    Transversal(Transversal),
}

impl MatroidInstance {
    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        Ok(Self::Uniform(Uniform::new(n, k)))
    }

    pub fn partition(n: usize, blocks: Vec<(usize, Vec<ElementId>)>) -> Result<Self> {
        Partition::new(n, blocks).map(Self::Partition)
    }

    pub fn graphic(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Graphic::new(vertices, edges).map(Self::Graphic)
    }

    pub fn laminar(n: usize, sets: Vec<LaminarSet>) -> Result<Self> {
        Laminar::new(n, sets).map(Self::Laminar)
    }

    pub fn transversal(n: usize, left: Vec<Vec<ElementId>>) -> Result<Self> {
        Transversal::new(n, left).map(Self::Transversal)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Uniform(_) => "uniform",
            Self::Partition(_) => "partition",
            Self::Graphic(_) => "graphic",
            Self::Laminar(_) => "laminar",
            Self::Transversal(_) => "transversal",
        }
    }

    fn inner(&self) -> &dyn Matroid {
        match self {
            Self::Uniform(m) => m,
            Self::Partition(m) => m,
            Self::Graphic(m) => m,
            Self::Laminar(m) => m,
            Self::Transversal(m) => m,
        }
    }

    /// Rank of the whole ground set.
    pub fn full_rank(&self) -> usize {
        self.rank(&self.ground_set())
            .expect("ground set is always a valid query")
    }
}

impl Matroid for MatroidInstance {
    fn ground_size(&self) -> usize {
        self.inner().ground_size()
    }

    fn rank(&self, set: &[ElementId]) -> Result<usize> {
        self.inner().rank(set)
    }

    fn is_independent(&self, set: &[ElementId]) -> Result<bool> {
        self.inner().is_independent(set)
    }

    fn span_contains(&self, set: &[ElementId], e: ElementId) -> Result<bool> {
        self.inner().span_contains(set, e)
    }
}
