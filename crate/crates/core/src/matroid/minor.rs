use super::{validate, ElementId, Matroid};
use crate::error::{Error, Result};

/// The minor `(M / contracted) |_restricted`, answered through the parent
/// oracle as `r'(U) = r(U ∪ contracted) - r(contracted)`.
///
/// Nothing is materialized; the contracted set's rank is cached once.
pub struct MinorView<'a, M: Matroid + ?Sized> {
    parent: &'a M,
    contracted: Vec<ElementId>,
    restricted: Vec<ElementId>,
    in_restricted: Vec<bool>,
    contracted_rank: usize,
}

impl<'a, M: Matroid + ?Sized> MinorView<'a, M> {
    pub fn new(
        parent: &'a M,
        contracted: Vec<ElementId>,
        restricted: Vec<ElementId>,
    ) -> Result<Self> {
        let n = parent.ground_size();
        validate(&contracted, n)?;
        validate(&restricted, n)?;
        let mut in_restricted = vec![false; n];
        for &e in &restricted {
            in_restricted[e.0] = true;
        }
        if let Some(&e) = contracted.iter().find(|e| in_restricted[e.0]) {
            return Err(Error::InvalidParams(format!(
                "element {e} is both contracted and kept"
            )));
        }
        let contracted_rank = parent.rank(&contracted)?;
        Ok(Self {
            parent,
            contracted,
            restricted,
            in_restricted,
            contracted_rank,
        })
    }

    pub fn contracted(&self) -> &[ElementId] {
        &self.contracted
    }

    pub fn ground_set(&self) -> &[ElementId] {
        &self.restricted
    }

    pub fn contains(&self, e: ElementId) -> bool {
        self.in_restricted.get(e.0).copied().unwrap_or(false)
    }

    fn check(&self, subset: &[ElementId]) -> Result<()> {
        match subset.iter().find(|&&e| !self.contains(e)) {
            Some(&e) => Err(Error::OutsideMinor(e)),
            None => Ok(()),
        }
    }

    pub fn minor_rank(&self, subset: &[ElementId]) -> Result<usize> {
        self.check(subset)?;
        let mut joined = Vec::with_capacity(subset.len() + self.contracted.len());
        joined.extend_from_slice(subset);
        joined.extend_from_slice(&self.contracted);
        Ok(self.parent.rank(&joined)? - self.contracted_rank)
    }

    pub fn is_independent(&self, subset: &[ElementId]) -> Result<bool> {
        Ok(self.minor_rank(subset)? == subset.len())
    }

    pub fn span_contains(&self, subset: &[ElementId], e: ElementId) -> Result<bool> {
        self.check(&[e])?;
        if subset.contains(&e) {
            self.check(subset)?;
            return Ok(true);
        }
        let mut extended = subset.to_vec();
        extended.push(e);
        Ok(self.minor_rank(&extended)? == self.minor_rank(subset)?)
    }
}
