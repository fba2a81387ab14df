use std::sync::atomic::{AtomicU64, Ordering};

use super::{check_element, ElementId, Matroid};
use crate::error::{Error, Result};

static VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Number of audit violations raised by any oracle in this process.
pub fn global_violation_count() -> u64 {
    VIOLATIONS.load(Ordering::Relaxed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryKind {
    Independent,
    Rank,
    Span,
}

#[derive(Clone, Debug, Default)]
pub struct QueryLog {
    pub queries: u64,
    pub violations: Vec<ElementId>,
    /// Populated only when recording was requested.
    pub recorded: Vec<(QueryKind, Vec<ElementId>)>,
}

/// Oracle handle that answers only about elements that have already been
/// revealed, and logs every query. Single owner.
pub struct AuditOracle<'a> {
    matroid: &'a dyn Matroid,
    revealed: Vec<bool>,
    record: bool,
    log: QueryLog,
}

impl<'a> AuditOracle<'a> {
    pub fn new(matroid: &'a dyn Matroid, revealed: &[ElementId]) -> Result<Self> {
        let mut oracle = Self {
            matroid,
            revealed: vec![false; matroid.ground_size()],
            record: false,
            log: QueryLog::default(),
        };
        for &e in revealed {
            oracle.reveal(e)?;
        }
        Ok(oracle)
    }

    pub fn recording(mut self) -> Self {
        self.record = true;
        self
    }

    /// Marks `e` as arrived. Called by the environment, never by algorithms.
    pub fn reveal(&mut self, e: ElementId) -> Result<()> {
        check_element(e, self.revealed.len())?;
        self.revealed[e.0] = true;
        Ok(())
    }

    pub fn is_revealed(&self, e: ElementId) -> bool {
        self.revealed.get(e.0).copied().unwrap_or(false)
    }

    pub fn log(&self) -> &QueryLog {
        &self.log
    }

    pub fn into_log(self) -> QueryLog {
        self.log
    }

    fn admit(&mut self, kind: QueryKind, set: &[ElementId], extra: Option<ElementId>) -> Result<()> {
        self.log.queries += 1;
        if self.record {
            let mut q = set.to_vec();
            q.extend(extra);
            self.log.recorded.push((kind, q));
        }
        for &e in set.iter().chain(extra.iter()) {
            if !self.is_revealed(e) {
                check_element(e, self.revealed.len())?;
                self.log.violations.push(e);
                VIOLATIONS.fetch_add(1, Ordering::Relaxed);
                return Err(Error::AuditViolation(e));
            }
        }
        Ok(())
    }

    pub fn is_independent(&mut self, set: &[ElementId]) -> Result<bool> {
        self.admit(QueryKind::Independent, set, None)?;
        self.matroid.is_independent(set)
    }

    pub fn rank(&mut self, set: &[ElementId]) -> Result<usize> {
        self.admit(QueryKind::Rank, set, None)?;
        self.matroid.rank(set)
    }

    pub fn span_contains(&mut self, set: &[ElementId], e: ElementId) -> Result<bool> {
        self.admit(QueryKind::Span, set, Some(e))?;
        self.matroid.span_contains(set, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{ids, MatroidInstance};

    #[test]
    fn fully_revealed_oracle_passes_through() {
        let m = MatroidInstance::graphic(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let mut oracle = AuditOracle::new(&m, &m.ground_set()).unwrap();
        assert_eq!(oracle.rank(&ids(&[0, 1, 2])).unwrap(), 2);
        assert!(oracle.span_contains(&ids(&[0, 1]), ElementId(2)).unwrap());
        assert!(oracle.is_independent(&ids(&[0, 2])).unwrap());
        assert_eq!(oracle.log().queries, 3);
        assert!(oracle.log().violations.is_empty());
    }

    #[test]
    fn unrevealed_query_is_a_violation() {
        let m = MatroidInstance::uniform(2, 1).unwrap();
        let before = global_violation_count();
        let mut oracle = AuditOracle::new(&m, &[]).unwrap().recording();
        assert!(matches!(
            oracle.is_independent(&ids(&[0])),
            Err(Error::AuditViolation(ElementId(0)))
        ));
        assert_eq!(oracle.log().violations, ids(&[0]));
        assert_eq!(oracle.log().recorded.len(), 1);
        assert!(global_violation_count() > before);
    }

    #[test]
    fn revealed_prefix_plus_arrival() {
        let m = MatroidInstance::uniform(3, 2).unwrap();
        let mut oracle = AuditOracle::new(&m, &ids(&[0])).unwrap();
        oracle.reveal(ElementId(2)).unwrap();
        assert!(oracle.span_contains(&ids(&[0]), ElementId(2)).is_ok());
        assert!(oracle.span_contains(&ids(&[0]), ElementId(1)).is_err());
    }
}
