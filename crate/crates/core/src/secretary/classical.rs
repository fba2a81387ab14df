use super::{Arrival, MspAlgorithm, RunTrace};
use crate::error::Result;
use crate::matroid::AuditOracle;
use crate::rng::TrialStreams;

/// The classical single-choice rule: watch the first `⌊n/e⌋` arrivals, then
/// take the first one heavier than everything watched.
#[derive(Debug, Default)]
pub struct ClassicalSecretary {
    cutoff: usize,
    seen: usize,
    best: f64,
    done: bool,
}

impl ClassicalSecretary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
}

impl MspAlgorithm for ClassicalSecretary {
    fn start(&mut self, n: usize, _streams: &mut TrialStreams) {
        self.cutoff = (n as f64 / std::f64::consts::E).floor() as usize;
        self.seen = 0;
        self.best = f64::NEG_INFINITY;
        self.done = false;
    }

    fn offer(
        &mut self,
        arrival: Arrival,
        oracle: &mut AuditOracle<'_>,
        _streams: &mut TrialStreams,
    ) -> Result<bool> {
        self.seen += 1;
        if self.seen <= self.cutoff {
            self.best = self.best.max(arrival.weight);
            return Ok(false);
        }
        if self.done || arrival.weight <= self.best {
            return Ok(false);
        }
        if !oracle.is_independent(&[arrival.id])? {
            return Ok(false);
        }
        self.done = true;
        Ok(true)
    }

    fn trace(&self) -> RunTrace {
        RunTrace {
            prefix_len: Some(self.cutoff),
            ..RunTrace::default()
        }
    }
}
