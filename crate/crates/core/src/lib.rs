//! Matroid oracles, minors, and an online simulator for the matroid
//! secretary problem built around random bucketings of geometric weight
//! classes.
//!
//! * [`matroid`]: families, rank/span oracles, minors, audited oracle access.
//! * [`buckets`]: weight classes and bucketings.
//! * [`secretary`]: the online algorithms and their reductions.
//! * [`analysis`]: exact and Monte Carlo computation of selection bounds.
//! * [`experiment`]: instance generation, trial execution, CSV reporting.

pub mod analysis;
pub mod buckets;
pub mod error;
pub mod experiment;
pub mod matroid;
pub mod rng;
pub mod secretary;

pub use error::{Error, Result};
