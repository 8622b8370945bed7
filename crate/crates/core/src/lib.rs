//! Exact computations for common learning on finite information structures.
//!
//! A structure fixes finitely many states, a prior, and for every state a
//! joint law of the agents' period signals. Signals are drawn i.i.d. over
//! time. The crate computes identification partitions and their join,
//! posteriors and exact laws of signal counts, belief and common-belief
//! events at a fixed horizon, prediction-matrix contraction coefficients,
//! large-deviation bounds, and Monte Carlo estimates beyond the exact range.

// `!(x >= 0.0)` is used on purpose to reject NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod contraction;
pub mod counts;
pub mod divergence;
pub mod engine;
pub mod error;
pub mod events;
pub mod example1;
pub mod golden;
pub mod infostructure;
pub mod montecarlo;
pub mod operators;
pub mod parallel;
pub mod partition;
pub mod rational;
pub mod scenario;

pub use counts::{CountProfile, CountSpace, CountVector, ProfileSpace};
pub use engine::{CountLaw, EngineConfig, VectorLaw};
pub use error::{Error, Result};
pub use events::{EpistemicEvent, Provenance};
pub use infostructure::{InfoStructure, PartitionMode, ValidationReport, Violation};
pub use operators::{CommonBelief, CommonBeliefRule, EvidenceReport, Horizon};
pub use partition::{common_identification, identification_partition, Partition};
pub use rational::Rational;
pub use scenario::Scenario;
