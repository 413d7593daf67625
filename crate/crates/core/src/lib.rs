//! Mining and enforcement of temporal constraints over knowledge graphs.
//!
//! The pipeline has three stages over an immutable fact store:
//!
//! 1. [`ingest`] reads temporal quads, plain triples, and class memberships
//!    into an interned, indexed [`store::KgStore`].
//! 2. [`miner`] instantiates two structural patterns against the store,
//!    attaches head predicates, scores candidates by entity-level
//!    confidence, and refines borderline candidates with class restrictions.
//! 3. [`detect`] applies accepted constraints back to the store and reports
//!    every matched subgraph whose head evaluates to a definite violation.
//!
//! Time arithmetic lives in [`time`] and [`algebra`]: coarse time values
//! denote day ranges and comparisons fall back to `Unknown` instead of
//! guessing. [`fixture`] generates synthetic graphs with planted
//! regularities for tests and benchmarks.

pub mod algebra;
pub mod detect;
pub mod fixture;
pub mod ingest;
pub mod io;
pub mod miner;
mod par;
pub mod store;
pub mod time;
pub mod truth;

pub use algebra::{eval_predicate, IntervalPredicate, TemporalPredicate};
pub use store::{KgStore, ObjectTerm, ResourceId, StoreBuilder};
pub use time::{DayRange, TimeInterval, TimePoint};
pub use truth::TruthValue;
