//! Selecting small representative example subsets for constraint-based
//! program synthesis.
//!
//! A synthesis task is specified by a dataset of input-output examples over
//! an enumerable parameterized program family. This crate implements the
//! machinery to pick a small subset of those examples that still pins down
//! the same set of consistent programs: an exact greedy selector driven by a
//! model-counting oracle, a learned selector driven by an anticipation
//! network, counterexample-guided synthesis (CEGIS) with several
//! counterexample orders, and verification oracles for the underlying
//! monotonicity/submodularity facts.

pub mod cegis;
pub mod core;
pub mod domains;
pub mod predictor;
pub mod selection;
pub mod error;
pub mod harness;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
