//! Depth-first branch-and-bound for the permutation flow-shop problem
//! (makespan criterion) on Integer-Vector-Matrix explorers, with work
//! expressed as intervals of factoradic positions in `[0, n!)`.

pub mod bound;
pub mod error;
pub mod explorer;
pub mod factoradic;
pub mod heuristic;
pub mod instance;
pub mod ivm;
pub mod workunit;

pub use error::{Error, Result};
