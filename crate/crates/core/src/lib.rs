//! Desk-scale algorithmic information experiments on a small prefix machine.
//!
//! - [`machine`]: the interpreter (finite, lazy, conditional and dual variants)
//! - [`enumeration`]: shortlex program indexing and the dovetailing scheduler
//! - [`multiverse`]: reading outputs as sequences of universe states
//! - [`complexity`]: budgeted shortest-program search, census, entropy coding
//! - [`prior`]: the universal prior by sampling and by exact enumeration
//! - [`ssa`]: the success-story learner

pub mod complexity;
pub mod enumeration;
pub mod error;
pub mod machine;
pub mod multiverse;
pub mod parallel;
pub mod prior;
pub mod ssa;

pub use error::{Error, Result};
pub use machine::{Mode, Program, RunMode, RunResult, Status, Symbol, Variant};
