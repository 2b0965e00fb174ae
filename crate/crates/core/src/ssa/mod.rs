//! The success-story learner.
//!
//! A stochastic policy picks actions, some of which rewrite the policy
//! itself. Rewrites happen inside policy modification processes opened and
//! closed by the policy's own choices; each opening checkpoints the rows it
//! will touch. When a new process starts, checkpoints are undone newest-first
//! until reward per unit time, measured from each surviving checkpoint to
//! now, strictly increases along the stack.

pub mod env;
pub mod learner;
pub mod levin;
pub mod policy;
pub mod stack;

pub use env::{Environment, SwitchingBandit};
pub use learner::{
    run_frozen, run_learner, uniform_baseline, Action, EventKind, Learner, LearnerConfig, LearnerOutcome, LearnerTrace,
    TraceRecord,
};
pub use levin::{levin_search_pmp, Edit, LevinConfig, LevinResult, TrialOutcome};
pub use policy::{select_action, Policy};
pub use stack::{apply_pla, ssc_evaluate, ssc_holds, CheckpointStack, StackEntry};
