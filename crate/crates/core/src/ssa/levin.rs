//! Levin search over short policy edit programs.
//!
//! Edit programs are strings over a four-letter alphabet. In phase `i` a
//! program `p` gets `unit * 2^i * 4^-|p|` time units, and is tried once the
//! allowance covers its cost: one unit per edit plus the trial run.

use serde::{Deserialize, Serialize};

use super::env::Environment;
use super::learner::{run_frozen, Action, Learner};
use super::policy::Policy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Edit {
    Up(usize),
    Down(usize),
}

impl Edit {
    pub const ALL: [Edit; 4] = [Edit::Up(0), Edit::Up(1), Edit::Down(0), Edit::Down(1)];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevinConfig {
    /// State whose row the edits rewrite.
    pub state: usize,
    pub gamma: f64,
    /// Actions run with the edited, frozen policy before the predicate looks.
    pub trial_steps: u64,
    pub unit: f64,
}

impl LevinConfig {
    /// Trial length `2W` for a bandit of period `W`.
    pub fn for_period(state: usize, period: u64) -> Self {
        LevinConfig { state, gamma: 2.0, trial_steps: 2 * period, unit: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub policy: Policy,
    pub reward: f64,
    pub steps: u64,
}

impl TrialOutcome {
    pub fn reward_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.reward / self.steps as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevinResult {
    pub edits: Vec<Edit>,
    pub phase: u32,
    pub trials: u64,
}

/// Applies `edits` to a copy of `policy` at `state`.
pub fn apply_edits(policy: &Policy, state: usize, gamma: f64, edits: &[Edit]) -> Policy {
    let mut p = policy.clone();
    for e in edits {
        let (arm, g) = match *e {
            Edit::Up(a) => (a, gamma),
            Edit::Down(a) => (a, 1.0 / gamma),
        };
        p.scale(state, Action::Arm(arm).index(), g).expect("edit within policy shape");
    }
    p
}

fn trial<E: Environment>(base: &Learner<E>, config: &LevinConfig, edits: &[Edit]) -> TrialOutcome {
    let policy = apply_edits(&base.policy, config.state, config.gamma, edits);
    // Every candidate sees the same random stream.
    let reward = run_frozen(base.env.clone(), &policy, config.trial_steps, base.time()).expect("shape checked");
    TrialOutcome { policy, reward, steps: config.trial_steps }
}

fn nth_program(mut index: u64, len: usize) -> Vec<Edit> {
    let mut v = vec![Edit::ALL[0]; len];
    for slot in v.iter_mut().rev() {
        *slot = Edit::ALL[(index % 4) as usize];
        index /= 4;
    }
    v
}

/// Searches for the first edit program, in phase then shortlex order, whose
/// trial satisfies `predicate`. Each program is tried at most once: in the
/// first phase whose allowance covers it.
pub fn levin_search_pmp<E, F>(
    base: &Learner<E>,
    predicate: F,
    dsl_max_len: usize,
    max_phase: u32,
    config: LevinConfig,
) -> Option<LevinResult>
where
    E: Environment,
    F: Fn(&TrialOutcome) -> bool,
{
    let cost = |len: usize| (len as u64 + config.trial_steps) as f64;
    let allowance = |phase: u32, len: usize| config.unit * 2f64.powi(phase as i32) / 4f64.powi(len as i32);
    let mut next_len = 0;
    let mut trials = 0;
    for phase in 1..=max_phase {
        while next_len <= dsl_max_len && allowance(phase, next_len) >= cost(next_len) {
            for i in 0..4u64.pow(next_len as u32) {
                let edits = nth_program(i, next_len);
                trials += 1;
                if predicate(&trial(base, &config, &edits)) {
                    return Some(LevinResult { edits, phase, trials });
                }
            }
            next_len += 1;
        }
    }
    None
}
