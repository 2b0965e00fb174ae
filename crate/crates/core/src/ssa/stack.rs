use serde::{Deserialize, Serialize};

use super::policy::Policy;
use crate::error::{Error, Result};

/// A checkpoint: the start of a policy modification process and the rows it
/// overwrote, oldest first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackEntry {
    pub start: u64,
    pub reward_at_start: f64,
    pub modifications: Vec<(usize, Vec<f64>)>,
    /// `None` while the process is still open.
    pub end: Option<u64>,
}

impl StackEntry {
    pub fn is_open(&self) -> bool {
        self.end.is_none()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStack {
    entries: Vec<StackEntry>,
}

impl CheckpointStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[StackEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn has_open(&self) -> bool {
        self.entries.last().is_some_and(StackEntry::is_open)
    }

    /// Opens a new checkpoint at time `t`. Start times must increase.
    pub fn push(&mut self, t: u64, reward: f64) -> Result<()> {
        if self.entries.last().is_some_and(|e| e.start >= t) {
            return Err(Error::InvalidArgument(format!("checkpoint at {t} does not follow the previous one")));
        }
        self.entries.push(StackEntry { start: t, reward_at_start: reward, modifications: Vec::new(), end: None });
        Ok(())
    }

    /// Closes the open checkpoint, if any.
    pub fn close(&mut self, t: u64) -> bool {
        match self.entries.last_mut() {
            Some(e) if e.is_open() => {
                e.end = Some(t);
                true
            }
            _ => false,
        }
    }

    /// Removes the newest checkpoint and undoes its modifications in reverse.
    pub fn pop_restore(&mut self, policy: &mut Policy) -> Option<StackEntry> {
        let entry = self.entries.pop()?;
        for (state, row) in entry.modifications.iter().rev() {
            policy.replace_row(*state, row.clone());
        }
        Some(entry)
    }

    /// `(v_i, R(v_i))` for every stacked checkpoint, oldest first.
    pub fn checkpoints(&self) -> Vec<(u64, f64)> {
        self.entries.iter().map(|e| (e.start, e.reward_at_start)).collect()
    }
}

/// Multiplies one policy entry by `gamma` inside the open checkpoint, saving
/// the old row. Without an open checkpoint nothing changes and `false` is
/// returned.
pub fn apply_pla(
    policy: &mut Policy,
    state: usize,
    action: usize,
    gamma: f64,
    stack: &mut CheckpointStack,
) -> Result<bool> {
    if !stack.has_open() {
        policy.row(state)?;
        return Ok(false);
    }
    let old = policy.scale(state, action, gamma)?;
    stack.entries.last_mut().expect("open entry").modifications.push((state, old));
    Ok(true)
}

/// Index of the first checkpoint whose reward rate fails to beat the rate
/// measured from the checkpoint below it (from time 0 for the oldest).
fn first_violation(t: u64, reward: f64, checkpoints: &[(u64, f64)]) -> Option<usize> {
    // a/b < c/d with b, d > 0, compared without division.
    let mut prev = (reward, t as f64);
    for (i, &(v, rv)) in checkpoints.iter().enumerate() {
        let cur = (reward - rv, (t - v) as f64);
        if prev.0 * cur.1 >= cur.0 * prev.1 {
            return Some(i);
        }
        prev = cur;
    }
    None
}

/// The success-story criterion at time `t` with cumulative reward `reward`:
/// true when `checkpoints` is empty or
/// `R(t)/t < (R(t)-R(v_1))/(t-v_1) < ... < (R(t)-R(v_k))/(t-v_k)`.
pub fn ssc_holds(t: u64, reward: f64, checkpoints: &[(u64, f64)]) -> Result<bool> {
    if checkpoints.windows(2).any(|w| w[0].0 >= w[1].0) || checkpoints.last().is_some_and(|c| c.0 >= t) {
        return Err(Error::InvalidArgument("checkpoint times must increase and precede t".into()));
    }
    Ok(first_violation(t, reward, checkpoints).is_none())
}

/// Pops newest-first, restoring the policy, until the criterion holds.
/// Returns the popped entries, newest first.
pub fn ssc_evaluate(t: u64, reward: f64, stack: &mut CheckpointStack, policy: &mut Policy) -> Vec<StackEntry> {
    let mut popped = Vec::new();
    while let Some(i) = first_violation(t, reward, &stack.checkpoints()) {
        while stack.len() > i {
            popped.push(stack.pop_restore(policy).expect("non-empty"));
        }
    }
    popped
}
