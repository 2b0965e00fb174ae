use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const MIN_GAMMA: f64 = 0.25;
pub const MAX_GAMMA: f64 = 4.0;

/// A stochastic policy: one probability vector over actions per observed state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    table: Vec<Vec<f64>>,
    epsilon: f64,
}

impl Policy {
    pub fn uniform(states: usize, actions: usize) -> Self {
        Self::uniform_with_floor(states, actions, DEFAULT_EPSILON)
    }

    pub fn uniform_with_floor(states: usize, actions: usize, epsilon: f64) -> Self {
        assert!(actions > 0 && epsilon * actions as f64 <= 1.0);
        Policy { table: vec![vec![1.0 / actions as f64; actions]; states], epsilon }
    }

    /// Builds a policy from explicit rows. Rows must sum to 1; the floor is
    /// not imposed here, so degenerate vectors are allowed.
    pub fn from_rows(table: Vec<Vec<f64>>, epsilon: f64) -> Result<Self> {
        let width = table.first().map_or(0, Vec::len);
        for (s, row) in table.iter().enumerate() {
            if row.len() != width || width == 0 {
                return Err(Error::Model(format!("row {s} has {} entries, expected {width}", row.len())));
            }
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::Model(format!("row {s} is not a probability vector")));
            }
        }
        Ok(Policy { table, epsilon })
    }

    pub fn states(&self) -> usize {
        self.table.len()
    }

    pub fn actions(&self) -> usize {
        self.table.first().map_or(0, Vec::len)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn row(&self, state: usize) -> Result<&[f64]> {
        self.table.get(state).map(Vec::as_slice).ok_or(Error::UnknownState(state))
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub(crate) fn replace_row(&mut self, state: usize, row: Vec<f64>) {
        self.table[state] = row;
    }

    /// Multiplies one entry by `gamma`, renormalizes and re-imposes the floor.
    /// Returns the previous row.
    pub(crate) fn scale(&mut self, state: usize, action: usize, gamma: f64) -> Result<Vec<f64>> {
        if action >= self.actions() {
            return Err(Error::InvalidArgument(format!("action {action} out of range")));
        }
        if !(MIN_GAMMA..=MAX_GAMMA).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("factor {gamma} outside [1/4, 4]")));
        }
        let row = self.table.get_mut(state).ok_or(Error::UnknownState(state))?;
        let old = row.clone();
        row[action] *= gamma;
        normalize_with_floor(row, self.epsilon);
        Ok(old)
    }

    /// True when every row sums to 1 within `1e-9` and respects the floor.
    pub fn is_valid(&self) -> bool {
        self.table.iter().all(|row| {
            (row.iter().sum::<f64>() - 1.0).abs() <= 1e-9 && row.iter().all(|&p| p >= self.epsilon * (1.0 - 1e-12))
        })
    }
}

/// Normalizes `row` to sum 1 with every entry at least `epsilon`.
///
/// Entries that would fall below the floor are pinned to it and the rest
/// share the remaining mass in proportion.
pub fn normalize_with_floor(row: &mut [f64], epsilon: f64) {
    let n = row.len();
    let mut pinned = vec![false; n];
    loop {
        let free: f64 = row.iter().zip(&pinned).filter(|(_, &p)| !p).map(|(x, _)| *x).sum();
        let k = pinned.iter().filter(|&&p| p).count();
        let share = 1.0 - k as f64 * epsilon;
        let mut changed = false;
        for i in 0..n {
            if pinned[i] {
                row[i] = epsilon;
            } else {
                row[i] = if free > 0.0 { row[i] * share / free } else { share / (n - k) as f64 };
                if row[i] < epsilon {
                    pinned[i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// Samples an action from the state's vector using exactly one uniform draw.
pub fn select_action<R: Rng + ?Sized>(policy: &Policy, state: usize, rng: &mut R) -> Result<usize> {
    let row = policy.row(state)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (a, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(a);
        }
    }
    // Rounding left `acc` just below 1: take the last action with mass.
    Ok(row.iter().rposition(|&p| p > 0.0).unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn degenerate_row_always_first() {
        let p = Policy::from_rows(vec![vec![1.0, 0.0, 0.0]], DEFAULT_EPSILON).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| select_action(&p, 0, &mut rng).unwrap() == 0));
    }

    #[test]
    fn uniform_frequencies_within_four_sigma() {
        let p = Policy::uniform(1, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut counts = [0u32; 4];
        for _ in 0..n {
            counts[select_action(&p, 0, &mut rng).unwrap()] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * 0.25).abs() <= 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn selection_is_reproducible() {
        let p = Policy::uniform(2, 5);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|i| select_action(&p, i % 2, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert!(select_action(&p, 2, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn scale_doubles_and_renormalizes() {
        let mut p = Policy::uniform(1, 2);
        let old = p.scale(0, 0, 2.0).unwrap();
        assert_eq!(old, vec![0.5, 0.5]);
        let row = p.row(0).unwrap();
        assert!((row[0] - 2.0 / 3.0).abs() < 1e-15 && (row[1] - 1.0 / 3.0).abs() < 1e-15);
        let mut q = Policy::uniform(1, 3);
        q.scale(0, 1, 1.0).unwrap();
        assert_eq!(q, Policy::uniform(1, 3));
        assert!(q.scale(0, 0, 5.0).is_err());
        assert!(q.scale(0, 3, 2.0).is_err());
    }

    #[test]
    fn floor_holds_under_repeated_shrinking() {
        let mut p = Policy::uniform(1, 4);
        for _ in 0..200 {
            p.scale(0, 2, 0.25).unwrap();
            p.scale(0, 0, 4.0).unwrap();
        }
        assert!(p.is_valid());
        let row = p.row(0).unwrap();
        assert!((row[2] - DEFAULT_EPSILON).abs() < 1e-15);
        assert!(row[0] > 0.99);
    }
}
