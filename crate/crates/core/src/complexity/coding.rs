//! Coding noisy state sequences under a first-order Markov model.
//!
//! A history whose next states are only predictable in probability is still
//! short to describe: the model plus an entropy code of the observed choices.
//! [`shannon_code_length`] gives the ideal length, [`ArithmeticCoder`] gets
//! within a constant of it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_TOLERANCE: f64 = 1e-9;

/// Transition probabilities between a finite set of states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub states: Vec<String>,
    /// `transition[prev][next]`.
    pub transition: Vec<Vec<f64>>,
    /// Distribution of the first state.
    pub initial: Vec<f64>,
}

fn check_distribution(row: &[f64], what: &str) -> Result<()> {
    if row.iter().any(|&p| !(0.0..=1.0).contains(&p) || p.is_nan()) {
        return Err(Error::Model(format!("{what} has an entry outside [0, 1]")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_TOLERANCE {
        return Err(Error::Model(format!("{what} sums to {sum}")));
    }
    Ok(())
}

impl NoiseModel {
    /// Model with a uniform initial distribution.
    pub fn new(states: Vec<String>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let n = states.len();
        let initial = if n == 0 { Vec::new() } else { vec![1.0 / n as f64; n] };
        NoiseModel::with_initial(states, transition, initial)
    }

    pub fn with_initial(states: Vec<String>, transition: Vec<Vec<f64>>, initial: Vec<f64>) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::Model("no states".into()));
        }
        if transition.len() != n || transition.iter().any(|r| r.len() != n) || initial.len() != n {
            return Err(Error::Model(format!("expected {n} x {n} transitions and {n} initial weights")));
        }
        for (i, row) in transition.iter().enumerate() {
            check_distribution(row, &format!("row {i}"))?;
        }
        check_distribution(&initial, "initial distribution")?;
        Ok(NoiseModel { states, transition, initial })
    }

    /// Every state moves to every state with equal probability.
    pub fn uniform(n: usize) -> Result<Self> {
        let states = (0..n).map(|i| i.to_string()).collect();
        NoiseModel::new(states, vec![vec![1.0 / n as f64; n]; n])
    }

    /// Stays in the current state with probability `stay`, otherwise moves to
    /// one of the other states uniformly.
    pub fn sticky(n: usize, stay: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Model("a sticky model needs at least two states".into()));
        }
        let other = (1.0 - stay) / (n - 1) as f64;
        let transition = (0..n).map(|i| (0..n).map(|j| if i == j { stay } else { other }).collect()).collect();
        NoiseModel::new((0..n).map(|i| i.to_string()).collect(), transition)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// Distribution used to code position `i` of `seq`.
    fn distribution(&self, seq: &[usize], i: usize) -> &[f64] {
        if i == 0 {
            &self.initial
        } else {
            &self.transition[seq[i - 1]]
        }
    }

    fn check_states(&self, seq: &[usize]) -> Result<()> {
        match seq.iter().find(|&&s| s >= self.len()) {
            Some(&s) => Err(Error::UnknownState(s)),
            None => Ok(()),
        }
    }
}

/// Ideal code length in bits, split into the first state and the transitions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeLength {
    pub initial_bits: f64,
    pub transition_bits: f64,
}

impl CodeLength {
    pub fn total(&self) -> f64 {
        self.initial_bits + self.transition_bits
    }
}

/// `-log2 p0(first) + sum of -log2 p(next | prev)`.
///
/// A zero-probability observation is an error naming its position: 0 for the
/// first state, `i` for the transition into `seq[i]`.
pub fn shannon_code_length(seq: &[usize], model: &NoiseModel) -> Result<CodeLength> {
    model.check_states(seq)?;
    let mut len = CodeLength { initial_bits: 0.0, transition_bits: 0.0 };
    for i in 0..seq.len() {
        let p = model.distribution(seq, i)[seq[i]];
        if p <= 0.0 {
            return Err(Error::ZeroProbability { step: i });
        }
        if i == 0 {
            len.initial_bits = -p.log2();
        } else {
            len.transition_bits += -p.log2();
        }
    }
    Ok(len)
}

const CODE_BITS: u32 = 32;
const TOP: u64 = (1 << CODE_BITS) - 1;
const HALF: u64 = 1 << (CODE_BITS - 1);
const QUARTER: u64 = 1 << (CODE_BITS - 2);
/// Frequency scale; must stay below `QUARTER` so every interval is non-empty.
const FREQ_TOTAL: u64 = 1 << 24;

/// Integer cumulative frequencies for one distribution. Every symbol with
/// positive probability keeps a count of at least 1.
#[derive(Clone, Debug)]
struct FreqTable {
    cumulative: Vec<u64>,
}

impl FreqTable {
    fn new(probs: &[f64]) -> Self {
        let mut counts: Vec<u64> =
            probs.iter().map(|&p| if p > 0.0 { ((p * FREQ_TOTAL as f64).round() as u64).max(1) } else { 0 }).collect();
        let sum: u64 = counts.iter().sum();
        // Absorb the rounding error in the largest count.
        let (imax, _) = counts.iter().enumerate().max_by_key(|&(_, c)| *c).expect("non-empty");
        if sum > FREQ_TOTAL {
            counts[imax] -= sum - FREQ_TOTAL;
        } else {
            counts[imax] += FREQ_TOTAL - sum;
        }
        let mut cumulative = vec![0u64; counts.len() + 1];
        for (i, c) in counts.iter().enumerate() {
            cumulative[i + 1] = cumulative[i] + c;
        }
        FreqTable { cumulative }
    }

    fn range(&self, s: usize) -> (u64, u64) {
        (self.cumulative[s], self.cumulative[s + 1])
    }

    fn find(&self, target: u64) -> usize {
        // Largest s with cumulative[s] <= target and a non-empty interval.
        self.cumulative.partition_point(|&c| c <= target) - 1
    }
}

/// Bits produced by the arithmetic coder.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Binary arithmetic coder (integer, carry-free with pending bits) driven by a
/// [`NoiseModel`]. The sequence length is transmitted out of band.
#[derive(Clone, Debug)]
pub struct ArithmeticCoder {
    initial: FreqTable,
    rows: Vec<FreqTable>,
}

/// Upper bound on `encoded - ideal` for the sequences exercised here: two
/// termination bits plus quantization and interval-rounding loss.
pub const CODER_SLACK_BITS: f64 = 32.0;

impl ArithmeticCoder {
    pub fn new(model: &NoiseModel) -> Self {
        ArithmeticCoder {
            initial: FreqTable::new(&model.initial),
            rows: model.transition.iter().map(|r| FreqTable::new(r)).collect(),
        }
    }

    fn table(&self, seq: &[usize], i: usize) -> &FreqTable {
        if i == 0 {
            &self.initial
        } else {
            &self.rows[seq[i - 1]]
        }
    }

    pub fn encode(&self, seq: &[usize], model: &NoiseModel) -> Result<BitString> {
        // Validates states and zero-probability transitions.
        shannon_code_length(seq, model)?;
        let mut out = Vec::new();
        if seq.is_empty() {
            return Ok(BitString(out));
        }
        let (mut low, mut high) = (0u64, TOP);
        let mut pending = 0usize;
        let emit = |bit: bool, pending: &mut usize, out: &mut Vec<bool>| {
            out.push(bit);
            out.extend(std::iter::repeat_n(!bit, *pending));
            *pending = 0;
        };
        for i in 0..seq.len() {
            let (lo, hi) = self.table(seq, i).range(seq[i]);
            let range = high - low + 1;
            high = low + range * hi / FREQ_TOTAL - 1;
            low += range * lo / FREQ_TOTAL;
            loop {
                if high < HALF {
                    emit(false, &mut pending, &mut out);
                } else if low >= HALF {
                    emit(true, &mut pending, &mut out);
                    low -= HALF;
                    high -= HALF;
                } else if low >= QUARTER && high < HALF + QUARTER {
                    pending += 1;
                    low -= QUARTER;
                    high -= QUARTER;
                } else {
                    break;
                }
                low <<= 1;
                high = (high << 1) | 1;
            }
        }
        pending += 1;
        emit(low >= QUARTER, &mut pending, &mut out);
        Ok(BitString(out))
    }

    pub fn decode(&self, bits: &BitString, count: usize) -> Vec<usize> {
        let mut seq = Vec::with_capacity(count);
        if count == 0 {
            return seq;
        }
        let mut pos = 0usize;
        let mut next_bit = || {
            let b = bits.0.get(pos).copied().unwrap_or(false);
            pos += 1;
            b as u64
        };
        let mut value = 0u64;
        for _ in 0..CODE_BITS {
            value = (value << 1) | next_bit();
        }
        let (mut low, mut high) = (0u64, TOP);
        for i in 0..count {
            let table = self.table(&seq, i);
            let range = high - low + 1;
            let scaled = ((value - low + 1) * FREQ_TOTAL - 1) / range;
            let s = table.find(scaled);
            let (lo, hi) = table.range(s);
            seq.push(s);
            high = low + range * hi / FREQ_TOTAL - 1;
            low += range * lo / FREQ_TOTAL;
            loop {
                if high < HALF {
                } else if low >= HALF {
                    low -= HALF;
                    high -= HALF;
                    value -= HALF;
                } else if low >= QUARTER && high < HALF + QUARTER {
                    low -= QUARTER;
                    high -= QUARTER;
                    value -= QUARTER;
                } else {
                    break;
                }
                low <<= 1;
                high = (high << 1) | 1;
                value = (value << 1) | next_bit();
            }
        }
        seq
    }
}

/// Encodes then decodes `seq`, returning both.
pub fn arithmetic_roundtrip(seq: &[usize], model: &NoiseModel) -> Result<(BitString, Vec<usize>)> {
    let coder = ArithmeticCoder::new(model);
    let bits = coder.encode(seq, model)?;
    let decoded = coder.decode(&bits, seq.len());
    Ok((bits, decoded))
}

/// Draws `n` states from the chain, seeded.
pub fn sample_sequence(model: &NoiseModel, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seq: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        let row = model.distribution(&seq, i);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let next = row.iter().position(|&p| {
            acc += p;
            u < acc
        });
        seq.push(next.unwrap_or_else(|| row.iter().rposition(|&p| p > 0.0).unwrap_or(0)));
    }
    seq
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_model_costs_nothing() {
        let m = NoiseModel::with_initial(
            vec!["a".into(), "b".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![1.0, 0.0],
        )
        .unwrap();
        let len = shannon_code_length(&[0, 1, 0, 1, 0], &m).unwrap();
        assert_eq!(len.total(), 0.0);
    }

    #[test]
    fn uniform_binary_costs_one_bit_per_transition() {
        let m = NoiseModel::uniform(2).unwrap();
        let seq = [0, 1, 1, 0, 1, 0, 0, 0, 1, 1, 1];
        let len = shannon_code_length(&seq, &m).unwrap();
        assert!((len.transition_bits - 10.0).abs() < 1e-12);
        assert!((len.initial_bits - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sticky_constant_sequence() {
        let m = NoiseModel::sticky(2, 0.9).unwrap();
        let len = shannon_code_length(&[0; 101], &m).unwrap();
        // 100 * -log2(0.9) = 15.200309344504995
        assert!((len.transition_bits - 15.200309344504995).abs() < 1e-9);
    }

    #[test]
    fn zero_probability_names_the_step() {
        let m = NoiseModel::new(vec!["a".into(), "b".into()], vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        assert_eq!(shannon_code_length(&[0, 0, 1], &m), Err(Error::ZeroProbability { step: 2 }));
        assert_eq!(shannon_code_length(&[0, 7], &m), Err(Error::UnknownState(7)));
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(NoiseModel::new(vec!["a".into(), "b".into()], vec![vec![0.6, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(NoiseModel::new(vec!["a".into()], vec![vec![0.5, 0.5]]).is_err());
        assert!(NoiseModel::new(vec![], vec![]).is_err());
    }

    #[test]
    fn empty_sequence() {
        let m = NoiseModel::uniform(3).unwrap();
        let (bits, back) = arithmetic_roundtrip(&[], &m).unwrap();
        assert!(bits.is_empty());
        assert!(back.is_empty());
    }

    #[test]
    fn sticky_roundtrip_is_short() {
        let m = NoiseModel::sticky(2, 0.9).unwrap();
        let seq = vec![0usize; 100];
        let (bits, back) = arithmetic_roundtrip(&seq, &m).unwrap();
        assert_eq!(back, seq);
        assert!(bits.len() <= 48, "{} bits", bits.len());
    }

    #[test]
    fn uniform_roundtrip_near_raw_length() {
        let m = NoiseModel::uniform(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let seq: Vec<usize> = (0..500).map(|_| rng.gen_range(0..2)).collect();
        let (bits, back) = arithmetic_roundtrip(&seq, &m).unwrap();
        assert_eq!(back, seq);
        assert!((bits.len() as f64 - 500.0).abs() <= 32.0);
    }

    #[test]
    fn skewed_rows_with_tiny_probabilities() {
        let m = NoiseModel::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.9998, 0.0001, 0.0001], vec![0.3, 0.3, 0.4], vec![0.0, 0.5, 0.5]],
        )
        .unwrap();
        let seq = [0, 0, 1, 2, 2, 1, 0, 0, 0, 2, 1, 1];
        let (bits, back) = arithmetic_roundtrip(&seq, &m).unwrap();
        assert_eq!(back, seq);
        let ideal = shannon_code_length(&seq, &m).unwrap().total();
        assert!(bits.len() as f64 <= ideal + CODER_SLACK_BITS);
    }

    #[test]
    fn sampled_sequences_are_seeded_and_valid() {
        let m = NoiseModel::sticky(3, 0.8).unwrap();
        let a = sample_sequence(&m, 500, 4);
        assert_eq!(a, sample_sequence(&m, 500, 4));
        assert!(a.iter().all(|&s| s < 3));
        let stays = a.windows(2).filter(|w| w[0] == w[1]).count();
        assert!(stays > 350 && stays < 450, "{stays}");
        assert!(sample_sequence(&m, 0, 0).is_empty());
    }
}
