//! Machine outputs read as universe evolutions.
//!
//! An evolution is a string over `{0, 1, ,}`. The `l`-th state is the
//! (possibly empty) bitstring before the `l`-th comma. When the producing
//! program has halted, a trailing segment after the last comma is final and
//! counts as one more state; otherwise it may still grow and is ignored.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::enumeration::DovetailRegistry;
use crate::error::{Error, Result};
use crate::machine::{parse_symbols, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evolution {
    pub raw: Vec<Symbol>,
    /// The producing program halted, so `raw` is final.
    pub complete: bool,
}

impl Evolution {
    pub fn new(raw: Vec<Symbol>, complete: bool) -> Self {
        Evolution { raw, complete }
    }

    pub fn parse(text: &str, complete: bool) -> Result<Self> {
        Ok(Evolution { raw: parse_symbols(text)?, complete })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniverseState {
    pub bits: Vec<bool>,
    /// 1-based time index; state 1 is the initial state.
    pub l: usize,
}

impl UniverseState {
    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

pub fn parse_evolution(e: &Evolution) -> Vec<UniverseState> {
    let mut states = Vec::new();
    let mut bits = Vec::new();
    for &s in &e.raw {
        match s {
            Symbol::Comma => {
                states.push(UniverseState { bits: std::mem::take(&mut bits), l: states.len() + 1 });
            }
            Symbol::Zero => bits.push(false),
            Symbol::One => bits.push(true),
        }
    }
    if e.complete && !bits.is_empty() {
        states.push(UniverseState { bits, l: states.len() + 1 });
    }
    states
}

/// Inverse of [`parse_evolution`] for complete evolutions: states joined by
/// commas, with the final comma omitted when `trailing_comma` is false.
pub fn render_states(states: &[UniverseState], trailing_comma: bool) -> String {
    let mut out = String::new();
    for (i, st) in states.iter().enumerate() {
        out.push_str(&st.to_bit_string());
        if i + 1 < states.len() || trailing_comma {
            out.push(',');
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialHistory {
    pub i: usize,
    pub j: usize,
    pub symbols: Vec<Symbol>,
}

/// Symbols `i..=j` of the evolution, 1-based and inclusive.
pub fn partial_history(e: &Evolution, i: usize, j: usize) -> Result<PartialHistory> {
    if i == 0 || i > j || j > e.raw.len() {
        return Err(Error::IndexOutOfRange { i, j, len: e.raw.len() });
    }
    Ok(PartialHistory { i, j, symbols: e.raw[i - 1..j].to_vec() })
}

/// Equivalence key for grouping programs by the universe they compute.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UniverseKey {
    /// The first `prefix_len` output symbols.
    Prefix(String),
    /// A halted program whose whole output is shorter than the prefix length.
    Finished(String),
    /// A running program whose output is still shorter than the prefix length.
    Pending(String),
}

impl UniverseKey {
    pub fn label(&self) -> String {
        match self {
            UniverseKey::Prefix(s) => s.clone(),
            UniverseKey::Finished(s) => format!("{s}$"),
            UniverseKey::Pending(s) => format!("{s}..."),
        }
    }
}

pub fn universe_key(output: &str, halted: bool, prefix_len: usize) -> UniverseKey {
    if output.len() >= prefix_len {
        UniverseKey::Prefix(output[..prefix_len].to_string())
    } else if halted {
        UniverseKey::Finished(output.to_string())
    } else {
        UniverseKey::Pending(output.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniverseGroup {
    pub prefix: String,
    pub members: Vec<u64>,
}

/// Partitions registry programs by their first `prefix_len` output symbols.
///
/// Halted programs with shorter output are keyed by their full output plus an
/// end marker (`$`); running programs with shorter output are keyed with a
/// `...` marker since their universe is not yet determined. Groups come out
/// sorted by key, members by index.
pub fn dedup_universes(reg: &DovetailRegistry, prefix_len: usize) -> Result<Vec<UniverseGroup>> {
    if prefix_len == 0 || prefix_len > reg.output_cap {
        return Err(Error::InvalidArgument(format!(
            "prefix length must be in 1..={} (the registry output cap)",
            reg.output_cap
        )));
    }
    let mut groups: BTreeMap<UniverseKey, Vec<u64>> = BTreeMap::new();
    for e in &reg.entries {
        groups.entry(universe_key(&e.output_prefix, e.halted, prefix_len)).or_default().push(e.k);
    }
    Ok(groups
        .into_iter()
        .map(|(key, mut members)| {
            members.sort_unstable();
            UniverseGroup { prefix: key.label(), members }
        })
        .collect())
}

/// Textual form of parsed states, for reports.
pub fn states_to_strings(states: &[UniverseState]) -> Vec<String> {
    states.iter().map(UniverseState::to_bit_string).collect()
}
