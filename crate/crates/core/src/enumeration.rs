//! Shortlex indexing of programs and the dovetailing scheduler.
//!
//! Programs are listed by length, then lexicographically with digit order
//! `0 < 1 < ,`, starting from index 1 for the empty program.
//!
//! Dovetailing gives `A_1` every second global step, `A_2` every second of the
//! remaining steps, and so on. Step `t` (1-based) therefore belongs to
//! `A_{v+1}` where `2^v` is the largest power of two dividing `t`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::{symbols_to_string, Machine, Mode, Program, RunMode, Step, Stop, Symbol};
use crate::parallel::ordered_map;

/// 1-based position in the shortlex program list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProgramIndex(u64);

impl ProgramIndex {
    pub fn new(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("program indices start at 1".into()));
        }
        Ok(ProgramIndex(k))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

/// Number of programs strictly shorter than `len`: (3^len - 1) / 2.
fn count_shorter(len: u32) -> Option<u64> {
    3u64.checked_pow(len).map(|p| (p - 1) / 2)
}

pub fn index_to_program(k: ProgramIndex) -> Program {
    let offset = k.0 - 1;
    let mut len = 0u32;
    while let Some(next) = count_shorter(len + 1) {
        if next > offset {
            break;
        }
        len += 1;
    }
    let mut rank = offset - count_shorter(len).expect("bounded by loop");
    let mut symbols = vec![Symbol::Zero; len as usize];
    for slot in symbols.iter_mut().rev() {
        *slot = Symbol::ALL[(rank % 3) as usize];
        rank /= 3;
    }
    Program::new(symbols)
}

pub fn program_to_index(p: &Program) -> Result<ProgramIndex> {
    let overflow = || Error::InvalidArgument(format!("program of length {} has no 64-bit index", p.len()));
    let mut rank: u64 = 0;
    for s in p.symbols() {
        rank = rank.checked_mul(3).and_then(|r| r.checked_add(s.digit() as u64)).ok_or_else(overflow)?;
    }
    let base = count_shorter(p.len() as u32).ok_or_else(overflow)?;
    base.checked_add(rank).and_then(|v| v.checked_add(1)).map(ProgramIndex).ok_or_else(overflow)
}

/// All programs of length `min_len..=max_len` in shortlex order.
#[derive(Clone, Debug)]
pub struct Shortlex {
    current: Vec<Symbol>,
    max_len: usize,
    done: bool,
}

impl Shortlex {
    pub fn up_to(max_len: usize) -> Self {
        Shortlex::between(0, max_len)
    }

    pub fn between(min_len: usize, max_len: usize) -> Self {
        Shortlex { current: vec![Symbol::Zero; min_len], max_len, done: min_len > max_len }
    }
}

impl Iterator for Shortlex {
    type Item = Vec<Symbol>;

    fn next(&mut self) -> Option<Vec<Symbol>> {
        if self.done {
            return None;
        }
        let item = self.current.clone();
        advance(&mut self.current);
        if self.current.len() > self.max_len {
            self.done = true;
        }
        Some(item)
    }
}

/// Odometer increment in shortlex order; wraps to the next length.
fn advance(v: &mut Vec<Symbol>) {
    for slot in v.iter_mut().rev() {
        if *slot == Symbol::Comma {
            *slot = Symbol::Zero;
        } else {
            *slot = Symbol::ALL[slot.digit() + 1];
            return;
        }
    }
    let len = v.len() + 1;
    v.clear();
    v.resize(len, Symbol::Zero);
}

/// Calls `f` on every program of length `0..=max_len` in shortlex order until
/// it returns `false`.
pub fn for_each_program(max_len: usize, mut f: impl FnMut(&[Symbol]) -> bool) {
    for len in 0..=max_len {
        let mut current = vec![Symbol::Zero; len];
        loop {
            if !f(&current) {
                return;
            }
            let mut i = len;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if current[i] == Symbol::Comma {
                    current[i] = Symbol::Zero;
                } else {
                    current[i] = Symbol::ALL[current[i].digit() + 1];
                    break;
                }
            }
            if current.iter().all(|&s| s == Symbol::Zero) {
                break;
            }
        }
    }
}

/// Owner of global dovetail step `t` (1-based).
pub fn dovetail_step_owner(t: u64) -> Result<ProgramIndex> {
    if t == 0 {
        return Err(Error::InvalidArgument("dovetail steps start at 1".into()));
    }
    Ok(ProgramIndex(t.trailing_zeros() as u64 + 1))
}

/// Steps offered to `A_k` during the first `total` global steps.
pub fn offered_steps(k: ProgramIndex, total: u64) -> u64 {
    let v = k.0 - 1;
    if v >= 64 {
        return 0;
    }
    let lo = total >> v;
    let hi = if v + 1 >= 64 { 0 } else { total >> (v + 1) };
    lo - hi
}

pub const DEFAULT_OUTPUT_CAP: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DovetailEntry {
    pub k: u64,
    pub program: String,
    pub steps: u64,
    pub halted: bool,
    pub output_prefix: String,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DovetailRegistry {
    pub entries: Vec<DovetailEntry>,
    /// Global steps scheduled.
    pub clock: u64,
    /// Instructions actually executed; halted programs forfeit their turns.
    pub total_steps: u64,
    pub output_cap: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct DovetailConfig {
    pub total_steps: u64,
    pub per_program_budget: u64,
    pub mode: RunMode,
    pub output_cap: usize,
    pub workers: usize,
}

impl DovetailConfig {
    pub fn new(total_steps: u64, per_program_budget: u64, mode: RunMode) -> Self {
        DovetailConfig { total_steps, per_program_budget, mode, output_cap: DEFAULT_OUTPUT_CAP, workers: 1 }
    }

    fn validate(&self) -> Result<()> {
        if self.total_steps == 0 || self.per_program_budget == 0 {
            return Err(Error::InvalidArgument("dovetail needs positive step counts".into()));
        }
        if self.mode.variant == crate::machine::Variant::T3c {
            return Err(Error::InvalidArgument("dovetailing runs without an auxiliary tape".into()));
        }
        Ok(())
    }

    /// Highest program index offered at least one step.
    fn max_index(&self) -> u64 {
        64 - self.total_steps.leading_zeros() as u64
    }
}

struct Slot {
    program: Program,
    machine: Machine<'static>,
    halted: bool,
    stuck: bool,
}

impl Slot {
    fn new(k: u64, mode: RunMode) -> Self {
        Slot {
            program: index_to_program(ProgramIndex(k)),
            machine: Machine::new(mode.variant, &[]),
            halted: false,
            stuck: false,
        }
    }

    fn entry(self, k: u64, cap: usize) -> DovetailEntry {
        let out = self.machine.output();
        DovetailEntry {
            k,
            program: self.program.to_string(),
            steps: self.machine.steps(),
            halted: self.halted,
            output_prefix: symbols_to_string(&out[..out.len().min(cap)]),
            truncated: out.len() > cap,
        }
    }
}

/// Interleaves all programs on one global clock.
///
/// With `workers > 1` each program is advanced independently by its closed-form
/// share of the clock; the registry is identical to the interleaved run.
pub fn dovetail(config: &DovetailConfig) -> Result<DovetailRegistry> {
    config.validate()?;
    let entries = if config.workers <= 1 { interleaved(config) } else { per_program(config) };
    let total_steps = entries.iter().map(|e| e.steps).sum();
    Ok(DovetailRegistry { entries, clock: config.total_steps, total_steps, output_cap: config.output_cap })
}

fn interleaved(config: &DovetailConfig) -> Vec<DovetailEntry> {
    let n = config.max_index();
    let mut slots: Vec<Slot> = (1..=n).map(|k| Slot::new(k, config.mode)).collect();
    for t in 1..=config.total_steps {
        let k = t.trailing_zeros() as usize;
        let slot = &mut slots[k];
        if slot.halted || slot.stuck || slot.machine.steps() >= config.per_program_budget {
            continue;
        }
        let mut tape = slot.program.symbols();
        match slot.machine.step(&mut tape) {
            Step::Running => {
                if slot.machine.is_off_tape(&mut tape) {
                    mark_off_tape(slot, config.mode.mode);
                }
            }
            Step::Halted => slot.halted = true,
            Step::Missing { .. } => mark_off_tape(slot, config.mode.mode),
        }
    }
    slots.into_iter().enumerate().map(|(i, s)| s.entry(i as u64 + 1, config.output_cap)).collect()
}

fn mark_off_tape(slot: &mut Slot, mode: Mode) {
    match mode {
        Mode::Finite => slot.halted = true,
        Mode::Lazy => slot.stuck = true,
    }
}

fn per_program(config: &DovetailConfig) -> Vec<DovetailEntry> {
    let ks: Vec<u64> = (1..=config.max_index()).collect();
    let cfg = *config;
    ordered_map(ks, config.workers, move |k| {
        let mut slot = Slot::new(k, cfg.mode);
        let allowance = offered_steps(ProgramIndex(k), cfg.total_steps).min(cfg.per_program_budget);
        let mut tape = slot.program.symbols();
        // A program never offered a turn has not been looked at yet.
        if allowance > 0 {
            match slot.machine.run_until(&mut tape, allowance) {
                Stop::Halt => slot.halted = true,
                Stop::OffTape => mark_off_tape(&mut slot, cfg.mode.mode),
                Stop::Budget => {}
            }
        }
        slot.entry(k, cfg.output_cap)
    })
}

impl DovetailRegistry {
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn snapshot_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_snapshot(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    /// Reads a snapshot back. The clock is not recorded in snapshots and is
    /// reported as 0; the output cap defaults to [`DEFAULT_OUTPUT_CAP`].
    pub fn read_snapshot<R: BufRead>(r: R) -> Result<DovetailRegistry> {
        let mut entries = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Snapshot { line: i + 1, reason: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let e: DovetailEntry =
                serde_json::from_str(&line).map_err(|e| Error::Snapshot { line: i + 1, reason: e.to_string() })?;
            entries.push(e);
        }
        let total_steps = entries.iter().map(|e| e.steps).sum();
        Ok(DovetailRegistry { entries, clock: 0, total_steps, output_cap: DEFAULT_OUTPUT_CAP })
    }
}
