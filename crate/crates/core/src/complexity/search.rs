use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::machine::{symbols_to_string, Machine, Mode, Program, Step, Stop, Symbol, Variant};
use crate::parallel::ordered_map;

/// Search limits: programs of length at most `max_len`, each run for at most
/// `budget` steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_len: usize,
    pub budget: u64,
    pub workers: usize,
}

impl SearchLimits {
    pub fn new(max_len: usize, budget: u64) -> Self {
        SearchLimits { max_len, budget, workers: 1 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidArgument("step budget must be at least 1".into()));
        }
        if self.max_len > 30 {
            return Err(Error::InvalidArgument("search length above 30 is not enumerable".into()));
        }
        Ok(())
    }
}

/// Upper bound on the length of the shortest program printing `target`.
///
/// `k_hat` is only ever an upper bound: a shorter program may exist that needs
/// more than `budget` steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityBound {
    pub target: Vec<Symbol>,
    pub k_hat: Option<usize>,
    pub witness: Option<Program>,
    pub search_max_len: usize,
    pub step_budget: u64,
    pub conditional_on: Option<Vec<Symbol>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityRecord {
    pub target: String,
    pub k_hat: Option<usize>,
    pub witness: Option<String>,
    #[serde(rename = "L")]
    pub max_len: usize,
    #[serde(rename = "B")]
    pub budget: u64,
    pub cond: Option<String>,
}

impl From<&ComplexityBound> for ComplexityRecord {
    fn from(b: &ComplexityBound) -> Self {
        ComplexityRecord {
            target: symbols_to_string(&b.target),
            k_hat: b.k_hat,
            witness: b.witness.as_ref().map(|w| w.to_string()),
            max_len: b.search_max_len,
            budget: b.step_budget,
            cond: b.conditional_on.as_deref().map(symbols_to_string),
        }
    }
}

/// Runs `program` in finite mode and reports whether it halts within `budget`
/// with output exactly `target`. Gives up as soon as the output diverges.
pub fn prints_exactly(program: &[Symbol], target: &[Symbol], budget: u64, variant: Variant, aux: &[Symbol]) -> bool {
    let mut machine = Machine::new(variant, aux);
    let mut tape = program;
    loop {
        if machine.steps() >= budget {
            return machine.is_off_tape(&mut tape) && machine.output() == target;
        }
        match machine.step(&mut tape) {
            Step::Running => {
                let out = machine.output();
                if out.len() > target.len() || out.last().is_some_and(|&s| s != target[out.len() - 1]) {
                    return false;
                }
            }
            Step::Halted | Step::Missing { .. } => return machine.output() == target,
        }
    }
}

fn program_of_rank(len: usize, mut rank: u64) -> Vec<Symbol> {
    let mut v = vec![Symbol::Zero; len];
    for slot in v.iter_mut().rev() {
        *slot = Symbol::ALL[(rank % 3) as usize];
        rank /= 3;
    }
    v
}

/// Lengths at or above this are searched with a data-parallel scan.
const PARALLEL_LEN: usize = 9;

fn first_match(len: usize, limits: &SearchLimits, accept: &(dyn Fn(&[Symbol]) -> bool + Sync)) -> Option<Vec<Symbol>> {
    let count = 3u64.pow(len as u32);
    if limits.workers > 1 && len >= PARALLEL_LEN {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(limits.workers).build().expect("thread pool");
        return pool.install(|| (0..count).into_par_iter().map(|r| program_of_rank(len, r)).find_first(|p| accept(p)));
    }
    let mut p = vec![Symbol::Zero; len];
    for _ in 0..count {
        if accept(&p) {
            return Some(p);
        }
        for slot in p.iter_mut().rev() {
            if *slot == Symbol::Comma {
                *slot = Symbol::Zero;
            } else {
                *slot = Symbol::ALL[slot.digit() + 1];
                break;
            }
        }
    }
    None
}

fn search(target: &[Symbol], limits: SearchLimits, variant: Variant, aux: &[Symbol]) -> Result<ComplexityBound> {
    limits.validate()?;
    let accept = |p: &[Symbol]| prints_exactly(p, target, limits.budget, variant, aux);
    let witness = (0..=limits.max_len).find_map(|len| first_match(len, &limits, &accept));
    Ok(ComplexityBound {
        target: target.to_vec(),
        k_hat: witness.as_ref().map(Vec::len),
        witness: witness.map(Program::new),
        search_max_len: limits.max_len,
        step_budget: limits.budget,
        conditional_on: (variant == Variant::T3c).then(|| aux.to_vec()),
    })
}

/// Shortlex-first shortest T3 program of length `<= max_len` that halts
/// within the budget with output exactly `target`.
pub fn shortest_program_upper_bound(target: &[Symbol], limits: SearchLimits) -> Result<ComplexityBound> {
    search(target, limits, Variant::T3, &[])
}

/// As [`shortest_program_upper_bound`], on the T3C machine reading `cond`
/// from its auxiliary tape.
pub fn conditional_upper_bound(target: &[Symbol], cond: &[Symbol], limits: SearchLimits) -> Result<ComplexityBound> {
    search(target, limits, Variant::T3c, cond)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutualInformation {
    /// `max(0, K(y) - K(y|x))`.
    pub value: u64,
    /// The unclamped difference.
    pub raw: i64,
    /// The conditional bound came out above the plain one, which only budget
    /// truncation can cause.
    pub truncated: bool,
    pub k_y: usize,
    pub k_y_given_x: usize,
}

/// Estimate of the information `x` carries about `y`: `K(y) - K(y|x)`.
/// `None` when either search finds nothing within its limits.
pub fn mutual_information_estimate(
    x: &[Symbol],
    y: &[Symbol],
    limits: SearchLimits,
) -> Result<Option<MutualInformation>> {
    let plain = shortest_program_upper_bound(y, limits)?;
    let cond = conditional_upper_bound(y, x, limits)?;
    let (Some(k_y), Some(k_y_given_x)) = (plain.k_hat, cond.k_hat) else {
        return Ok(None);
    };
    let raw = k_y as i64 - k_y_given_x as i64;
    Ok(Some(MutualInformation { value: raw.max(0) as u64, raw, truncated: raw < 0, k_y, k_y_given_x }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub n: usize,
    pub c: usize,
    pub total: u64,
    pub compressible: u64,
    pub fraction: f64,
    #[serde(rename = "L")]
    pub max_len: usize,
    #[serde(rename = "B")]
    pub budget: u64,
}

impl CensusReport {
    /// The counting bound: fewer than `3^(n-c)` programs are shorter than `n - c`.
    pub fn bound(&self) -> f64 {
        3f64.powi(-(self.c as i32))
    }

    pub fn within_bound(&self) -> bool {
        self.fraction < self.bound()
    }
}

/// Searches every string of length `n` and counts those with `k_hat < n - c`.
pub fn compressibility_census(n: usize, c: usize, limits: SearchLimits) -> Result<CensusReport> {
    if c == 0 {
        return Err(Error::InvalidArgument("the margin c must be positive".into()));
    }
    if n > 12 {
        return Err(Error::InvalidArgument("census length above 12 is not enumerable".into()));
    }
    limits.validate()?;
    let total = 3u64.pow(n as u32);
    let targets: Vec<Vec<Symbol>> = (0..total).map(|r| program_of_rank(n, r)).collect();
    let hits: Vec<bool> = if n <= c {
        vec![false; targets.len()]
    } else {
        // Only programs shorter than n - c can make a string compressible.
        let inner = SearchLimits { max_len: limits.max_len.min(n - c - 1), workers: 1, ..limits };
        ordered_map(targets, limits.workers, move |t| {
            shortest_program_upper_bound(&t, inner).map(|b| b.k_hat.is_some_and(|k| k + c < n)).unwrap_or(false)
        })
    };
    let compressible = hits.iter().filter(|&&h| h).count() as u64;
    Ok(CensusReport {
        n,
        c,
        total,
        compressible,
        fraction: compressible as f64 / total as f64,
        max_len: limits.max_len,
        budget: limits.budget,
    })
}

/// Runs `program` and returns its output if it halts in finite mode.
pub fn finite_output(program: &[Symbol], budget: u64, variant: Variant, aux: &[Symbol]) -> Option<Vec<Symbol>> {
    let mut machine = Machine::new(variant, aux);
    let mut tape = program;
    match machine.run_until(&mut tape, budget) {
        Stop::Budget => None,
        stop => {
            let r = machine.finish(stop, Mode::Finite, Some(program.len()));
            Some(r.output)
        }
    }
}
