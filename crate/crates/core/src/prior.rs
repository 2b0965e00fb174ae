//! The universal prior of the prefix machine.
//!
//! A program is *canonical* when a lazy run halts after visiting exactly its
//! own squares. Canonical programs form a prefix-free set, so their weights
//! `3^-|p|` sum to at most 1. The prior of a string is the total weight of
//! the canonical programs that print it, estimated here in two ways:
//!
//! - by sampling: draw each new square uniformly as the head reaches it,
//! - by enumeration: walk the tree of tape prefixes up to a length cap.
//!
//! Both are lower bounds, since length caps and step budgets only drop mass.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complexity::search::{finite_output, shortest_program_upper_bound, SearchLimits};
use crate::enumeration::for_each_program;
use crate::error::{Error, Result};
use crate::machine::{
    is_canonical, run_lazy_sampled_variant, symbols_to_string, Machine, Program, SampledTape, Step, Symbol, Variant,
};
use crate::parallel::ordered_map;

/// A canonical program and what it prints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalProgram {
    pub program: Vec<Symbol>,
    pub output: Vec<Symbol>,
    pub steps: u64,
}

/// Every canonical program of length `<= max_len` that halts within `budget`
/// steps, in shortlex order.
///
/// Walks the tree of tape prefixes: the machine runs until it asks for a
/// square it has not seen, then branches on the three possible symbols.
pub fn canonical_programs(max_len: usize, budget: u64, variant: Variant) -> Result<Vec<CanonicalProgram>> {
    if budget == 0 {
        return Err(Error::InvalidArgument("step budget must be at least 1".into()));
    }
    if variant == Variant::T3c {
        return Err(Error::InvalidArgument("the prior is defined without an auxiliary tape".into()));
    }
    let mut found = Vec::new();
    let mut prefix = Vec::with_capacity(max_len);
    walk(Machine::new(variant, &[]), &mut prefix, max_len, budget, &mut found);
    found.sort_by(|a, b| (a.program.len(), &a.program).cmp(&(b.program.len(), &b.program)));
    Ok(found)
}

fn walk(
    mut m: Machine<'static>,
    prefix: &mut Vec<Symbol>,
    max_len: usize,
    budget: u64,
    found: &mut Vec<CanonicalProgram>,
) {
    loop {
        if m.steps() >= budget {
            return;
        }
        let mut tape = prefix.as_slice();
        match m.step(&mut tape) {
            Step::Running => {}
            Step::Halted => {
                debug_assert_eq!(m.state().consumed, prefix.len());
                found.push(CanonicalProgram { program: prefix.clone(), output: m.output().to_vec(), steps: m.steps() });
                return;
            }
            Step::Missing { index } => {
                debug_assert_eq!(index, prefix.len());
                if prefix.len() >= max_len {
                    return;
                }
                for s in Symbol::ALL {
                    prefix.push(s);
                    walk(m.clone(), prefix, max_len, budget, found);
                    prefix.pop();
                }
                return;
            }
        }
    }
}

/// Exact weight `sum 3^-|p|` kept as `numerator / 3^max_len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mass {
    pub numerator: u64,
    pub max_len: usize,
}

impl Mass {
    fn new(max_len: usize) -> Self {
        Mass { numerator: 0, max_len }
    }

    fn add_program(&mut self, len: usize) {
        self.numerator += 3u64.pow((self.max_len - len) as u32);
    }

    pub fn denominator(&self) -> u64 {
        3u64.pow(self.max_len as u32)
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator() as f64
    }
}

const MAX_ENUM_LEN: usize = 30;

fn check_len(max_len: usize) -> Result<()> {
    if max_len > MAX_ENUM_LEN {
        return Err(Error::InvalidArgument(format!("enumeration length above {MAX_ENUM_LEN}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mc,
    Enum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorEstimate {
    pub target: String,
    pub method: Method,
    pub p_hat: f64,
    pub stderr: Option<f64>,
    pub samples: Option<u64>,
    #[serde(rename = "L")]
    pub max_len: Option<usize>,
    #[serde(rename = "B")]
    pub budget: u64,
    pub hits: Option<u64>,
}

/// Prior mass of `target` from canonical programs of length `<= max_len`.
pub fn enumerate_prior(target: &[Symbol], max_len: usize, budget: u64) -> Result<PriorEstimate> {
    enumerate_prior_variant(target, max_len, budget, Variant::T3)
}

pub fn enumerate_prior_variant(
    target: &[Symbol],
    max_len: usize,
    budget: u64,
    variant: Variant,
) -> Result<PriorEstimate> {
    check_len(max_len)?;
    let programs = canonical_programs(max_len, budget, variant)?;
    let (mass, hits) = mass_of(&programs, target, max_len);
    Ok(PriorEstimate {
        target: symbols_to_string(target),
        method: Method::Enum,
        p_hat: mass.value(),
        stderr: None,
        samples: None,
        max_len: Some(max_len),
        budget,
        hits: Some(hits),
    })
}

fn mass_of(programs: &[CanonicalProgram], target: &[Symbol], max_len: usize) -> (Mass, u64) {
    let mut mass = Mass::new(max_len);
    let mut hits = 0;
    for p in programs.iter().filter(|p| p.output == target) {
        mass.add_program(p.program.len());
        hits += 1;
    }
    (mass, hits)
}

/// Number of samples handled by one unit of parallel work.
const MC_CHUNK: u64 = 1 << 14;

/// Monte Carlo prior estimate for several targets from one shared sample set.
///
/// Sample `i` draws its squares from ChaCha8 seeded with `seed` on stream `i`,
/// so results do not depend on `workers`.
pub fn estimate_prior_mc_many(
    targets: &[Vec<Symbol>],
    samples: u64,
    budget: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<PriorEstimate>> {
    if samples == 0 || budget == 0 {
        return Err(Error::InvalidArgument("samples and budget must be at least 1".into()));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let chunks: Vec<(u64, u64)> =
        (0..samples.div_ceil(MC_CHUNK)).map(|c| (c * MC_CHUNK, ((c + 1) * MC_CHUNK).min(samples))).collect();
    let per_chunk = ordered_map(chunks, workers, |(lo, hi)| {
        let mut hits = vec![0u64; targets.len()];
        for i in lo..hi {
            let mut rng = base.clone();
            rng.set_stream(i);
            let mut tape = SampledTape::new(rng);
            let run = run_lazy_sampled_variant(&mut tape, budget, Variant::T3).expect("arguments validated");
            if !run.result.halted() {
                continue;
            }
            for (h, t) in hits.iter_mut().zip(targets) {
                if run.result.output == *t {
                    *h += 1;
                }
            }
        }
        hits
    });
    let mut totals = vec![0u64; targets.len()];
    for chunk in per_chunk {
        for (t, h) in totals.iter_mut().zip(chunk) {
            *t += h;
        }
    }
    Ok(targets
        .iter()
        .zip(totals)
        .map(|(t, hits)| {
            let p = hits as f64 / samples as f64;
            PriorEstimate {
                target: symbols_to_string(t),
                method: Method::Mc,
                p_hat: p,
                stderr: Some((p * (1.0 - p) / samples as f64).sqrt()),
                samples: Some(samples),
                max_len: None,
                budget,
                hits: Some(hits),
            }
        })
        .collect())
}

pub fn estimate_prior_mc(
    target: &[Symbol],
    samples: u64,
    budget: u64,
    seed: u64,
    workers: usize,
) -> Result<PriorEstimate> {
    let mut v = estimate_prior_mc_many(&[target.to_vec()], samples, budget, seed, workers)?;
    Ok(v.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KraftReport {
    #[serde(rename = "L")]
    pub max_len: usize,
    #[serde(rename = "B")]
    pub budget: u64,
    pub total_mass: f64,
    /// `total_mass = numerator / 3^L`, exactly.
    pub numerator: u64,
    pub denominator: u64,
    pub program_count: u64,
}

impl KraftReport {
    pub fn below_one(&self) -> bool {
        self.numerator < self.denominator
    }
}

/// Total weight of all canonical programs of length `<= max_len`.
pub fn kraft_sum(max_len: usize, budget: u64) -> Result<KraftReport> {
    kraft_sum_variant(max_len, budget, Variant::T3)
}

pub fn kraft_sum_variant(max_len: usize, budget: u64, variant: Variant) -> Result<KraftReport> {
    check_len(max_len)?;
    let programs = canonical_programs(max_len, budget, variant)?;
    let mut mass = Mass::new(max_len);
    for p in &programs {
        mass.add_program(p.program.len());
    }
    Ok(KraftReport {
        max_len,
        budget,
        total_mass: mass.value(),
        numerator: mass.numerator,
        denominator: mass.denominator(),
        program_count: programs.len() as u64,
    })
}

/// Makes a finite-mode witness self-delimiting: an unpaired trailing square is
/// dropped and HALT is appended. `None` if the result is still not canonical
/// or no longer prints the same output.
pub fn canonicalize(witness: &[Symbol], budget: u64) -> Option<Vec<Symbol>> {
    if is_canonical(witness, budget, Variant::T3) {
        return Some(witness.to_vec());
    }
    let output = finite_output(witness, budget, Variant::T3, &[])?;
    let mut p = witness[..witness.len() - witness.len() % 2].to_vec();
    p.extend([Symbol::Comma, Symbol::One]);
    let lazy = crate::machine::run_unchecked(&p, budget, crate::machine::RunMode::LAZY, &[]);
    (lazy.halted() && lazy.consumed == p.len() && lazy.output == output).then_some(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetGap {
    pub target: String,
    /// Shortest finite-mode program length found.
    pub k_hat: Option<usize>,
    /// Length of the canonical program used for the comparison.
    pub k_canonical: Option<usize>,
    pub mass: f64,
    /// `-log3(mass) - k_canonical`; never positive when the canonical
    /// program lies within the enumeration.
    pub gap: Option<f64>,
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    #[serde(rename = "L")]
    pub max_len: usize,
    #[serde(rename = "B")]
    pub budget: u64,
    pub targets: Vec<TargetGap>,
    pub min_gap: Option<f64>,
    pub max_gap: Option<f64>,
    pub spread: Option<f64>,
}

/// Compares each target's enumerated mass with the weight of its shortest
/// canonical program. The canonical length comes from the canonicalized
/// finite-mode witness, or from the enumeration when that is shorter or the
/// witness cannot be canonicalized.
pub fn coding_theorem_gap(targets: &[Vec<Symbol>], max_len: usize, budget: u64) -> Result<GapReport> {
    check_len(max_len)?;
    let programs = canonical_programs(max_len, budget, Variant::T3)?;
    let mut rows = Vec::with_capacity(targets.len());
    for t in targets {
        let k_hat = shortest_program_upper_bound(t, SearchLimits::new(max_len, budget))?.witness;
        let from_witness = k_hat.as_ref().and_then(|w| canonicalize(w.symbols(), budget)).map(|p| p.len());
        let from_enum = programs.iter().filter(|p| p.output == *t).map(|p| p.program.len()).min();
        let k_canonical = match (from_witness, from_enum) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
        .filter(|&k| k <= max_len);
        let (mass, _) = mass_of(&programs, t, max_len);
        let mass = mass.value();
        let gap = k_canonical.map(|k| -mass.ln() / 3f64.ln() - k as f64);
        rows.push(TargetGap {
            target: symbols_to_string(t),
            k_hat: k_hat.map(|w| w.len()),
            k_canonical,
            mass,
            gap,
            skipped: gap.is_none(),
        });
    }
    let gaps: Vec<f64> = rows.iter().filter_map(|r| r.gap).collect();
    let min_gap = gaps.iter().copied().reduce(f64::min);
    let max_gap = gaps.iter().copied().reduce(f64::max);
    Ok(GapReport {
        max_len,
        budget,
        targets: rows,
        min_gap,
        max_gap,
        spread: min_gap.zip(max_gap).map(|(lo, hi)| hi - lo),
    })
}

/// Every output printed by some canonical program of length `<= max_len`,
/// in order of first appearance.
pub fn canonical_outputs(max_len: usize, budget: u64) -> Result<Vec<Vec<Symbol>>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for p in canonical_programs(max_len, budget, Variant::T3)? {
        if seen.insert(p.output.clone()) {
            out.push(p.output);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassComparison {
    pub target: String,
    pub t3_mass: f64,
    pub dual_mass: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompilerReport {
    pub prefix: String,
    #[serde(rename = "L")]
    pub max_len: usize,
    #[serde(rename = "B")]
    pub budget: u64,
    pub programs_checked: u64,
    /// Programs `p` where DUAL on `prefix . p` disagrees with T3 on `p`.
    pub output_mismatches: Vec<String>,
    pub targets_checked: u64,
    pub mass_violations: Vec<MassComparison>,
}

impl CompilerReport {
    pub fn passed(&self) -> bool {
        self.output_mismatches.is_empty() && self.mass_violations.is_empty()
    }
}

/// The one-symbol compiler prefix from T3 to DUAL.
pub fn dual_compiler_prefix() -> Program {
    Program::new(vec![Symbol::Zero])
}

/// Checks that `"0"` compiles T3 programs for the DUAL machine.
///
/// Output equality is checked in finite mode for all `|p| <= max_len`. For
/// the prior, DUAL is enumerated one square and one step further than T3,
/// which is exactly the cost of the prefix, and must keep at least a third of
/// every target's T3 mass.
pub fn compiler_prefix_check(max_len: usize, budget: u64) -> Result<CompilerReport> {
    check_len(max_len + 1)?;
    if budget == 0 {
        return Err(Error::InvalidArgument("step budget must be at least 1".into()));
    }
    let prefix = dual_compiler_prefix();
    let mut mismatches = Vec::new();
    let mut checked = 0u64;
    for_each_program(max_len, |p| {
        checked += 1;
        let t3 = crate::machine::run_unchecked(p, budget, crate::machine::RunMode::FINITE, &[]);
        let mut compiled = prefix.symbols().to_vec();
        compiled.extend_from_slice(p);
        let dual = crate::machine::run_unchecked(
            &compiled,
            budget + 1,
            crate::machine::RunMode::new(crate::machine::Mode::Finite, Variant::Dual),
            &[],
        );
        if t3.output != dual.output || t3.status != dual.status {
            mismatches.push(symbols_to_string(p));
        }
        true
    });

    let t3 = canonical_programs(max_len, budget, Variant::T3)?;
    let dual = canonical_programs(max_len + 1, budget + 1, Variant::Dual)?;
    let mut targets: Vec<&Vec<Symbol>> = t3.iter().map(|p| &p.output).collect();
    targets.sort();
    targets.dedup();
    let mut violations = Vec::new();
    for t in &targets {
        let (m3, _) = mass_of(&t3, t, max_len);
        let (md, _) = mass_of(&dual, t, max_len + 1);
        // Compare exactly: md/3^(L+1) >= (1/3) m3/3^L  <=>  md >= m3.
        if md.numerator < m3.numerator {
            violations.push(MassComparison {
                target: symbols_to_string(t),
                t3_mass: m3.value(),
                dual_mass: md.value(),
                holds: false,
            });
        }
    }
    Ok(CompilerReport {
        prefix: prefix.to_string(),
        max_len,
        budget,
        programs_checked: checked,
        output_mismatches: mismatches,
        targets_checked: targets.len() as u64,
        mass_violations: violations,
    })
}
