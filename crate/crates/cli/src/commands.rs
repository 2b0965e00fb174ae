use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use omni::complexity::search::finite_output;
use omni::complexity::{
    arithmetic_roundtrip, compressibility_census, conditional_upper_bound, mutual_information_estimate,
    sample_sequence, shannon_code_length, ComplexityRecord, MutualInformation, NoiseModel, SearchLimits,
};
use omni::enumeration::{
    dovetail, for_each_program, index_to_program, offered_steps, program_to_index, DovetailConfig, DovetailRegistry,
    ProgramIndex,
};
use omni::machine::{run, symbols_to_string, RunRecord};
use omni::multiverse::{dedup_universes, UniverseGroup};
use omni::prior::{
    coding_theorem_gap, compiler_prefix_check, enumerate_prior_variant, estimate_prior_mc, kraft_sum_variant,
};
use omni::ssa::{run_learner, ssc_holds, uniform_baseline, EventKind, LearnerConfig, SwitchingBandit};
use omni::{Mode, RunMode, Symbol, Variant};
use serde::Serialize;

use crate::{effective_seed, Cli, Command, EnvArg, Failure, ModeArg, SearchArgs, VariantArg};

const SCHEMA: u32 = 1;

#[derive(Serialize)]
struct Report<T: Serialize> {
    schema: u32,
    #[serde(flatten)]
    body: T,
}

fn line<T: Serialize>(body: T) -> String {
    let mut s = serde_json::to_string(&Report { schema: SCHEMA, body }).expect("report serializes");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Finite => Mode::Finite,
            ModeArg::Lazy => Mode::Lazy,
        }
    }
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::T3 => Variant::T3,
            VariantArg::T3c => Variant::T3c,
            VariantArg::Dual => Variant::Dual,
        }
    }
}

fn limits(search: &SearchArgs, workers: usize) -> SearchLimits {
    SearchLimits::new(search.max_len, search.budget).with_workers(workers)
}

pub(crate) fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let workers = cli.workers;
    let text = match &cli.command {
        Command::Enumerate { from, to, program } => enumerate(*from, *to, program.as_ref())?,
        Command::Run { program, max_steps, machine, aux } => {
            let mode = RunMode::new(machine.mode.into(), machine.variant.into());
            let result = run(program, *max_steps, mode, aux.as_ref())?;
            line(RunRecord::new(program, &result))
        }
        Command::Dovetail { steps, max_steps, mode, snapshot } => {
            dovetail_cmd(*steps, max_steps.unwrap_or(*steps), (*mode).into(), snapshot.as_deref(), workers)?
        }
        Command::Dedup { snapshot, prefix_len } => {
            let reg = DovetailRegistry::read_snapshot(BufReader::new(File::open(snapshot)?))?;
            let groups = dedup_universes(&reg, *prefix_len)?;
            line(DedupReport { prefix_len: *prefix_len, programs: reg.entries.len(), groups })
        }
        Command::Census { n, c, search } => {
            let r = compressibility_census(*n, *c, limits(search, workers))?;
            line(CensusLine { bound: r.bound(), within_bound: r.within_bound(), report: r })
        }
        Command::Kcomp { target, cond, search } => {
            let l = limits(search, workers);
            let bound = match cond {
                Some(c) => conditional_upper_bound(target.symbols(), c.symbols(), l)?,
                None => omni::complexity::shortest_program_upper_bound(target.symbols(), l)?,
            };
            line(ComplexityRecord::from(&bound))
        }
        Command::Mutual { x, y, search } => {
            let estimate = mutual_information_estimate(x.symbols(), y.symbols(), limits(search, workers))?;
            line(MutualReport {
                x: x.to_string(),
                y: y.to_string(),
                max_len: search.max_len,
                budget: search.budget,
                estimate,
            })
        }
        Command::Prior { target, samples, budget, seed } => {
            let seed = effective_seed(*seed)?;
            let est = estimate_prior_mc(target.symbols(), *samples, *budget, seed, workers)?;
            line(Seeded { seed, body: est })
        }
        Command::PriorExact { target, variant, search } => {
            line(enumerate_prior_variant(target.symbols(), search.max_len, search.budget, (*variant).into())?)
        }
        Command::Kraft { variant, search } => {
            line(kraft_sum_variant(search.max_len, search.budget, (*variant).into())?)
        }
        Command::CodingGap { target, search } => {
            let targets: Vec<Vec<Symbol>> = if target.is_empty() {
                short_outputs(4, search.budget)
            } else {
                target.iter().map(|t| t.symbols().to_vec()).collect()
            };
            line(coding_theorem_gap(&targets, search.max_len, search.budget)?)
        }
        Command::DemoCompiler { search } => {
            let r = compiler_prefix_check(search.max_len, search.budget)?;
            line(CompilerLine { passed: r.passed(), report: r })
        }
        Command::Entropy { target, n, stay, seed } => entropy(target.as_ref(), *n, *stay, effective_seed(*seed)?)?,
        Command::Ssa { env, period, lifetime, seed, trace } => {
            ssa(*env, *period, *lifetime, effective_seed(*seed)?, trace.as_deref())?
        }
    };
    emit(cli.out.as_deref(), &text)
}

#[derive(Serialize)]
struct IndexLine {
    k: u64,
    program: String,
}

const MAX_LISTING: u64 = 10_000_000;

fn enumerate(from: u64, to: Option<u64>, program: Option<&omni::Program>) -> Result<String, Failure> {
    if let Some(p) = program {
        let k = program_to_index(p)?;
        return Ok(line(IndexLine { k: k.get(), program: p.to_string() }));
    }
    let to = to.expect("clap requires --to without --program");
    if from == 0 || to < from {
        return Err(Failure::Usage("need 1 <= --from <= --to".into()));
    }
    if to - from >= MAX_LISTING {
        return Err(Failure::Usage(format!("at most {MAX_LISTING} programs per listing")));
    }
    let mut text = String::new();
    for k in from..=to {
        let p = index_to_program(ProgramIndex::new(k)?);
        text.push_str(&line(IndexLine { k, program: p.to_string() }));
    }
    Ok(text)
}

#[derive(Serialize)]
struct DovetailSummary {
    steps: u64,
    max_steps: u64,
    mode: Mode,
    programs: usize,
    halted: usize,
    executed: u64,
    /// Steps offered to A_1, A_2, ...
    offered: Vec<u64>,
}

fn dovetail_cmd(
    steps: u64,
    budget: u64,
    mode: Mode,
    snapshot: Option<&Path>,
    workers: usize,
) -> Result<String, Failure> {
    let mut config = DovetailConfig::new(steps, budget, RunMode::new(mode, Variant::T3));
    config.workers = workers;
    let reg = dovetail(&config)?;
    if let Some(path) = snapshot {
        let mut w = BufWriter::new(File::create(path)?);
        reg.write_snapshot(&mut w)?;
        w.flush()?;
    }
    let offered = reg.entries.iter().map(|e| offered_steps(ProgramIndex::new(e.k).expect("k >= 1"), steps)).collect();
    Ok(line(DovetailSummary {
        steps,
        max_steps: budget,
        mode,
        programs: reg.entries.len(),
        halted: reg.entries.iter().filter(|e| e.halted).count(),
        executed: reg.total_steps,
        offered,
    }))
}

#[derive(Serialize)]
struct DedupReport {
    prefix_len: usize,
    programs: usize,
    groups: Vec<UniverseGroup>,
}

#[derive(Serialize)]
struct CensusLine<T: Serialize> {
    #[serde(flatten)]
    report: T,
    bound: f64,
    within_bound: bool,
}

#[derive(Serialize)]
struct MutualReport {
    x: String,
    y: String,
    #[serde(rename = "L")]
    max_len: usize,
    #[serde(rename = "B")]
    budget: u64,
    estimate: Option<MutualInformation>,
}

#[derive(Serialize)]
struct Seeded<T: Serialize> {
    seed: u64,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct CompilerLine<T: Serialize> {
    passed: bool,
    #[serde(flatten)]
    report: T,
}

/// Distinct finite-mode outputs of every program of length `<= max_len`.
fn short_outputs(max_len: usize, budget: u64) -> Vec<Vec<Symbol>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for_each_program(max_len, |p| {
        if let Some(o) = finite_output(p, budget, Variant::T3, &[]) {
            if seen.insert(o.clone()) {
                out.push(o);
            }
        }
        true
    });
    out
}

#[derive(Serialize)]
struct EntropyReport {
    states: usize,
    stay: f64,
    seed: Option<u64>,
    sequence: String,
    initial_bits: f64,
    transition_bits: f64,
    shannon_bits: f64,
    encoded_bits: usize,
    lossless: bool,
}

fn entropy(target: Option<&omni::Program>, n: usize, stay: f64, seed: u64) -> Result<String, Failure> {
    if !(0.0..=1.0).contains(&stay) {
        return Err(Failure::Usage("--stay must lie in [0, 1]".into()));
    }
    let model = NoiseModel::sticky(2, stay)?;
    let (seq, seed) = match target {
        Some(t) => (t.symbols().iter().map(|s| s.digit()).collect::<Vec<_>>(), None),
        None => (sample_sequence(&model, n, seed), Some(seed)),
    };
    let ideal = shannon_code_length(&seq, &model)?;
    let (bits, decoded) = arithmetic_roundtrip(&seq, &model)?;
    let sequence = seq.iter().map(|&s| Symbol::from_digit(s).expect("two-state sequence")).collect::<Vec<_>>();
    Ok(line(EntropyReport {
        states: seq.len(),
        stay,
        seed,
        sequence: symbols_to_string(&sequence),
        initial_bits: ideal.initial_bits,
        transition_bits: ideal.transition_bits,
        shannon_bits: ideal.total(),
        encoded_bits: bits.len(),
        lossless: decoded == seq,
    }))
}

#[derive(Serialize)]
struct SsaReport {
    env: &'static str,
    period: u64,
    lifetime: u64,
    seed: u64,
    total_reward: f64,
    mean_reward: f64,
    baseline_mean_reward: f64,
    stack_depth: usize,
    pushes: usize,
    pops: usize,
    noops: usize,
    ssc_holds: bool,
}

fn ssa(env: EnvArg, period: u64, lifetime: u64, seed: u64, trace: Option<&Path>) -> Result<String, Failure> {
    let EnvArg::SwitchingBandit = env;
    if period == 0 || lifetime == 0 {
        return Err(Failure::Usage("--period and --lifetime must be positive".into()));
    }
    let baseline = uniform_baseline(SwitchingBandit::new(period), lifetime, seed)?;
    let config = LearnerConfig { record_steps: trace.is_some(), ..LearnerConfig::default() };
    let out = run_learner(SwitchingBandit::new(period), lifetime, seed, config)?;
    if let Some(path) = trace {
        let mut w = BufWriter::new(File::create(path)?);
        out.trace.write_jsonl(&mut w)?;
        w.flush()?;
    }
    let count = |kind| out.trace.events().filter(|e| e.event == kind).count();
    Ok(line(SsaReport {
        env: "switching-bandit",
        period,
        lifetime,
        seed,
        total_reward: out.total_reward,
        mean_reward: out.mean_reward(),
        baseline_mean_reward: baseline,
        stack_depth: out.stack.len(),
        pushes: count(EventKind::Push),
        pops: count(EventKind::Pop),
        noops: count(EventKind::Noop),
        ssc_holds: ssc_holds(lifetime, out.total_reward, &out.stack.checkpoints())?,
    }))
}
