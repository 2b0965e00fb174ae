//! A small prefix machine over the alphabet `{0, 1, ,}`.
//!
//! Instructions are two symbols wide:
//!
//! | pair | opcode   | effect                                               |
//! |------|----------|------------------------------------------------------|
//! | `00` | OUT0     | append `0`                                           |
//! | `01` | OUT1     | append `1`                                           |
//! | `0,` | OUTC     | append `,`                                           |
//! | `10` | INC      | `reg += 1`                                           |
//! | `11` | DEC      | `reg -= 1`, saturating at 0                          |
//! | `1,` | SKIPZ    | if `reg == 0` move the head over the next instruction |
//! | `,,` | MARK     | anchor := index of the next instruction (T3)         |
//! |      | READAUX  | copy the whole auxiliary tape to the output (T3C)    |
//! | `,0` | LOOP     | if `reg != 0` jump to the anchor                     |
//! | `,1` | HALT     | stop                                                 |
//!
//! The DUAL variant reads one selector symbol first: `0` runs the rest as T3,
//! `1` runs it as T3 with OUT0/OUT1 swapped and `,` halts with empty output.
//!
//! In [`Mode::Finite`] the program is a finite tape and fetching past its end
//! halts. In [`Mode::Lazy`] only HALT halts; squares are requested from a
//! [`Tape`] the first time the head moves onto them, which is how
//! self-delimiting programs are sampled.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Zero,
    One,
    Comma,
}

impl Symbol {
    /// Digit order used by shortlex enumeration: `0 < 1 < ,`.
    pub const ALL: [Symbol; 3] = [Symbol::Zero, Symbol::One, Symbol::Comma];

    pub fn digit(self) -> usize {
        match self {
            Symbol::Zero => 0,
            Symbol::One => 1,
            Symbol::Comma => 2,
        }
    }

    pub fn from_digit(d: usize) -> Option<Symbol> {
        Symbol::ALL.get(d).copied()
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::Zero => '0',
            Symbol::One => '1',
            Symbol::Comma => ',',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            '0' => Some(Symbol::Zero),
            '1' => Some(Symbol::One),
            ',' => Some(Symbol::Comma),
            _ => None,
        }
    }
}

/// Renders a symbol slice as its textual form.
pub fn symbols_to_string(symbols: &[Symbol]) -> String {
    symbols.iter().map(|s| s.as_char()).collect()
}

/// Parses text over `{0, 1, ,}`.
pub fn parse_symbols(text: &str) -> Result<Vec<Symbol>> {
    text.chars()
        .enumerate()
        .map(|(i, c)| Symbol::from_char(c).ok_or(Error::InvalidSymbol { ch: c, position: i }))
        .collect()
}

/// A finite string over the three-symbol alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Program(Vec<Symbol>);

impl Program {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Program(symbols)
    }

    pub fn empty() -> Self {
        Program(Vec::new())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }

    /// `self` followed by `suffix`.
    pub fn concat(&self, suffix: &Program) -> Program {
        let mut v = self.0.clone();
        v.extend_from_slice(&suffix.0);
        Program(v)
    }

    pub fn is_prefix_of(&self, other: &Program) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<Vec<Symbol>> for Program {
    fn from(v: Vec<Symbol>) -> Self {
        Program(v)
    }
}

impl FromStr for Program {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_symbols(s).map(Program)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&symbols_to_string(&self.0))
    }
}

impl Serialize for Program {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Program {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    Out0,
    Out1,
    OutComma,
    Inc,
    Dec,
    SkipZero,
    /// MARK under T3 and DUAL, READAUX under T3C.
    MarkOrReadAux,
    Loop,
    Halt,
}

pub fn decode_instruction(first: Symbol, second: Symbol) -> Instruction {
    use Symbol::*;
    match (first, second) {
        (Zero, Zero) => Instruction::Out0,
        (Zero, One) => Instruction::Out1,
        (Zero, Comma) => Instruction::OutComma,
        (One, Zero) => Instruction::Inc,
        (One, One) => Instruction::Dec,
        (One, Comma) => Instruction::SkipZero,
        (Comma, Comma) => Instruction::MarkOrReadAux,
        (Comma, Zero) => Instruction::Loop,
        (Comma, One) => Instruction::Halt,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Finite,
    Lazy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    T3,
    T3c,
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RunMode {
    pub mode: Mode,
    pub variant: Variant,
}

impl RunMode {
    pub const FINITE: RunMode = RunMode { mode: Mode::Finite, variant: Variant::T3 };
    pub const LAZY: RunMode = RunMode { mode: Mode::Lazy, variant: Variant::T3 };

    pub fn new(mode: Mode, variant: Variant) -> Self {
        RunMode { mode, variant }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "halted")]
    Halted,
    #[serde(rename = "budget")]
    BudgetExhausted,
    /// A lazy run over a finite tape asked for a square past its end.
    #[serde(rename = "starved")]
    Starved,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RunResult {
    pub output: Vec<Symbol>,
    pub status: Status,
    pub consumed: usize,
    pub steps: u64,
}

impl RunResult {
    pub fn halted(&self) -> bool {
        self.status == Status::Halted
    }

    pub fn output_string(&self) -> String {
        symbols_to_string(&self.output)
    }
}

/// One JSON line of a run report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub program: String,
    pub output: String,
    pub status: Status,
    pub consumed: usize,
    pub steps: u64,
}

impl RunRecord {
    pub fn new(program: &Program, result: &RunResult) -> Self {
        RunRecord {
            program: program.to_string(),
            output: result.output_string(),
            status: result.status,
            consumed: result.consumed,
            steps: result.steps,
        }
    }
}

/// Source of program squares, addressed by position.
pub trait Tape {
    /// The symbol at `index`, or `None` when the tape has no such square.
    fn read(&mut self, index: usize) -> Option<Symbol>;
}

impl Tape for &[Symbol] {
    fn read(&mut self, index: usize) -> Option<Symbol> {
        self.get(index).copied()
    }
}

/// Fills each new square with a uniformly drawn symbol on first request.
pub struct SampledTape<R> {
    rng: R,
    squares: Vec<Symbol>,
}

impl<R: Rng> SampledTape<R> {
    pub fn new(rng: R) -> Self {
        SampledTape { rng, squares: Vec::new() }
    }

    /// Squares realized so far, in order.
    pub fn realized(&self) -> &[Symbol] {
        &self.squares
    }
}

impl<R: Rng> Tape for SampledTape<R> {
    fn read(&mut self, index: usize) -> Option<Symbol> {
        while self.squares.len() <= index {
            let d = self.rng.gen_range(0..3);
            self.squares.push(Symbol::ALL[d]);
        }
        Some(self.squares[index])
    }
}

/// Replays a fixed list of symbols, then runs dry.
pub struct ScriptedTape {
    squares: Vec<Symbol>,
    pub requests: usize,
}

impl ScriptedTape {
    pub fn new(squares: Vec<Symbol>) -> Self {
        ScriptedTape { squares, requests: 0 }
    }
}

impl Tape for ScriptedTape {
    fn read(&mut self, index: usize) -> Option<Symbol> {
        self.requests = self.requests.max(index + 1);
        self.squares.get(index).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Flavor {
    Plain,
    Swapped,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MachineState {
    pub ip: usize,
    pub reg: u64,
    pub anchor: usize,
    pub output: Vec<Symbol>,
    pub consumed: usize,
    /// Auxiliary symbols copied to the output so far (T3C only).
    pub aux_pos: usize,
    pub steps: u64,
}

/// What the next cycle will do, decided before any state changes.
enum Fetch {
    Ready {
        op: Instruction,
        skip: bool,
    },
    Select(Symbol),
    /// Square `index` is not on the tape.
    Missing {
        index: usize,
    },
}

/// Outcome of a single [`Machine::step`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Running,
    Halted,
    /// The tape has no square at `index`; the machine state is unchanged.
    Missing {
        index: usize,
    },
}

/// Resumable interpreter. The tape is supplied per step so that callers can
/// extend it between steps (lazy sampling, prefix-tree enumeration).
#[derive(Clone, Debug)]
pub struct Machine<'a> {
    variant: Variant,
    aux: &'a [Symbol],
    flavor: Option<Flavor>,
    state: MachineState,
}

impl<'a> Machine<'a> {
    pub fn new(variant: Variant, aux: &'a [Symbol]) -> Self {
        let flavor = match variant {
            Variant::Dual => None,
            _ => Some(Flavor::Plain),
        };
        Machine { variant, aux, flavor, state: MachineState::default() }
    }

    pub fn state(&self) -> &MachineState {
        &self.state
    }

    pub fn output(&self) -> &[Symbol] {
        &self.state.output
    }

    pub fn steps(&self) -> u64 {
        self.state.steps
    }

    fn fetch<T: Tape + ?Sized>(&self, tape: &mut T) -> Fetch {
        let ip = self.state.ip;
        let Some(flavor) = self.flavor else {
            return match tape.read(ip) {
                Some(s) => Fetch::Select(s),
                None => Fetch::Missing { index: ip },
            };
        };
        let Some(a) = tape.read(ip) else { return Fetch::Missing { index: ip } };
        let Some(b) = tape.read(ip + 1) else { return Fetch::Missing { index: ip + 1 } };
        let mut op = decode_instruction(a, b);
        if flavor == Flavor::Swapped {
            op = match op {
                Instruction::Out0 => Instruction::Out1,
                Instruction::Out1 => Instruction::Out0,
                other => other,
            };
        }
        let skip = op == Instruction::SkipZero && self.state.reg == 0;
        if skip {
            // The head passes over the skipped squares, so they are visited.
            if tape.read(ip + 2).is_none() {
                return Fetch::Missing { index: ip + 2 };
            }
            if tape.read(ip + 3).is_none() {
                return Fetch::Missing { index: ip + 3 };
            }
        }
        Fetch::Ready { op, skip }
    }

    /// True when the next cycle would need a square the tape does not have.
    pub fn is_off_tape<T: Tape + ?Sized>(&self, tape: &mut T) -> bool {
        matches!(self.fetch(tape), Fetch::Missing { .. })
    }

    /// Executes one fetch-decode-execute cycle.
    pub fn step<T: Tape + ?Sized>(&mut self, tape: &mut T) -> Step {
        let (op, skip) = match self.fetch(tape) {
            Fetch::Missing { index } => return Step::Missing { index },
            Fetch::Select(sel) => {
                let st = &mut self.state;
                st.steps += 1;
                st.ip = 1;
                st.anchor = 1;
                st.consumed = 1;
                return match sel {
                    Symbol::Zero => {
                        self.flavor = Some(Flavor::Plain);
                        Step::Running
                    }
                    Symbol::One => {
                        self.flavor = Some(Flavor::Swapped);
                        Step::Running
                    }
                    Symbol::Comma => Step::Halted,
                };
            }
            Fetch::Ready { op, skip } => (op, skip),
        };
        let variant = self.variant;
        let st = &mut self.state;
        st.steps += 1;
        st.ip += 2;
        st.consumed = st.consumed.max(st.ip);
        match op {
            Instruction::Out0 => st.output.push(Symbol::Zero),
            Instruction::Out1 => st.output.push(Symbol::One),
            Instruction::OutComma => st.output.push(Symbol::Comma),
            Instruction::Inc => st.reg += 1,
            Instruction::Dec => st.reg = st.reg.saturating_sub(1),
            Instruction::SkipZero => {
                if skip {
                    st.ip += 2;
                    st.consumed = st.consumed.max(st.ip);
                }
            }
            Instruction::MarkOrReadAux => match variant {
                Variant::T3c => {
                    st.output.extend_from_slice(self.aux);
                    st.aux_pos += self.aux.len();
                }
                _ => st.anchor = st.ip,
            },
            Instruction::Loop => {
                if st.reg != 0 {
                    st.ip = st.anchor;
                }
            }
            Instruction::Halt => return Step::Halted,
        }
        Step::Running
    }

    /// Steps until the machine halts, the tape runs out, or `max_steps`
    /// cycles have been executed in total.
    pub fn run_until<T: Tape + ?Sized>(&mut self, tape: &mut T, max_steps: u64) -> Stop {
        loop {
            if self.state.steps >= max_steps {
                // An exhausted tape stops the machine regardless of budget.
                if let Fetch::Missing { .. } = self.fetch(tape) {
                    return Stop::OffTape;
                }
                return Stop::Budget;
            }
            match self.step(tape) {
                Step::Running => {}
                Step::Halted => return Stop::Halt,
                Step::Missing { .. } => return Stop::OffTape,
            }
        }
    }

    /// Packages the final state. `tape_len` is the length of a finite tape;
    /// running off it in finite mode counts every square as consumed.
    pub fn finish(self, stop: Stop, mode: Mode, tape_len: Option<usize>) -> RunResult {
        let mut consumed = self.state.consumed;
        let status = match (stop, mode) {
            (Stop::Halt, _) => Status::Halted,
            (Stop::Budget, _) => Status::BudgetExhausted,
            (Stop::OffTape, Mode::Finite) => {
                if let Some(len) = tape_len {
                    consumed = len;
                }
                Status::Halted
            }
            (Stop::OffTape, Mode::Lazy) => Status::Starved,
        };
        if let Some(len) = tape_len {
            consumed = consumed.min(len);
        }
        RunResult { output: self.state.output, status, consumed, steps: self.state.steps }
    }
}

/// Why [`Machine::run_until`] returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    Halt,
    Budget,
    OffTape,
}

fn check_args(max_steps: u64, variant: Variant, aux: Option<&Program>) -> Result<()> {
    if max_steps == 0 {
        return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
    }
    match (variant, aux) {
        (Variant::T3c, None) => Err(Error::InvalidArgument("variant t3c requires an auxiliary tape".into())),
        (Variant::T3 | Variant::Dual, Some(_)) => {
            Err(Error::InvalidArgument("an auxiliary tape is only accepted by variant t3c".into()))
        }
        _ => Ok(()),
    }
}

/// Runs `program` from a fresh state.
///
/// In finite mode running off the end halts and counts every remaining
/// square as consumed. In lazy mode the program is the whole tape seen so far;
/// asking for a square past its end yields [`Status::Starved`].
pub fn run(program: &Program, max_steps: u64, mode: RunMode, aux: Option<&Program>) -> Result<RunResult> {
    check_args(max_steps, mode.variant, aux)?;
    Ok(run_unchecked(program.symbols(), max_steps, mode, aux.map(|a| a.symbols()).unwrap_or(&[])))
}

/// [`run`] without argument validation; `aux` is ignored unless the variant is T3C.
pub fn run_unchecked(program: &[Symbol], max_steps: u64, mode: RunMode, aux: &[Symbol]) -> RunResult {
    let mut machine = Machine::new(mode.variant, aux);
    let mut tape = program;
    let stop = machine.run_until(&mut tape, max_steps);
    machine.finish(stop, mode.mode, Some(program.len()))
}

/// A lazily sampled run together with the squares it visited.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledRun {
    pub result: RunResult,
    /// The first `consumed` squares: the realized self-delimiting program.
    pub realized: Program,
}

/// Runs the T3 machine in lazy mode, drawing squares from `tape` on demand.
pub fn run_lazy_sampled<T: Tape>(tape: &mut T, max_steps: u64) -> Result<SampledRun> {
    run_lazy_sampled_variant(tape, max_steps, Variant::T3)
}

pub fn run_lazy_sampled_variant<T: Tape>(tape: &mut T, max_steps: u64, variant: Variant) -> Result<SampledRun> {
    if max_steps == 0 {
        return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
    }
    if variant == Variant::T3c {
        return Err(Error::InvalidArgument("lazy sampling does not take an auxiliary tape".into()));
    }
    let mut machine = Machine::new(variant, &[]);
    let stop = machine.run_until(tape, max_steps);
    let result = machine.finish(stop, Mode::Lazy, None);
    let mut realized = Vec::with_capacity(result.consumed);
    for i in 0..result.consumed {
        realized.push(tape.read(i).expect("visited squares stay readable"));
    }
    Ok(SampledRun { result, realized: Program(realized) })
}

/// True when a lazy run of `program` halts having visited exactly its squares.
pub fn is_canonical(program: &[Symbol], max_steps: u64, variant: Variant) -> bool {
    let r = run_unchecked(program, max_steps, RunMode::new(Mode::Lazy, variant), &[]);
    r.halted() && r.consumed == program.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Program {
        s.parse().unwrap()
    }

    fn finite(s: &str, steps: u64) -> RunResult {
        run(&p(s), steps, RunMode::FINITE, None).unwrap()
    }

    #[test]
    fn opcode_table() {
        use Symbol::*;
        assert_eq!(decode_instruction(Zero, Zero), Instruction::Out0);
        assert_eq!(decode_instruction(Comma, One), Instruction::Halt);
        assert_eq!(decode_instruction(One, Comma), Instruction::SkipZero);
        let mut seen = std::collections::HashSet::new();
        for a in Symbol::ALL {
            for b in Symbol::ALL {
                seen.insert(decode_instruction(a, b));
            }
        }
        assert_eq!(seen.len(), 9);
    }

    #[test]
    fn text_round_trip_and_rejection() {
        assert_eq!(p("0,1,,").to_string(), "0,1,,");
        assert_eq!(p("").len(), 0);
        assert!(matches!("01x".parse::<Program>(), Err(Error::InvalidSymbol { ch: 'x', position: 2 })));
    }

    #[test]
    fn empty_program_halts_immediately() {
        let r = finite("", 100);
        assert_eq!(r.status, Status::Halted);
        assert_eq!(r.output_string(), "");
        assert_eq!(r.consumed, 0);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn straight_line_program() {
        let r = finite("000,01,1", 100);
        assert_eq!(r.output_string(), "0,1");
        assert_eq!(r.status, Status::Halted);
        assert_eq!(r.consumed, 8);
        assert_eq!(r.steps, 4);
    }

    #[test]
    fn unbounded_loop_exhausts_budget() {
        let r = finite("10,,00,0", 100);
        assert_eq!(r.status, Status::BudgetExhausted);
        assert_eq!(r.steps, 100);
        assert!(!r.output.is_empty());
        assert!(r.output.iter().all(|&s| s == Symbol::Zero));
    }

    #[test]
    fn counted_loop_falls_through() {
        let r = finite("10,,0011,0", 100);
        assert_eq!(r.output_string(), "0");
        assert_eq!(r.status, Status::Halted);
        assert_eq!(r.consumed, 10);
    }

    #[test]
    fn trailing_single_symbol_is_consumed() {
        let r = finite("000", 100);
        assert_eq!(r.output_string(), "0");
        assert_eq!(r.status, Status::Halted);
        assert_eq!(r.consumed, 3);
    }

    #[test]
    fn skip_over_end_in_finite_mode() {
        // SKIPZ with reg = 0 jumps past the last square.
        let r = finite("1,0", 100);
        assert_eq!(r.status, Status::Halted);
        assert_eq!(r.consumed, 3);
        let r = finite("1,0000", 100);
        assert_eq!(r.output_string(), "0");
    }

    #[test]
    fn program_with_exact_budget_halts() {
        let r = finite("000,01", 3);
        assert_eq!(r.status, Status::Halted);
        let r = finite("000,01", 2);
        assert_eq!(r.status, Status::BudgetExhausted);
    }

    #[test]
    fn lazy_halt_only() {
        let r = run(&p("0000"), 100, RunMode::LAZY, None).unwrap();
        assert_eq!(r.status, Status::Starved);
        let r = run(&p("00,1"), 100, RunMode::LAZY, None).unwrap();
        assert_eq!(r.status, Status::Halted);
        assert_eq!(r.consumed, 4);
        assert!(is_canonical(p("00,1").symbols(), 100, Variant::T3));
        assert!(!is_canonical(p("00,100").symbols(), 100, Variant::T3));
        assert!(!is_canonical(&[], 100, Variant::T3));
    }

    #[test]
    fn lazy_sampled_requests_on_demand() {
        let mut tape = ScriptedTape::new(p(",1000").into_symbols());
        let r = run_lazy_sampled(&mut tape, 10).unwrap();
        assert_eq!(r.result.status, Status::Halted);
        assert_eq!(r.result.steps, 1);
        assert_eq!(r.result.consumed, 2);
        assert_eq!(r.result.output_string(), "");
        assert_eq!(r.realized, p(",1"));
        assert_eq!(tape.requests, 2);

        let mut tape = ScriptedTape::new(p("00,1,1").into_symbols());
        let r = run_lazy_sampled(&mut tape, 10).unwrap();
        assert_eq!(r.result.output_string(), "0");
        assert_eq!(r.result.consumed, 4);
        assert_eq!(tape.requests, 4);

        let mut tape = ScriptedTape::new(vec![]);
        assert!(run_lazy_sampled(&mut tape, 0).is_err());
    }

    #[test]
    fn lazy_skip_visits_skipped_squares() {
        // SKIPZ at reg 0 moves over ",1", which therefore is not executed.
        let mut tape = ScriptedTape::new(p("1,,100,1").into_symbols());
        let r = run_lazy_sampled(&mut tape, 10).unwrap();
        assert_eq!(r.result.output_string(), "0");
        assert_eq!(r.result.consumed, 8);
    }

    #[test]
    fn conditional_variant_reads_aux() {
        let aux = p("01");
        let r = run(&p(",,00,,"), 100, RunMode::new(Mode::Finite, Variant::T3c), Some(&aux)).unwrap();
        assert_eq!(r.output_string(), "01001");
        assert_eq!(r.consumed, 6);
        // Empty aux: READAUX is a no-op.
        let r = run(&p(",,00"), 100, RunMode::new(Mode::Finite, Variant::T3c), Some(&Program::empty())).unwrap();
        assert_eq!(r.output_string(), "0");
        // MARK is unavailable, so LOOP returns to 0 and re-runs INC forever.
        let r = run(&p("10,,,0"), 100, RunMode::new(Mode::Finite, Variant::T3c), Some(&aux)).unwrap();
        assert_eq!(r.status, Status::BudgetExhausted);
        assert_eq!(r.output_string().len(), 66);
    }

    #[test]
    fn aux_argument_checked() {
        assert!(run(&p(""), 1, RunMode::new(Mode::Finite, Variant::T3c), None).is_err());
        assert!(run(&p(""), 1, RunMode::FINITE, Some(&p("0"))).is_err());
        assert!(run(&p(""), 0, RunMode::FINITE, None).is_err());
    }

    #[test]
    fn dual_selector() {
        let dual = RunMode::new(Mode::Finite, Variant::Dual);
        let r = run(&p("0000,01,1"), 100, dual, None).unwrap();
        assert_eq!(r.output_string(), "0,1");
        let r = run(&p("1000,01,1"), 100, dual, None).unwrap();
        assert_eq!(r.output_string(), "1,0");
        let r = run(&p(",00"), 100, dual, None).unwrap();
        assert_eq!(r.output_string(), "");
        assert_eq!(r.status, Status::Halted);
        assert_eq!(r.consumed, 1);
        let r = run(&p(""), 100, dual, None).unwrap();
        assert_eq!(r.status, Status::Halted);
        let r = run(&p("0"), 100, RunMode::new(Mode::Lazy, Variant::Dual), None).unwrap();
        assert_eq!(r.status, Status::Starved);
        // The anchor starts after the selector.
        let r = run(&p("010,,0011,0"), 100, dual, None).unwrap();
        assert_eq!(r.output_string(), "0");
    }

    #[test]
    fn record_json_shape() {
        let prog = p("000,01,1");
        let r = finite("000,01,1", 100);
        let line = serde_json::to_string(&RunRecord::new(&prog, &r)).unwrap();
        assert_eq!(line, r#"{"program":"000,01,1","output":"0,1","status":"halted","consumed":8,"steps":4}"#);
    }
}
