use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use omni::Program;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "omni", version, about = "Desk-scale algorithmic information experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Threads for parallel sweeps. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 1, value_name = "INT")]
    workers: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List programs A_from..A_to, or give the index of --program.
    Enumerate {
        #[arg(long, default_value_t = 1)]
        from: u64,
        #[arg(long, required_unless_present = "program")]
        to: Option<u64>,
        #[arg(long, value_parser = parse_program, conflicts_with_all = ["from", "to"])]
        program: Option<Program>,
    },
    /// Run one program.
    Run {
        #[arg(long, value_parser = parse_program)]
        program: Program,
        #[arg(long, default_value_t = 1000)]
        max_steps: u64,
        #[command(flatten)]
        machine: MachineArgs,
        /// Auxiliary tape, required by the t3c variant.
        #[arg(long, value_parser = parse_program)]
        aux: Option<Program>,
    },
    /// Dovetail all programs for a number of steps.
    Dovetail {
        #[arg(long)]
        steps: u64,
        /// Per-program step budget (defaults to --steps).
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Finite)]
        mode: ModeArg,
        /// Write the registry snapshot (JSON lines) here.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Group a dovetail snapshot by shared output prefix.
    Dedup {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        prefix_len: usize,
    },
    /// Count strings of length n with programs shorter than n - c.
    Census {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Shortest program found for a target, optionally given --cond.
    Kcomp {
        #[arg(long, value_parser = parse_program)]
        target: Program,
        #[arg(long, value_parser = parse_program)]
        cond: Option<Program>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Mutual information estimate K(y) - K(y|x).
    Mutual {
        #[arg(long, value_parser = parse_program)]
        x: Program,
        #[arg(long, value_parser = parse_program)]
        y: Program,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Monte Carlo estimate of the universal prior of a target.
    Prior {
        #[arg(long, value_parser = parse_program)]
        target: Program,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 200)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Universal prior of a target by exhaustive enumeration.
    PriorExact {
        #[arg(long, value_parser = parse_program)]
        target: Program,
        #[arg(long, value_enum, default_value_t = VariantArg::T3)]
        variant: VariantArg,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Total weight of canonical programs up to a length.
    Kraft {
        #[arg(long, value_enum, default_value_t = VariantArg::T3)]
        variant: VariantArg,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Enumerated prior mass against shortest canonical program length.
    CodingGap {
        /// Repeatable. Defaults to every output of a program of length <= 4.
        #[arg(long, value_parser = parse_program)]
        target: Vec<Program>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check the one-symbol prefix compiling T3 programs for DUAL.
    DemoCompiler {
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Code a noisy two-state sequence under a sticky Markov model.
    Entropy {
        /// State sequence over 0 and 1. Without it, --n states are sampled.
        #[arg(long, value_parser = parse_program)]
        target: Option<Program>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.9)]
        stay: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the success-story learner.
    Ssa {
        #[arg(long, value_enum, default_value_t = EnvArg::SwitchingBandit)]
        env: EnvArg,
        #[arg(long, default_value_t = 1000)]
        period: u64,
        #[arg(long, default_value_t = 100_000)]
        lifetime: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the learner trace (JSON lines) here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct MachineArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Finite)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = VariantArg::T3)]
    variant: VariantArg,
}

#[derive(Args, Debug, Clone, Copy)]
struct SearchArgs {
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long, default_value_t = 1000)]
    budget: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModeArg {
    Finite,
    Lazy,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum VariantArg {
    T3,
    T3c,
    Dual,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum EnvArg {
    SwitchingBandit,
}

fn parse_program(s: &str) -> Result<Program, String> {
    s.parse::<Program>().map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<omni::Error> for Failure {
    fn from(e: omni::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// `OMNI_SEED` wins over `--seed` when set.
fn effective_seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var("OMNI_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("OMNI_SEED is not an integer: {v:?}"))),
        Err(_) => Ok(flag),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
