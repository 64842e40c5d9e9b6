//! Batch front end for the cxtherm workbench.
//!
//! Exit codes: 0 success, 1 failed check, 2 configuration or input error,
//! 3 enumeration budget exceeded, 4 chain-rule counterexample found.

mod commands;
mod config;
mod emit;
mod state;

use anyhow::Result;
use clap::{Parser, Subcommand};
use commands::{CheckFailed, ConjectureViolation};
use config::RunConfig;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "cxtherm", version, about = "Complexity-restricted entropies and thermodynamic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// von Neumann and hypothesis-testing entropies of a state.
    Entropy(RunConfig),
    /// Complexity entropy H_H^{r,eta}.
    CxEntropy(RunConfig),
    /// Least work to erase a state with at most r gates.
    Erasure(RunConfig),
    /// Least number of kept qubits after an r-gate compression.
    Compress(RunConfig),
    /// Complexity entropy of random brickwork states by depth.
    Transition(RunConfig),
    /// Entanglement continuity trials or the entanglement lower bound.
    Entangle(RunConfig),
    /// Transverse-field Ising quench and its entangling rate.
    Quench(RunConfig),
    /// Decoupling against a complexity-limited referee.
    Decouple(RunConfig),
    /// Random search for chain-rule violations.
    ProbeConjecture(RunConfig),
    /// Randomized invariant suite.
    Selftest(RunConfig),
}

impl Command {
    fn split(self) -> (&'static str, RunConfig) {
        match self {
            Command::Entropy(c) => ("entropy", c),
            Command::CxEntropy(c) => ("cx-entropy", c),
            Command::Erasure(c) => ("erasure", c),
            Command::Compress(c) => ("compress", c),
            Command::Transition(c) => ("transition", c),
            Command::Entangle(c) => ("entangle", c),
            Command::Quench(c) => ("quench", c),
            Command::Decouple(c) => ("decouple", c),
            Command::ProbeConjecture(c) => ("probe-conjecture", c),
            Command::Selftest(c) => ("selftest", c),
        }
    }
}

fn dispatch(name: &str, cfg: &RunConfig) -> Result<commands::Report> {
    let hash = cfg.hash(name);
    match name {
        "entropy" => commands::entropy(cfg, hash),
        "cx-entropy" => commands::cx_entropy_cmd(cfg, hash),
        "erasure" => commands::erasure(cfg, hash),
        "compress" => commands::compress(cfg, hash),
        "transition" => commands::transition(cfg, hash),
        "entangle" => commands::entangle(cfg, hash),
        "quench" => commands::quench(cfg, hash),
        "decouple" => commands::decouple(cfg, hash),
        "probe-conjecture" => commands::probe(cfg, hash),
        "selftest" => commands::selftest(cfg, hash),
        _ => unreachable!("clap restricts subcommands"),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConjectureViolation>().is_some() {
        return 4;
    }
    if err.downcast_ref::<CheckFailed>().is_some() {
        return 1;
    }
    for cause in err.chain() {
        if let Some(cxtherm::Error::BudgetExceeded { .. }) = cause.downcast_ref::<cxtherm::Error>() {
            return 3;
        }
    }
    2
}

fn run(name: &str, cfg: RunConfig) -> Result<()> {
    let cfg = cfg.resolve()?;
    let work = || -> Result<()> {
        let rep = dispatch(name, &cfg)?;
        print!("{}", rep.stdout);
        if let Some(path) = commands::persist(&cfg, &rep.table)? {
            eprintln!("wrote {}", path.display());
        }
        match rep.failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    };
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build()?.install(work),
        None => work(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, cfg) = cli.command.split();
    match run(name, cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
