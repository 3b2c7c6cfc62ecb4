mod canonical;
mod certificate;
mod commands;
mod error;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use chansim_core::mixdisc::DEFAULT_ENUMERATION_CAP;
use chansim_core::{NoiseSpec, ProbVector};
use clap::{Args, Parser, Subcommand};

use crate::error::CliError;
use crate::input::{parse_delta, parse_noise, parse_prob};

/// Classical simulation of quantum and ball-model channels, with
/// machine-checkable certificates.
#[derive(Debug, Parser)]
#[command(name = "chansim", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Tolerance for validating inputs and certificates.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest number of outcome tuples (k^n) to enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUMERATION_CAP as u64)]
    pub cap: u64,
    /// Report errors on stderr as JSON.
    #[arg(long, global = true)]
    pub json_errors: bool,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an explicit classical simulation.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Evaluate witnesses and invariants.
    #[command(subcommand)]
    Certify(CertifyCmd),
    /// Check a certificate without re-running any solver.
    Verify {
        certificate: PathBuf,
        /// Original input, to confirm the recorded digest.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Write example inputs.
    #[command(subcommand)]
    Fixtures(FixturesCmd),
}

#[derive(Debug, Subcommand)]
pub enum SimulateCmd {
    /// POVM and density matrices: {"povm": {"outcomes": [...]}, "states": [...]}.
    Quantum {
        #[arg(long = "in")]
        input: PathBuf,
        /// none, delta:<x>, or perm:<a,b,...>.
        #[arg(long, default_value = "none", value_parser = parse_noise)]
        noise: NoiseSpec,
    },
    /// Ball model: {"effects": [{"c", "v"}], "ball_states": [...], "norm_index": n}.
    Ball {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "0", value_parser = parse_delta)]
        delta: f64,
    },
    /// Split a transition matrix into parts that each skip one output.
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
        /// Mixing weights over rows, comma separated.
        #[arg(long, value_parser = parse_prob)]
        p: Option<ProbVector>,
    },
    /// Noisy classical protocol by noiseless d-state protocols.
    NoisyToNoiseless {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_noise)]
        noise: NoiseSpec,
        #[arg(long)]
        d: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CertifyCmd {
    /// Largest sum of row maxima.
    Storability {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Subset-sum witness against d classical states.
    Subset {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        d: usize,
    },
    /// Pairwise witness against d classical states.
    Pairwise {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        d: usize,
    },
    /// Minkowski asymmetry of a polytope given by vertices and facets.
    Asymmetry {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Signalling dimension of the δ-noisy n-state classical channel.
    Signalling {
        #[arg(long)]
        n: usize,
        /// Exact: decimal or p/q.
        #[arg(long)]
        delta: String,
    },
    /// Bounds for the channel replacing its input by a fixed state with probability δ.
    Replacer {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_delta)]
        delta: f64,
        /// Spectrum of the replacement state; uniform by default.
        #[arg(long, value_parser = parse_prob)]
        mu: Option<ProbVector>,
    },
    /// Holevo quantity, and accessible information of a POVM if given.
    Holevo {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum FixturesCmd {
    Emit {
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let json = std::env::args().any(|a| a == "--json-errors");
            report(&CliError::Usage(e.to_string().trim().to_string()), json);
            return ExitCode::from(1);
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(&cli, argv) {
        Ok(code) => code,
        Err(e) => {
            report(&e, cli.global.json_errors);
            ExitCode::from(if e.is_negative_result() { 2 } else { 1 })
        }
    }
}

fn report(e: &CliError, json: bool) {
    if json {
        eprintln!("{}", canonical::canonicalize(&e.to_json()));
    } else {
        eprintln!("chansim: {e}");
    }
}
