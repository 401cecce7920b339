//! `dlsb`: command-line front end for the datalog analyses.

mod commands;
mod json;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dlsb::{Membership, Relaxation};

#[derive(Parser, Debug)]
#[command(name = "dlsb", version, about = "Static analysis of datalog programs through EDB adornments")]
pub struct Cli {
    /// Print the documented JSON form instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for analyses over many (program, instance) pairs.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct AdornArgs {
    /// id, gout, gk=K or gmin.
    #[arg(long, default_value = "gout", value_parser = parse_relaxation)]
    pub relax: Relaxation,
    #[arg(long, value_enum, default_value_t = MembershipArg::Eq)]
    pub membership: MembershipArg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum MembershipArg {
    Eq,
    Cont,
}

impl From<MembershipArg> for Membership {
    fn from(m: MembershipArg) -> Membership {
        match m {
            MembershipArg::Eq => Membership::HEq,
            MembershipArg::Cont => Membership::HCont,
        }
    }
}

fn parse_relaxation(s: &str) -> Result<Relaxation, String> {
    match s {
        "id" => Ok(Relaxation::Id),
        "gout" => Ok(Relaxation::GOut),
        "gmin" => Ok(Relaxation::GMin),
        _ => match s.strip_prefix("gk=") {
            Some(k) => k.parse().map(Relaxation::GK).map_err(|_| format!("bad budget in {s}")),
            None => Err(format!("unknown relaxation {s}; expected id, gout, gk=K or gmin")),
        },
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the adorned program.
    Adorn {
        program: PathBuf,
        #[command(flatten)]
        adorn: AdornArgs,
    },
    /// Per-predicate and program edge-cover widths.
    Widths {
        program: PathBuf,
        /// Fractional instead of integral covers.
        #[arg(long)]
        fractional: bool,
        #[command(flatten)]
        adorn: AdornArgs,
    },
    /// Output size bounds for a given maximum relation size.
    Bounds {
        program: PathBuf,
        #[arg(long = "n", value_name = "N")]
        n: u64,
        #[command(flatten)]
        adorn: AdornArgs,
    },
    /// Try to rewrite the program without recursion.
    Boundedness {
        program: PathBuf,
        /// Adornments keep at most K atoms before relaxing.
        #[arg(long, value_name = "K")]
        budget: Option<usize>,
        /// Rule cap of the construction.
        #[arg(long)]
        max_rules: Option<usize>,
    },
    /// Print the minimal equivalent adorned program.
    Minimize {
        program: PathBuf,
        #[command(flatten)]
        adorn: AdornArgs,
    },
    /// Evaluate over an EDB file.
    Eval {
        program: PathBuf,
        #[arg(long)]
        edb: PathBuf,
        /// Ground the adorned program into Horn clauses.
        #[arg(long)]
        horn: bool,
    },
    /// Print the syntactic classes of the program.
    Classify { program: PathBuf },
    /// Print evaluation cost formulas.
    Complexity { program: PathBuf },
    /// Check equivalence, per-rule boundedness and value covers.
    Verify {
        /// Program to check; without it a random corpus is checked.
        program: Option<PathBuf>,
        #[arg(long, requires = "program")]
        edb: Option<PathBuf>,
        /// Seed of the corpus sampler.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        programs: usize,
        #[arg(long, default_value_t = 5)]
        instances: usize,
    },
}

/// What a command produced: text or JSON, and whether the analysis came
/// out negative.
pub struct Outcome {
    pub text: String,
    pub json: serde_json::Value,
    pub negative: bool,
}

/// Failure classes mapped to exit codes.
pub enum Failure {
    /// Unreadable or malformed input, or inapplicable request.
    Usage(String),
    /// The analysis ran but hit a limit.
    Analysis(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => {
            let text = if cli.json {
                serde_json::to_string_pretty(&out.json).expect("JSON values serialize") + "\n"
            } else {
                out.text
            };
            // A closed pipe downstream is not an error of ours.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::from(if out.negative { 1 } else { 0 })
        }
        Err(Failure::Usage(m)) => {
            eprintln!("dlsb: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Analysis(m)) => {
            eprintln!("dlsb: {m}");
            ExitCode::from(1)
        }
    }
}
