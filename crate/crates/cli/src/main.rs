//! `multiwit`: witness sets, dimensions and decompositions from the shell.

mod commands;
mod fixtures;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "multiwit", version, about = "Multiprojective witness sets and numerical irreducible decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

/// Options shared by every command.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// System file or witness archive (JSON).
    #[arg(short, long, global = true)]
    pub input: Option<PathBuf>,
    /// Built-in example in place of `--input`.
    #[arg(short, long, global = true)]
    pub fixture: Option<String>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Relative singular value cutoff for numerical rank.
    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    /// Newton and endpoint residual tolerance of the tracker.
    #[arg(long, global = true)]
    pub tol_track: Option<f64>,
    /// Distance below which two endpoints are the same point.
    #[arg(long, global = true)]
    pub tol_match: Option<f64>,
    /// Relative defect accepted by the linear trace test.
    #[arg(long, global = true)]
    pub tol_trace: Option<f64>,
    /// Monodromy loop budget.
    #[arg(long, global = true)]
    pub max_loops: Option<usize>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Allow the large fixtures.
    #[arg(long, global = true)]
    pub extended: bool,
    /// Write the JSON result here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    /// Total slice count `|e|` when computing a witness collection.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Slice vector to work on, e.g. `1100` or `1,1,0,0`.
    #[arg(short, long, global = true)]
    pub entry: Option<String>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Witness collection for every slice vector of the given total.
    Witness,
    /// Local dimension profiles and dimension polytopes of witness points.
    Dim,
    /// Intersect with one bank slice of a group.
    Slice {
        /// Group name or 0-based index.
        #[arg(long)]
        group: String,
    },
    /// Split a group and move a witness set to the finer grouping.
    Refine {
        #[arg(long)]
        group: String,
        /// Comma-separated variables of the first part.
        #[arg(long)]
        split: String,
        /// Slice vector of the refined grouping.
        #[arg(long)]
        target: String,
    },
    /// Merge groups and recompute the witness collection.
    Coarsen {
        /// Comma-separated group names or indices.
        #[arg(long)]
        merge: String,
    },
    /// Test whether a point lies on the variety.
    Member {
        /// Comma-separated complex coordinates such as `1,2-0.5i,3i`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Linear trace test of part of a witness set.
    Trace {
        /// Comma-separated point indices; all points by default.
        #[arg(long)]
        part: Option<String>,
    },
    /// Numerical irreducible decomposition of witness points.
    Decompose,
    /// Degree under the Segre embedding.
    Segre,
    /// Multidegree class of a complete intersection of general forms.
    Class {
        /// Multidegrees of the forms, separated by `;`.
        #[arg(long)]
        degrees: Option<String>,
        /// Group sizes.
        #[arg(long)]
        nvec: Option<String>,
        /// Groups to slice in turn, comma-separated 0-based indices.
        #[arg(long)]
        slices: Option<String>,
    },
    /// Show a built-in example; `fixture NAME CMD ...` runs CMD on it.
    Fixture { name: Option<String> },
}

/// Failures of a run, split by exit code.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<multiwit::Error> for Failure {
    fn from(e: multiwit::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

/// `fixture NAME CMD rest..` becomes `CMD --fixture NAME rest..`.
fn rewrite_fixture_form(mut args: Vec<String>) -> Vec<String> {
    if args.len() >= 4 && args[1] == "fixture" && !args[2].starts_with('-') && !args[3].starts_with('-') {
        let name = args.remove(2);
        args.remove(1);
        args.splice(2..2, ["--fixture".to_string(), name]);
    }
    args
}

/// Write through a temporary file so a failed run never leaves a partial
/// result behind.
fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let res =
        fs::File::create(&tmp).and_then(|mut f| f.write_all(text.as_bytes())).and_then(|_| fs::rename(&tmp, path));
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res
}

fn main() -> ExitCode {
    let cli = Cli::parse_from(rewrite_fixture_form(std::env::args().collect()));
    if let Some(n) = cli.common.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = commands::run(&cli.command, &cli.common).and_then(|v| {
        let text = serde_json::to_string_pretty(&v).expect("JSON values serialize") + "\n";
        match &cli.common.output {
            Some(p) => write_atomic(p, &text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
