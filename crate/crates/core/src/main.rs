use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use subjaccard::cli::{self, CliError, DistVariant, Outcome, VectorInput};
use subjaccard::CheckKind;

/// Submodular Jaccard distances and inequality checks over set functions
/// described by JSON spec files.
///
/// Subsets are comma-separated element labels; `-` is the empty set.
/// SUBJACCARD_EPSILON overrides the comparison tolerance of approximate
/// (floating-point) specs.
#[derive(Parser)]
#[command(name = "subjaccard", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print f(A).
    Eval { spec: PathBuf, subset: String },
    /// Print a distance between two subsets.
    Dist {
        spec: PathBuf,
        /// standard, cap, delta or index
        #[arg(value_parser = parse_variant)]
        variant: DistVariant,
        a: String,
        b: String,
    },
    /// Report nonnegativity, monotonicity, submodularity and modularity.
    Props {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify one inequality, exhaustively or on sampled triples.
    Check {
        spec: PathBuf,
        /// triangle-cap, triangle-delta, lemma1, corollary1, ordering, metric or metric-cap
        #[arg(value_parser = parse_check)]
        check: CheckKind,
        /// Number of random triples; omit for an exhaustive check.
        #[arg(long, requires = "seed")]
        sample: Option<u64>,
        #[arg(long, requires = "sample")]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a triangle violation of the cap distance.
    FindViolation {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the generalized Jaccard distance of two nonnegative vectors.
    Vecdist {
        /// Comma-separated entries, e.g. 1,2,0
        #[arg(required_unless_present = "file", requires = "y")]
        x: Option<String>,
        y: Option<String>,
        /// JSON file with fields "x" and "y".
        #[arg(long, conflicts_with = "x")]
        file: Option<PathBuf>,
    },
}

fn parse_variant(s: &str) -> Result<DistVariant, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_check(s: &str) -> Result<CheckKind, String> {
    s.parse()
}

fn run(command: Command) -> Result<(Outcome, Option<PathBuf>), CliError> {
    Ok(match command {
        Command::Eval { spec, subset } => (cli::cmd_eval(&spec, &subset)?, None),
        Command::Dist {
            spec,
            variant,
            a,
            b,
        } => (cli::cmd_dist(&spec, variant, &a, &b)?, None),
        Command::Props { spec, out } => (cli::cmd_props(&spec)?, out),
        Command::Check {
            spec,
            check,
            sample,
            seed,
            out,
        } => (cli::cmd_check(&spec, check, sample.zip(seed))?, out),
        Command::FindViolation { spec, out } => (cli::cmd_find_violation(&spec)?, out),
        Command::Vecdist { x, y, file } => {
            let input = match (&file, &x, &y) {
                (Some(path), _, _) => VectorInput::File(path),
                (None, Some(x), Some(y)) => VectorInput::Inline(x, y),
                _ => {
                    return Err(CliError::Parse(
                        "vecdist needs two vectors or --file".into(),
                    ))
                }
            };
            (cli::cmd_vecdist(input)?, None)
        }
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.command) {
        Ok((outcome, out)) => {
            match out {
                Some(path) => {
                    if let Err(e) = cli::write_atomically(&path, &outcome.text) {
                        eprintln!("error: {e}");
                        return ExitCode::from(e.exit_code() as u8);
                    }
                    if let Some(verdict) = outcome.report.as_ref().and_then(|r| r.verdict) {
                        println!("{verdict}");
                    }
                }
                None => println!("{}", outcome.text),
            }
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
