//! Command implementations behind the `subjaccard` binary.
//!
//! Each command returns the text to print and the process exit code, so the
//! binary stays a thin argument parser and the commands are testable in
//! process.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, check holds, or counterexample found |
//! | 1 | check fails, or no counterexample exists |
//! | 2 | unreadable or malformed input |
//! | 3 | unknown element label, or invalid vector contents |
//! | 4 | size cap exceeded, or prerequisite properties fail |

pub mod format;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;

use crate::error::Error;
use crate::jaccard::{
    jaccard_distance, sub_jaccard_cap, sub_jaccard_delta, sub_jaccard_index,
    vector_jaccard_distance, WeightedVector,
};
use crate::report::Verdict;
use crate::setfun::{
    is_modular, is_monotone, is_nonnegative, is_submodular_marginal, is_submodular_pairwise,
    SetFunctionSpec,
};
use crate::value::{parse_exact, Tolerance, Value, EPSILON_ENV};
use crate::verify::{check_exhaustive, find_cap_counterexample, sampled_check, CheckKind};

pub use format::{
    parse_subset, render_subset, spec_digest, FunctionSpecFile, ReportFile, ReportSection,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse(_) => EXIT_PARSE,
            CliError::Core(e) => match e {
                Error::UnknownLabel(_) | Error::LengthMismatch(..) | Error::NegativeEntry(_) => {
                    EXIT_INPUT
                }
                Error::CapExceeded { .. }
                | Error::PrereqFailed(_)
                | Error::PropertyViolation(_) => EXIT_LIMIT,
                Error::InvalidNumber(_) | Error::MalformedSpec(_) | Error::InvalidGroundSet(_) => {
                    EXIT_PARSE
                }
                Error::GroundMismatch | Error::MixedMode | Error::DivisionByZero => EXIT_PARSE,
            },
        }
    }
}

/// What a command prints and the code it exits with.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit: i32,
    /// The structured report, for commands that produce one.
    pub report: Option<ReportFile>,
}

impl Outcome {
    fn value(v: Value) -> Self {
        Outcome {
            text: v.to_string(),
            exit: EXIT_OK,
            report: None,
        }
    }

    fn report(report: ReportFile, exit: i32) -> Self {
        Outcome {
            text: report.to_json(),
            exit,
            report: Some(report),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a spec file, comparing with the tolerance from the environment.
pub fn load_spec(path: &Path) -> Result<SetFunctionSpec, CliError> {
    let tolerance =
        Tolerance::from_env().map_err(|e| CliError::Parse(format!("{EPSILON_ENV}: {e}")))?;
    FunctionSpecFile::parse(&read(path)?)?.to_spec(tolerance)
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// so readers never observe a partial report.
pub fn write_atomically(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.write_all(b"\n").map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis().try_into().unwrap_or(u64::MAX)
}

pub fn cmd_eval(spec_path: &Path, subset: &str) -> Result<Outcome, CliError> {
    let spec = load_spec(spec_path)?;
    let a = parse_subset(spec.ground(), subset)?;
    Ok(Outcome::value(spec.evaluate(&a)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistVariant {
    /// Plain Jaccard distance; the spec supplies only the ground set.
    Standard,
    Cap,
    Delta,
    Index,
}

impl std::str::FromStr for DistVariant {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "standard" => Ok(DistVariant::Standard),
            "cap" => Ok(DistVariant::Cap),
            "delta" => Ok(DistVariant::Delta),
            "index" => Ok(DistVariant::Index),
            other => Err(CliError::Parse(format!(
                "unknown distance variant {other:?}"
            ))),
        }
    }
}

pub fn cmd_dist(
    spec_path: &Path,
    variant: DistVariant,
    a: &str,
    b: &str,
) -> Result<Outcome, CliError> {
    let spec = load_spec(spec_path)?;
    let a = parse_subset(spec.ground(), a)?;
    let b = parse_subset(spec.ground(), b)?;
    let d = match variant {
        DistVariant::Standard => jaccard_distance(&a, &b)?,
        DistVariant::Cap => sub_jaccard_cap(&spec, &a, &b)?,
        DistVariant::Delta => sub_jaccard_delta(&spec, &a, &b)?,
        DistVariant::Index => sub_jaccard_index(&spec, &a, &b)?,
    };
    Ok(Outcome::value(d))
}

/// Runs every property check and reports them together; always exits 0
/// once the checks complete, whatever they find.
pub fn cmd_props(spec_path: &Path) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let spec = load_spec(spec_path)?;
    let mut report = ReportFile::new("props", &spec);
    let pairwise = is_submodular_pairwise(&spec)?;
    let marginal = is_submodular_marginal(&spec)?;
    report.characterizations_agree = Some(pairwise.holds() == marginal.holds());
    report.sections = vec![
        ReportSection::from_report("nonnegative", &is_nonnegative(&spec)?),
        ReportSection::from_report("monotone", &is_monotone(&spec)?),
        ReportSection::from_report("submodular_pairwise", &pairwise),
        ReportSection::from_report("submodular_marginal", &marginal),
        ReportSection::from_report("modular", &is_modular(&spec)?),
    ];
    report.elapsed_ms = elapsed_ms(start);
    Ok(Outcome::report(report, EXIT_OK))
}

/// Exhaustive unless `sample` gives `(triples, seed)`.
pub fn cmd_check(
    spec_path: &Path,
    check: CheckKind,
    sample: Option<(u64, u64)>,
) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let spec = load_spec(spec_path)?;
    let result = match sample {
        None => check_exhaustive(&spec, check)?,
        Some((count, seed)) => sampled_check(&spec, check, count, seed)?,
    };
    let mut report = ReportFile::new("check", &spec);
    report.sampling = sample.map(|(samples, seed)| format::Sampling { samples, seed });
    report.verdict = Some(result.verdict);
    report.sections = vec![ReportSection::from_report(check.to_string(), &result)];
    report.elapsed_ms = elapsed_ms(start);
    let exit = if result.verdict == Verdict::Fails {
        EXIT_FAILS
    } else {
        EXIT_OK
    };
    Ok(Outcome::report(report, exit))
}

/// Searches for a cap-distance triangle violation; finding one is success.
pub fn cmd_find_violation(spec_path: &Path) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let spec = load_spec(spec_path)?;
    let found = find_cap_counterexample(&spec)?;
    let mut report = ReportFile::new("find-violation", &spec);
    let (verdict, exit) = if found.is_some() {
        (Verdict::Fails, EXIT_OK)
    } else {
        (Verdict::Holds, EXIT_FAILS)
    };
    let summary = crate::report::PropertyReport {
        verdict,
        checked: 0,
        violation_count: found.is_some() as u64,
        violations: found.into_iter().collect(),
        informational: Vec::new(),
        informational_count: 0,
        seed: None,
    };
    report.verdict = Some(verdict);
    report.sections = vec![ReportSection::from_report("triangle-cap", &summary)];
    report.elapsed_ms = elapsed_ms(start);
    Ok(Outcome::report(report, exit))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorPair {
    x: Vec<format::NumberText>,
    y: Vec<format::NumberText>,
}

/// Parses a comma-separated vector; decimals are read exactly, like the
/// numbers in spec files.
pub fn parse_vector(text: &str) -> Result<WeightedVector, CliError> {
    let entries = text
        .split(',')
        .map(|t| {
            parse_exact(t)
                .map(Value::Exact)
                .map_err(|_| CliError::Parse(format!("invalid vector entry {t:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WeightedVector::new(entries)?)
}

pub enum VectorInput<'a> {
    Inline(&'a str, &'a str),
    File(&'a Path),
}

pub fn cmd_vecdist(input: VectorInput<'_>) -> Result<Outcome, CliError> {
    let (x, y) = match input {
        VectorInput::Inline(x, y) => (parse_vector(x)?, parse_vector(y)?),
        VectorInput::File(path) => {
            let pair: VectorPair =
                serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse(e.to_string()))?;
            let join = |v: &[format::NumberText]| {
                v.iter().map(|n| n.0.as_str()).collect::<Vec<_>>().join(",")
            };
            (parse_vector(&join(&pair.x))?, parse_vector(&join(&pair.y))?)
        }
    };
    Ok(Outcome::value(vector_jaccard_distance(&x, &y)?))
}
