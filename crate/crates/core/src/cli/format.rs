//! JSON spec files and report files.
//!
//! A spec file names a family, lists the ground set, and carries the
//! family's parameters. Numbers may be JSON numbers, decimal strings or
//! `"p/q"` strings; all of them are read as exact rationals except the
//! entries of an entropy table or of an explicit table marked `"approx"`.
//!
//! The digest of a spec is the SHA-256 of its canonical serialization, in
//! which every number is a string in lowest terms, weights are positional,
//! and explicit-table keys are label lists in ground order.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::report::{PropertyReport, Verdict, ViolationKind};
use crate::setcore::{GroundSet, SubsetMask};
use crate::setfun::{Family, SetFunctionSpec};
use crate::value::{parse_exact, Mode, Tolerance, Value};

use super::CliError;

/// A number as written in a spec file: JSON number or string, kept as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberText(pub String);

impl NumberText {
    fn exact(&self) -> Result<BigRational, CliError> {
        parse_exact(&self.0).map_err(|_| CliError::Parse(format!("invalid number {:?}", self.0)))
    }

    fn float(&self) -> Result<f64, CliError> {
        match self.0.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => self.exact().map(|r| Value::Exact(r).to_f64()),
        }
    }

    fn from_exact(r: &BigRational) -> Self {
        NumberText(r.to_string())
    }

    fn from_float(x: f64) -> Self {
        NumberText(format!("{x:?}"))
    }
}

impl Serialize for NumberText {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for NumberText {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(deserializer)? {
            serde_json::Value::Number(n) => Ok(NumberText(n.to_string())),
            serde_json::Value::String(s) => Ok(NumberText(s)),
            other => Err(serde::de::Error::custom(format!(
                "expected a number, got {other}"
            ))),
        }
    }
}

/// Element weights, either positional or keyed by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    List(Vec<NumberText>),
    Map(BTreeMap<String, NumberText>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpecFile {
    pub family: String,
    pub ground: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<NumberText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Weights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<NumberText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partitions: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacities: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardinalities: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<NumberText>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<String, NumberText>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<bool>,
}

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

fn required<T>(field: Option<T>, name: &str, family: &str) -> Result<T, CliError> {
    field.ok_or_else(|| parse_err(format!("family {family} requires field {name:?}")))
}

/// Maps a label inside a spec file to its index; unknown labels make the
/// file malformed.
fn index_in(ground: &GroundSet, label: &str, what: &str) -> Result<usize, CliError> {
    ground
        .index_of(label)
        .ok_or_else(|| parse_err(format!("{what} names unknown element {label:?}")))
}

/// Parses a comma-separated label list; `-` or an empty string is the
/// empty set.
pub fn parse_subset(ground: &Arc<GroundSet>, text: &str) -> Result<SubsetMask, Error> {
    let t = text.trim();
    if t.is_empty() || t == "-" {
        return Ok(SubsetMask::empty(ground));
    }
    SubsetMask::from_labels(ground, t.split(',').map(str::trim))
}

pub fn render_subset(s: &SubsetMask) -> String {
    if s.is_empty() {
        "-".to_string()
    } else {
        s.labels().join(",")
    }
}

impl FunctionSpecFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))
    }

    fn present_fields(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut mark = |present: bool, name| {
            if present {
                v.push(name)
            }
        };
        mark(self.gamma.is_some(), "gamma");
        mark(self.weights.is_some(), "weights");
        mark(self.budget.is_some(), "budget");
        mark(self.right_labels.is_some(), "right_labels");
        mark(self.edges.is_some(), "edges");
        mark(self.k.is_some(), "k");
        mark(self.partitions.is_some(), "partitions");
        mark(self.capacities.is_some(), "capacities");
        mark(self.variables.is_some(), "variables");
        mark(self.cardinalities.is_some(), "cardinalities");
        mark(self.table.is_some(), "table");
        mark(self.values.is_some(), "values");
        mark(self.approx.is_some(), "approx");
        v
    }

    fn weights(&self, ground: &GroundSet, family: &str) -> Result<Vec<BigRational>, CliError> {
        match required(self.weights.as_ref(), "weights", family)? {
            Weights::List(list) => list.iter().map(NumberText::exact).collect(),
            Weights::Map(map) => {
                let mut out = vec![None; ground.len()];
                for (label, w) in map {
                    out[index_in(ground, label, "weights")?] = Some(w.exact()?);
                }
                out.into_iter()
                    .zip(ground.labels())
                    .map(|(w, l)| w.ok_or_else(|| parse_err(format!("missing weight for {l:?}"))))
                    .collect()
            }
        }
    }

    /// Builds the validated spec this file describes.
    pub fn to_spec(&self, tolerance: Tolerance) -> Result<SetFunctionSpec, CliError> {
        let ground =
            GroundSet::new(self.ground.iter().cloned()).map_err(|e| parse_err(e.to_string()))?;
        let name = self.family.as_str();
        let allowed: &[&str] = match name {
            "cardinality" => &[],
            "weighted_modular" => &["gamma", "weights"],
            "budgeted_linear" => &["budget", "weights"],
            "bipartite_neighborhood" => &["right_labels", "edges"],
            "uniform_matroid_rank" => &["k"],
            "partition_matroid_rank" => &["partitions", "capacities"],
            "joint_entropy" => &["variables", "cardinalities", "table"],
            "explicit_table" => &["values", "approx"],
            other => return Err(parse_err(format!("unknown family {other:?}"))),
        };
        if let Some(extra) = self
            .present_fields()
            .into_iter()
            .find(|f| !allowed.contains(f))
        {
            return Err(parse_err(format!(
                "field {extra:?} does not apply to family {name}"
            )));
        }
        let family = match name {
            "cardinality" => Family::Cardinality,
            "weighted_modular" => Family::WeightedModular {
                gamma: match &self.gamma {
                    Some(g) => g.exact()?,
                    None => BigRational::from_integer(0.into()),
                },
                weights: self.weights(&ground, name)?,
            },
            "budgeted_linear" => Family::BudgetedLinear {
                budget: required(self.budget.as_ref(), "budget", name)?.exact()?,
                weights: self.weights(&ground, name)?,
            },
            "bipartite_neighborhood" => {
                let right_labels = required(self.right_labels.clone(), "right_labels", name)?;
                let right = GroundSet::new(right_labels.iter().cloned())
                    .map_err(|e| parse_err(e.to_string()))?;
                let edges = required(self.edges.as_ref(), "edges", name)?
                    .iter()
                    .map(|(u, v)| Ok((index_in(&ground, u, "edge")?, index_in(&right, v, "edge")?)))
                    .collect::<Result<_, CliError>>()?;
                Family::BipartiteNeighborhood {
                    right_labels,
                    edges,
                }
            }
            "uniform_matroid_rank" => Family::UniformMatroidRank {
                k: required(self.k, "k", name)?,
            },
            "partition_matroid_rank" => Family::PartitionMatroidRank {
                blocks: required(self.partitions.as_ref(), "partitions", name)?
                    .iter()
                    .map(|block| {
                        block
                            .iter()
                            .map(|l| index_in(&ground, l, "partition"))
                            .collect()
                    })
                    .collect::<Result<_, CliError>>()?,
                capacities: required(self.capacities.clone(), "capacities", name)?,
            },
            "joint_entropy" => {
                if let Some(vars) = &self.variables {
                    if vars != &self.ground {
                        return Err(parse_err(
                            "variables must list the ground elements in order",
                        ));
                    }
                }
                Family::JointEntropy {
                    cardinalities: required(self.cardinalities.clone(), "cardinalities", name)?,
                    table: required(self.table.as_ref(), "table", name)?
                        .iter()
                        .map(NumberText::float)
                        .collect::<Result<_, CliError>>()?,
                }
            }
            "explicit_table" => {
                let entries = required(self.values.as_ref(), "values", name)?;
                let approx = self.approx.unwrap_or(false);
                let size = 1usize
                    .checked_shl(ground.len() as u32)
                    .unwrap_or(usize::MAX);
                let mut values: Vec<Option<Value>> = vec![None; size.min(1 << 20)];
                if size > values.len() {
                    return Err(CliError::Core(Error::CapExceeded {
                        what: "explicit table",
                        n: ground.len(),
                        cap: crate::setfun::MATERIALIZE_CAP,
                    }));
                }
                for (key, v) in entries {
                    let s = parse_subset(&ground, key)
                        .map_err(|e| parse_err(format!("table key {key:?}: {e}")))?;
                    let value = if approx {
                        Value::Approx(v.float()?)
                    } else {
                        Value::Exact(v.exact()?)
                    };
                    if values[s.bits() as usize].replace(value).is_some() {
                        return Err(parse_err(format!("table key {key:?} repeats a subset")));
                    }
                }
                let values = values
                    .into_iter()
                    .enumerate()
                    .map(|(bits, v)| {
                        v.ok_or_else(|| {
                            let s = SubsetMask::from_bits(&ground, bits as u64).expect("in range");
                            parse_err(format!("table lacks a value for {s}"))
                        })
                    })
                    .collect::<Result<_, CliError>>()?;
                Family::ExplicitTable { values }
            }
            _ => unreachable!(),
        };
        SetFunctionSpec::with_tolerance(ground, family, tolerance).map_err(|e| match e {
            e @ Error::CapExceeded { .. } => CliError::Core(e),
            other => parse_err(other.to_string()),
        })
    }

    /// Canonical file form of a spec.
    pub fn from_spec(spec: &SetFunctionSpec) -> Self {
        let ground = spec.ground();
        let label = |i: usize| ground.labels()[i].clone();
        let mut file = FunctionSpecFile {
            family: spec.family().name().to_string(),
            ground: ground.labels().to_vec(),
            ..Default::default()
        };
        match spec.family() {
            Family::Cardinality => {}
            Family::WeightedModular { gamma, weights } => {
                file.gamma = Some(NumberText::from_exact(gamma));
                file.weights = Some(Weights::List(
                    weights.iter().map(NumberText::from_exact).collect(),
                ));
            }
            Family::BudgetedLinear { budget, weights } => {
                file.budget = Some(NumberText::from_exact(budget));
                file.weights = Some(Weights::List(
                    weights.iter().map(NumberText::from_exact).collect(),
                ));
            }
            Family::BipartiteNeighborhood {
                right_labels,
                edges,
            } => {
                let mut edges = edges.clone();
                edges.sort_unstable();
                edges.dedup();
                file.right_labels = Some(right_labels.clone());
                file.edges = Some(
                    edges
                        .iter()
                        .map(|&(u, v)| (label(u), right_labels[v].clone()))
                        .collect(),
                );
            }
            Family::UniformMatroidRank { k } => file.k = Some(*k),
            Family::PartitionMatroidRank { blocks, capacities } => {
                file.partitions = Some(
                    blocks
                        .iter()
                        .map(|b| {
                            let mut b = b.clone();
                            b.sort_unstable();
                            b.into_iter().map(label).collect()
                        })
                        .collect(),
                );
                file.capacities = Some(capacities.clone());
            }
            Family::JointEntropy {
                cardinalities,
                table,
            } => {
                file.cardinalities = Some(cardinalities.clone());
                file.table = Some(table.iter().map(|&p| NumberText::from_float(p)).collect());
            }
            Family::ExplicitTable { values } => {
                let approx = spec.mode() == Mode::Approx;
                if approx {
                    file.approx = Some(true);
                }
                file.values = Some(
                    values
                        .iter()
                        .enumerate()
                        .map(|(bits, v)| {
                            let s = SubsetMask::from_bits(ground, bits as u64).expect("in range");
                            let text = match v {
                                Value::Exact(r) => NumberText::from_exact(r),
                                Value::Approx(x) => NumberText::from_float(*x),
                            };
                            (render_subset(&s), text)
                        })
                        .collect(),
                );
            }
        }
        file
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec files always serialize")
    }
}

/// Hex SHA-256 of the canonical serialization of `spec`.
pub fn spec_digest(spec: &SetFunctionSpec) -> String {
    let canonical = serde_json::to_string(&FunctionSpecFile::from_spec(spec))
        .expect("spec files always serialize");
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessEntry {
    pub kind: ViolationKind,
    /// Each set as a list of element labels.
    pub sets: Vec<Vec<String>>,
    pub lhs: Value,
    pub rhs: Value,
    pub margin: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSection {
    pub name: String,
    pub verdict: Verdict,
    pub checked: u64,
    pub violation_count: u64,
    pub witnesses: Vec<WitnessEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub informational: Vec<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub informational_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn is_zero(n: &u64) -> bool {
    *n == 0
}

fn labels(s: &SubsetMask) -> Vec<String> {
    s.labels().into_iter().map(String::from).collect()
}

impl ReportSection {
    pub fn from_report(name: impl Into<String>, report: &PropertyReport) -> Self {
        ReportSection {
            name: name.into(),
            verdict: report.verdict,
            checked: report.checked,
            violation_count: report.violation_count,
            witnesses: report
                .violations
                .iter()
                .map(|v| WitnessEntry {
                    kind: v.kind,
                    sets: v.witness.iter().map(labels).collect(),
                    lhs: v.lhs.clone(),
                    rhs: v.rhs.clone(),
                    margin: v.margin.clone(),
                })
                .collect(),
            informational: report
                .informational
                .iter()
                .map(|sets| sets.iter().map(labels).collect())
                .collect(),
            informational_count: report.informational_count,
            seed: report.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub command: String,
    pub spec_digest: String,
    pub family: String,
    pub mode: Mode,
    pub ground: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
    /// Overall outcome of a single check; absent for property summaries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    pub sections: Vec<ReportSection>,
    /// Whether the pairwise and marginal submodularity verdicts agree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characterizations_agree: Option<bool>,
    pub elapsed_ms: u64,
}

impl ReportFile {
    pub fn new(command: &str, spec: &SetFunctionSpec) -> Self {
        ReportFile {
            command: command.to_string(),
            spec_digest: spec_digest(spec),
            family: spec.family().name().to_string(),
            mode: spec.mode(),
            ground: spec.ground().labels().to_vec(),
            sampling: None,
            verdict: None,
            sections: Vec::new(),
            characterizations_agree: None,
            elapsed_ms: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))
    }
}

impl fmt::Display for WitnessEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sets: Vec<String> = self
            .sets
            .iter()
            .map(|s| format!("{{{}}}", s.join(",")))
            .collect();
        write!(
            f,
            "({}) lhs={} rhs={} margin={}",
            sets.join(", "),
            self.lhs,
            self.rhs,
            self.margin
        )
    }
}
