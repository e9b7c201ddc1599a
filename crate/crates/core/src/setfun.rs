//! Set-function evaluation oracles and exhaustive property checks.
//!
//! Every family evaluates exactly over rationals except `JointEntropy`,
//! which works in base-2 floating point and is compared under the spec's
//! tolerance. Any spec can be materialized into an `ExplicitTable` holding
//! one value per subset; the property checks run on that table.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::report::{scan, Collector, PropertyReport, ViolationKind};
use crate::setcore::{same_ground, GroundSet, SubsetMask};
use crate::value::{Mode, Scalar, Tolerance, Value};

/// Largest ground set that may be tabulated into an explicit table.
pub const MATERIALIZE_CAP: usize = 16;
/// Largest ground set for exhaustive pair checks in exact mode.
pub const PAIR_CAP_EXACT: usize = 12;
/// Largest ground set for exhaustive pair checks in approximate mode.
pub const PAIR_CAP_APPROX: usize = 10;
/// Largest ground set accepted by the random table generators.
pub const RANDOM_CAP: usize = 8;
/// Upper bound on the number of cells of a joint probability table.
pub const JOINT_TABLE_CAP: usize = 1 << 20;
/// Values drawn by the random generators lie in `0..=RANDOM_MAX`.
pub const RANDOM_MAX: u32 = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Cardinality,
    /// `gamma + sum of weights[i] over i in A`.
    WeightedModular {
        gamma: BigRational,
        weights: Vec<BigRational>,
    },
    /// `min(budget, sum of weights[i] over i in A)`.
    BudgetedLinear {
        budget: BigRational,
        weights: Vec<BigRational>,
    },
    /// Ground set is the left part; `edges` hold (left index, right index).
    BipartiteNeighborhood {
        right_labels: Vec<String>,
        edges: Vec<(usize, usize)>,
    },
    UniformMatroidRank {
        k: usize,
    },
    /// `blocks` partition the ground set (element indices); `capacities[j]`
    /// bounds how many elements of block `j` count.
    PartitionMatroidRank {
        blocks: Vec<Vec<usize>>,
        capacities: Vec<usize>,
    },
    /// Joint distribution of one discrete variable per ground element, in
    /// row-major order with the first variable most significant.
    JointEntropy {
        cardinalities: Vec<usize>,
        table: Vec<f64>,
    },
    /// One value per subset, indexed by mask.
    ExplicitTable {
        values: Vec<Value>,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cardinality => "cardinality",
            Family::WeightedModular { .. } => "weighted_modular",
            Family::BudgetedLinear { .. } => "budgeted_linear",
            Family::BipartiteNeighborhood { .. } => "bipartite_neighborhood",
            Family::UniformMatroidRank { .. } => "uniform_matroid_rank",
            Family::PartitionMatroidRank { .. } => "partition_matroid_rank",
            Family::JointEntropy { .. } => "joint_entropy",
            Family::ExplicitTable { .. } => "explicit_table",
        }
    }
}

/// Per-family data derived once at construction.
#[derive(Debug, Clone, PartialEq)]
enum Compiled {
    None,
    Neighborhoods(Vec<Vec<u64>>),
    Blocks(Vec<u64>),
}

/// A validated set function over a ground set.
#[derive(Debug, Clone, PartialEq)]
pub struct SetFunctionSpec {
    ground: Arc<GroundSet>,
    family: Family,
    tolerance: Tolerance,
    compiled: Compiled,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedSpec(msg.into())
}

fn check_weights(weights: &[BigRational], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(malformed(format!(
            "expected {n} weights, got {}",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| w.is_negative()) {
        return Err(malformed(format!("negative weight {w}")));
    }
    Ok(())
}

impl SetFunctionSpec {
    pub fn new(ground: Arc<GroundSet>, family: Family) -> Result<Self> {
        Self::with_tolerance(ground, family, Tolerance::default())
    }

    pub fn with_tolerance(
        ground: Arc<GroundSet>,
        family: Family,
        tolerance: Tolerance,
    ) -> Result<Self> {
        let n = ground.len();
        let compiled = match &family {
            Family::Cardinality | Family::UniformMatroidRank { .. } => Compiled::None,
            Family::WeightedModular { gamma, weights } => {
                if gamma.is_negative() {
                    return Err(malformed(format!("negative offset {gamma}")));
                }
                check_weights(weights, n)?;
                Compiled::None
            }
            Family::BudgetedLinear { budget, weights } => {
                if budget.is_negative() {
                    return Err(malformed(format!("negative budget {budget}")));
                }
                check_weights(weights, n)?;
                Compiled::None
            }
            Family::BipartiteNeighborhood {
                right_labels,
                edges,
            } => {
                let mut seen = std::collections::HashSet::new();
                for label in right_labels {
                    if label.is_empty() || !seen.insert(label) {
                        return Err(malformed(format!("bad or duplicate right label {label:?}")));
                    }
                }
                let words = right_labels.len().div_ceil(64);
                let mut nbrs = vec![vec![0u64; words]; n];
                for &(u, v) in edges {
                    if u >= n || v >= right_labels.len() {
                        return Err(malformed(format!("edge ({u}, {v}) out of range")));
                    }
                    nbrs[u][v / 64] |= 1 << (v % 64);
                }
                Compiled::Neighborhoods(nbrs)
            }
            Family::PartitionMatroidRank { blocks, capacities } => {
                if blocks.len() != capacities.len() {
                    return Err(malformed("partitions and capacities differ in length"));
                }
                let mut covered = 0u64;
                let mut masks = Vec::with_capacity(blocks.len());
                for block in blocks {
                    let mut m = 0u64;
                    for &i in block {
                        if i >= n || covered & (1 << i) != 0 {
                            return Err(malformed(format!(
                                "element index {i} out of range or in two blocks"
                            )));
                        }
                        covered |= 1 << i;
                        m |= 1 << i;
                    }
                    masks.push(m);
                }
                if covered != ground.full_bits() {
                    return Err(malformed("partition blocks do not cover the ground set"));
                }
                Compiled::Blocks(masks)
            }
            Family::JointEntropy {
                cardinalities,
                table,
            } => {
                if cardinalities.len() != n {
                    return Err(malformed(format!(
                        "expected {n} cardinalities, got {}",
                        cardinalities.len()
                    )));
                }
                let mut cells = 1usize;
                for &c in cardinalities {
                    if c == 0 {
                        return Err(malformed("variable cardinality must be positive"));
                    }
                    let next = cells.saturating_mul(c);
                    if next > JOINT_TABLE_CAP {
                        return Err(Error::CapExceeded {
                            what: "joint probability table cells",
                            n: next,
                            cap: JOINT_TABLE_CAP,
                        });
                    }
                    cells = next;
                }
                if table.len() != cells {
                    return Err(malformed(format!(
                        "expected {cells} probabilities, got {}",
                        table.len()
                    )));
                }
                if let Some(p) = table.iter().find(|p| !p.is_finite() || **p < 0.0) {
                    return Err(malformed(format!("invalid probability {p}")));
                }
                let total: f64 = table.iter().sum();
                if (total - 1.0).abs() > tolerance.epsilon() {
                    return Err(malformed(format!("probabilities sum to {total}, not 1")));
                }
                Compiled::None
            }
            Family::ExplicitTable { values } => {
                ground.ensure_enumerable("explicit table", MATERIALIZE_CAP)?;
                if values.len() != ground.power_set_size() {
                    return Err(malformed(format!(
                        "expected {} table values, got {}",
                        ground.power_set_size(),
                        values.len()
                    )));
                }
                if let Some(first) = values.first() {
                    if values.iter().any(|v| v.mode() != first.mode()) {
                        return Err(Error::MixedMode);
                    }
                }
                Compiled::None
            }
        };
        Ok(SetFunctionSpec {
            ground,
            family,
            tolerance,
            compiled,
        })
    }

    pub fn cardinality(ground: Arc<GroundSet>) -> Self {
        SetFunctionSpec {
            ground,
            family: Family::Cardinality,
            tolerance: Tolerance::default(),
            compiled: Compiled::None,
        }
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tolerance
    }

    /// Same function under a different tolerance.
    pub fn retolerance(mut self, tolerance: Tolerance) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn n(&self) -> usize {
        self.ground.len()
    }

    pub fn mode(&self) -> Mode {
        match &self.family {
            Family::JointEntropy { .. } => Mode::Approx,
            Family::ExplicitTable { values } => values.first().map_or(Mode::Exact, Value::mode),
            _ => Mode::Exact,
        }
    }

    /// Cap on exhaustive pair checks for this spec's scalar mode.
    pub fn pair_cap(&self) -> usize {
        match self.mode() {
            Mode::Exact => PAIR_CAP_EXACT,
            Mode::Approx => PAIR_CAP_APPROX,
        }
    }

    pub fn evaluate(&self, a: &SubsetMask) -> Result<Value> {
        if !same_ground(&self.ground, a.ground()) {
            return Err(Error::GroundMismatch);
        }
        Ok(self.value_at(a.bits()))
    }

    pub(crate) fn value_at(&self, bits: u64) -> Value {
        match self.mode() {
            Mode::Exact => Value::Exact(self.exact_at(bits)),
            Mode::Approx => Value::Approx(self.approx_at(bits)),
        }
    }

    /// Exact evaluation; only valid for exact-mode specs.
    pub(crate) fn exact_at(&self, bits: u64) -> BigRational {
        let count = || BigRational::from_integer(BigInt::from(bits.count_ones()));
        let weighted = |weights: &[BigRational]| {
            let mut s = BigRational::zero();
            for (i, w) in weights.iter().enumerate() {
                if bits & (1 << i) != 0 {
                    s += w;
                }
            }
            s
        };
        match (&self.family, &self.compiled) {
            (Family::Cardinality, _) => count(),
            (Family::WeightedModular { gamma, weights }, _) => gamma + weighted(weights),
            (Family::BudgetedLinear { budget, weights }, _) => {
                let s = weighted(weights);
                if &s < budget {
                    s
                } else {
                    budget.clone()
                }
            }
            (Family::BipartiteNeighborhood { .. }, Compiled::Neighborhoods(nbrs)) => {
                let words = nbrs.first().map_or(0, Vec::len);
                let mut acc = vec![0u64; words];
                for (u, row) in nbrs.iter().enumerate() {
                    if bits & (1 << u) != 0 {
                        for (a, r) in acc.iter_mut().zip(row) {
                            *a |= r;
                        }
                    }
                }
                let size: u32 = acc.iter().map(|w| w.count_ones()).sum();
                BigRational::from_integer(BigInt::from(size))
            }
            (Family::UniformMatroidRank { k }, _) => {
                BigRational::from_integer(BigInt::from((bits.count_ones() as usize).min(*k)))
            }
            (Family::PartitionMatroidRank { capacities, .. }, Compiled::Blocks(blocks)) => {
                let r: usize = blocks
                    .iter()
                    .zip(capacities)
                    .map(|(b, &k)| ((bits & b).count_ones() as usize).min(k))
                    .sum();
                BigRational::from_integer(BigInt::from(r))
            }
            (Family::ExplicitTable { values }, _) => match &values[bits as usize] {
                Value::Exact(r) => r.clone(),
                Value::Approx(_) => panic!("exact evaluation of an approximate table"),
            },
            (Family::JointEntropy { .. }, _) => panic!("exact evaluation of an entropy oracle"),
            _ => unreachable!("compiled data matches family"),
        }
    }

    /// Approximate evaluation; only valid for approximate-mode specs.
    pub(crate) fn approx_at(&self, bits: u64) -> f64 {
        match &self.family {
            Family::JointEntropy {
                cardinalities,
                table,
            } => marginal_entropy(cardinalities, table, bits),
            Family::ExplicitTable { values } => match values[bits as usize] {
                Value::Approx(x) => x,
                Value::Exact(_) => panic!("approximate evaluation of an exact table"),
            },
            _ => panic!("approximate evaluation of an exact oracle"),
        }
    }

    pub(crate) fn table(&self, what: &'static str, cap: usize) -> Result<Table> {
        self.ground
            .ensure_enumerable(what, cap.min(MATERIALIZE_CAP))?;
        let size = self.ground.power_set_size() as u64;
        Ok(match self.mode() {
            Mode::Exact => Table::Exact((0..size).map(|b| self.exact_at(b)).collect()),
            Mode::Approx => Table::Approx((0..size).map(|b| self.approx_at(b)).collect()),
        })
    }
}

impl fmt::Display for SetFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {} elements", self.family.name(), self.n())
    }
}

/// Shannon entropy (base 2) of the marginal on the variables in `bits`.
fn marginal_entropy(cardinalities: &[usize], table: &[f64], bits: u64) -> f64 {
    if bits == 0 {
        return 0.0;
    }
    let n = cardinalities.len();
    // stride of each variable in the joint table, and in the marginal
    let mut joint_stride = vec![0usize; n];
    let mut acc = 1usize;
    for i in (0..n).rev() {
        joint_stride[i] = acc;
        acc *= cardinalities[i];
    }
    let mut marg_stride = vec![0usize; n];
    let mut marg_size = 1usize;
    for i in (0..n).rev() {
        if bits & (1 << i) != 0 {
            marg_stride[i] = marg_size;
            marg_size *= cardinalities[i];
        }
    }
    let mut marginal = vec![0.0f64; marg_size];
    for (cell, &p) in table.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut idx = 0;
        for i in 0..n {
            if bits & (1 << i) != 0 {
                idx += (cell / joint_stride[i]) % cardinalities[i] * marg_stride[i];
            }
        }
        marginal[idx] += p;
    }
    marginal
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// A spec tabulated over the whole power set.
#[derive(Debug, Clone)]
pub(crate) enum Table {
    Exact(Vec<BigRational>),
    Approx(Vec<f64>),
}

/// Evaluates `$body` with `$t` bound to the table contents of either mode.
macro_rules! with_table {
    ($table:expr, |$t:ident| $body:expr) => {
        match $table {
            $crate::setfun::Table::Exact($t) => $body,
            $crate::setfun::Table::Approx($t) => $body,
        }
    };
}
pub(crate) use with_table;

/// Tabulates `spec` into an equivalent `ExplicitTable` spec.
pub fn materialize(spec: &SetFunctionSpec) -> Result<SetFunctionSpec> {
    let table = spec.table("materialization", MATERIALIZE_CAP)?;
    let values = with_table!(table, |t| t.into_iter().map(Scalar::into_value).collect());
    SetFunctionSpec::with_tolerance(
        Arc::clone(&spec.ground),
        Family::ExplicitTable { values },
        spec.tolerance,
    )
}

fn nonnegative_kernel<T: Scalar>(t: &[T], tol: Tolerance) -> Collector<T> {
    scan(t.len() as u64, |a, c| {
        c.checked += 1;
        let fa = &t[a as usize];
        if fa.is_below_zero(tol) {
            c.hit(&[a], T::nil(), fa.clone());
        }
    })
}

fn monotone_kernel<T: Scalar>(t: &[T], n: usize, tol: Tolerance) -> Collector<T> {
    scan(t.len() as u64, |a, c| {
        for x in 0..n {
            let bit = 1u64 << x;
            if a & bit != 0 {
                continue;
            }
            c.checked += 1;
            let (fa, fb) = (&t[a as usize], &t[(a | bit) as usize]);
            if fa.exceeds(fb, tol) {
                c.hit(&[a, a | bit], fa.clone(), fb.clone());
            }
        }
    })
}

fn pairwise_kernel<T: Scalar>(t: &[T], tol: Tolerance, modular: bool) -> Collector<T> {
    let size = t.len() as u64;
    scan(size, |a, c| {
        for b in 0..size {
            c.checked += 1;
            let lattice = t[(a | b) as usize].add(&t[(a & b) as usize]);
            let sides = t[a as usize].add(&t[b as usize]);
            if lattice.exceeds(&sides, tol) {
                c.hit(&[a, b], lattice, sides);
            } else if modular && sides.exceeds(&lattice, tol) {
                c.hit(&[a, b], sides, lattice);
            }
        }
    })
}

fn marginal_kernel<T: Scalar>(t: &[T], n: usize, tol: Tolerance) -> Collector<T> {
    let full = crate::setcore::full_bits(n);
    scan(t.len() as u64, |a, c| {
        let outside = full & !a;
        // supersets b of a, ascending
        let mut extra = 0u64;
        loop {
            let b = a | extra;
            for x in 0..n {
                let bit = 1u64 << x;
                if b & bit != 0 {
                    continue;
                }
                c.checked += 1;
                let gain_small = t[(a | bit) as usize].sub(&t[a as usize]);
                let gain_large = t[(b | bit) as usize].sub(&t[b as usize]);
                if gain_large.exceeds(&gain_small, tol) {
                    c.hit(&[a, b, bit], gain_large, gain_small);
                }
            }
            if extra == outside {
                break;
            }
            extra = extra.wrapping_sub(outside) & outside;
        }
    })
}

/// Checks `f(A) >= 0` for every subset; witness `(A)` with `lhs = 0`, `rhs = f(A)`.
pub fn is_nonnegative(spec: &SetFunctionSpec) -> Result<PropertyReport> {
    let tol = spec.tolerance;
    let table = spec.table("nonnegativity check", MATERIALIZE_CAP)?;
    Ok(with_table!(table, |t| nonnegative_kernel(&t, tol)
        .into_report(ViolationKind::Property, &spec.ground, None)))
}

/// Checks `f(A) <= f(A + x)` for every subset and every element outside it.
/// Witness `(A, A + x)`.
pub fn is_monotone(spec: &SetFunctionSpec) -> Result<PropertyReport> {
    let tol = spec.tolerance;
    let n = spec.n();
    let table = spec.table("monotonicity check", MATERIALIZE_CAP)?;
    Ok(with_table!(table, |t| monotone_kernel(&t, n, tol)
        .into_report(ViolationKind::Property, &spec.ground, None)))
}

/// Checks `f(A | B) + f(A & B) <= f(A) + f(B)` over all ordered pairs.
/// Witness `(A, B)`.
pub fn is_submodular_pairwise(spec: &SetFunctionSpec) -> Result<PropertyReport> {
    let tol = spec.tolerance;
    let table = spec.table("pairwise submodularity check", spec.pair_cap())?;
    Ok(with_table!(table, |t| pairwise_kernel(&t, tol, false)
        .into_report(ViolationKind::Property, &spec.ground, None)))
}

/// Checks diminishing marginal gains: `f(A + x) - f(A) >= f(B + x) - f(B)`
/// for all `A ⊆ B` and `x ∉ B`. Witness `(A, B, {x})` with
/// `lhs = f(B + x) - f(B)` and `rhs = f(A + x) - f(A)`.
pub fn is_submodular_marginal(spec: &SetFunctionSpec) -> Result<PropertyReport> {
    let tol = spec.tolerance;
    let n = spec.n();
    let table = spec.table("marginal submodularity check", spec.pair_cap())?;
    Ok(with_table!(table, |t| marginal_kernel(&t, n, tol)
        .into_report(ViolationKind::Property, &spec.ground, None)))
}

/// Checks `f(A | B) + f(A & B) == f(A) + f(B)` over all ordered pairs. A
/// witness is oriented so that `lhs` is the larger side.
pub fn is_modular(spec: &SetFunctionSpec) -> Result<PropertyReport> {
    let tol = spec.tolerance;
    let table = spec.table("modularity check", spec.pair_cap())?;
    Ok(with_table!(table, |t| pairwise_kernel(&t, tol, true)
        .into_report(ViolationKind::Property, &spec.ground, None)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomMode {
    /// Random nonnegative offset and weights, tabulated.
    Modular,
    /// Random nonnegative values closed upward into a monotone function.
    Free,
}

fn rng_value(rng: &mut ChaCha8Rng) -> u32 {
    rng.random_range(0..=RANDOM_MAX)
}

/// A seeded random monotone, nonnegative explicit table with integer values.
pub fn random_monotone_function(
    ground: &Arc<GroundSet>,
    seed: u64,
    mode: RandomMode,
) -> Result<SetFunctionSpec> {
    ground.ensure_enumerable("random table generator", RANDOM_CAP)?;
    let n = ground.len();
    let size = ground.power_set_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<u32> = match mode {
        RandomMode::Modular => {
            let gamma = rng_value(&mut rng);
            let weights: Vec<u32> = (0..n).map(|_| rng_value(&mut rng)).collect();
            (0..size)
                .map(|a| {
                    gamma
                        + (0..n)
                            .filter(|i| a & (1 << i) != 0)
                            .map(|i| weights[i])
                            .sum::<u32>()
                })
                .collect()
        }
        RandomMode::Free => {
            let raw: Vec<u32> = (0..size).map(|_| rng_value(&mut rng)).collect();
            // a minus one element is numerically smaller than a, so it is final
            let mut f = raw.clone();
            for a in 1..size {
                let below = (0..n)
                    .filter(|i| a & (1 << i) != 0)
                    .map(|i| f[a & !(1 << i)])
                    .max()
                    .unwrap_or(0);
                f[a] = raw[a].max(below);
            }
            f
        }
    };
    let values = values.into_iter().map(|v| Value::int(v.into())).collect();
    SetFunctionSpec::new(Arc::clone(ground), Family::ExplicitTable { values })
}

/// A seeded `WeightedModular` spec with integer weights in `0..=100` and an
/// offset that is either zero or drawn from `1..=100`.
pub fn random_weighted_modular(
    ground: &Arc<GroundSet>,
    seed: u64,
    positive_offset: bool,
) -> Result<SetFunctionSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let int = |v: u32| BigRational::from_integer(BigInt::from(v));
    let gamma = if positive_offset {
        rng.random_range(1..=RANDOM_MAX)
    } else {
        0
    };
    let weights = (0..ground.len())
        .map(|_| int(rng_value(&mut rng)))
        .collect();
    SetFunctionSpec::new(
        Arc::clone(ground),
        Family::WeightedModular {
            gamma: int(gamma),
            weights,
        },
    )
}
