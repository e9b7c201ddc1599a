//! Mechanical verification of the inequalities relating set functions and
//! their Jaccard distances.
//!
//! Exhaustive checks enumerate every ordered pair or triple of subsets in
//! ascending mask order; `(A, B, C)` is visited lexicographically and the
//! first violations in that order become the report's witnesses. Sampled
//! checks draw uniform subsets from a seeded stream and keep witnesses in
//! sample order.
//!
//! In exact mode every comparison is decided over rationals. An `f64`
//! pre-screen skips the rational arithmetic only when the float values
//! already put `lhs` below `rhs` by a margin far above rounding error.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jaccard::{cap_kernel, delta_kernel};
use crate::report::{scan, try_scan, Collector, PropertyReport, ViolationKind, ViolationRecord};
use crate::setcore::{full_bits, GroundSet};
use crate::setfun::{
    is_modular, is_monotone, is_nonnegative, is_submodular_pairwise, with_table, Family,
    SetFunctionSpec, MATERIALIZE_CAP,
};
use crate::value::{Mode, Scalar, Tolerance};

/// Largest ground set for exhaustive triple checks on exact specs.
pub const TRIPLE_CAP_EXACT: usize = 8;
/// Largest ground set for exhaustive triple checks on approximate specs.
pub const TRIPLE_CAP_APPROX: usize = 6;
/// Largest ground set accepted by [`sampled_check`].
pub const SAMPLE_CAP: usize = 20;

const SAMPLE_CHUNK: usize = 4096;

/// Relative gap below which the float pre-screen defers to exact arithmetic.
const SCREEN_GAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distance {
    /// `1 - f(A ∩ B) / f(A ∪ B)`
    Cap,
    /// `(f(A △ B) - f(∅)) / f(A ∪ B)`
    Delta,
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distance::Cap => "cap",
            Distance::Delta => "delta",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckKind {
    TriangleCap,
    TriangleDelta,
    Lemma1,
    Corollary1,
    Ordering,
    Metric(Distance),
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckKind::TriangleCap => f.write_str("triangle-cap"),
            CheckKind::TriangleDelta => f.write_str("triangle-delta"),
            CheckKind::Lemma1 => f.write_str("lemma1"),
            CheckKind::Corollary1 => f.write_str("corollary1"),
            CheckKind::Ordering => f.write_str("ordering"),
            CheckKind::Metric(Distance::Delta) => f.write_str("metric"),
            CheckKind::Metric(Distance::Cap) => f.write_str("metric-cap"),
        }
    }
}

impl FromStr for CheckKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "triangle-cap" => CheckKind::TriangleCap,
            "triangle-delta" => CheckKind::TriangleDelta,
            "lemma1" => CheckKind::Lemma1,
            "corollary1" => CheckKind::Corollary1,
            "ordering" => CheckKind::Ordering,
            "metric" | "metric-delta" => CheckKind::Metric(Distance::Delta),
            "metric-cap" => CheckKind::Metric(Distance::Cap),
            other => return Err(format!("unknown check {other:?}")),
        })
    }
}

/// Read access to a set function in one scalar mode, plus a float shadow
/// used by the pre-screen.
trait Oracle<T>: Sync {
    fn value(&self, bits: u64) -> T;
    fn float(&self, bits: u64) -> f64;
}

struct Tabulated<T> {
    values: Vec<T>,
    floats: Vec<f64>,
}

impl<T: Scalar> Tabulated<T> {
    fn new(values: Vec<T>) -> Self {
        let floats = values.iter().map(Scalar::as_f64).collect();
        Tabulated { values, floats }
    }
}

impl<T: Scalar> Oracle<T> for Tabulated<T> {
    fn value(&self, bits: u64) -> T {
        self.values[bits as usize].clone()
    }
    fn float(&self, bits: u64) -> f64 {
        self.floats[bits as usize]
    }
}

/// Evaluates the spec on demand; used when the ground set is too large to
/// tabulate.
struct Live<'a>(&'a SetFunctionSpec);

impl Oracle<BigRational> for Live<'_> {
    fn value(&self, bits: u64) -> BigRational {
        self.0.exact_at(bits)
    }
    fn float(&self, bits: u64) -> f64 {
        self.0.exact_at(bits).as_f64()
    }
}

impl Oracle<f64> for Live<'_> {
    fn value(&self, bits: u64) -> f64 {
        self.0.approx_at(bits)
    }
    fn float(&self, bits: u64) -> f64 {
        self.0.approx_at(bits)
    }
}

/// True when the floats prove `lhs <= rhs` with room to spare.
fn clearly_le(lhs: f64, rhs: f64) -> bool {
    lhs - rhs < -SCREEN_GAP * (1.0 + lhs.abs() + rhs.abs())
}

fn distance<T: Scalar>(
    o: &impl Oracle<T>,
    d: Distance,
    a: u64,
    b: u64,
    tol: Tolerance,
) -> Result<T> {
    match d {
        Distance::Cap => cap_kernel(&o.value(a & b), &o.value(a | b), tol),
        Distance::Delta => delta_kernel(&o.value(a ^ b), &o.value(0), &o.value(a | b), tol),
    }
}

/// Float distance, or `None` when the float inputs are not plainly those of
/// a monotone nonnegative function and the exact kernel must decide.
fn distance_float<T: Scalar>(o: &impl Oracle<T>, d: Distance, a: u64, b: u64) -> Option<f64> {
    let union = o.float(a | b);
    if !(union.is_normal() && union > 0.0) {
        return None;
    }
    match d {
        Distance::Cap => {
            let inter = o.float(a & b);
            (inter >= 0.0 && inter <= union).then(|| 1.0 - inter / union)
        }
        Distance::Delta => {
            let (sym, empty) = (o.float(a ^ b), o.float(0));
            (empty >= 0.0 && empty <= sym && sym <= union).then(|| (sym - empty) / union)
        }
    }
}

fn require(spec: &SetFunctionSpec, submodular: bool) -> Result<()> {
    let mut failed = Vec::new();
    if !is_nonnegative(spec)?.holds() {
        failed.push("nonnegative".to_string());
    }
    if !is_monotone(spec)?.holds() {
        failed.push("monotone".to_string());
    }
    if submodular && !is_submodular_pairwise(spec)?.holds() {
        failed.push("submodular".to_string());
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::PrereqFailed(failed))
    }
}

fn triple_cap(spec: &SetFunctionSpec) -> usize {
    match spec.mode() {
        Mode::Exact => TRIPLE_CAP_EXACT,
        Mode::Approx => TRIPLE_CAP_APPROX,
    }
}

/// Every ordered pair's distance, exact and as float.
struct DistanceTable<T> {
    size: usize,
    exact: Vec<T>,
    floats: Vec<f64>,
}

impl<T: Scalar> DistanceTable<T> {
    fn build(o: &impl Oracle<T>, d: Distance, size: usize, tol: Tolerance) -> Result<Self> {
        let mut exact = Vec::with_capacity(size * size);
        for a in 0..size as u64 {
            for b in 0..size as u64 {
                exact.push(distance(o, d, a, b, tol)?);
            }
        }
        let floats = exact.iter().map(Scalar::as_f64).collect();
        Ok(DistanceTable {
            size,
            exact,
            floats,
        })
    }

    fn at(&self, a: u64, b: u64) -> &T {
        &self.exact[a as usize * self.size + b as usize]
    }

    fn float(&self, a: u64, b: u64) -> f64 {
        self.floats[a as usize * self.size + b as usize]
    }
}

fn triangle_kernel<T: Scalar>(
    dist: &DistanceTable<T>,
    tol: Tolerance,
    c: &mut Collector<T>,
    a: u64,
) {
    let size = dist.size as u64;
    for b in 0..size {
        let lhs_f = dist.float(a, b);
        for mid in 0..size {
            c.checked += 1;
            if T::EXACT && clearly_le(lhs_f, dist.float(a, mid) + dist.float(mid, b)) {
                continue;
            }
            let rhs = dist.at(a, mid).add(dist.at(mid, b));
            let lhs = dist.at(a, b);
            if lhs.exceeds(&rhs, tol) {
                c.hit(&[a, b, mid], lhs.clone(), rhs);
            }
        }
    }
}

/// Verifies `d(A, B) <= d(A, C) + d(C, B)` over all ordered triples.
///
/// The check runs whether or not the spec is modular (for `Cap`) or
/// submodular (for `Delta`), so it doubles as a violation hunt. The spec
/// must be nonnegative and monotone for the distances to be defined.
pub fn check_triangle(spec: &SetFunctionSpec, d: Distance) -> Result<PropertyReport> {
    spec.ground()
        .ensure_enumerable("exhaustive triangle check", triple_cap(spec))?;
    require(spec, false)?;
    let tol = spec.tolerance();
    let size = spec.ground().power_set_size();
    let table = spec.table("exhaustive triangle check", MATERIALIZE_CAP)?;
    with_table!(table, |t| {
        let dist = DistanceTable::build(&Tabulated::new(t), d, size, tol)?;
        Ok(
            scan(size as u64, |a, c| triangle_kernel(&dist, tol, c, a)).into_report(
                ViolationKind::Triangle,
                spec.ground(),
                None,
            ),
        )
    })
}

fn lemma1_instance<T: Scalar>(
    o: &impl Oracle<T>,
    a: u64,
    b: u64,
    m: u64,
    tol: Tolerance,
) -> Option<(T, T)> {
    if T::EXACT {
        let lhs = o.float(a & m) * o.float(b | m) + o.float(a | m) * o.float(b & m);
        let rhs = o.float(m) * (o.float(a) + o.float(b));
        if clearly_le(lhs, rhs) {
            return None;
        }
    }
    let lhs = o
        .value(a & m)
        .mul(&o.value(b | m))
        .add(&o.value(a | m).mul(&o.value(b & m)));
    let rhs = o.value(m).mul(&o.value(a).add(&o.value(b)));
    lhs.exceeds(&rhs, tol).then_some((lhs, rhs))
}

fn corollary1_instance<T: Scalar>(
    o: &impl Oracle<T>,
    s: u64,
    t: u64,
    tol: Tolerance,
) -> Option<(T, T)> {
    if T::EXACT {
        let lhs = o.float(s & t) * o.float(s | t);
        let rhs = o.float(s) * o.float(t);
        if clearly_le(lhs, rhs) {
            return None;
        }
    }
    let lhs = o.value(s & t).mul(&o.value(s | t));
    let rhs = o.value(s).mul(&o.value(t));
    lhs.exceeds(&rhs, tol).then_some((lhs, rhs))
}

/// Verifies `f(A∩C)·f(B∪C) + f(A∪C)·f(B∩C) <= f(C)·(f(A) + f(B))` over all
/// ordered triples `(A, B, C)`. Requires a nonnegative, monotone,
/// submodular spec.
pub fn check_lemma1(spec: &SetFunctionSpec) -> Result<PropertyReport> {
    spec.ground()
        .ensure_enumerable("exhaustive lemma check", triple_cap(spec))?;
    require(spec, true)?;
    let tol = spec.tolerance();
    let size = spec.ground().power_set_size() as u64;
    let table = spec.table("exhaustive lemma check", MATERIALIZE_CAP)?;
    Ok(with_table!(table, |t| {
        let o = Tabulated::new(t);
        scan(size, |a, c| {
            for b in 0..size {
                for m in 0..size {
                    c.checked += 1;
                    if let Some((lhs, rhs)) = lemma1_instance(&o, a, b, m, tol) {
                        c.hit(&[a, b, m], lhs, rhs);
                    }
                }
            }
        })
        .into_report(ViolationKind::Lemma1, spec.ground(), None)
    }))
}

/// Verifies `f(S∩T)·f(S∪T) <= f(S)·f(T)` over all ordered pairs.
pub fn check_corollary1(spec: &SetFunctionSpec) -> Result<PropertyReport> {
    spec.ground()
        .ensure_enumerable("exhaustive corollary check", spec.pair_cap())?;
    require(spec, true)?;
    let tol = spec.tolerance();
    let size = spec.ground().power_set_size() as u64;
    let table = spec.table("exhaustive corollary check", MATERIALIZE_CAP)?;
    Ok(with_table!(table, |t| {
        let o = Tabulated::new(t);
        scan(size, |s, c| {
            for t in 0..size {
                c.checked += 1;
                if let Some((lhs, rhs)) = corollary1_instance(&o, s, t, tol) {
                    c.hit(&[s, t], lhs, rhs);
                }
            }
        })
        .into_report(ViolationKind::Corollary1, spec.ground(), None)
    }))
}

/// Checks `0 <= cap <= delta <= 1` on one pair, and `cap == delta` when the
/// function is known to be modular.
fn ordering_instance<T: Scalar>(
    o: &impl Oracle<T>,
    a: u64,
    b: u64,
    modular: bool,
    tol: Tolerance,
    c: &mut Collector<T>,
) -> Result<()> {
    c.checked += 1;
    let cap = distance(o, Distance::Cap, a, b, tol)?;
    let delta = distance(o, Distance::Delta, a, b, tol)?;
    let chain = [
        (T::nil(), cap.clone()),
        (cap.clone(), delta.clone()),
        (delta.clone(), T::unit()),
    ];
    for (lhs, rhs) in chain {
        if lhs.exceeds(&rhs, tol) {
            c.hit(&[a, b], lhs, rhs);
        }
    }
    if modular && delta.exceeds(&cap, tol) {
        c.hit(&[a, b], delta, cap);
    }
    Ok(())
}

/// Verifies `0 <= cap <= delta <= 1` over all ordered pairs, and that the
/// two distances coincide when the spec is modular.
pub fn check_ordering(spec: &SetFunctionSpec) -> Result<PropertyReport> {
    spec.ground()
        .ensure_enumerable("exhaustive ordering check", spec.pair_cap())?;
    require(spec, true)?;
    let tol = spec.tolerance();
    let modular = is_modular(spec)?.holds();
    let size = spec.ground().power_set_size() as u64;
    let table = spec.table("exhaustive ordering check", MATERIALIZE_CAP)?;
    with_table!(table, |t| {
        let o = Tabulated::new(t);
        Ok(try_scan(size, |a, c| {
            for b in 0..size {
                ordering_instance(&o, a, b, modular, tol, c)?;
            }
            Ok::<_, Error>(())
        })?
        .into_report(ViolationKind::Ordering, spec.ground(), None))
    })
}

fn metric_pair<T: Scalar>(
    dab: &T,
    dba: &T,
    daa: &T,
    a: u64,
    b: u64,
    tol: Tolerance,
    c: &mut Collector<T>,
) {
    if dab.is_below_zero(tol) {
        c.hit_as(ViolationKind::Property, &[a, b], T::nil(), dab.clone());
    }
    if dab.exceeds(dba, tol) {
        c.hit_as(ViolationKind::Property, &[a, b], dab.clone(), dba.clone());
    }
    if a == b && daa.exceeds(&T::nil(), tol) {
        c.hit_as(ViolationKind::Property, &[a, a], daa.clone(), T::nil());
    }
    if a < b && dab.is_nil(tol) {
        c.note(&[a, b]);
    }
}

/// Verifies the pseudometric axioms for a distance over the whole power
/// set: nonnegativity, symmetry, `d(A, A) = 0` and the triangle
/// inequality. Distinct sets at distance zero are listed as informational
/// entries, not violations.
pub fn check_metric_axioms(spec: &SetFunctionSpec, d: Distance) -> Result<PropertyReport> {
    spec.ground()
        .ensure_enumerable("exhaustive metric check", triple_cap(spec))?;
    require(spec, false)?;
    let tol = spec.tolerance();
    let size = spec.ground().power_set_size();
    let table = spec.table("exhaustive metric check", MATERIALIZE_CAP)?;
    with_table!(table, |t| {
        let dist = DistanceTable::build(&Tabulated::new(t), d, size, tol)?;
        Ok(scan(size as u64, |a, c| {
            for b in 0..size as u64 {
                metric_pair(dist.at(a, b), dist.at(b, a), dist.at(a, a), a, b, tol, c);
            }
            triangle_kernel(&dist, tol, c, a);
        })
        .into_report(ViolationKind::Triangle, spec.ground(), None))
    })
}

/// Scans ordered pairs of non-empty, incomparable sets for
/// `f(A) = f(B) = f(A ∪ B) > f(A ∩ B)`. Such a pair makes `(A, B, A ∪ B)`
/// violate the triangle inequality for the cap distance; the first pair
/// found is returned as that violation.
pub fn find_cap_counterexample(spec: &SetFunctionSpec) -> Result<Option<ViolationRecord>> {
    spec.ground()
        .ensure_enumerable("counterexample search", spec.pair_cap())?;
    require(spec, true)?;
    let tol = spec.tolerance();
    let size = spec.ground().power_set_size() as u64;
    let table = spec.table("counterexample search", MATERIALIZE_CAP)?;
    with_table!(table, |t| {
        let o = Tabulated::new(t);
        for a in 1..size {
            for b in 1..size {
                if a & b == a || a & b == b {
                    continue;
                }
                let (fa, fb, fu, fi) = (o.value(a), o.value(b), o.value(a | b), o.value(a & b));
                if fa.approx_eq(&fu, tol) && fb.approx_eq(&fu, tol) && fu.exceeds(&fi, tol) {
                    let u = a | b;
                    let lhs = distance(&o, Distance::Cap, a, b, tol)?;
                    let rhs = distance(&o, Distance::Cap, a, u, tol)?.add(&distance(
                        &o,
                        Distance::Cap,
                        u,
                        b,
                        tol,
                    )?);
                    let mut c = Collector::default();
                    c.hit(&[a, b, u], lhs, rhs);
                    let report = c.into_report(ViolationKind::Triangle, spec.ground(), None);
                    return Ok(report.violations.into_iter().next());
                }
            }
        }
        Ok(None)
    })
}

/// Runs the exhaustive form of `kind`.
pub fn check_exhaustive(spec: &SetFunctionSpec, kind: CheckKind) -> Result<PropertyReport> {
    match kind {
        CheckKind::TriangleCap => check_triangle(spec, Distance::Cap),
        CheckKind::TriangleDelta => check_triangle(spec, Distance::Delta),
        CheckKind::Lemma1 => check_lemma1(spec),
        CheckKind::Corollary1 => check_corollary1(spec),
        CheckKind::Ordering => check_ordering(spec),
        CheckKind::Metric(d) => check_metric_axioms(spec, d),
    }
}

/// Draws `count` triples of uniform subsets: each subset is a random word
/// masked to the ground set.
pub fn sample_triples(ground: &GroundSet, count: u64, seed: u64) -> Vec<[u64; 3]> {
    let mask = full_bits(ground.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            [
                rng.next_u64() & mask,
                rng.next_u64() & mask,
                rng.next_u64() & mask,
            ]
        })
        .collect()
}

fn sampled_instance<T: Scalar>(
    o: &impl Oracle<T>,
    kind: CheckKind,
    modular: bool,
    [a, b, m]: [u64; 3],
    tol: Tolerance,
    c: &mut Collector<T>,
) -> Result<()> {
    match kind {
        CheckKind::TriangleCap | CheckKind::TriangleDelta | CheckKind::Metric(_) => {
            let d = match kind {
                CheckKind::TriangleCap | CheckKind::Metric(Distance::Cap) => Distance::Cap,
                _ => Distance::Delta,
            };
            if let CheckKind::Metric(_) = kind {
                let dab = distance(o, d, a, b, tol)?;
                let dba = distance(o, d, b, a, tol)?;
                let daa = distance(o, d, a, a, tol)?;
                metric_pair(&dab, &dba, &daa, a, b, tol, c);
                if a != b {
                    metric_pair(&daa, &daa, &daa, a, a, tol, c);
                }
            }
            c.checked += 1;
            if T::EXACT {
                let screened = (
                    distance_float(o, d, a, b),
                    distance_float(o, d, a, m),
                    distance_float(o, d, m, b),
                );
                if let (Some(x), Some(y), Some(z)) = screened {
                    if clearly_le(x, y + z) {
                        return Ok(());
                    }
                }
            }
            let lhs = distance(o, d, a, b, tol)?;
            let rhs = distance(o, d, a, m, tol)?.add(&distance(o, d, m, b, tol)?);
            if lhs.exceeds(&rhs, tol) {
                c.hit_as(ViolationKind::Triangle, &[a, b, m], lhs, rhs);
            }
        }
        CheckKind::Lemma1 => {
            c.checked += 1;
            if let Some((lhs, rhs)) = lemma1_instance(o, a, b, m, tol) {
                c.hit(&[a, b, m], lhs, rhs);
            }
        }
        CheckKind::Corollary1 => {
            c.checked += 1;
            if let Some((lhs, rhs)) = corollary1_instance(o, a, b, tol) {
                c.hit(&[a, b], lhs, rhs);
            }
        }
        CheckKind::Ordering => ordering_instance(o, a, b, modular, tol, c)?,
    }
    Ok(())
}

fn report_kind(kind: CheckKind) -> ViolationKind {
    match kind {
        CheckKind::TriangleCap | CheckKind::TriangleDelta | CheckKind::Metric(_) => {
            ViolationKind::Triangle
        }
        CheckKind::Lemma1 => ViolationKind::Lemma1,
        CheckKind::Corollary1 => ViolationKind::Corollary1,
        CheckKind::Ordering => ViolationKind::Ordering,
    }
}

fn run_samples<T: Scalar>(
    o: &impl Oracle<T>,
    kind: CheckKind,
    modular: bool,
    samples: &[[u64; 3]],
    tol: Tolerance,
    ground: &Arc<GroundSet>,
    seed: u64,
) -> Result<PropertyReport> {
    let chunks = samples.len().div_ceil(SAMPLE_CHUNK) as u64;
    let collector = try_scan(chunks, |i, c| {
        let start = i as usize * SAMPLE_CHUNK;
        let end = (start + SAMPLE_CHUNK).min(samples.len());
        for &triple in &samples[start..end] {
            sampled_instance(o, kind, modular, triple, tol, c)?;
        }
        Ok::<_, Error>(())
    })?;
    Ok(collector.into_report(report_kind(kind), ground, Some(seed)))
}

/// Runs `kind` on `count` seeded random triples instead of the whole power
/// set. Pair checks use the first two sets of each triple. Identical
/// arguments give identical reports.
///
/// Prerequisites are not verified here; a distance evaluation that exposes
/// a negative or non-monotone value still fails with `PropertyViolation`.
pub fn sampled_check(
    spec: &SetFunctionSpec,
    kind: CheckKind,
    count: u64,
    seed: u64,
) -> Result<PropertyReport> {
    spec.ground()
        .ensure_enumerable("sampled check", SAMPLE_CAP)?;
    let tol = spec.tolerance();
    let samples = sample_triples(spec.ground(), count, seed);
    let modular = match spec.family() {
        Family::Cardinality | Family::WeightedModular { .. } => true,
        _ if kind == CheckKind::Ordering && spec.n() <= spec.pair_cap() => {
            is_modular(spec)?.holds()
        }
        _ => false,
    };
    let ground = spec.ground();
    if spec.n() <= MATERIALIZE_CAP {
        let table = spec.table("sampled check", MATERIALIZE_CAP)?;
        with_table!(table, |t| run_samples(
            &Tabulated::new(t),
            kind,
            modular,
            &samples,
            tol,
            ground,
            seed
        ))
    } else {
        let live = Live(spec);
        match spec.mode() {
            Mode::Exact => {
                run_samples::<BigRational>(&live, kind, modular, &samples, tol, ground, seed)
            }
            Mode::Approx => run_samples::<f64>(&live, kind, modular, &samples, tol, ground, seed),
        }
    }
}
