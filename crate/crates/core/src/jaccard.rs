//! Jaccard index and distance, their set-function generalizations, and the
//! weighted vector / multiset form.
//!
//! For a set function `f`:
//!
//! * `cap`:   `1 - f(A ∩ B) / f(A ∪ B)`
//! * `delta`: `(f(A △ B) - f(∅)) / f(A ∪ B)`
//! * `index`: `1 - delta`
//!
//! Both distances are defined as 0 when `f(A ∪ B) = 0`. Monotonicity and
//! nonnegativity are not checked up front; a violation is reported when the
//! values actually touched by one evaluation witness it.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::setcore::{same_ground, SubsetMask};
use crate::setfun::SetFunctionSpec;
use crate::value::{Mode, Scalar, Tolerance, Value};

fn int(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `|A ∩ B| / |A ∪ B|`, with `J(∅, ∅) = 1`.
pub fn jaccard_index(a: &SubsetMask, b: &SubsetMask) -> Result<Value> {
    let inter = a.intersection(b)?.len();
    let union = a.union(b)?.len();
    if union == 0 {
        return Ok(Value::one(Mode::Exact));
    }
    Ok(Value::Exact(int(inter) / int(union)))
}

/// `1 - J(A, B)`, which equals `|A △ B| / |A ∪ B|`.
pub fn jaccard_distance(a: &SubsetMask, b: &SubsetMask) -> Result<Value> {
    let Value::Exact(j) = jaccard_index(a, b)? else {
        unreachable!()
    };
    let d = BigRational::one() - j;
    #[cfg(debug_assertions)]
    {
        let union = a.union(b)?.len();
        let via_sym = if union == 0 {
            BigRational::zero()
        } else {
            int(a.sym_difference(b)?.len()) / int(union)
        };
        debug_assert_eq!(d, via_sym);
    }
    Ok(Value::Exact(d))
}

fn violation(msg: String) -> Error {
    Error::PropertyViolation(msg)
}

/// Cap distance from `f(A ∩ B)` and `f(A ∪ B)`.
pub(crate) fn cap_kernel<T: Scalar>(f_inter: &T, f_union: &T, tol: Tolerance) -> Result<T> {
    if f_inter.is_below_zero(tol) || f_union.is_below_zero(tol) {
        return Err(violation(format!(
            "negative value among f(A∩B)={f_inter:?}, f(A∪B)={f_union:?}"
        )));
    }
    if f_union.is_nil(tol) {
        return Ok(T::nil());
    }
    if f_inter.exceeds(f_union, tol) {
        return Err(violation(format!(
            "f(A∩B)={f_inter:?} exceeds f(A∪B)={f_union:?}; not monotone"
        )));
    }
    Ok(T::unit().sub(&f_inter.div(f_union)))
}

/// Delta distance from `f(A △ B)`, `f(∅)` and `f(A ∪ B)`.
pub(crate) fn delta_kernel<T: Scalar>(
    f_sym: &T,
    f_empty: &T,
    f_union: &T,
    tol: Tolerance,
) -> Result<T> {
    if f_sym.is_below_zero(tol) || f_empty.is_below_zero(tol) || f_union.is_below_zero(tol) {
        return Err(violation(format!(
            "negative value among f(A△B)={f_sym:?}, f(∅)={f_empty:?}, f(A∪B)={f_union:?}"
        )));
    }
    if f_union.is_nil(tol) {
        return Ok(T::nil());
    }
    if f_empty.exceeds(f_sym, tol) {
        return Err(violation(format!(
            "f(A△B)={f_sym:?} is below f(∅)={f_empty:?}; not monotone"
        )));
    }
    if f_sym.exceeds(f_union, tol) {
        return Err(violation(format!(
            "f(A△B)={f_sym:?} exceeds f(A∪B)={f_union:?}; not monotone"
        )));
    }
    Ok(f_sym.sub(f_empty).div(f_union))
}

fn check_ground(spec: &SetFunctionSpec, a: &SubsetMask, b: &SubsetMask) -> Result<()> {
    if same_ground(spec.ground(), a.ground()) && same_ground(spec.ground(), b.ground()) {
        Ok(())
    } else {
        Err(Error::GroundMismatch)
    }
}

/// `J_{δ,f}`: `1 - f(A ∩ B) / f(A ∪ B)`.
pub fn sub_jaccard_cap(spec: &SetFunctionSpec, a: &SubsetMask, b: &SubsetMask) -> Result<Value> {
    check_ground(spec, a, b)?;
    let (x, y) = (a.bits(), b.bits());
    let tol = spec.tolerance();
    match spec.mode() {
        Mode::Exact => {
            cap_kernel(&spec.exact_at(x & y), &spec.exact_at(x | y), tol).map(Value::Exact)
        }
        Mode::Approx => {
            cap_kernel(&spec.approx_at(x & y), &spec.approx_at(x | y), tol).map(Value::Approx)
        }
    }
}

/// `J^Δ_{δ,f}`: `(f(A △ B) - f(∅)) / f(A ∪ B)`.
pub fn sub_jaccard_delta(spec: &SetFunctionSpec, a: &SubsetMask, b: &SubsetMask) -> Result<Value> {
    check_ground(spec, a, b)?;
    let (x, y) = (a.bits(), b.bits());
    let tol = spec.tolerance();
    match spec.mode() {
        Mode::Exact => delta_kernel(
            &spec.exact_at(x ^ y),
            &spec.exact_at(0),
            &spec.exact_at(x | y),
            tol,
        )
        .map(Value::Exact),
        Mode::Approx => delta_kernel(
            &spec.approx_at(x ^ y),
            &spec.approx_at(0),
            &spec.approx_at(x | y),
            tol,
        )
        .map(Value::Approx),
    }
}

/// `J^Δ_f = 1 - J^Δ_{δ,f}`; the standard Jaccard index when `f(A) = |A|`.
pub fn sub_jaccard_index(spec: &SetFunctionSpec, a: &SubsetMask, b: &SubsetMask) -> Result<Value> {
    let d = sub_jaccard_delta(spec, a, b)?;
    Value::one(d.mode()).checked_sub(&d)
}

/// A vector of nonnegative weights, all in one scalar mode.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVector {
    entries: Vec<Value>,
    mode: Mode,
}

impl WeightedVector {
    pub fn new(entries: Vec<Value>) -> Result<Self> {
        let mode = entries.first().map_or(Mode::Exact, Value::mode);
        for e in &entries {
            if e.mode() != mode {
                return Err(Error::MixedMode);
            }
            if e.is_negative(Tolerance::default()) || (mode == Mode::Approx && e.to_f64() < 0.0) {
                return Err(Error::NegativeEntry(e.to_string()));
            }
            if mode == Mode::Approx && !e.to_f64().is_finite() {
                return Err(Error::InvalidNumber(e.to_string()));
            }
        }
        Ok(WeightedVector { entries, mode })
    }

    pub fn from_ints<I: IntoIterator<Item = i64>>(entries: I) -> Result<Self> {
        Self::new(entries.into_iter().map(Value::int).collect())
    }

    /// 0/1 indicator vector of a subset over its ground set.
    pub fn indicator(a: &SubsetMask) -> Self {
        let entries = (0..a.ground().len())
            .map(|i| Value::int(i64::from(a.contains(i))))
            .collect();
        WeightedVector {
            entries,
            mode: Mode::Exact,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Value] {
        &self.entries
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }
}

impl fmt::Display for WeightedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn min_max_sums<T: Scalar + PartialOrd>(x: &[T], y: &[T]) -> (T, T) {
    let mut lo = T::nil();
    let mut hi = T::nil();
    for (a, b) in x.iter().zip(y) {
        let (small, large) = if a <= b { (a, b) } else { (b, a) };
        lo = lo.add(small);
        hi = hi.add(large);
    }
    (lo, hi)
}

/// Generalized Jaccard distance `1 - Σ min(x_i, y_i) / Σ max(x_i, y_i)`,
/// defined as 0 when both vectors are zero.
pub fn vector_jaccard_distance(x: &WeightedVector, y: &WeightedVector) -> Result<Value> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if !x.is_empty() && x.mode != y.mode {
        return Err(Error::MixedMode);
    }
    match x.mode {
        Mode::Exact => {
            let xs: Vec<BigRational> = x
                .entries
                .iter()
                .filter_map(|v| v.as_exact().cloned())
                .collect();
            let ys: Vec<BigRational> = y
                .entries
                .iter()
                .filter_map(|v| v.as_exact().cloned())
                .collect();
            let (lo, hi) = min_max_sums(&xs, &ys);
            if hi.is_zero() {
                return Ok(Value::zero(Mode::Exact));
            }
            Ok(Value::Exact(BigRational::one() - lo / hi))
        }
        Mode::Approx => {
            let xs: Vec<f64> = x.entries.iter().map(Value::to_f64).collect();
            let ys: Vec<f64> = y.entries.iter().map(Value::to_f64).collect();
            let (lo, hi) = min_max_sums(&xs, &ys);
            if hi == 0.0 {
                return Ok(Value::zero(Mode::Approx));
            }
            Ok(Value::Approx(1.0 - lo / hi))
        }
    }
}

/// Jaccard distance of two multisets given as element multiplicities,
/// computed as the vector distance over the union of their supports.
pub fn multiset_jaccard_distance<K: Ord + Clone>(
    a: &BTreeMap<K, i64>,
    b: &BTreeMap<K, i64>,
) -> Result<Value> {
    if let Some(c) = a.values().chain(b.values()).find(|&&c| c < 0) {
        return Err(Error::NegativeEntry(c.to_string()));
    }
    let support: std::collections::BTreeSet<&K> = a.keys().chain(b.keys()).collect();
    let count = |m: &BTreeMap<K, i64>, k: &K| m.get(k).copied().unwrap_or(0);
    let x = WeightedVector::from_ints(support.iter().map(|k| count(a, k)))?;
    let y = WeightedVector::from_ints(support.iter().map(|k| count(b, k)))?;
    vector_jaccard_distance(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setcore::{enumerate_subsets, GroundSet};
    use crate::setfun::Family;
    use std::sync::Arc;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn set(g: &Arc<GroundSet>, labels: &[&str]) -> SubsetMask {
        SubsetMask::from_labels(g, labels).unwrap()
    }

    fn complete_bipartite_2x1() -> SetFunctionSpec {
        let g = GroundSet::new(["u1", "u2"]).unwrap();
        SetFunctionSpec::new(
            g,
            Family::BipartiteNeighborhood {
                right_labels: vec!["v1".into()],
                edges: vec![(0, 0), (1, 0)],
            },
        )
        .unwrap()
    }

    #[test]
    fn standard_jaccard_examples() {
        let g = GroundSet::numbered(3).unwrap();
        let e = SubsetMask::empty(&g);
        assert_eq!(jaccard_index(&e, &e).unwrap(), Value::int(1));
        assert_eq!(jaccard_distance(&e, &e).unwrap(), Value::int(0));
        let a = set(&g, &["1", "3"]);
        assert_eq!(jaccard_index(&a, &a).unwrap(), Value::int(1));
        let (x, y) = (set(&g, &["1", "2"]), set(&g, &["2", "3"]));
        assert_eq!(jaccard_index(&x, &y).unwrap(), Value::ratio(1, 3));
        assert_eq!(jaccard_distance(&x, &y).unwrap(), Value::ratio(2, 3));
        assert_eq!(
            jaccard_distance(&set(&g, &["1"]), &set(&g, &["2"])).unwrap(),
            Value::int(1)
        );
    }

    #[test]
    fn sub_jaccard_examples() {
        let g = GroundSet::numbered(3).unwrap();
        let card = SetFunctionSpec::cardinality(Arc::clone(&g));
        let (x, y) = (set(&g, &["1", "2"]), set(&g, &["2", "3"]));
        assert_eq!(sub_jaccard_cap(&card, &x, &y).unwrap(), Value::ratio(2, 3));

        let g2 = GroundSet::numbered(2).unwrap();
        let wm = SetFunctionSpec::new(
            Arc::clone(&g2),
            Family::WeightedModular {
                gamma: q(1),
                weights: vec![q(1), q(1)],
            },
        )
        .unwrap();
        let (a, b) = (set(&g2, &["1"]), set(&g2, &["2"]));
        assert_eq!(sub_jaccard_cap(&wm, &a, &b).unwrap(), Value::ratio(2, 3));
        assert_eq!(sub_jaccard_delta(&wm, &a, &b).unwrap(), Value::ratio(2, 3));

        let bip = complete_bipartite_2x1();
        let bg = bip.ground().clone();
        let (u1, u2) = (set(&bg, &["u1"]), set(&bg, &["u2"]));
        assert_eq!(sub_jaccard_delta(&bip, &u1, &u2).unwrap(), Value::int(1));
        assert_eq!(sub_jaccard_index(&bip, &u1, &u2).unwrap(), Value::int(0));
        assert_eq!(sub_jaccard_delta(&bip, &u1, &u1).unwrap(), Value::int(0));
        assert_eq!(sub_jaccard_index(&bip, &u1, &u1).unwrap(), Value::int(1));
        assert_eq!(sub_jaccard_cap(&bip, &u1, &u2).unwrap(), Value::int(1));
    }

    #[test]
    fn zero_denominator_convention() {
        let g = GroundSet::numbered(2).unwrap();
        let zeros = SetFunctionSpec::new(
            Arc::clone(&g),
            Family::ExplicitTable {
                values: vec![Value::int(0); 4],
            },
        )
        .unwrap();
        let (a, b) = (set(&g, &["1"]), set(&g, &["2"]));
        assert_eq!(sub_jaccard_cap(&zeros, &a, &b).unwrap(), Value::int(0));
        assert_eq!(sub_jaccard_delta(&zeros, &a, &b).unwrap(), Value::int(0));
        assert_eq!(sub_jaccard_index(&zeros, &a, &b).unwrap(), Value::int(1));
    }

    #[test]
    fn lazy_property_violations() {
        let g = GroundSet::numbered(2).unwrap();
        // f({1}) = 2 > f({1,2}) = 1
        let t = SetFunctionSpec::new(
            Arc::clone(&g),
            Family::ExplicitTable {
                values: vec![Value::int(0), Value::int(2), Value::int(0), Value::int(1)],
            },
        )
        .unwrap();
        let full = SubsetMask::full(&g);
        let one = set(&g, &["1"]);
        assert!(matches!(
            sub_jaccard_cap(&t, &one, &full),
            Err(Error::PropertyViolation(_))
        ));
        assert!(sub_jaccard_delta(&t, &one, &SubsetMask::empty(&g)).is_ok());
        let neg = SetFunctionSpec::new(
            Arc::clone(&g),
            Family::ExplicitTable {
                values: vec![Value::int(-1), Value::int(0), Value::int(0), Value::int(1)],
            },
        )
        .unwrap();
        assert!(matches!(
            sub_jaccard_delta(&neg, &one, &full),
            Err(Error::PropertyViolation(_))
        ));
        let other = GroundSet::numbered(3).unwrap();
        assert_eq!(
            sub_jaccard_cap(&t, &one, &SubsetMask::empty(&other)),
            Err(Error::GroundMismatch)
        );
    }

    #[test]
    fn cardinality_collapse_small() {
        let g = GroundSet::numbered(4).unwrap();
        let card = SetFunctionSpec::cardinality(Arc::clone(&g));
        for a in enumerate_subsets(&g).unwrap() {
            for b in enumerate_subsets(&g).unwrap() {
                let d = jaccard_distance(&a, &b).unwrap();
                assert_eq!(sub_jaccard_cap(&card, &a, &b).unwrap(), d);
                assert_eq!(sub_jaccard_delta(&card, &a, &b).unwrap(), d);
                assert_eq!(
                    sub_jaccard_index(&card, &a, &b).unwrap(),
                    jaccard_index(&a, &b).unwrap()
                );
            }
        }
    }

    #[test]
    fn vector_examples() {
        let x = WeightedVector::from_ints([1, 2, 0]).unwrap();
        let y = WeightedVector::from_ints([2, 1, 1]).unwrap();
        assert_eq!(vector_jaccard_distance(&x, &y).unwrap(), Value::ratio(3, 5));
        assert_eq!(vector_jaccard_distance(&x, &x).unwrap(), Value::int(0));
        let z = WeightedVector::from_ints([0, 0, 0]).unwrap();
        assert_eq!(vector_jaccard_distance(&z, &z).unwrap(), Value::int(0));
        let short = WeightedVector::from_ints([1]).unwrap();
        assert_eq!(
            vector_jaccard_distance(&x, &short),
            Err(Error::LengthMismatch(3, 1))
        );
        assert!(matches!(
            WeightedVector::from_ints([1, -1]),
            Err(Error::NegativeEntry(_))
        ));
        let fx = WeightedVector::new(vec![
            Value::Approx(1.0),
            Value::Approx(2.0),
            Value::Approx(0.0),
        ])
        .unwrap();
        let fy = WeightedVector::new(vec![
            Value::Approx(2.0),
            Value::Approx(1.0),
            Value::Approx(1.0),
        ])
        .unwrap();
        assert!((vector_jaccard_distance(&fx, &fy).unwrap().to_f64() - 0.6).abs() < 1e-12);
        assert_eq!(vector_jaccard_distance(&x, &fy), Err(Error::MixedMode));

        let g = GroundSet::numbered(3).unwrap();
        let (a, b) = (set(&g, &["1", "2"]), set(&g, &["2", "3"]));
        let d = vector_jaccard_distance(
            &WeightedVector::indicator(&a),
            &WeightedVector::indicator(&b),
        )
        .unwrap();
        assert_eq!(d, Value::ratio(2, 3));
    }

    #[test]
    fn multiset_examples() {
        let m = |pairs: &[(&'static str, i64)]| pairs.iter().cloned().collect::<BTreeMap<_, _>>();
        assert_eq!(
            multiset_jaccard_distance(&m(&[("a", 1)]), &m(&[("a", 1)])).unwrap(),
            Value::int(0)
        );
        assert_eq!(
            multiset_jaccard_distance(&m(&[("a", 2), ("b", 1)]), &m(&[("a", 1), ("b", 2)]))
                .unwrap(),
            Value::ratio(1, 2)
        );
        assert_eq!(
            multiset_jaccard_distance(&m(&[("a", 3)]), &m(&[("b", 1)])).unwrap(),
            Value::int(1)
        );
        assert!(matches!(
            multiset_jaccard_distance(&m(&[("a", -1)]), &m(&[])),
            Err(Error::NegativeEntry(_))
        ));
    }

    #[test]
    fn steinhaus_as_weighted_cap() {
        let g = GroundSet::numbered(4).unwrap();
        let weights = [3i64, 0, 5, 2];
        let spec = SetFunctionSpec::new(
            Arc::clone(&g),
            Family::WeightedModular {
                gamma: q(0),
                weights: weights.iter().map(|&w| q(w)).collect(),
            },
        )
        .unwrap();
        let weighted = |s: &SubsetMask| {
            WeightedVector::from_ints((0..4).map(|i| if s.contains(i) { weights[i] } else { 0 }))
                .unwrap()
        };
        for a in enumerate_subsets(&g).unwrap() {
            for b in enumerate_subsets(&g).unwrap() {
                assert_eq!(
                    vector_jaccard_distance(&weighted(&a), &weighted(&b)).unwrap(),
                    sub_jaccard_cap(&spec, &a, &b).unwrap()
                );
            }
        }
    }
}
