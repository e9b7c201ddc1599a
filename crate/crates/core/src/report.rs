//! Outcomes of property and inequality checks.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::setcore::{GroundSet, SubsetMask};
use crate::value::{Scalar, Value};

/// How many violation witnesses a report keeps.
pub const MAX_WITNESSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    SampledNoViolation,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::SampledNoViolation => "sampled_no_violation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Triangle,
    Lemma1,
    Corollary1,
    Ordering,
    Property,
}

/// A witnessed inequality `lhs <= rhs` that fails; `margin = lhs - rhs > 0`
/// (beyond the tolerance in approximate mode).
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationRecord {
    pub kind: ViolationKind,
    pub witness: Vec<SubsetMask>,
    pub lhs: Value,
    pub rhs: Value,
    pub margin: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub verdict: Verdict,
    /// Number of instances (subsets, pairs or triples) examined.
    pub checked: u64,
    /// Total number of violating instances; only the first
    /// [`MAX_WITNESSES`] are kept in `violations`.
    pub violation_count: u64,
    pub violations: Vec<ViolationRecord>,
    /// Non-violating observations worth reporting, such as distinct sets at
    /// distance zero under a pseudometric.
    pub informational: Vec<Vec<SubsetMask>>,
    pub informational_count: u64,
    pub seed: Option<u64>,
}

impl PropertyReport {
    pub fn holds(&self) -> bool {
        self.verdict != Verdict::Fails
    }

    pub fn first_witness(&self) -> Option<&ViolationRecord> {
        self.violations.first()
    }
}

/// A violation found by a kernel, still in raw mask form.
#[derive(Debug, Clone)]
pub(crate) struct RawHit<T> {
    pub kind: Option<ViolationKind>,
    pub masks: Vec<u64>,
    pub lhs: T,
    pub rhs: T,
}

impl<T: Scalar> RawHit<T> {
    pub fn into_record(self, kind: ViolationKind, ground: &Arc<GroundSet>) -> ViolationRecord {
        let kind = self.kind.unwrap_or(kind);
        let margin = self.lhs.sub(&self.rhs).into_value();
        ViolationRecord {
            kind,
            witness: self
                .masks
                .iter()
                .map(|&m| SubsetMask::from_bits_unchecked(ground, m))
                .collect(),
            lhs: self.lhs.into_value(),
            rhs: self.rhs.into_value(),
            margin,
        }
    }
}

/// Per-worker accumulator keeping the first witnesses in visiting order.
#[derive(Debug)]
pub(crate) struct Collector<T> {
    pub checked: u64,
    pub hits: Vec<RawHit<T>>,
    pub hit_count: u64,
    pub notes: Vec<Vec<u64>>,
    pub note_count: u64,
}

impl<T> Default for Collector<T> {
    fn default() -> Self {
        Collector {
            checked: 0,
            hits: Vec::new(),
            hit_count: 0,
            notes: Vec::new(),
            note_count: 0,
        }
    }
}

impl<T> Collector<T> {
    pub fn hit(&mut self, masks: &[u64], lhs: T, rhs: T) {
        self.push_hit(None, masks, lhs, rhs);
    }

    /// Records a hit whose kind differs from the report's default.
    pub fn hit_as(&mut self, kind: ViolationKind, masks: &[u64], lhs: T, rhs: T) {
        self.push_hit(Some(kind), masks, lhs, rhs);
    }

    fn push_hit(&mut self, kind: Option<ViolationKind>, masks: &[u64], lhs: T, rhs: T) {
        self.hit_count += 1;
        if self.hits.len() < MAX_WITNESSES {
            self.hits.push(RawHit {
                kind,
                masks: masks.to_vec(),
                lhs,
                rhs,
            });
        }
    }

    pub fn note(&mut self, masks: &[u64]) {
        self.note_count += 1;
        if self.notes.len() < MAX_WITNESSES {
            self.notes.push(masks.to_vec());
        }
    }

    fn absorb(&mut self, other: Collector<T>) {
        self.checked += other.checked;
        self.hit_count += other.hit_count;
        self.note_count += other.note_count;
        let room = MAX_WITNESSES - self.hits.len();
        self.hits.extend(other.hits.into_iter().take(room));
        let room = MAX_WITNESSES - self.notes.len();
        self.notes.extend(other.notes.into_iter().take(room));
    }

    pub fn into_report(
        self,
        kind: ViolationKind,
        ground: &Arc<GroundSet>,
        seed: Option<u64>,
    ) -> PropertyReport
    where
        T: Scalar,
    {
        let verdict = match (self.hits.is_empty(), seed.is_some()) {
            (false, _) => Verdict::Fails,
            (true, false) => Verdict::Holds,
            (true, true) => Verdict::SampledNoViolation,
        };
        PropertyReport {
            verdict,
            checked: self.checked,
            violation_count: self.hit_count,
            violations: self
                .hits
                .into_iter()
                .map(|h| h.into_record(kind, ground))
                .collect(),
            informational: self
                .notes
                .iter()
                .map(|ms| {
                    ms.iter()
                        .map(|&m| SubsetMask::from_bits_unchecked(ground, m))
                        .collect()
                })
                .collect(),
            informational_count: self.note_count,
            seed,
        }
    }
}

/// Runs `body` for every outer index in parallel and merges the per-index
/// collectors in ascending index order, so the kept witnesses are the
/// globally first ones regardless of scheduling.
pub(crate) fn scan<T, F>(outer: u64, body: F) -> Collector<T>
where
    T: Send,
    F: Fn(u64, &mut Collector<T>) + Sync,
{
    let parts: Vec<Collector<T>> = (0..outer)
        .into_par_iter()
        .map(|i| {
            let mut c = Collector::default();
            body(i, &mut c);
            c
        })
        .collect();
    let mut merged = Collector::default();
    for part in parts {
        merged.absorb(part);
    }
    merged
}

/// Fallible variant of [`scan`]; the first error in index order wins.
pub(crate) fn try_scan<T, E, F>(outer: u64, body: F) -> Result<Collector<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64, &mut Collector<T>) -> Result<(), E> + Sync,
{
    let parts: Vec<Result<Collector<T>, E>> = (0..outer)
        .into_par_iter()
        .map(|i| {
            let mut c = Collector::default();
            body(i, &mut c).map(|_| c)
        })
        .collect();
    let mut merged = Collector::default();
    for part in parts {
        merged.absorb(part?);
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn merge_keeps_first_witnesses_in_index_order() {
        let c: Collector<BigRational> = scan(40, |i, c| {
            c.checked += 1;
            if i % 3 == 0 {
                c.hit(
                    &[i],
                    BigRational::from_integer(1.into()),
                    BigRational::from_integer(0.into()),
                );
            }
        });
        assert_eq!(c.checked, 40);
        assert_eq!(c.hit_count, 14);
        let firsts: Vec<u64> = c.hits.iter().map(|h| h.masks[0]).collect();
        assert_eq!(firsts, (0..10).map(|k| 3 * k).collect::<Vec<_>>());
    }

    #[test]
    fn verdict_follows_hits_and_sampling() {
        let g = GroundSet::numbered(2).unwrap();
        let empty: Collector<f64> = Collector::default();
        assert_eq!(
            empty.into_report(ViolationKind::Triangle, &g, None).verdict,
            Verdict::Holds
        );
        let empty: Collector<f64> = Collector::default();
        assert_eq!(
            empty
                .into_report(ViolationKind::Triangle, &g, Some(1))
                .verdict,
            Verdict::SampledNoViolation
        );
        let mut c: Collector<f64> = Collector::default();
        c.hit(&[1, 2], 1.0, 0.25);
        let r = c.into_report(ViolationKind::Triangle, &g, Some(1));
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.violations[0].margin, Value::Approx(0.75));
    }
}
