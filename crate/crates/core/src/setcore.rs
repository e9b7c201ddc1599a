//! Finite ground sets and subsets encoded as 64-bit masks.
//!
//! Bit `i` of a mask is set iff the element with index `i` is a member.
//! Ascending integer order of masks is the canonical subset order used for
//! enumeration and for tie-breaking everywhere else in the crate.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Width of a subset mask; hard upper bound on ground set size.
pub const MAX_GROUND_SIZE: usize = 64;

/// Largest ground set whose power set may be enumerated.
pub const ENUMERATION_CAP: usize = 20;

/// A finite, non-empty ground set of labelled elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl GroundSet {
    pub fn new<I, S>(labels: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidGroundSet(
                "ground set must be non-empty".into(),
            ));
        }
        if labels.len() > MAX_GROUND_SIZE {
            return Err(Error::CapExceeded {
                what: "ground set size",
                n: labels.len(),
                cap: MAX_GROUND_SIZE,
            });
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || label.contains(',') || label == "-" {
                return Err(Error::InvalidGroundSet(format!(
                    "label {label:?} is not allowed"
                )));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidGroundSet(format!(
                    "duplicate label {label:?}"
                )));
            }
        }
        Ok(Arc::new(GroundSet { labels, index }))
    }

    /// Ground set `{1, 2, ..., n}`.
    pub fn numbered(n: usize) -> Result<Arc<Self>> {
        Self::new((1..=n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn full_bits(&self) -> u64 {
        full_bits(self.len())
    }

    /// Number of subsets, `2^n`. Only meaningful below the enumeration cap.
    pub fn power_set_size(&self) -> usize {
        1usize << self.len()
    }

    pub fn ensure_enumerable(&self, what: &'static str, cap: usize) -> Result<()> {
        if self.len() > cap {
            Err(Error::CapExceeded {
                what,
                n: self.len(),
                cap,
            })
        } else {
            Ok(())
        }
    }
}

pub(crate) fn full_bits(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn same_ground(a: &Arc<GroundSet>, b: &Arc<GroundSet>) -> bool {
    Arc::ptr_eq(a, b) || a.labels == b.labels
}

/// A subset of a ground set.
#[derive(Clone)]
pub struct SubsetMask {
    bits: u64,
    ground: Arc<GroundSet>,
}

impl SubsetMask {
    pub fn from_bits(ground: &Arc<GroundSet>, bits: u64) -> Result<Self> {
        if bits & !ground.full_bits() != 0 {
            return Err(Error::InvalidGroundSet(format!(
                "mask {bits:#x} has bits outside a ground set of size {}",
                ground.len()
            )));
        }
        Ok(SubsetMask {
            bits,
            ground: Arc::clone(ground),
        })
    }

    pub(crate) fn from_bits_unchecked(ground: &Arc<GroundSet>, bits: u64) -> Self {
        debug_assert_eq!(bits & !ground.full_bits(), 0);
        SubsetMask {
            bits,
            ground: Arc::clone(ground),
        }
    }

    pub fn empty(ground: &Arc<GroundSet>) -> Self {
        Self::from_bits_unchecked(ground, 0)
    }

    pub fn full(ground: &Arc<GroundSet>) -> Self {
        Self::from_bits_unchecked(ground, ground.full_bits())
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(
        ground: &Arc<GroundSet>,
        indices: I,
    ) -> Result<Self> {
        let mut bits = 0u64;
        for i in indices {
            if i >= ground.len() {
                return Err(Error::InvalidGroundSet(format!(
                    "index {i} out of range for ground set of size {}",
                    ground.len()
                )));
            }
            bits |= 1 << i;
        }
        Ok(Self::from_bits_unchecked(ground, bits))
    }

    pub fn from_labels<I, S>(ground: &Arc<GroundSet>, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = 0u64;
        for label in labels {
            let label = label.as_ref();
            let i = ground
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            bits |= 1 << i;
        }
        Ok(Self::from_bits_unchecked(ground, bits))
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, index: usize) -> bool {
        index < 64 && self.bits & (1 << index) != 0
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ground.len()).filter(move |&i| self.contains(i))
    }

    pub fn labels(&self) -> Vec<&str> {
        self.indices()
            .map(|i| self.ground.labels[i].as_str())
            .collect()
    }

    fn check(&self, other: &SubsetMask) -> Result<()> {
        if same_ground(&self.ground, &other.ground) {
            Ok(())
        } else {
            Err(Error::GroundMismatch)
        }
    }

    fn with_bits(&self, bits: u64) -> SubsetMask {
        SubsetMask {
            bits,
            ground: Arc::clone(&self.ground),
        }
    }

    pub fn union(&self, other: &SubsetMask) -> Result<SubsetMask> {
        self.check(other)?;
        Ok(self.with_bits(self.bits | other.bits))
    }

    pub fn intersection(&self, other: &SubsetMask) -> Result<SubsetMask> {
        self.check(other)?;
        Ok(self.with_bits(self.bits & other.bits))
    }

    pub fn sym_difference(&self, other: &SubsetMask) -> Result<SubsetMask> {
        self.check(other)?;
        Ok(self.with_bits(self.bits ^ other.bits))
    }

    pub fn difference(&self, other: &SubsetMask) -> Result<SubsetMask> {
        self.check(other)?;
        Ok(self.with_bits(self.bits & !other.bits))
    }

    pub fn complement(&self) -> SubsetMask {
        self.with_bits(!self.bits & self.ground.full_bits())
    }

    pub fn is_subset(&self, other: &SubsetMask) -> Result<bool> {
        self.check(other)?;
        Ok(self.bits & other.bits == self.bits)
    }

    pub fn is_comparable(&self, other: &SubsetMask) -> Result<bool> {
        Ok(self.is_subset(other)? || other.is_subset(self)?)
    }
}

impl PartialEq for SubsetMask {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits && same_ground(&self.ground, &other.ground)
    }
}

impl Eq for SubsetMask {}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels().join(","))
    }
}

/// All `2^n` subsets of `ground` in ascending mask order.
pub fn enumerate_subsets(ground: &Arc<GroundSet>) -> Result<impl Iterator<Item = SubsetMask>> {
    ground.ensure_enumerable("subset enumeration", ENUMERATION_CAP)?;
    let ground = Arc::clone(ground);
    let count = 1u64 << ground.len();
    Ok((0..count).map(move |bits| SubsetMask::from_bits_unchecked(&ground, bits)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn set(g: &Arc<GroundSet>, labels: &[&str]) -> SubsetMask {
        SubsetMask::from_labels(g, labels).unwrap()
    }

    #[test]
    fn lattice_operations() {
        let g = GroundSet::numbered(3).unwrap();
        assert_eq!(
            set(&g, &["1"]).union(&set(&g, &["2"])).unwrap(),
            set(&g, &["1", "2"])
        );
        let a = set(&g, &["1", "3"]);
        assert_eq!(a.union(&a).unwrap(), a);
        assert_eq!(
            set(&g, &["1", "2"]).union(&set(&g, &["2", "3"])).unwrap(),
            set(&g, &["1", "2", "3"])
        );
        assert_eq!(
            set(&g, &["1", "2"])
                .sym_difference(&set(&g, &["2", "3"]))
                .unwrap(),
            set(&g, &["1", "3"])
        );
        assert!(a.sym_difference(&a).unwrap().is_empty());
        assert_eq!(SubsetMask::empty(&g).complement(), SubsetMask::full(&g));
        assert_eq!(
            set(&g, &["1", "2"])
                .intersection(&set(&g, &["2", "3"]))
                .unwrap(),
            set(&g, &["2"])
        );
    }

    #[test]
    fn comparability() {
        let g = GroundSet::numbered(3).unwrap();
        assert!(set(&g, &["1"])
            .is_comparable(&set(&g, &["1", "2"]))
            .unwrap());
        assert!(!set(&g, &["1"]).is_comparable(&set(&g, &["2"])).unwrap());
        for a in enumerate_subsets(&g).unwrap() {
            assert!(SubsetMask::empty(&g).is_comparable(&a).unwrap());
            assert!(SubsetMask::empty(&g).is_subset(&a).unwrap());
        }
    }

    #[test]
    fn mismatched_grounds_are_rejected() {
        let g = GroundSet::numbered(3).unwrap();
        let h = GroundSet::new(["a", "b", "c"]).unwrap();
        let a = SubsetMask::full(&g);
        let b = SubsetMask::full(&h);
        assert_eq!(a.union(&b), Err(Error::GroundMismatch));
        assert_eq!(a.intersection(&b), Err(Error::GroundMismatch));
        assert_eq!(a.sym_difference(&b), Err(Error::GroundMismatch));
        assert_eq!(a.is_subset(&b), Err(Error::GroundMismatch));
        assert_eq!(a.is_comparable(&b), Err(Error::GroundMismatch));
        // structurally identical ground sets are interchangeable
        let g2 = GroundSet::numbered(3).unwrap();
        assert!(a.union(&SubsetMask::full(&g2)).is_ok());
    }

    #[test]
    fn ground_set_validation() {
        assert!(GroundSet::new(Vec::<String>::new()).is_err());
        assert!(GroundSet::new(["a", "a"]).is_err());
        assert!(GroundSet::new(["a,b"]).is_err());
        assert!(matches!(
            GroundSet::numbered(65),
            Err(Error::CapExceeded { cap: 64, .. })
        ));
        assert!(GroundSet::numbered(64).is_ok());
        let g = GroundSet::numbered(2).unwrap();
        assert!(SubsetMask::from_bits(&g, 0b100).is_err());
        assert_eq!(
            SubsetMask::from_labels(&g, ["z"]),
            Err(Error::UnknownLabel("z".into()))
        );
    }

    #[test]
    fn enumeration_order_and_count() {
        let g1 = GroundSet::numbered(1).unwrap();
        let subsets: Vec<_> = enumerate_subsets(&g1).unwrap().collect();
        assert_eq!(subsets, vec![SubsetMask::empty(&g1), set(&g1, &["1"])]);
        assert_eq!(
            enumerate_subsets(&GroundSet::numbered(2).unwrap())
                .unwrap()
                .count(),
            4
        );

        let g8 = GroundSet::numbered(8).unwrap();
        let all: Vec<u64> = enumerate_subsets(&g8).unwrap().map(|s| s.bits()).collect();
        assert_eq!(all.len(), 256);
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 256);
        assert!(all.windows(2).all(|w| w[0] < w[1]));

        let g21 = GroundSet::numbered(21).unwrap();
        assert!(matches!(
            enumerate_subsets(&g21),
            Err(Error::CapExceeded { cap: 20, .. })
        ));
    }

    #[test]
    fn popcount_identity_and_sym_difference_exhaustive() {
        for n in 1..=4 {
            let g = GroundSet::numbered(n).unwrap();
            for a in enumerate_subsets(&g).unwrap() {
                for b in enumerate_subsets(&g).unwrap() {
                    let u = a.union(&b).unwrap();
                    let i = a.intersection(&b).unwrap();
                    assert_eq!(u.len() + i.len(), a.len() + b.len());
                    assert_eq!(a.sym_difference(&b).unwrap(), u.difference(&i).unwrap());
                }
            }
        }
    }

    #[test]
    fn display_uses_labels() {
        let g = GroundSet::new(["u1", "u2"]).unwrap();
        assert_eq!(SubsetMask::full(&g).to_string(), "{u1,u2}");
        assert_eq!(SubsetMask::empty(&g).to_string(), "{}");
    }
}
