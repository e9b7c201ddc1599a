//! Submodular generalizations of the Jaccard distance.
//!
//! The crate evaluates nonnegative, monotone set functions through exact or
//! tolerance-compared oracles, computes the two set-function Jaccard
//! distances built from them, and verifies the inequalities relating them,
//! exhaustively on small ground sets and by seeded sampling on larger ones.

pub mod cli;
pub mod error;
pub mod jaccard;
pub mod report;
pub mod setcore;
pub mod setfun;
pub mod value;
pub mod verify;

pub use error::{Error, Result};
pub use jaccard::{
    jaccard_distance, jaccard_index, multiset_jaccard_distance, sub_jaccard_cap, sub_jaccard_delta,
    sub_jaccard_index, vector_jaccard_distance, WeightedVector,
};
pub use report::{PropertyReport, Verdict, ViolationKind, ViolationRecord};
pub use setcore::{enumerate_subsets, GroundSet, SubsetMask};
pub use setfun::{Family, RandomMode, SetFunctionSpec};
pub use value::{Mode, Tolerance, Value};
pub use verify::{CheckKind, Distance};
