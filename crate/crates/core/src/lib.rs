//! Exact combinatorial and linear-algebraic invariants of the moduli
//! spaces of pseudo-stable pointed curves and their first flips:
//! boundary-type index sets, rational Picard-group presentations,
//! intersection pairings with elliptic-bridge, tacnodal and rosary
//! classes, Mori-cone faces, line-bundle descent, and the contraction
//! and flip predicates they control.
//!
//! All arithmetic is arbitrary-precision rational; no floating point.

pub mod boundary;
pub mod divisor;
pub mod faces;
pub mod intersection;
pub mod error;
pub mod linalg;

pub use boundary::{
    adm_closure, canonicalize, compare_typesets, divisorial_part, enumerate_classes,
    format_typeset, is_admissible, minimal_subsets, parse_typeset, BridgeClass, Containment,
    HyperbolicPair, PairClass, PairType, TypeSet,
};
pub use error::{Error, Result};
