//! Exact classification of torus-equivariant principal bundles over toric
//! varieties, for structure groups given as matrix groups over `Q`.
//!
//! All arithmetic is exact: lattices over `BigInt`, linear algebra over
//! `BigRational`, characters as sparse Laurent polynomials.

pub mod charmat;
pub mod classify;
pub mod collection;
pub mod document;
pub mod fan;
pub mod lattice;
pub mod qmat;

pub use charmat::{
    group_member, regular_on, semi_equivariant_check, unit_on, CharError, GroupTag, LaurentMatrix, LaurentPoly,
    TorusHom,
};
pub use classify::{
    apply_gauge, check_unipotent_trivial, enumerate_line_bundles, equivalent, equivalent_with_base, extend_section,
    reduce_to_torus, split_affine_toric, trivialize_affine, weight_invariants, ClassifyError, Equivalence,
    GaugeWitness, ProductStructure, ToricSplit, TorusReduction,
};
pub use collection::{AdmissibleCollection, CollectionError, Condition, ValidationReport, Violation};
pub use document::{Document, DocumentError};
pub use fan::{
    cone_split, dual_cone, intersect, projective_line, projective_plane, validate_fan, Cone, ConeSplit, Fan, FanError,
    FanReport, FanViolation,
};
pub use lattice::{ivec, snf, IntMatrix, IntVector, LatticeError, SnfResult, Sublattice};
pub use num_bigint::BigInt;
pub use qmat::{QMatrix, Rational};
