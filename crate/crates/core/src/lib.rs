//! Conditional independence and database dependencies over K-relations.
//!
//! A K-relation annotates each tuple with an element of a commutative
//! semiring. This crate decides conditional independence, functional,
//! multivalued and embedded multivalued dependencies and marginal identities
//! on such relations, computes lossless-join decompositions, decides SCI+FD
//! implication, runs the EMVD chase, and checks proofs that use the Copy Lemma,
//! including proofs of entropic information inequalities.

pub mod chase;
pub mod decompose;
pub mod dependency;
pub mod error;
pub mod implication;
pub mod info;
pub mod proofs;
pub mod relation;
pub mod semiring;

pub use error::{Error, Result};
pub use relation::{Equivalence, KRelation, Schema, Tuple};
pub use semiring::{check_semiring_laws, Flag, Flags, LawReport, Semiring, SemiringKind, Value};
