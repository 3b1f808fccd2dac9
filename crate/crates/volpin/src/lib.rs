//! Finitistic Kripke-style semantics for intuitionistic first-order logic.
//!
//! The library models resource-bounded possible-worlds structures (Volpin
//! frames): finite rooted trees whose worlds carry growing domains, persistent
//! predicate valuations, and one-step-generated partial function graphs. On
//! top of the frames it provides
//!
//! * the modified forcing relation and its depth-graded validity notion
//!   ([`forcing`]),
//! * depth-bounded cut-free sequent search with consistency radii ([`proof`]),
//! * the bi-theory saturation and canonical-model construction used to extract
//!   countermodels for unprovable formulas ([`canonical`]),
//! * fuzzy truth values read off forcing depths along a leaf path
//!   ([`forcing::fuzzify`]),
//! * miniaturized arithmetic and set theories for experiments ([`theories`]).
//!
//! Everything is deterministic: enumeration orders, proof search, and
//! serialization are stable across runs for identical inputs and seeds.

pub mod canonical;
pub mod forcing;
pub mod frame;
pub mod harness;
pub mod proof;
pub mod syntax;
pub mod theories;
