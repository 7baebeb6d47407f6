//! A lambda-calculus rewriting engine built on alpha-equated named terms.
//!
//! The crate provides:
//!
//! - [`syntax`]: named terms with freshness, swapping, capture-avoiding
//!   unary and parallel substitution, occurrence counting and a
//!   deterministic fresh-name supply;
//! - [`fold`]: binding-aware structural recursion through freshness-
//!   substitution and freshness-swapping models, with sample-based clause
//!   checkers;
//! - [`cbn`]: the call-by-name reduction relations as enumerable step
//!   functions, labeled parallel-reduction derivations, complete
//!   developments, constructive confluence joins and the standardization
//!   pipeline;
//! - [`cbv`]: the call-by-value mirror on a two-sorted value/term syntax;
//! - [`semantics`]: interpretation in semantic domains and a concrete
//!   environment model via normalization by evaluation;
//! - [`hoas`]: a self-encoding of the calculus with its adequacy package.
//!
//! Everything is pure and immutable; all operations are safe to call from
//! any number of threads.

pub mod cbn;
pub mod cbv;
pub mod delta;
pub mod fold;
pub mod hoas;
pub mod semantics;
pub mod syntax;

pub use delta::DeltaTable;
pub use syntax::{fresh_var, AvoidSet, ConstName, Constant, LnTerm, Term, VarName};
