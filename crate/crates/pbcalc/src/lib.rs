//! Approximation calculus for positive bounded logic over normed space
//! structures.
//!
//! The library implements two formula layers. `PBFormula` is positive
//! bounded logic: norm and relation atoms with rational thresholds, finite
//! conjunction and disjunction, countable conjunction stored as a template
//! (binder, index domain, body), and norm-bounded quantifiers. `LAFormula`
//! is the infinitary extension: embedded positive bounded formulas, finite
//! and countable conjunction, negation, and sequence existentials; the
//! remaining connectives are parse-time abbreviations and never stored.
//!
//! On top of the syntax sit the two approximation transforms
//! ([`approx::approximate`] and [`approx::weak_negation`]), branch-indexed
//! approximation for the infinitary layer ([`la::branch_approx`]), an exact
//! rational/radical evaluator over finite normed structures
//! ([`evaluator`]), and a workbench of worked examples ([`workbench`]).
//!
//! All arithmetic is exact: rationals are arbitrary-precision, norms are
//! carried as radical values `base^(1/root)` and compared by
//! cross-powering. There are no floating-point numbers anywhere in the
//! crate.

pub mod approx;
pub mod error;
pub mod evaluator;
pub mod la;
pub mod rational;
pub mod sexpr;
pub mod signature;
pub mod suite;
pub mod syntax;
pub mod workbench;

pub use error::Error;
pub use rational::Rational;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
