//! Exact-arithmetic Gelfand-Tsetlin modules over `gl(n, C)`.
//!
//! The crate implements three families of modules on tableau bases —
//! finite-dimensional highest-weight modules, generic tableau modules, and
//! 1-singular modules on the symmetric/antisymmetric basis — together with
//! the machinery needed to compute and verify their structure exactly:
//!
//! * [`rat`]: arbitrary-precision rational scalars,
//! * [`jet`]: truncated Laurent series used to evaluate rational
//!   coefficients at and near critical points,
//! * [`tableau`]: the tableau data model, classification and shifts,
//! * [`formulas`]: the named rational functions of the action formulas and
//!   their evaluation along critical paths,
//! * [`engine`]: the module families and the `gl(n)` action,
//! * [`verify`]: exact identity-checking suites (bracket relations,
//!   Casimir eigenvalues, regularity of singular coefficients).
//!
//! Everything is exact: no floating point is used anywhere, and every
//! verification is an equality of rational numbers.


pub mod engine;
pub mod error;

pub mod formulas;
pub mod jet;
pub mod rat;
pub mod tableau;
pub mod verify;


pub use error::{Error, Result};
pub use jet::Jet;
pub use rat::Rat;
