//! Exact bounds on the randomized decision-tree complexity of uniform
//! read-once threshold formulae.
//!
//! The crate is organised around the objects the bounds are built from:
//!
//! - [`formula`]: uniform threshold trees, evaluation and the reluctant
//!   input distribution.
//! - [`directional`]: the directional evaluation algorithm, both as an exact
//!   matrix recurrence and as a seeded simulator.
//! - [`pkn`]: the exchange rate `P(k, n)` between queried zeros and ones on a
//!   fixed-weight slice, computed by exact dynamic programming.
//! - [`bounds`]: generalized-cost matrices, their growth rates and the
//!   closed forms they are checked against.
//! - [`oracle`]: exhaustive optimizers over small instances used to validate
//!   everything above.

pub mod bounds;
pub mod check;
pub mod directional;
pub mod error;
pub mod formula;
pub mod oracle;
pub mod pkn;
pub mod rational;

pub use error::{Error, Result};
pub use rational::Rational;
