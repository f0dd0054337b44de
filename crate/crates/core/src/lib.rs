//! Drazin inverses of anti-triangular and 2x2 block matrices.
//!
//! Every representation route in [`formulas`] is gated by a condition set in
//! [`hypotheses`] and checked against the rank-factorization [`oracle`].

pub mod cli;
pub mod error;
pub mod explore;
pub mod formulas;
pub mod generator;
pub mod hypotheses;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod scalar;

pub use error::{Error, Result};
