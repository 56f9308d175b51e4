//! Operator algebra generated by pseudodifferential operators and the
//! boundary and coboundary operators of two coordinate submanifolds
//! `X1, X2 ⊂ X0 = R^n`, with operator-valued symbols on the strata
//! `X0, X1, X2, X1 ∩ X2` and spectral discretizations that check them.

pub mod algebra;
pub mod cli;
pub mod discretization;
pub mod dsl;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod symbol_calculus;
pub mod verification;

pub use error::{MorError, Result};

/// Sobolev and ψDO orders; `ν_k / 2` shifts stay exact.
pub type Order = num_rational::Rational64;
