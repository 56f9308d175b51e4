//! Numerical evidence for the symbol calculus: operator oracles on full grids,
//! residuals of the testing family `R_λ`, localization probes and the
//! symbol homomorphism, each reported as JSON.

pub mod localization;
pub mod oracle;
pub mod report;
pub mod rlambda;
pub mod symbols;

pub use report::Report;
