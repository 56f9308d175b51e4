//! Words over ψDOs and (co)boundary operators, their classification into the
//! 18 generator types, and the 3×3 normal form.

pub mod census;
pub mod fuse;
pub mod generator;
pub mod matrix;
pub mod word;

pub use fuse::{fuse_trace, trace_symbol};
pub use generator::GeneratorType;
pub use matrix::{Entry, MorMatrix};
pub use word::{feasible_orders, half_nu, Atom, OrderInterval, SobolevChain, Word};
