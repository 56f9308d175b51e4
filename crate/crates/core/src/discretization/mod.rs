//! Periodic grids, FFTs and grid quantization of symbols and (co)boundary maps.

pub mod fft;
pub mod grid;
pub mod operator;
pub mod rlambda;

pub use grid::{inner, l2_norm, GridFn, TorusGrid};
pub use operator::{extension, order_reduction, quantize, restriction, sobolev_norm, GridOperator, OpKind};
pub use rlambda::{BoxLayout, GaussFactor, RLambdaParams, TestFunction};
