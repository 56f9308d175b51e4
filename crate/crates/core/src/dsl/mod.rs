//! A small text language for morphisms and the commands run on them.

pub mod lexer;
pub mod parser;
pub mod printer;

pub use parser::{parse_dsl, parse_expr, parse_order, Command, Definition, DslProgram};
pub use printer::{print_definition, print_dsl};
