//! Intermediate language: AST, parser, validator, printer.

pub mod ast;
pub mod parse;
pub mod print;
pub mod validate;

pub use ast::*;
pub use parse::{parse, ParseError};
pub use print::{format_guard, print};
pub use validate::{validate, Diagnostic, DiagnosticKind};
