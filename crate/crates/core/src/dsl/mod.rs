//! The typed S-expression language programs are written in.
//!
//! A [`Grammar`] holds the typed production rules (the base inventory plus any
//! mined abstractions), [`Program`]s are trees of rule applications, and the
//! interpreter in [`eval`] runs a program against an [`Observation`].
//!
//! [`Observation`]: crate::types::Observation

mod check;
pub mod eval;
mod grammar;
mod parse;
mod program;
mod sample;
mod value;

pub use check::{infer_type, type_check, type_of, Violation, ViolationKind};
pub use eval::{
    evaluate, evaluate_cached, trace_evaluate, try_evaluate, Comparison, EvalCache, EvalError,
    EvalTrace, Subject,
};
pub use grammar::{Abstraction, Grammar, Op, ProductionRule, RuleId, RuleKind, MAX_ARITY};
pub use parse::{parse_pattern, parse_program, parse_program_file, Pattern};
pub use program::{Head, Node, Program};
pub use sample::{sample_node, sample_program};
pub use value::{TypeTag, Value};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("type mismatch at {path:?}: expected {expected}, found {found}")]
    TypeMismatch {
        path: Vec<usize>,
        expected: TypeTag,
        found: TypeTag,
    },
    #[error("`{rule}` takes {expected} argument(s) but {found} given at {path:?}")]
    Arity {
        rule: String,
        expected: usize,
        found: usize,
        path: Vec<usize>,
    },
    #[error("no {0} program fits within depth {1}")]
    UnsatisfiableType(TypeTag, usize),
    #[error("a rule named `{0}` already exists")]
    DuplicateName(String),
    #[error("invalid abstraction `{name}`: {reason}")]
    InvalidAbstraction { name: String, reason: String },
}
