//! Evolving typed DSL programs that imitate a maze agent, mining reusable
//! abstractions from them and explaining their decisions.

pub mod dsl;
pub mod env;
pub mod explain;
pub mod gp;
pub mod liblearn;
pub mod types;

pub use dsl::{evaluate, parse_program, trace_evaluate, Grammar, Program, TypeTag, Value};
pub use env::{Dataset, SubTrajectory};
pub use gp::{evolve, evolve_with, GpConfig, RunReport};
pub use types::{Action, Cell, Direction, Observation};
