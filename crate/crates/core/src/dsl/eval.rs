//! Interpreter for DSL programs.
//!
//! `$1` binds to the observation and `$0` to its heading. `if_T`, `and` and
//! `or` evaluate lazily, so a trace records only the cells read on the path
//! that was actually taken. Abstraction calls evaluate their arguments
//! first and may be served from an [`EvalCache`] keyed on the argument values.

use std::sync::atomic::{AtomicU64, Ordering};

use arrayvec::ArrayVec;
use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::grammar::{Grammar, Op, MAX_ARITY};
use super::program::{Head, Node, Program};
use super::value::{TypeTag, Value};
use crate::types::{Cell, Direction, Observation, VIEW_SIZE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("`{rule}` expected a {expected} argument, got {found}")]
    TagMismatch {
        rule: String,
        expected: TypeTag,
        found: TypeTag,
    },
    #[error("hole #{0} has no bound argument")]
    UnboundHole(u8),
    #[error("`{0}` applied to the wrong number of arguments")]
    Arity(String),
}

/// A comparison executed while evaluating a program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Comparison {
    /// `eq-obj?` on the cell read from local `(x, y)`.
    Object {
        x: u8,
        y: u8,
        found: Cell,
        against: Cell,
        outcome: bool,
    },
    /// `eq-direction?` on the agent heading.
    Heading {
        heading: Direction,
        against: Direction,
        outcome: bool,
    },
}

/// What a comparison inspected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subject {
    Cell { x: u8, y: u8 },
    Heading(Direction),
}

impl Comparison {
    pub fn subject(&self) -> Subject {
        match *self {
            Comparison::Object { x, y, .. } => Subject::Cell { x, y },
            Comparison::Heading { heading, .. } => Subject::Heading(heading),
        }
    }

    pub fn outcome(&self) -> bool {
        match *self {
            Comparison::Object { outcome, .. } | Comparison::Heading { outcome, .. } => outcome,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalTrace {
    /// Every executed `get`, in execution order, with clamped coordinates.
    pub accessed_cells: Vec<(u8, u8)>,
    pub comparisons: Vec<Comparison>,
    pub result: Value,
}

type ArgKey = ArrayVec<Value, MAX_ARITY>;

/// Memo tables for abstraction calls, one per abstraction.
///
/// Safe to share between threads: lookups are concurrent and inserts are
/// atomic per key. Results never depend on whether the cache is used.
#[derive(Debug, Default)]
pub struct EvalCache {
    tables: Vec<DashMap<ArgKey, Value>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl EvalCache {
    pub fn new(grammar: &Grammar) -> EvalCache {
        EvalCache {
            tables: (0..grammar.abstractions().len()).map(|_| DashMap::new()).collect(),
            ..EvalCache::default()
        }
    }

    pub fn entries(&self) -> usize {
        self.tables.iter().map(DashMap::len).sum()
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn clear(&self) {
        self.tables.iter().for_each(DashMap::clear);
    }
}

trait Tracer {
    const ACTIVE: bool;
    fn get(&mut self, x: u8, y: u8);
    fn compare(&mut self, c: Comparison);
}

struct NoTrace;

impl Tracer for NoTrace {
    const ACTIVE: bool = false;
    fn get(&mut self, _: u8, _: u8) {}
    fn compare(&mut self, _: Comparison) {}
}

#[derive(Default)]
struct Recorder {
    cells: Vec<(u8, u8)>,
    comparisons: Vec<Comparison>,
}

impl Tracer for Recorder {
    const ACTIVE: bool = true;
    fn get(&mut self, x: u8, y: u8) {
        self.cells.push((x, y));
    }
    fn compare(&mut self, c: Comparison) {
        self.comparisons.push(c);
    }
}

struct Machine<'a, T> {
    g: &'a Grammar,
    obs: &'a Observation,
    cache: Option<&'a EvalCache>,
    tracer: T,
}

fn mismatch(rule: &str, expected: TypeTag, found: &Value) -> EvalError {
    EvalError::TagMismatch {
        rule: rule.to_string(),
        expected,
        found: found.type_tag(),
    }
}

impl<T: Tracer> Machine<'_, T> {
    fn arg(&mut self, n: &Node, i: usize, env: &[Value]) -> Result<Value, EvalError> {
        match n.children.get(i) {
            Some(c) => self.eval(c, env),
            None => Err(EvalError::Arity(self.name(n))),
        }
    }

    fn name(&self, n: &Node) -> String {
        match n.head {
            Head::Rule(r) => self.g.rule(r).name.clone(),
            Head::Hole(k) => format!("#{k}"),
        }
    }

    fn bool_arg(&mut self, n: &Node, i: usize, env: &[Value]) -> Result<bool, EvalError> {
        match self.arg(n, i, env)? {
            Value::Bool(b) => Ok(b),
            v => Err(mismatch(&self.name(n), TypeTag::Bool, &v)),
        }
    }

    fn int_arg(&mut self, n: &Node, i: usize, env: &[Value]) -> Result<u8, EvalError> {
        match self.arg(n, i, env)? {
            Value::Int(k) => Ok(k),
            v => Err(mismatch(&self.name(n), TypeTag::Int, &v)),
        }
    }

    fn eval(&mut self, n: &Node, env: &[Value]) -> Result<Value, EvalError> {
        let id = match n.head {
            Head::Hole(k) => return env.get(k as usize).copied().ok_or(EvalError::UnboundHole(k)),
            Head::Rule(id) => id,
        };
        let op = self.g.rule(id).op;
        Ok(match op {
            Op::Action(a) => Value::Action(a),
            Op::Int(k) => Value::Int(k),
            Op::AgentDirection => Value::AgentDirection(self.obs.heading),
            Op::Map => Value::Map(*self.obs),
            Op::Direction(d) => Value::Direction(d),
            Op::Object(c) => Value::Object(c),
            Op::If(t) => {
                let branch = if self.bool_arg(n, 0, env)? { 1 } else { 2 };
                let v = self.arg(n, branch, env)?;
                if v.type_tag() != t {
                    return Err(mismatch(&self.name(n), t, &v));
                }
                v
            }
            Op::Not => Value::Bool(!self.bool_arg(n, 0, env)?),
            Op::And => Value::Bool(self.bool_arg(n, 0, env)? && self.bool_arg(n, 1, env)?),
            Op::Or => Value::Bool(self.bool_arg(n, 0, env)? || self.bool_arg(n, 1, env)?),
            Op::EqDirection => {
                let heading = match self.arg(n, 0, env)? {
                    Value::AgentDirection(d) => d,
                    v => return Err(mismatch("eq-direction?", TypeTag::AgentDirection, &v)),
                };
                let against = match self.arg(n, 1, env)? {
                    Value::Direction(d) => d,
                    v => return Err(mismatch("eq-direction?", TypeTag::Direction, &v)),
                };
                let outcome = heading == against;
                if T::ACTIVE {
                    self.tracer.compare(Comparison::Heading {
                        heading,
                        against,
                        outcome,
                    });
                }
                Value::Bool(outcome)
            }
            Op::EqObj => {
                let (found, x, y) = match self.arg(n, 0, env)? {
                    Value::MapObject { cell, x, y } => (cell, x, y),
                    v => return Err(mismatch("eq-obj?", TypeTag::MapObject, &v)),
                };
                let against = match self.arg(n, 1, env)? {
                    Value::Object(c) => c,
                    v => return Err(mismatch("eq-obj?", TypeTag::Object, &v)),
                };
                let outcome = found == against;
                if T::ACTIVE {
                    self.tracer.compare(Comparison::Object {
                        x,
                        y,
                        found,
                        against,
                        outcome,
                    });
                }
                Value::Bool(outcome)
            }
            Op::Get => {
                let map = match self.arg(n, 0, env)? {
                    Value::Map(m) => m,
                    v => return Err(mismatch("get", TypeTag::Map, &v)),
                };
                // Literals run to 5 but the window is 5 wide; clamp to the edge.
                let x = self.int_arg(n, 1, env)?.min(VIEW_SIZE as u8 - 1);
                let y = self.int_arg(n, 2, env)?.min(VIEW_SIZE as u8 - 1);
                if T::ACTIVE {
                    self.tracer.get(x, y);
                }
                Value::MapObject {
                    cell: map.get(x as usize, y as usize),
                    x,
                    y,
                }
            }
            Op::GetGameObj => match self.arg(n, 0, env)? {
                Value::MapObject { cell, .. } => Value::Object(cell),
                v => return Err(mismatch("get-game-obj", TypeTag::MapObject, &v)),
            },
            Op::Call(idx) => {
                let abs = self.g.abstraction(idx);
                if n.children.len() != abs.arity() {
                    return Err(EvalError::Arity(abs.name.clone()));
                }
                let mut args = ArgKey::new();
                for i in 0..n.children.len() {
                    args.push(self.arg(n, i, env)?);
                }
                let table = if T::ACTIVE {
                    None
                } else {
                    self.cache.and_then(|c| c.tables.get(idx).map(|t| (c, t)))
                };
                match table {
                    Some((cache, table)) => {
                        if let Some(v) = table.get(&args) {
                            cache.hits.fetch_add(1, Ordering::Relaxed);
                            return Ok(*v);
                        }
                        cache.misses.fetch_add(1, Ordering::Relaxed);
                        let v = self.eval(&abs.body, &args)?;
                        table.insert(args, v);
                        v
                    }
                    None => self.eval(&abs.body, &args)?,
                }
            }
        })
    }
}

/// Evaluates `p` on `obs`, reporting tag mismatches instead of panicking.
pub fn try_evaluate(
    grammar: &Grammar,
    p: &Program,
    obs: &Observation,
    cache: Option<&EvalCache>,
) -> Result<Value, EvalError> {
    Machine {
        g: grammar,
        obs,
        cache,
        tracer: NoTrace,
    }
    .eval(p.root(), &[])
}

/// Evaluates a well-typed program. Panics if `p` does not type-check.
pub fn evaluate(grammar: &Grammar, p: &Program, obs: &Observation) -> Value {
    try_evaluate(grammar, p, obs, None).unwrap_or_else(|e| panic!("ill-typed program: {e}"))
}

pub fn evaluate_cached(grammar: &Grammar, p: &Program, obs: &Observation, cache: &EvalCache) -> Value {
    try_evaluate(grammar, p, obs, Some(cache)).unwrap_or_else(|e| panic!("ill-typed program: {e}"))
}

/// Evaluates `p` and records the cells and comparisons on the executed path.
/// Never consults a cache, so every read is recorded.
pub fn trace_evaluate(grammar: &Grammar, p: &Program, obs: &Observation) -> EvalTrace {
    let mut m = Machine {
        g: grammar,
        obs,
        cache: None,
        tracer: Recorder::default(),
    };
    let result = m
        .eval(p.root(), &[])
        .unwrap_or_else(|e| panic!("ill-typed program: {e}"));
    EvalTrace {
        accessed_cells: m.tracer.cells,
        comparisons: m.tracer.comparisons,
        result,
    }
}
