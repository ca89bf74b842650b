use std::fmt;

use serde::{Deserialize, Serialize};

use crate::types::{Action, Cell, Direction, Observation};

/// Result type of every DSL expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeTag {
    #[serde(rename = "action")]
    Action,
    #[serde(rename = "int")]
    Int,
    #[serde(rename = "agentDirection")]
    AgentDirection,
    #[serde(rename = "map")]
    Map,
    #[serde(rename = "direction")]
    Direction,
    #[serde(rename = "object")]
    Object,
    #[serde(rename = "mapObject")]
    MapObject,
    #[serde(rename = "bool")]
    Bool,
}

impl TypeTag {
    pub const COUNT: usize = 8;

    pub const ALL: [TypeTag; TypeTag::COUNT] = [
        TypeTag::Action,
        TypeTag::Int,
        TypeTag::AgentDirection,
        TypeTag::Map,
        TypeTag::Direction,
        TypeTag::Object,
        TypeTag::MapObject,
        TypeTag::Bool,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            TypeTag::Action => "action",
            TypeTag::Int => "int",
            TypeTag::AgentDirection => "agentDirection",
            TypeTag::Map => "map",
            TypeTag::Direction => "direction",
            TypeTag::Object => "object",
            TypeTag::MapObject => "mapObject",
            TypeTag::Bool => "bool",
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Runtime value of an expression; the variant always agrees with the
/// expression's [`TypeTag`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Action(Action),
    Int(u8),
    AgentDirection(Direction),
    Map(Observation),
    Direction(Direction),
    Object(Cell),
    /// A cell read from the map together with the local coordinates it came from.
    MapObject { cell: Cell, x: u8, y: u8 },
    Bool(bool),
}

impl Value {
    pub fn type_tag(&self) -> TypeTag {
        match self {
            Value::Action(_) => TypeTag::Action,
            Value::Int(_) => TypeTag::Int,
            Value::AgentDirection(_) => TypeTag::AgentDirection,
            Value::Map(_) => TypeTag::Map,
            Value::Direction(_) => TypeTag::Direction,
            Value::Object(_) => TypeTag::Object,
            Value::MapObject { .. } => TypeTag::MapObject,
            Value::Bool(_) => TypeTag::Bool,
        }
    }

    pub fn as_action(&self) -> Option<Action> {
        match *self {
            Value::Action(a) => Some(a),
            _ => None,
        }
    }
}
