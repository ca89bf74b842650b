//! Primitive domain values shared by the DSL and the maze environment.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Side length of the egocentric observation window.
pub const VIEW_SIZE: usize = 5;

/// Local coordinates of the agent inside its own observation window.
pub const AGENT_CELL: (u8, u8) = (2, 0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Left,
    Right,
    Forward,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Left, Action::Right, Action::Forward];

    pub fn name(self) -> &'static str {
        match self {
            Action::Left => "left",
            Action::Right => "right",
            Action::Forward => "forward",
        }
    }

    /// Name of the DSL terminal producing this action.
    pub fn rule_name(self) -> &'static str {
        match self {
            Action::Left => "left-action",
            Action::Right => "right-action",
            Action::Forward => "forward-action",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Cardinal heading. The discriminant is the `direction-k` index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Direction {
    North = 0,
    East = 1,
    South = 2,
    West = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Direction> {
        Direction::ALL.get(i as usize).copied()
    }

    pub fn turn_left(self) -> Direction {
        Direction::ALL[(self.index() as usize + 3) % 4]
    }

    pub fn turn_right(self) -> Direction {
        Direction::ALL[(self.index() as usize + 1) % 4]
    }

    /// Unit step in world coordinates (x east, y north).
    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::North => (0, 1),
            Direction::East => (1, 0),
            Direction::South => (0, -1),
            Direction::West => (-1, 0),
        }
    }
}

impl From<Direction> for u8 {
    fn from(d: Direction) -> u8 {
        d.index()
    }
}

impl TryFrom<u8> for Direction {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Direction::from_index(v).ok_or_else(|| format!("heading {v} out of range 0..=3"))
    }
}

/// Contents of one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cell {
    Wall,
    Empty,
    Goal,
}

impl Cell {
    pub const ALL: [Cell; 3] = [Cell::Wall, Cell::Empty, Cell::Goal];

    /// Single-letter code used by dataset files.
    pub fn code(self) -> char {
        match self {
            Cell::Wall => 'w',
            Cell::Empty => 'e',
            Cell::Goal => 'g',
        }
    }

    pub fn from_code(c: char) -> Option<Cell> {
        match c {
            'w' => Some(Cell::Wall),
            'e' => Some(Cell::Empty),
            'g' => Some(Cell::Goal),
            _ => None,
        }
    }

    /// Name of the DSL terminal denoting this object.
    pub fn rule_name(self) -> &'static str {
        match self {
            Cell::Wall => "wall-obj",
            Cell::Empty => "empty-obj",
            Cell::Goal => "goal-obj",
        }
    }

    pub fn is_open(self) -> bool {
        self != Cell::Wall
    }
}

/// Egocentric 5x5 view of the maze plus the agent's absolute heading.
///
/// Local `x` runs laterally (0 far left, 4 far right) and local `y` runs
/// forward (0 is the agent's own row). The agent sits at `(2, 0)`, so `(2, 1)`
/// is the cell directly ahead and `(3, 0)` the cell to its right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Observation {
    cells: [[Cell; VIEW_SIZE]; VIEW_SIZE],
    pub heading: Direction,
}

impl Observation {
    /// `rows[y][x]` in the local frame.
    pub fn new(rows: [[Cell; VIEW_SIZE]; VIEW_SIZE], heading: Direction) -> Self {
        Observation { cells: rows, heading }
    }

    pub fn filled(cell: Cell, heading: Direction) -> Self {
        Observation::new([[cell; VIEW_SIZE]; VIEW_SIZE], heading)
    }

    /// Panics if `x` or `y` is outside `0..5`.
    pub fn get(&self, x: usize, y: usize) -> Cell {
        self.cells[y][x]
    }

    pub fn set(&mut self, x: usize, y: usize, cell: Cell) {
        self.cells[y][x] = cell;
    }

    pub fn with(mut self, x: usize, y: usize, cell: Cell) -> Self {
        self.set(x, y, cell);
        self
    }

    pub fn rows(&self) -> &[[Cell; VIEW_SIZE]; VIEW_SIZE] {
        &self.cells
    }

    /// 25 cell codes, row-major with `y = 0` first.
    pub fn codes(&self) -> String {
        self.cells.iter().flatten().map(|c| c.code()).collect()
    }

    pub fn from_codes(codes: &str, heading: Direction) -> Option<Observation> {
        let cells: Vec<Cell> = codes.chars().map(Cell::from_code).collect::<Option<_>>()?;
        if cells.len() != VIEW_SIZE * VIEW_SIZE {
            return None;
        }
        let mut rows = [[Cell::Wall; VIEW_SIZE]; VIEW_SIZE];
        for (i, c) in cells.into_iter().enumerate() {
            rows[i / VIEW_SIZE][i % VIEW_SIZE] = c;
        }
        Some(Observation::new(rows, heading))
    }
}
