use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::types::{Action, Cell, Direction, Observation, VIEW_SIZE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentPose {
    pub x: i32,
    pub y: i32,
    pub heading: Direction,
}

impl AgentPose {
    pub fn new(x: i32, y: i32, heading: Direction) -> AgentPose {
        AgentPose { x, y, heading }
    }

    pub fn position(&self) -> (i32, i32) {
        (self.x, self.y)
    }
}

/// A perfect maze on an odd lattice: rooms at odd coordinates, everything on
/// the outer border is wall.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Maze {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    start: (i32, i32),
    goal: (i32, i32),
    seed: u64,
}

impl Maze {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> (i32, i32) {
        self.start
    }

    pub fn goal(&self) -> (i32, i32) {
        self.goal
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Out-of-bounds reads are walls.
    pub fn cell(&self, x: i32, y: i32) -> Cell {
        if self.in_bounds(x, y) {
            self.cells[y as usize * self.width + x as usize]
        } else {
            Cell::Wall
        }
    }

    /// Pose at the start cell facing north.
    pub fn start_pose(&self) -> AgentPose {
        AgentPose::new(self.start.0, self.start.1, Direction::North)
    }

    /// Open neighbours of an open cell.
    pub fn open_neighbours(&self, x: i32, y: i32) -> impl Iterator<Item = (i32, i32)> + '_ {
        Direction::ALL.into_iter().filter_map(move |d| {
            let (dx, dy) = d.delta();
            let (nx, ny) = (x + dx, y + dy);
            self.cell(nx, ny).is_open().then_some((nx, ny))
        })
    }

    /// Breadth-first distances over open cells from `from`; `None` for walls
    /// and unreachable cells.
    pub fn distances_from(&self, from: (i32, i32)) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.cells.len()];
        let idx = |(x, y): (i32, i32)| y as usize * self.width + x as usize;
        if !self.cell(from.0, from.1).is_open() {
            return dist;
        }
        dist[idx(from)] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(p) = queue.pop_front() {
            let d = dist[idx(p)].unwrap();
            for n in self.open_neighbours(p.0, p.1) {
                if dist[idx(n)].is_none() {
                    dist[idx(n)] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    /// Renders the maze with north at the top.
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        for y in (0..self.height as i32).rev() {
            for x in 0..self.width as i32 {
                out.push(if (x, y) == self.start {
                    'S'
                } else {
                    match self.cell(x, y) {
                        Cell::Wall => '#',
                        Cell::Empty => '.',
                        Cell::Goal => 'G',
                    }
                });
            }
            out.push('\n');
        }
        out
    }
}

/// Carves a perfect maze with a randomized depth-first backtracker starting
/// at `(1, 1)`; the goal is the open cell farthest from the start.
pub fn generate_maze(width: usize, height: usize, seed: u64) -> Result<Maze, EnvError> {
    if width < 5 || height < 5 || width.is_multiple_of(2) || height.is_multiple_of(2) {
        return Err(EnvError::InvalidDimensions { width, height });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = vec![Cell::Wall; width * height];
    let idx = |x: i32, y: i32| y as usize * width + x as usize;
    let start = (1, 1);
    cells[idx(1, 1)] = Cell::Empty;
    let mut stack = vec![start];
    while let Some(&(x, y)) = stack.last() {
        let mut options: Vec<Direction> = Direction::ALL
            .into_iter()
            .filter(|d| {
                let (dx, dy) = d.delta();
                let (nx, ny) = (x + 2 * dx, y + 2 * dy);
                nx > 0
                    && ny > 0
                    && (nx as usize) < width - 1
                    && (ny as usize) < height - 1
                    && cells[idx(nx, ny)] == Cell::Wall
            })
            .collect();
        options.shuffle(&mut rng);
        match options.first() {
            Some(d) => {
                let (dx, dy) = d.delta();
                cells[idx(x + dx, y + dy)] = Cell::Empty;
                cells[idx(x + 2 * dx, y + 2 * dy)] = Cell::Empty;
                stack.push((x + 2 * dx, y + 2 * dy));
            }
            None => {
                stack.pop();
            }
        }
    }
    let mut maze = Maze {
        width,
        height,
        cells,
        start,
        goal: start,
        seed,
    };
    let dist = maze.distances_from(start);
    // Farthest cell; ties go to the lowest row-major index.
    let (far, _) = dist
        .iter()
        .enumerate()
        .filter_map(|(i, d)| d.map(|d| (i, d)))
        .fold((idx(1, 1), 0), |best, cur| if cur.1 > best.1 { cur } else { best });
    maze.goal = ((far % width) as i32, (far / width) as i32);
    maze.cells[far] = Cell::Goal;
    Ok(maze)
}

/// Turns rotate in place; `forward` moves one cell unless the target is a wall.
pub fn step(maze: &Maze, pose: AgentPose, action: Action) -> AgentPose {
    match action {
        Action::Left => AgentPose {
            heading: pose.heading.turn_left(),
            ..pose
        },
        Action::Right => AgentPose {
            heading: pose.heading.turn_right(),
            ..pose
        },
        Action::Forward => {
            let (dx, dy) = pose.heading.delta();
            let (nx, ny) = (pose.x + dx, pose.y + dy);
            if maze.cell(nx, ny).is_open() {
                AgentPose { x: nx, y: ny, ..pose }
            } else {
                pose
            }
        }
    }
}

/// The 5x5 window ahead of and beside the agent in its own frame. Walls do
/// not occlude; cells beyond the maze read as walls.
pub fn observe(maze: &Maze, pose: AgentPose) -> Observation {
    let (fx, fy) = pose.heading.delta();
    let (rx, ry) = pose.heading.turn_right().delta();
    let mut rows = [[Cell::Wall; VIEW_SIZE]; VIEW_SIZE];
    for (ly, row) in rows.iter_mut().enumerate() {
        for (lx, cell) in row.iter_mut().enumerate() {
            let lateral = lx as i32 - 2;
            let forward = ly as i32;
            let wx = pose.x + forward * fx + lateral * rx;
            let wy = pose.y + forward * fy + lateral * ry;
            *cell = maze.cell(wx, wy);
        }
    }
    Observation::new(rows, pose.heading)
}
