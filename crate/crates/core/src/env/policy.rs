use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::maze::{observe, step, AgentPose, Maze};
use crate::types::{Action, Direction, Observation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyId {
    WallFollower,
    ShortestPath,
    Random,
}

impl PolicyId {
    pub fn name(self) -> &'static str {
        match self {
            PolicyId::WallFollower => "wall-follower",
            PolicyId::ShortestPath => "shortest-path",
            PolicyId::Random => "random",
        }
    }

    /// Instantiates the policy for one maze. `seed` only matters for `Random`.
    pub fn build(self, maze: &Maze, seed: u64) -> Box<dyn Policy> {
        match self {
            PolicyId::WallFollower => Box::new(WallFollower::new()),
            PolicyId::ShortestPath => Box::new(ShortestPathPolicy::new(maze)),
            PolicyId::Random => Box::new(RandomPolicy::new(seed)),
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wall-follower" => Ok(PolicyId::WallFollower),
            "shortest-path" => Ok(PolicyId::ShortestPath),
            "random" => Ok(PolicyId::Random),
            _ => Err(format!("unknown policy `{s}` (wall-follower, shortest-path, random)")),
        }
    }
}

/// Source of demonstrated actions.
pub trait Policy {
    fn id(&self) -> PolicyId;
    fn act(&mut self, obs: &Observation, pose: &AgentPose) -> Action;
}

/// Right-hand wall follower: turn right if the right cell is open, else go
/// forward if the cell ahead is open, else turn left.
pub fn oracle_policy(obs: &Observation) -> Action {
    if obs.get(3, 0).is_open() {
        Action::Right
    } else if obs.get(2, 1).is_open() {
        Action::Forward
    } else {
        Action::Left
    }
}

/// Right-hand wall follower as an agent: [`oracle_policy`] plus one bit of
/// memory so that a right turn is always followed by stepping into the
/// opening. Without it the agent would keep turning toward the open cell it
/// just came from.
#[derive(Clone, Copy, Debug, Default)]
pub struct WallFollower {
    turned_right: bool,
}

impl WallFollower {
    pub fn new() -> Self {
        WallFollower::default()
    }
}

impl Policy for WallFollower {
    fn id(&self) -> PolicyId {
        PolicyId::WallFollower
    }

    fn act(&mut self, obs: &Observation, _: &AgentPose) -> Action {
        let action = if self.turned_right && obs.get(2, 1).is_open() {
            Action::Forward
        } else {
            oracle_policy(obs)
        };
        self.turned_right = action == Action::Right;
        action
    }
}

/// Follows the unique tree path to the goal.
#[derive(Clone, Debug)]
pub struct ShortestPathPolicy {
    width: usize,
    to_goal: Vec<Option<usize>>,
}

impl ShortestPathPolicy {
    pub fn new(maze: &Maze) -> Self {
        ShortestPathPolicy {
            width: maze.width(),
            to_goal: maze.distances_from(maze.goal()),
        }
    }

    fn dist(&self, x: i32, y: i32) -> Option<usize> {
        if x < 0 || y < 0 || x as usize >= self.width {
            return None;
        }
        self.to_goal.get(y as usize * self.width + x as usize).copied().flatten()
    }
}

impl Policy for ShortestPathPolicy {
    fn id(&self) -> PolicyId {
        PolicyId::ShortestPath
    }

    fn act(&mut self, _: &Observation, pose: &AgentPose) -> Action {
        let Some(here) = self.dist(pose.x, pose.y) else {
            return Action::Left;
        };
        let toward: Option<Direction> = Direction::ALL.into_iter().find(|d| {
            let (dx, dy) = d.delta();
            self.dist(pose.x + dx, pose.y + dy).is_some_and(|d| d + 1 == here)
        });
        match toward {
            Some(d) if d == pose.heading => Action::Forward,
            Some(d) if d == pose.heading.turn_right() => Action::Right,
            _ => Action::Left,
        }
    }
}

/// Uniformly random actions from a seeded stream.
#[derive(Clone, Debug)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        RandomPolicy {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn id(&self) -> PolicyId {
        PolicyId::Random
    }

    fn act(&mut self, _: &Observation, _: &AgentPose) -> Action {
        Action::ALL[self.rng.gen_range(0..Action::ALL.len())]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rollout {
    pub pairs: Vec<(Observation, Action)>,
    pub final_pose: AgentPose,
}

impl Rollout {
    pub fn reached(&self, maze: &Maze) -> bool {
        self.final_pose.position() == maze.goal()
    }
}

/// Observe, act, step until the goal is reached or `max_steps` pairs exist.
pub fn rollout(maze: &Maze, start: AgentPose, policy: &mut dyn Policy, max_steps: usize) -> Rollout {
    let mut pose = start;
    let mut pairs = Vec::new();
    while pairs.len() < max_steps && pose.position() != maze.goal() {
        let obs = observe(maze, pose);
        let action = policy.act(&obs, &pose);
        pairs.push((obs, action));
        pose = step(maze, pose, action);
    }
    Rollout {
        pairs,
        final_pose: pose,
    }
}
