//! Perfect-maze gridworld, oracle policies and sub-trajectory datasets.
//!
//! World coordinates put `x` east and `y` north; headings `North..West` are
//! `direction-0..3`. Observations are egocentric, see
//! [`Observation`](crate::types::Observation).

mod dataset;
mod maze;
mod policy;

pub use dataset::{
    collect_episodes, count_windows, slice_dataset, Dataset, Episode, EpisodeSpec, StepRecord,
    SubTrajectory,
};
pub use maze::{generate_maze, observe, step, AgentPose, Maze};
pub use policy::{
    oracle_policy, rollout, Policy, PolicyId, RandomPolicy, Rollout, ShortestPathPolicy,
    WallFollower,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("maze dimensions {width}x{height} must be odd and at least 5")]
    InvalidDimensions { width: usize, height: usize },
    #[error("no sub-trajectory of length {sequence_length} fits in the episodes")]
    EmptyDataset { sequence_length: usize },
    #[error("malformed dataset: {0}")]
    Malformed(String),
}
