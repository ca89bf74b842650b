//! Typed tree GP with bloat-controlled fitness and a sequence-length curriculum.
//!
//! Fitness of a program on a dataset of `N_D` sub-trajectories is
//! `1 / (1 + N_D - solved + w_b * size)`, where a sub-trajectory counts as
//! solved only if every action is reproduced.

mod config;
mod curriculum;
mod fitness;
mod generation;
mod operators;

pub use config::GpConfig;
pub use curriculum::{
    curriculum_step, evolve, evolve_with, CurriculumState, DatasetMap, DatasetProvider, Decision, EnvSpec,
    EpisodePool, LengthRecord, MiningRound, Observer, RunOutcome, RunReport, Termination,
};
pub use fitness::{evaluate_population, fitness, fitness_value, rollout_match, Individual, SolvedMask};
pub use generation::{best_index, breed, generation_stats, run_generation, GenerationResult, GenerationStats};
pub use operators::{crossover, init_population, mutate, tournament_select};

use thiserror::Error;

use crate::dsl::DslError;
use crate::env::EnvError;

#[derive(Debug, Error)]
pub enum GpError {
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("internal error: {0}")]
    Internal(String),
}
