use serde::{Deserialize, Serialize};

use super::GpError;

/// Hyperparameters of one evolutionary run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpConfig {
    pub population_size: usize,
    pub tournament_size: usize,
    /// Per-node mutation probability.
    pub p_mutation: f64,
    /// Per-node crossover marking probability.
    pub p_crossover: f64,
    /// Size penalty per node in the fitness denominator.
    pub bloat_weight: f64,
    pub max_sample_depth: usize,
    pub max_generations_per_length: usize,
    /// Best-individual accuracy that ends a length early.
    pub advance_threshold: f64,
    /// Abstractions must have fewer concrete nodes than this.
    pub library_size_limit: usize,
    /// Abstractions added per curriculum advance.
    pub library_count_limit: usize,
    pub use_library: bool,
    pub start_length: usize,
    pub max_length: usize,
    pub rng_seed: u64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            population_size: 1000,
            tournament_size: 100,
            p_mutation: 0.5,
            p_crossover: 0.5,
            bloat_weight: 0.025,
            max_sample_depth: 6,
            max_generations_per_length: 10,
            advance_threshold: 0.95,
            library_size_limit: 10,
            library_count_limit: 5,
            use_library: true,
            start_length: 3,
            max_length: 9,
            rng_seed: 0,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<(), GpError> {
        let fail = |field: &'static str, reason: String| Err(GpError::Config { field, reason });
        if self.population_size < 2 {
            return fail("population_size", format!("must be at least 2, got {}", self.population_size));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return fail(
                "tournament_size",
                format!("must lie in 1..={}, got {}", self.population_size, self.tournament_size),
            );
        }
        for (field, v) in [
            ("p_mutation", self.p_mutation),
            ("p_crossover", self.p_crossover),
            ("advance_threshold", self.advance_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(field, format!("must lie in [0, 1], got {v}"));
            }
        }
        if !(self.bloat_weight >= 0.0 && self.bloat_weight.is_finite()) {
            return fail("bloat_weight", format!("must be finite and non-negative, got {}", self.bloat_weight));
        }
        if self.max_sample_depth == 0 {
            return fail("max_sample_depth", "must be at least 1".into());
        }
        if self.max_generations_per_length == 0 {
            return fail("max_generations_per_length", "must be at least 1".into());
        }
        if self.library_size_limit < 3 {
            return fail("library_size_limit", format!("must be at least 3, got {}", self.library_size_limit));
        }
        if self.start_length == 0 {
            return fail("start_length", "must be at least 1".into());
        }
        if self.max_length < self.start_length {
            return fail(
                "max_length",
                format!("must be at least start_length ({}), got {}", self.start_length, self.max_length),
            );
        }
        Ok(())
    }
}
