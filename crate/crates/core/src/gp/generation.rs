use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsl::{EvalCache, Grammar, Program};
use crate::env::Dataset;

use super::config::GpConfig;
use super::fitness::{evaluate_population, Individual, SolvedMask};
use super::operators::{crossover, mutate, tournament_select};

/// Summary of one evaluated generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub best_fitness: f64,
    /// Solved fraction of the fittest individual.
    pub best_accuracy: f64,
    /// Fraction of sub-trajectories solved by at least one individual.
    pub union_accuracy: f64,
    pub mean_size: f64,
    pub best_size: usize,
    #[serde(skip)]
    pub solved_union: SolvedMask,
}

/// Index of the fittest individual; ties go to the smaller program, then the
/// earlier index.
pub fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate().skip(1) {
        let b = &pop[best];
        if ind.fitness > b.fitness || (ind.fitness == b.fitness && ind.size < b.size) {
            best = i;
        }
    }
    best
}

pub fn generation_stats(pop: &[Individual]) -> GenerationStats {
    let best = &pop[best_index(pop)];
    let mut union = SolvedMask::new(best.solved.len());
    for ind in pop {
        union.union_with(&ind.solved);
    }
    let union_accuracy = if union.is_empty() {
        0.0
    } else {
        union.count() as f64 / union.len() as f64
    };
    GenerationStats {
        best_fitness: best.fitness,
        best_accuracy: best.accuracy(),
        union_accuracy,
        mean_size: pop.iter().map(|i| i.size as f64).sum::<f64>() / pop.len() as f64,
        best_size: best.size,
        solved_union: union,
    }
}

/// Builds the next population: the single fittest individual survives, the
/// rest are offspring of tournament-selected pairs after crossover and then
/// mutation.
pub fn breed<R: Rng + ?Sized>(pop: &[Individual], cfg: &GpConfig, g: &Grammar, rng: &mut R) -> Vec<Program> {
    let mut next = Vec::with_capacity(cfg.population_size);
    next.push(pop[best_index(pop)].program.clone());
    while next.len() < cfg.population_size {
        let a = &pop[tournament_select(pop, cfg.tournament_size, rng)].program;
        let b = &pop[tournament_select(pop, cfg.tournament_size, rng)].program;
        let (c, d) = crossover(a, b, g, cfg.p_crossover, rng);
        next.push(mutate(&c, g, cfg.p_mutation, cfg.max_sample_depth, rng));
        if next.len() < cfg.population_size {
            next.push(mutate(&d, g, cfg.p_mutation, cfg.max_sample_depth, rng));
        }
    }
    next
}

pub struct GenerationResult {
    pub evaluated: Vec<Individual>,
    pub stats: GenerationStats,
    pub next: Vec<Program>,
}

/// Evaluates `programs` on `d` in parallel, then breeds serially from `rng`,
/// so the outcome does not depend on the number of worker threads.
pub fn run_generation<R: Rng + ?Sized>(
    programs: Vec<Program>,
    d: &Dataset,
    cfg: &GpConfig,
    g: &Grammar,
    cache: Option<&EvalCache>,
    rng: &mut R,
) -> GenerationResult {
    let evaluated = evaluate_population(g, programs, d, cfg.bloat_weight, cache);
    let stats = generation_stats(&evaluated);
    let next = breed(&evaluated, cfg, g, rng);
    GenerationResult { evaluated, stats, next }
}
