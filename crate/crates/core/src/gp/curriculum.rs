use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsl::{EvalCache, Grammar, Program};
use crate::env::{collect_episodes, slice_dataset, Dataset, EnvError, Episode, EpisodeSpec};
use crate::liblearn::{expand_abstractions, format_library, learn_library, rewrite_with, LibraryRound, MinerLimits};

use super::config::GpConfig;
use super::generation::{best_index, run_generation, GenerationStats};
use super::operators::init_population;
use super::GpError;

/// Per-length bookkeeping of the curriculum.
#[derive(Clone, Debug, PartialEq)]
pub struct CurriculumState {
    pub sequence_length: usize,
    pub generation_in_length: usize,
    /// Whether any individual solved any sub-trajectory at this length.
    pub solved_in_length: bool,
    pub halted: bool,
}

impl CurriculumState {
    pub fn new(start_length: usize) -> Self {
        CurriculumState {
            sequence_length: start_length,
            generation_in_length: 0,
            solved_in_length: false,
            halted: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Advance,
    Halt,
}

/// Records one finished generation and decides what comes next: advance once
/// the best individual reaches `advance_threshold` or the length budget is
/// spent, halt instead if nothing was solved during the whole budget.
pub fn curriculum_step(state: &mut CurriculumState, stats: &GenerationStats, cfg: &GpConfig) -> Decision {
    state.generation_in_length += 1;
    state.solved_in_length |= stats.solved_union.any();
    if stats.best_accuracy >= cfg.advance_threshold {
        return Decision::Advance;
    }
    if state.generation_in_length < cfg.max_generations_per_length {
        return Decision::Continue;
    }
    if state.solved_in_length {
        Decision::Advance
    } else {
        state.halted = true;
        Decision::Halt
    }
}

impl CurriculumState {
    /// Moves to the next length.
    pub fn advance(&mut self) {
        self.sequence_length += 1;
        self.generation_in_length = 0;
        self.solved_in_length = false;
    }
}

/// Supplies the dataset for each curriculum length.
pub trait DatasetProvider: Sync {
    fn dataset(&self, sequence_length: usize) -> Result<Dataset, EnvError>;
}

/// Episodes rolled out once and re-sliced at every length.
#[derive(Clone, Debug)]
pub struct EpisodePool {
    pub episodes: Vec<Episode>,
    pub count: usize,
    pub seed: u64,
}

impl DatasetProvider for EpisodePool {
    fn dataset(&self, sequence_length: usize) -> Result<Dataset, EnvError> {
        slice_dataset(&self.episodes, sequence_length, self.count, self.seed)
    }
}

/// Precomputed datasets keyed by length.
#[derive(Clone, Debug, Default)]
pub struct DatasetMap(pub BTreeMap<usize, Dataset>);

impl DatasetProvider for DatasetMap {
    fn dataset(&self, sequence_length: usize) -> Result<Dataset, EnvError> {
        self.0
            .get(&sequence_length)
            .cloned()
            .ok_or(EnvError::EmptyDataset { sequence_length })
    }
}

/// Where the imitation data comes from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvSpec {
    #[serde(flatten)]
    pub episodes: EpisodeSpec,
    /// N_D per length.
    pub dataset_count: usize,
    pub dataset_seed: u64,
}

impl Default for EnvSpec {
    fn default() -> Self {
        EnvSpec {
            episodes: EpisodeSpec::default(),
            dataset_count: 50,
            dataset_seed: 0,
        }
    }
}

impl EnvSpec {
    pub fn pool(&self) -> Result<EpisodePool, EnvError> {
        Ok(EpisodePool {
            episodes: collect_episodes(&self.episodes)?,
            count: self.dataset_count,
            seed: self.dataset_seed,
        })
    }
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Finished the configured maximum length.
    Completed,
    /// Nothing was solved during a whole length budget.
    Halted,
    /// No dataset exists for the next length.
    DataExhausted,
}

/// Results for one sequence length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthRecord {
    pub sequence_length: usize,
    pub dataset_size: usize,
    pub generations: usize,
    /// Highest best-individual accuracy over the generations at this length.
    pub best_accuracy: f64,
    /// Highest population-union accuracy over the generations at this length.
    pub union_accuracy: f64,
    pub best_fitness: f64,
    pub best_program: String,
    pub best_program_expanded: String,
    /// Abstractions mined when leaving this length.
    pub library: Vec<String>,
    pub wall_clock_seconds: f64,
    pub history: Vec<GenerationStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: GpConfig,
    pub source_policy: String,
    pub lengths: Vec<LengthRecord>,
    pub termination: Termination,
    pub halted: bool,
    pub best_program: String,
    pub best_program_expanded: String,
    /// Final library, one `fn_k = body` line each.
    pub library: Vec<String>,
    /// Final grammar, one rule signature per line.
    pub grammar: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    /// Copy with every timing set to zero, for reproducibility comparisons.
    pub fn without_timings(&self) -> RunReport {
        let mut r = self.clone();
        r.wall_clock_seconds = 0.0;
        for l in &mut r.lengths {
            l.wall_clock_seconds = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn max_length(&self) -> Option<usize> {
        self.lengths.last().map(|l| l.sequence_length)
    }
}

/// Library learning performed at one curriculum advance.
#[derive(Clone, Debug)]
pub struct MiningRound {
    pub sequence_length: usize,
    pub round: LibraryRound,
}

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub grammar: Grammar,
    /// Population the run ended with.
    pub population: Vec<Program>,
    pub best: Program,
    pub mining_rounds: Vec<MiningRound>,
}

/// Hooks into a running evolution.
pub trait Observer {
    fn on_generation(&mut self, _length: usize, _generation: usize, _stats: &GenerationStats) {}
    /// Called after library learning with the population before and after
    /// rewriting, and with the population the next length starts from.
    fn on_advance(&mut self, _from: usize, _before: &[Program], _after: &[Program], _grammar: &Grammar) {}
    fn on_length_start(&mut self, _length: usize, _population: &[Program]) {}
}

impl Observer for () {}

/// Runs the whole curriculum on a private thread pool of `workers` threads
/// (the global pool if `None`). Results do not depend on `workers`.
pub fn evolve_with(
    cfg: &GpConfig,
    provider: &dyn DatasetProvider,
    workers: Option<usize>,
    observer: &mut (dyn Observer + Send),
) -> Result<RunOutcome, GpError> {
    cfg.validate()?;
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| GpError::Internal(e.to_string()))?;
            pool.install(|| run(cfg, provider, observer))
        }
        None => run(cfg, provider, observer),
    }
}

/// Generates the episode pool for `env` and runs the curriculum.
pub fn evolve(cfg: &GpConfig, env: &EnvSpec) -> Result<RunReport, GpError> {
    let pool = env.pool()?;
    Ok(evolve_with(cfg, &pool, None, &mut ())?.report)
}

struct Best {
    program: Program,
    fitness: f64,
    size: usize,
}

fn run(cfg: &GpConfig, provider: &dyn DatasetProvider, observer: &mut dyn Observer) -> Result<RunOutcome, GpError> {
    let run_start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut grammar = Grammar::base();
    let mut state = CurriculumState::new(cfg.start_length);
    let mut dataset = provider.dataset(state.sequence_length)?;
    if dataset.is_empty() {
        return Err(EnvError::EmptyDataset {
            sequence_length: state.sequence_length,
        }
        .into());
    }
    let source_policy = dataset.source_policy.clone();
    let mut population = init_population(&grammar, cfg.population_size, cfg.max_sample_depth, &mut rng)?;
    let mut lengths = Vec::new();
    let mut mining_rounds = Vec::new();
    let limits = MinerLimits {
        size_limit: cfg.library_size_limit,
        count_limit: cfg.library_count_limit,
    };

    let (termination, best) = 'curriculum: loop {
        observer.on_length_start(state.sequence_length, &population);
        let length_start = Instant::now();
        let cache = EvalCache::new(&grammar);
        let mut history: Vec<GenerationStats> = Vec::new();
        let mut length_best: Option<Best> = None;
        let (decision, evaluated, next) = loop {
            let r = run_generation(population, &dataset, cfg, &grammar, Some(&cache), &mut rng);
            let bi = best_index(&r.evaluated);
            let b = &r.evaluated[bi];
            if length_best.as_ref().is_none_or(|lb| b.fitness > lb.fitness || (b.fitness == lb.fitness && b.size < lb.size)) {
                length_best = Some(Best {
                    program: b.program.clone(),
                    fitness: b.fitness,
                    size: b.size,
                });
            }
            observer.on_generation(state.sequence_length, state.generation_in_length, &r.stats);
            let decision = curriculum_step(&mut state, &r.stats, cfg);
            history.push(r.stats);
            if decision == Decision::Continue {
                population = r.next;
                continue;
            }
            break (decision, r.evaluated, r.next);
        };
        let lb = length_best.expect("at least one generation per length");
        let mut record = LengthRecord {
            sequence_length: state.sequence_length,
            dataset_size: dataset.len(),
            generations: history.len(),
            best_accuracy: history.iter().map(|s| s.best_accuracy).fold(0.0, f64::max),
            union_accuracy: history.iter().map(|s| s.union_accuracy).fold(0.0, f64::max),
            best_fitness: lb.fitness,
            best_program: lb.program.to_sexpr(&grammar),
            best_program_expanded: expand_abstractions(&lb.program, &grammar).to_sexpr(&grammar),
            library: Vec::new(),
            wall_clock_seconds: 0.0,
            history,
        };
        let best = lb.program;
        population = next;

        if decision == Decision::Halt {
            record.wall_clock_seconds = length_start.elapsed().as_secs_f64();
            lengths.push(record);
            break 'curriculum (Termination::Halted, best);
        }
        if state.sequence_length >= cfg.max_length {
            record.wall_clock_seconds = length_start.elapsed().as_secs_f64();
            lengths.push(record);
            break 'curriculum (Termination::Completed, best);
        }

        if cfg.use_library {
            let corpus: Vec<Program> = evaluated
                .iter()
                .filter(|i| i.solved.any())
                .map(|i| i.program.clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let round = learn_library(&mut grammar, &corpus, limits);
            if !round.added.is_empty() {
                let before = population.clone();
                population = population.iter().map(|p| rewrite_with(p, &grammar, &round.added)).collect();
                observer.on_advance(state.sequence_length, &before, &population, &grammar);
            }
            record.library = round
                .added
                .iter()
                .map(|&id| {
                    let a = grammar.abstraction_of(id).expect("registered");
                    format!("{} = {}", a.name, a.body.display(&grammar))
                })
                .collect();
            mining_rounds.push(MiningRound {
                sequence_length: state.sequence_length,
                round,
            });
        }
        record.wall_clock_seconds = length_start.elapsed().as_secs_f64();
        lengths.push(record);

        state.advance();
        match provider.dataset(state.sequence_length) {
            Ok(d) if !d.is_empty() => dataset = d,
            Ok(_) | Err(EnvError::EmptyDataset { .. }) => break 'curriculum (Termination::DataExhausted, best),
            Err(e) => return Err(e.into()),
        }
    };

    let report = RunReport {
        config: cfg.clone(),
        source_policy,
        halted: termination == Termination::Halted,
        termination,
        best_program: best.to_sexpr(&grammar),
        best_program_expanded: expand_abstractions(&best, &grammar).to_sexpr(&grammar),
        library: format_library(&grammar).lines().map(str::to_string).collect(),
        grammar: grammar.dump().lines().map(str::to_string).collect(),
        lengths,
        wall_clock_seconds: run_start.elapsed().as_secs_f64(),
    };
    Ok(RunOutcome {
        report,
        grammar,
        population,
        best,
        mining_rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::fitness::SolvedMask;

    fn stats(best_accuracy: f64, solved: bool) -> GenerationStats {
        GenerationStats {
            best_fitness: 0.0,
            best_accuracy,
            union_accuracy: if solved { best_accuracy } else { 0.0 },
            mean_size: 1.0,
            best_size: 1,
            solved_union: SolvedMask::from_bools(&[solved, false]),
        }
    }

    #[test]
    fn advances_on_threshold() {
        let cfg = GpConfig::default();
        let mut s = CurriculumState::new(3);
        assert_eq!(curriculum_step(&mut s, &stats(0.5, true), &cfg), Decision::Continue);
        assert_eq!(curriculum_step(&mut s, &stats(0.96, true), &cfg), Decision::Advance);
        assert_eq!(s.generation_in_length, 2);
    }

    #[test]
    fn advances_when_budget_is_spent() {
        let cfg = GpConfig::default();
        let mut s = CurriculumState::new(3);
        for _ in 0..9 {
            assert_eq!(curriculum_step(&mut s, &stats(0.4, true), &cfg), Decision::Continue);
        }
        assert_eq!(curriculum_step(&mut s, &stats(0.4, true), &cfg), Decision::Advance);
        assert!(!s.halted);
        s.advance();
        assert_eq!((s.sequence_length, s.generation_in_length), (4, 0));
    }

    #[test]
    fn halts_when_nothing_is_solved_for_a_whole_budget() {
        let cfg = GpConfig::default();
        let mut s = CurriculumState::new(100);
        for _ in 0..9 {
            assert_eq!(curriculum_step(&mut s, &stats(0.0, false), &cfg), Decision::Continue);
        }
        assert_eq!(curriculum_step(&mut s, &stats(0.0, false), &cfg), Decision::Halt);
        assert!(s.halted);
    }
}
