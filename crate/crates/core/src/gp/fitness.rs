use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsl::{try_evaluate, EvalCache, Grammar, Program, Value};
use crate::env::{Dataset, SubTrajectory};

/// Which sub-trajectories of a dataset a program imitates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SolvedMask {
    len: usize,
    words: Vec<u64>,
}

impl SolvedMask {
    pub fn new(len: usize) -> Self {
        SolvedMask {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut m = SolvedMask::new(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                m.set(i);
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn set(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    pub fn union_with(&mut self, other: &SolvedMask) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }
}

/// 1 if `p` reproduces every action of `tau`, stopping at the first mismatch.
pub fn rollout_match(g: &Grammar, p: &Program, tau: &SubTrajectory, cache: Option<&EvalCache>) -> bool {
    tau.iter().all(|(obs, action)| {
        matches!(try_evaluate(g, p, obs, cache), Ok(Value::Action(a)) if a == *action)
    })
}

/// Fitness with bloat control: `1 / (1 + N_D - solved + w_b * size)`.
pub fn fitness_value(n_d: usize, solved: usize, size: usize, bloat_weight: f64) -> f64 {
    1.0 / (1.0 + (n_d - solved) as f64 + bloat_weight * size as f64)
}

/// Scores `p` against every sub-trajectory of `d`.
pub fn fitness(
    g: &Grammar,
    p: &Program,
    d: &Dataset,
    bloat_weight: f64,
    cache: Option<&EvalCache>,
) -> (f64, SolvedMask) {
    let mut mask = SolvedMask::new(d.len());
    for (i, tau) in d.trajectories.iter().enumerate() {
        if rollout_match(g, p, tau, cache) {
            mask.set(i);
        }
    }
    (fitness_value(d.len(), mask.count(), p.size(), bloat_weight), mask)
}

/// An evaluated program.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub program: Program,
    pub fitness: f64,
    pub solved: SolvedMask,
    pub size: usize,
}

impl Individual {
    pub fn evaluate(g: &Grammar, program: Program, d: &Dataset, bloat_weight: f64, cache: Option<&EvalCache>) -> Self {
        let (fitness, solved) = fitness(g, &program, d, bloat_weight, cache);
        let size = program.size();
        Individual {
            program,
            fitness,
            solved,
            size,
        }
    }

    pub fn accuracy(&self) -> f64 {
        if self.solved.is_empty() {
            0.0
        } else {
            self.solved.count() as f64 / self.solved.len() as f64
        }
    }
}

/// Evaluates all programs in parallel; output order follows the input.
pub fn evaluate_population(
    g: &Grammar,
    programs: Vec<Program>,
    d: &Dataset,
    bloat_weight: f64,
    cache: Option<&EvalCache>,
) -> Vec<Individual> {
    programs
        .into_par_iter()
        .map(|p| Individual::evaluate(g, p, d, bloat_weight, cache))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;
    use crate::types::{Action, Cell, Direction, Observation};

    fn tau(actions: &[Action]) -> SubTrajectory {
        let obs = Observation::filled(Cell::Empty, Direction::North);
        SubTrajectory::new(actions.iter().map(|&a| (obs, a)).collect())
    }

    fn dataset(taus: Vec<SubTrajectory>) -> Dataset {
        Dataset {
            sequence_length: taus[0].len(),
            source_policy: "test".into(),
            maze_seeds: vec![],
            trajectories: taus,
        }
    }

    #[test]
    fn constant_program_matches() {
        let g = Grammar::base();
        let left = parse_program("left-action", &g).unwrap();
        use Action::*;
        assert!(rollout_match(&g, &left, &tau(&[Left, Left, Left]), None));
        assert!(!rollout_match(&g, &left, &tau(&[Left, Left, Forward]), None));
    }

    #[test]
    fn fitness_examples() {
        let g = Grammar::base();
        let left = parse_program("left-action", &g).unwrap();
        let good = tau(&[Action::Left; 3]);
        let bad = tau(&[Action::Right; 3]);
        let (f, m) = fitness(&g, &left, &dataset(vec![good.clone(); 4]), 0.0, None);
        assert_eq!(f, 1.0);
        assert_eq!(m.count(), 4);
        let (f, m) = fitness(&g, &left, &dataset(vec![bad; 4]), 0.0, None);
        assert_eq!(f, 0.2);
        assert!(!m.any());
        let expected = 1.0 / (1.0 + 3.0 + 0.2);
        assert!((fitness_value(10, 7, 8, 0.025) - expected).abs() < 1e-15);
        assert!((fitness_value(10, 7, 8, 0.025) - 0.238_095_238_095).abs() < 1e-9);
    }

    #[test]
    fn mask_operations() {
        let mut a = SolvedMask::from_bools(&[true, false, false]);
        let b = SolvedMask::from_bools(&[false, false, true]);
        a.union_with(&b);
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![true, false, true]);
        assert_eq!(a.count(), 2);
        let big = SolvedMask::from_bools(&[true; 130]);
        assert_eq!(big.count(), 130);
        assert!(!big.get(130));
    }
}
