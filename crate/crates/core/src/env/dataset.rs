use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::maze::generate_maze;
use super::policy::{rollout, PolicyId};
use super::EnvError;
use crate::types::{Action, Direction, Observation};

/// One complete rollout of a policy in one maze.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Episode {
    pub maze_seed: u64,
    pub policy: PolicyId,
    pub pairs: Vec<(Observation, Action)>,
}

/// Which mazes to roll out and with which policy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeSpec {
    pub width: usize,
    pub height: usize,
    pub maze_seeds: Vec<u64>,
    pub policy: PolicyId,
    pub max_steps: usize,
}

impl Default for EpisodeSpec {
    fn default() -> Self {
        EpisodeSpec {
            width: 15,
            height: 15,
            maze_seeds: (1..=5).collect(),
            policy: PolicyId::WallFollower,
            max_steps: 2000,
        }
    }
}

/// Rolls the policy out once per maze seed, starting from the maze's start pose.
pub fn collect_episodes(spec: &EpisodeSpec) -> Result<Vec<Episode>, EnvError> {
    spec.maze_seeds
        .iter()
        .map(|&seed| {
            let maze = generate_maze(spec.width, spec.height, seed)?;
            let mut policy = spec.policy.build(&maze, seed);
            let r = rollout(&maze, maze.start_pose(), policy.as_mut(), spec.max_steps);
            Ok(Episode {
                maze_seed: seed,
                policy: spec.policy,
                pairs: r.pairs,
            })
        })
        .collect()
}

/// Consecutive (observation, action) pairs from one episode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<StepRecord>", try_from = "Vec<StepRecord>")]
pub struct SubTrajectory {
    pub pairs: Vec<(Observation, Action)>,
}

impl SubTrajectory {
    pub fn new(pairs: Vec<(Observation, Action)>) -> Self {
        SubTrajectory { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Observation, Action)> {
        self.pairs.iter()
    }
}

/// Wire form of one pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub grid: String,
    pub heading: u8,
    pub action: Action,
}

impl From<&(Observation, Action)> for StepRecord {
    fn from((obs, action): &(Observation, Action)) -> Self {
        StepRecord {
            grid: obs.codes(),
            heading: obs.heading.index(),
            action: *action,
        }
    }
}

impl TryFrom<&StepRecord> for (Observation, Action) {
    type Error = EnvError;

    fn try_from(r: &StepRecord) -> Result<Self, EnvError> {
        let heading = Direction::from_index(r.heading)
            .ok_or_else(|| EnvError::Malformed(format!("heading {} outside 0..=3", r.heading)))?;
        let obs = Observation::from_codes(&r.grid, heading).ok_or_else(|| {
            EnvError::Malformed(format!("grid `{}` is not 25 codes from w/e/g", r.grid))
        })?;
        Ok((obs, r.action))
    }
}

impl From<SubTrajectory> for Vec<StepRecord> {
    fn from(t: SubTrajectory) -> Self {
        t.pairs.iter().map(StepRecord::from).collect()
    }
}

impl TryFrom<Vec<StepRecord>> for SubTrajectory {
    type Error = EnvError;

    fn try_from(records: Vec<StepRecord>) -> Result<Self, EnvError> {
        records
            .iter()
            .map(<(Observation, Action)>::try_from)
            .collect::<Result<_, _>>()
            .map(SubTrajectory::new)
    }
}

/// Imitation targets of one curriculum length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub sequence_length: usize,
    pub source_policy: String,
    pub maze_seeds: Vec<u64>,
    pub trajectories: Vec<SubTrajectory>,
}

impl Dataset {
    /// N_D.
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// Checks that every trajectory has exactly `sequence_length` pairs.
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.sequence_length == 0 {
            return Err(EnvError::Malformed("sequence_length must be at least 1".into()));
        }
        match self
            .trajectories
            .iter()
            .position(|t| t.len() != self.sequence_length)
        {
            Some(i) => Err(EnvError::Malformed(format!(
                "trajectory {i} has {} pairs, expected {}",
                self.trajectories[i].len(),
                self.sequence_length
            ))),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes")
    }

    pub fn from_json(text: &str) -> Result<Dataset, EnvError> {
        let d: Dataset =
            serde_json::from_str(text).map_err(|e| EnvError::Malformed(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }
}

/// Number of non-overlapping windows of `sequence_length` across all episodes.
pub fn count_windows(episodes: &[Episode], sequence_length: usize) -> usize {
    if sequence_length == 0 {
        return 0;
    }
    episodes.iter().map(|e| e.pairs.len() / sequence_length).sum()
}

/// Cuts episodes into non-overlapping windows, shuffles them with `seed` and
/// keeps the first `count` (all of them if fewer exist).
pub fn slice_dataset(
    episodes: &[Episode],
    sequence_length: usize,
    count: usize,
    seed: u64,
) -> Result<Dataset, EnvError> {
    if sequence_length == 0 {
        return Err(EnvError::Malformed("sequence_length must be at least 1".into()));
    }
    let mut windows: Vec<SubTrajectory> = episodes
        .iter()
        .flat_map(|e| {
            e.pairs
                .chunks_exact(sequence_length)
                .map(|w| SubTrajectory::new(w.to_vec()))
        })
        .collect();
    if windows.is_empty() {
        return Err(EnvError::EmptyDataset { sequence_length });
    }
    windows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    windows.truncate(count);
    let mut maze_seeds: Vec<u64> = episodes.iter().map(|e| e.maze_seed).collect();
    maze_seeds.dedup();
    Ok(Dataset {
        sequence_length,
        source_policy: episodes[0].policy.name().to_string(),
        maze_seeds,
        trajectories: windows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Cell;

    fn fake_episode(n: usize) -> Episode {
        let pairs = (0..n)
            .map(|i| {
                let obs = Observation::filled(Cell::Empty, Direction::ALL[i % 4]);
                (obs, Action::ALL[i % 3])
            })
            .collect();
        Episode {
            maze_seed: 0,
            policy: PolicyId::Random,
            pairs,
        }
    }

    #[test]
    fn window_arithmetic() {
        let eps = vec![fake_episode(10)];
        assert_eq!(count_windows(&eps, 3), 3);
        let d = slice_dataset(&eps, 3, 50, 0).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.trajectories.iter().all(|t| t.len() == 3));
        assert_eq!(
            slice_dataset(&eps, 11, 50, 0),
            Err(EnvError::EmptyDataset { sequence_length: 11 })
        );
    }

    #[test]
    fn windows_are_consecutive_and_disjoint() {
        let eps = vec![fake_episode(10)];
        let d = slice_dataset(&eps, 3, 50, 9).unwrap();
        let mut starts = Vec::new();
        for t in &d.trajectories {
            let i = eps[0]
                .pairs
                .windows(3)
                .position(|w| w == t.pairs.as_slice())
                .unwrap();
            assert_eq!(i % 3, 0);
            starts.push(i);
        }
        starts.sort();
        assert_eq!(starts, vec![0, 3, 6]);
    }

    #[test]
    fn slicing_is_deterministic() {
        let spec = EpisodeSpec::default();
        let eps = collect_episodes(&spec).unwrap();
        assert!(count_windows(&eps, 3) >= 50);
        let a = slice_dataset(&eps, 3, 50, 4).unwrap();
        let b = slice_dataset(&eps, 3, 50, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        assert_eq!(a.maze_seeds, vec![1, 2, 3, 4, 5]);
        assert_eq!(a.source_policy, "wall-follower");
    }

    #[test]
    fn json_round_trip() {
        let eps = collect_episodes(&EpisodeSpec::default()).unwrap();
        let d = slice_dataset(&eps, 4, 10, 1).unwrap();
        let text = d.to_json();
        assert_eq!(Dataset::from_json(&text).unwrap(), d);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let step = &v["trajectories"][0][0];
        assert_eq!(step["grid"].as_str().unwrap().len(), 25);
        assert!(step["heading"].as_u64().unwrap() < 4);
        assert!(["left", "right", "forward"].contains(&step["action"].as_str().unwrap()));
    }

    #[test]
    fn malformed_files_are_rejected() {
        let bad_grid = r#"{"sequence_length":1,"source_policy":"x","maze_seeds":[],
            "trajectories":[[{"grid":"wwx","heading":0,"action":"left"}]]}"#;
        assert!(matches!(Dataset::from_json(bad_grid), Err(EnvError::Malformed(_))));
        let wrong_len = format!(
            r#"{{"sequence_length":2,"source_policy":"x","maze_seeds":[],
            "trajectories":[[{{"grid":"{}","heading":0,"action":"left"}}]]}}"#,
            "e".repeat(25)
        );
        assert!(matches!(Dataset::from_json(&wrong_len), Err(EnvError::Malformed(_))));
    }
}
