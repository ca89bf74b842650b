use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::Utc;
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use mazegp::env::{collect_episodes, count_windows, slice_dataset, Dataset, EpisodeSpec, PolicyId};
use mazegp::explain::{accuracy_report, diff_reports, explain_decision, render_ascii, Explanation};
use mazegp::gp::{evolve_with, DatasetMap, GenerationStats, GpConfig, Observer, RunReport};
use mazegp::liblearn::{format_library, load_library};
use mazegp::{Action, Grammar};

use crate::manifest::{sha256_hex, RunManifest};
use crate::{io_err, CliError};

const TOOL_VERSION: &str = concat!("mazegp ", env!("CARGO_PKG_VERSION"));

/// Parses `3-9`, `1,2,5` or a mix such as `1-3,7`.
pub fn parse_list(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| format!("bad range `{part}`"))?;
                let b: u64 = b.trim().parse().map_err(|_| format!("bad range `{part}`"))?;
                if a > b {
                    return Err(format!("empty range `{part}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| format!("bad number `{part}`"))?),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(io_err(path))
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

// ---------------------------------------------------------------- gen-data

#[derive(Args, Clone, Debug)]
pub struct GenDataArgs {
    /// Output directory for `dataset_len{L}.json` files.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 15)]
    pub width: usize,
    #[arg(long, default_value_t = 15)]
    pub height: usize,
    /// Maze seeds, e.g. `1-5` or `1,4,9`.
    #[arg(long, default_value = "1-5")]
    pub seeds: String,
    /// wall-follower, shortest-path or random.
    #[arg(long, default_value = "wall-follower")]
    pub policy: PolicyId,
    /// Sequence lengths, e.g. `3-9`.
    #[arg(long, default_value = "3-9")]
    pub lengths: String,
    /// Sub-trajectories per length (N_D).
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    /// Seed of the window shuffle.
    #[arg(long, default_value_t = 0)]
    pub dataset_seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub max_steps: usize,
}

#[derive(Clone, Debug)]
pub struct GenDataOutput {
    pub files: Vec<PathBuf>,
    pub manifest: RunManifest,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct DatasetFile<'a> {
    config_hash: &'a str,
    #[serde(flatten)]
    dataset: &'a Dataset,
}

pub fn cmd_gen_data(args: &GenDataArgs) -> Result<GenDataOutput, CliError> {
    let started_at = Utc::now();
    let seeds = parse_list(&args.seeds).map_err(|e| CliError::Config(format!("--seeds: {e}")))?;
    let lengths = parse_list(&args.lengths).map_err(|e| CliError::Config(format!("--lengths: {e}")))?;
    if args.count == 0 {
        return Err(CliError::Config("--count must be positive".into()));
    }
    if lengths.contains(&0) {
        return Err(CliError::Config("--lengths must be positive".into()));
    }
    let spec = EpisodeSpec {
        width: args.width,
        height: args.height,
        maze_seeds: seeds.clone(),
        policy: args.policy,
        max_steps: args.max_steps,
    };
    let inputs = json!({
        "episodes": spec,
        "lengths": lengths,
        "count": args.count,
        "dataset_seed": args.dataset_seed,
    });
    let hash = sha256_hex(inputs.to_string().as_bytes());
    let episodes = collect_episodes(&spec).map_err(|e| CliError::Data(e.to_string()))?;
    std::fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for &len in &lengths {
        let len = len as usize;
        let available = count_windows(&episodes, len);
        if available < args.count {
            warnings.push(format!(
                "length {len}: only {available} sub-trajectories available, {} requested",
                args.count
            ));
        }
        let d = slice_dataset(&episodes, len, args.count, args.dataset_seed)
            .map_err(|e| CliError::Data(e.to_string()))?;
        let path = args.out.join(format!("dataset_len{len}.json"));
        write_file(
            &path,
            &to_json(&DatasetFile {
                config_hash: &hash,
                dataset: &d,
            }),
        )?;
        files.push(path);
    }
    let manifest = RunManifest {
        command: "gen-data".into(),
        config_hash: hash,
        dataset_paths: files.iter().map(|p| p.display().to_string()).collect(),
        seeds: seeds.iter().copied().chain([args.dataset_seed]).collect(),
        tool_version: TOOL_VERSION.into(),
        started_at,
        finished_at: Utc::now(),
        inputs,
    };
    manifest.write(&args.out)?;
    Ok(GenDataOutput {
        files,
        manifest,
        warnings,
    })
}

// ---------------------------------------------------------------- evolve

#[derive(Args, Clone, Debug, Default)]
pub struct EvolveArgs {
    /// Directory holding `dataset_len{L}.json` files.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// TOML file with GP settings; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Disable library learning.
    #[arg(long)]
    pub no_library: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for fitness evaluation. Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub population_size: Option<usize>,
    #[arg(long)]
    pub tournament_size: Option<usize>,
    #[arg(long)]
    pub max_generations: Option<usize>,
    #[arg(long)]
    pub start_length: Option<usize>,
    #[arg(long)]
    pub max_length: Option<usize>,
    /// Suppress per-generation progress on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Clone, Debug)]
pub struct EvolveOutput {
    /// Report including timings.
    pub report: RunReport,
    pub manifest: RunManifest,
}

/// `report.json`: the run report with timings zeroed, tagged with its hash.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub config_hash: String,
    #[serde(flatten)]
    pub report: RunReport,
}

/// Reads a GP config from TOML; missing fields take default values.
pub fn load_config(path: &Path) -> Result<GpConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Loads every `dataset_len{L}.json` in `dir`, keyed by length, together with
/// the file paths in length order.
pub fn load_datasets(dir: &Path) -> Result<(DatasetMap, Vec<PathBuf>), CliError> {
    let mut found = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        let Some(len) = name
            .strip_prefix("dataset_len")
            .and_then(|r| r.strip_suffix(".json"))
            .and_then(|l| l.parse::<usize>().ok())
        else {
            continue;
        };
        let d = Dataset::from_json(&read_file(&path)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if d.sequence_length != len {
            return Err(CliError::Data(format!(
                "{}: holds length {} sub-trajectories",
                path.display(),
                d.sequence_length
            )));
        }
        found.insert(len, (d, path));
    }
    if found.is_empty() {
        return Err(CliError::Data(format!("no dataset_len*.json files in {}", dir.display())));
    }
    let paths = found.values().map(|(_, p)| p.clone()).collect();
    let map = DatasetMap(found.into_iter().map(|(l, (d, _))| (l, d)).collect());
    Ok((map, paths))
}

struct Progress {
    quiet: bool,
}

impl Observer for Progress {
    fn on_generation(&mut self, length: usize, generation: usize, s: &GenerationStats) {
        if !self.quiet {
            eprintln!(
                "length {length} gen {generation}: best {:.3} union {:.3} size {} fitness {:.4}",
                s.best_accuracy, s.union_accuracy, s.best_size, s.best_fitness
            );
        }
    }
}

pub fn cmd_evolve(args: &EvolveArgs) -> Result<EvolveOutput, CliError> {
    let started_at = Utc::now();
    let mut cfg = match &args.config {
        Some(p) => load_config(p)?,
        None => GpConfig::default(),
    };
    if args.no_library {
        cfg.use_library = false;
    }
    if let Some(s) = args.seed {
        cfg.rng_seed = s;
    }
    if let Some(v) = args.population_size {
        cfg.population_size = v;
    }
    if let Some(v) = args.tournament_size {
        cfg.tournament_size = v;
    }
    if let Some(v) = args.max_generations {
        cfg.max_generations_per_length = v;
    }
    if let Some(v) = args.start_length {
        cfg.start_length = v;
    }
    if let Some(v) = args.max_length {
        cfg.max_length = v;
    }
    cfg.validate()?;
    let (datasets, paths) = load_datasets(&args.data)?;

    let mut hasher_input = serde_json::to_string(&cfg).expect("config serializes");
    let mut dataset_digests = Vec::new();
    for p in &paths {
        let digest = sha256_hex(&std::fs::read(p).map_err(io_err(p))?);
        let _ = write!(hasher_input, "\n{}:{digest}", p.file_name().unwrap().to_string_lossy());
        dataset_digests.push(json!({"file": p.file_name().unwrap().to_string_lossy(), "sha256": digest}));
    }
    let hash = sha256_hex(hasher_input.as_bytes());

    let outcome = evolve_with(&cfg, &datasets, args.workers, &mut Progress { quiet: args.quiet })?;
    let report = outcome.report;

    std::fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    write_file(
        &args.out.join("report.json"),
        &to_json(&ReportFile {
            config_hash: hash.clone(),
            report: report.without_timings(),
        }),
    )?;
    let timings = json!({
        "config_hash": hash,
        "wall_clock_seconds": report.wall_clock_seconds,
        "lengths": report.lengths.iter().map(|l| json!({
            "sequence_length": l.sequence_length,
            "generations": l.generations,
            "wall_clock_seconds": l.wall_clock_seconds,
        })).collect::<Vec<_>>(),
    });
    write_file(&args.out.join("timings.json"), &to_json(&timings))?;

    let library_path = args.out.join("library.txt");
    if cfg.use_library {
        write_file(&library_path, &format!("; config-hash: {hash}\n{}", format_library(&outcome.grammar)))?;
    } else if library_path.exists() {
        std::fs::remove_file(&library_path).map_err(io_err(&library_path))?;
    }

    let mut best = format!("; config-hash: {hash}\n");
    for l in &report.lengths {
        let _ = writeln!(
            best,
            "; length {} best_accuracy {:.4} union_accuracy {:.4}\n{}",
            l.sequence_length, l.best_accuracy, l.union_accuracy, l.best_program
        );
    }
    let _ = writeln!(best, "; final ({:?})\n{}", report.termination, report.best_program);
    write_file(&args.out.join("best_programs.txt"), &best)?;

    let manifest = RunManifest {
        command: "evolve".into(),
        config_hash: hash,
        dataset_paths: paths.iter().map(|p| p.display().to_string()).collect(),
        seeds: vec![cfg.rng_seed],
        tool_version: TOOL_VERSION.into(),
        started_at,
        finished_at: Utc::now(),
        inputs: json!({ "config": cfg, "datasets": dataset_digests }),
    };
    manifest.write(&args.out)?;
    Ok(EvolveOutput { report, manifest })
}

// ---------------------------------------------------------------- explain

#[derive(Args, Clone, Debug)]
pub struct ExplainArgs {
    /// File with one program per line; `;` starts a comment.
    #[arg(long)]
    pub program: PathBuf,
    /// Library the program refers to (`fn_k = body` lines).
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Which program of the file to use, 1-based; defaults to the last.
    #[arg(long)]
    pub line: Option<usize>,
    #[arg(long)]
    pub dataset: PathBuf,
    /// Sub-trajectory index within the dataset.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Print an ASCII view of every step.
    #[arg(long)]
    pub render: bool,
    /// Write the explanations as JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepExplanation {
    pub step: usize,
    pub demonstrated: Action,
    pub matches: bool,
    #[serde(flatten)]
    pub explanation: Explanation,
}

/// Explains each step of one sub-trajectory. Returns the explanations and the
/// text destined for stdout.
pub fn cmd_explain(args: &ExplainArgs) -> Result<(Vec<StepExplanation>, String), CliError> {
    let mut g = Grammar::base();
    if let Some(lib) = &args.library {
        load_library(&mut g, &read_file(lib)?)
            .map_err(|(line, e)| CliError::Data(format!("{}:{line}: {e}", lib.display())))?;
    }
    let programs = mazegp::dsl::parse_program_file(&read_file(&args.program)?, &g)
        .map_err(|(line, e)| CliError::Data(format!("{}:{line}: {e}", args.program.display())))?;
    let p = match args.line {
        None => programs.last(),
        Some(k) => k.checked_sub(1).and_then(|i| programs.get(i)),
    }
    .ok_or_else(|| CliError::Data(format!("{}: no such program", args.program.display())))?;
    let d = Dataset::from_json(&read_file(&args.dataset)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.dataset.display())))?;
    let tau = d.trajectories.get(args.index).ok_or(CliError::IndexOutOfRange {
        index: args.index,
        len: d.len(),
    })?;
    let mut steps = Vec::new();
    let mut text = String::new();
    for (i, (obs, demonstrated)) in tau.iter().enumerate() {
        let e = explain_decision(&g, p, obs).map_err(|e| CliError::Data(e.to_string()))?;
        if args.render {
            let _ = writeln!(text, "step {i} (demonstrated {demonstrated})");
            text.push_str(&render_ascii(&e, obs));
            text.push('\n');
        }
        steps.push(StepExplanation {
            step: i,
            demonstrated: *demonstrated,
            matches: e.action == *demonstrated,
            explanation: e,
        });
    }
    let json = to_json(&steps);
    match &args.out {
        Some(path) => write_file(path, &json)?,
        None if !args.render => text.push_str(&json),
        None => {}
    }
    Ok((steps, text))
}

// ---------------------------------------------------------------- report

#[derive(Args, Clone, Debug)]
pub struct ReportArgs {
    /// Run directories (or report.json files).
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,
    /// Second set of runs; the output is `runs - diff` per length.
    #[arg(long, num_args = 1..)]
    pub diff: Option<Vec<PathBuf>>,
    /// Long-format CSV instead of a table.
    #[arg(long)]
    pub csv: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn read_report(path: &Path) -> Result<RunReport, CliError> {
    let file = if path.is_dir() { path.join("report.json") } else { path.to_path_buf() };
    let rf: ReportFile = serde_json::from_str(&read_file(&file)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", file.display())))?;
    Ok(rf.report)
}

fn read_reports(paths: &[PathBuf]) -> Result<Vec<RunReport>, CliError> {
    paths.iter().map(|p| read_report(p)).collect()
}

pub fn cmd_report(args: &ReportArgs) -> Result<String, CliError> {
    let empty = |e: mazegp::explain::ExplainError| CliError::Data(e.to_string());
    let a = accuracy_report(&read_reports(&args.runs)?).map_err(empty)?;
    let text = match &args.diff {
        None if args.csv => a.to_csv(),
        None => a.to_text(),
        Some(other) => {
            let b = accuracy_report(&read_reports(other)?).map_err(empty)?;
            let d = diff_reports(&a, &b);
            if args.csv {
                d.to_csv()
            } else {
                d.to_text()
            }
        }
    };
    if let Some(path) = &args.out {
        write_file(path, &text)?;
    }
    Ok(text)
}
