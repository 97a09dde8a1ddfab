//! The self-play training loop: episode generation, training and arena
//! gating, with a resumable run directory.
//!
//! Run directory layout:
//!
//! ```text
//! config.snapshot            key=value lines plus `hash=<hex>`
//! checkpoints/iter_<k>.ckpt  incumbent after iteration k
//! buffer/iter_<k>.examples   examples generated in iteration k
//! reports.csv                one row per finished iteration
//! timings.csv                wall-clock seconds per iteration
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, RunConfig};
use crate::error::{Error, Result};
use crate::game::{symmetries, GameState, Move, Outcome, Player};
use crate::mcts::{argmax, Evaluator, SearchTree, Searcher};
use crate::nn::{
    load_checkpoint, read_examples, save_checkpoint, train, write_examples, Model, NetShape, ReplayBuffer,
    TrainingExample,
};
use crate::rng::substream;
use crate::warmstart::searcher_for_iteration;

/// Picks the move to play from a search policy: sampled while `ply` is
/// below `step_threshold`, argmax afterwards.
pub fn choose_from_policy<R: Rng + ?Sized>(pi: &[f64], ply: usize, step_threshold: usize, rng: &mut R) -> Move {
    if ply < step_threshold {
        if let Ok(dist) = WeightedIndex::new(pi) {
            return Move::new(dist.sample(rng));
        }
    }
    Move::new(argmax(pi))
}

/// Plays one self-play game and labels every position with the final result
/// from its mover's perspective.
pub fn run_episode<E, R>(
    searcher: &Searcher,
    model: &E,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<Vec<TrainingExample>>
where
    E: Evaluator + ?Sized,
    R: Rng + ?Sized,
{
    let mut state = cfg.initial_state()?;
    let mut tree = SearchTree::new();
    let mut history: Vec<(GameState, Vec<f64>)> = Vec::new();
    while !state.is_terminal() {
        let pi = searcher.search(&state, &mut tree, model, rng)?;
        let mv = choose_from_policy(&pi, state.plies(), cfg.step_threshold, rng);
        history.push((state, pi));
        state = state.apply_move(mv)?;
    }
    let outcome = state.outcome();
    let mut out = Vec::new();
    for (s, pi) in history {
        let z = outcome.value_for(s.to_move()) as f32;
        let enc = s.encode();
        if cfg.symmetry {
            for (e, p) in symmetries(s.kind(), &enc, &pi) {
                out.push(example(e, &p, z));
            }
        } else {
            out.push(example(enc, &pi, z));
        }
    }
    Ok(out)
}

fn example(encoding: crate::game::StateEncoding, pi: &[f64], z: f32) -> TrainingExample {
    TrainingExample {
        encoding,
        pi: pi.iter().map(|&p| p as f32).collect(),
        z,
    }
}

/// Plays one game between two networks, each searching with plain MCTS and
/// its own tree. Returns the outcome.
pub fn play_network_game<R: Rng + ?Sized>(
    first: &Model,
    second: &Model,
    cfg: &PipelineConfig,
    rng: &mut R,
) -> Result<Outcome> {
    let searcher = Searcher::plain(cfg.search());
    let mut trees = [SearchTree::new(), SearchTree::new()];
    let mut state = cfg.initial_state()?;
    while !state.is_terminal() {
        let (model, tree) = match state.to_move() {
            Player::First => (first, &mut trees[0]),
            Player::Second => (second, &mut trees[1]),
        };
        let pi = searcher.search(&state, tree, model, rng)?;
        let mv = choose_from_policy(&pi, state.plies(), cfg.step_threshold, rng);
        state = state.apply_move(mv)?;
    }
    Ok(state.outcome())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArenaRecord {
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
}

impl ArenaRecord {
    /// Candidate is accepted iff it won more than `u` of the decisive games.
    pub fn accepts(&self, update_threshold: f64) -> bool {
        let decisive = self.wins + self.losses;
        decisive > 0 && self.wins as f64 / decisive as f64 > update_threshold
    }
}

/// `n` games of candidate against incumbent with alternating colours; the
/// candidate moves first in even games.
pub fn arena_compare(
    candidate: &Model,
    incumbent: &Model,
    cfg: &PipelineConfig,
    iteration: usize,
) -> Result<(bool, ArenaRecord)> {
    if candidate.shape() != incumbent.shape() {
        return Err(Error::Shape("arena models differ in architecture".into()));
    }
    let outcomes: Vec<Result<Outcome>> = with_pool(cfg.workers, || {
        (0..cfg.arena_games)
            .into_par_iter()
            .map(|g| {
                let mut rng = substream(cfg.seed, "arena", &[iteration as u64, g as u64]);
                if g % 2 == 0 {
                    play_network_game(candidate, incumbent, cfg, &mut rng)
                } else {
                    play_network_game(incumbent, candidate, cfg, &mut rng).map(|o| match o {
                        Outcome::Win(p) => Outcome::Win(-p),
                        other => other,
                    })
                }
            })
            .collect()
    })?;
    let mut rec = ArenaRecord::default();
    for o in outcomes {
        match o? {
            Outcome::Win(Player::First) => rec.wins += 1,
            Outcome::Win(Player::Second) => rec.losses += 1,
            _ => rec.draws += 1,
        }
    }
    Ok((rec.accepts(cfg.update_threshold), rec))
}

pub(crate) fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationReport {
    pub iteration: usize,
    pub examples: usize,
    pub epoch_losses: Vec<f64>,
    pub arena: ArenaRecord,
    pub accepted: bool,
    pub seconds: f64,
}

impl IterationReport {
    pub fn mean_loss(&self) -> f64 {
        if self.epoch_losses.is_empty() {
            return f64::NAN;
        }
        self.epoch_losses.iter().sum::<f64>() / self.epoch_losses.len() as f64
    }
}

/// One line of `reports.csv`. Wall time lives in `timings.csv` so that the
/// report stays byte-identical between repeated seeded runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub i: usize,
    pub examples: usize,
    pub mean_loss: f64,
    pub arena_w: usize,
    pub arena_d: usize,
    pub arena_l: usize,
    pub accepted: bool,
}

impl From<&IterationReport> for ReportRow {
    fn from(r: &IterationReport) -> Self {
        ReportRow {
            i: r.iteration,
            examples: r.examples,
            mean_loss: r.mean_loss(),
            arena_w: r.arena.wins,
            arena_d: r.arena.draws,
            arena_l: r.arena.losses,
            accepted: r.accepted,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TimingRow {
    i: usize,
    seconds: f64,
}

/// Mutable state carried between iterations.
pub struct PipelineState {
    pub config: PipelineConfig,
    pub incumbent: Model,
    pub buffer: ReplayBuffer,
    pub run_dir: Option<PathBuf>,
}

impl PipelineState {
    pub fn new(config: PipelineConfig, shape: NetShape) -> Self {
        let incumbent = Model::new(shape, &mut substream(config.seed, "init", &[]));
        PipelineState {
            buffer: ReplayBuffer::new(config.retrain_iterations),
            config,
            incumbent,
            run_dir: None,
        }
    }
}

/// Self-play, training and arena for iteration `i`. The incumbent is only
/// replaced when the arena accepts the candidate.
pub fn run_iteration(state: &mut PipelineState, i: usize) -> Result<IterationReport> {
    let start = Instant::now();
    let cfg = state.config.clone();
    let searcher = searcher_for_iteration(cfg.enhancement, i, cfg.iteration_threshold, cfg.search())?;
    let incumbent = &state.incumbent;
    let episodes: Vec<Result<Vec<TrainingExample>>> = with_pool(cfg.workers, || {
        (0..cfg.episodes)
            .into_par_iter()
            .map(|e| {
                let mut rng = substream(cfg.seed, "episode", &[i as u64, e as u64]);
                run_episode(&searcher, incumbent, &cfg, &mut rng)
            })
            .collect()
    })?;
    let mut examples = Vec::new();
    for ep in episodes {
        examples.extend(ep?);
    }
    let count = examples.len();
    if let Some(dir) = &state.run_dir {
        let path = dir.join("buffer").join(format!("iter_{i}.examples"));
        write_examples(&path, cfg.game, cfg.board_size, &examples)?;
    }
    state.buffer.append(examples);

    let mut rng = substream(cfg.seed, "train", &[i as u64]);
    let trained = train(&state.incumbent, &state.buffer, &cfg.train(), &mut rng)?;
    let (accepted, arena) = arena_compare(&trained.model, &state.incumbent, &cfg, i)?;
    if accepted {
        state.incumbent = trained.model;
    }
    Ok(IterationReport {
        iteration: i,
        examples: count,
        epoch_losses: trained.epoch_losses,
        arena,
        accepted,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Knobs for [`train_loop`] that do not belong in the run config.
#[derive(Clone, Copy, Debug, Default)]
pub struct LoopOptions {
    /// Stop once this many iterations are finished, as if interrupted.
    pub stop_after: Option<usize>,
    /// Network widths; defaults to the standard architecture.
    pub shape: Option<NetShape>,
}

#[derive(Debug)]
pub struct TrainRun {
    pub model: Model,
    /// Reports of the iterations executed by this call.
    pub reports: Vec<IterationReport>,
    /// Number of iterations already finished when the call started.
    pub resumed_at: usize,
}

fn snapshot_text(cfg: &RunConfig) -> String {
    format!("{}hash={}\n", cfg.snapshot(), cfg.hash())
}

fn stored_hash(text: &str) -> Option<&str> {
    text.lines().find_map(|l| l.strip_prefix("hash="))
}

pub fn read_reports(path: &Path) -> Result<Vec<ReportRow>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    rd.deserialize().map(|r| r.map_err(|e| Error::csv(path, e))).collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs (or resumes) all `I` iterations in `cfg.output_dir`.
pub fn train_loop(cfg: &RunConfig, opts: LoopOptions) -> Result<TrainRun> {
    cfg.validate()?;
    let p = &cfg.pipeline;
    let dir = cfg.output_dir.clone();
    let shape = opts.shape.unwrap_or_else(|| NetShape::new(p.game, p.board_size));
    for sub in ["checkpoints", "buffer"] {
        fs::create_dir_all(dir.join(sub)).map_err(|e| Error::io(dir.join(sub), e))?;
    }
    let snap_path = dir.join("config.snapshot");
    let reports_path = dir.join("reports.csv");
    let timings_path = dir.join("timings.csv");

    let mut state = PipelineState::new(p.clone(), shape);
    state.run_dir = Some(dir.clone());
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut timings: Vec<TimingRow> = Vec::new();
    let mut done = 0;

    if snap_path.exists() {
        let text = fs::read_to_string(&snap_path).map_err(|e| Error::io(&snap_path, e))?;
        let found = stored_hash(&text).unwrap_or("").to_string();
        if found != cfg.hash() {
            return Err(Error::ConfigMismatch {
                dir,
                found,
                expected: cfg.hash(),
            });
        }
        if reports_path.exists() {
            rows = read_reports(&reports_path)?;
        }
        // Only iterations with both a report row and a checkpoint count.
        while done < rows.len()
            && rows[done].i == done
            && dir.join("checkpoints").join(format!("iter_{done}.ckpt")).exists()
        {
            done += 1;
        }
        rows.truncate(done);
        if timings_path.exists() {
            let mut rd = csv::Reader::from_path(&timings_path).map_err(|e| Error::csv(&timings_path, e))?;
            for t in rd.deserialize::<TimingRow>() {
                let t = t.map_err(|e| Error::csv(&timings_path, e))?;
                if t.i < done {
                    timings.push(t);
                }
            }
        }
        if done > 0 {
            let last = dir.join("checkpoints").join(format!("iter_{}.ckpt", done - 1));
            state.incumbent = load_checkpoint(&last, Some(&shape))?;
            for j in done.saturating_sub(p.retrain_iterations)..done {
                let path = dir.join("buffer").join(format!("iter_{j}.examples"));
                state.buffer.append(read_examples(&path, p.game, p.board_size)?);
            }
        }
    }
    fs::write(&snap_path, snapshot_text(cfg)).map_err(|e| Error::io(&snap_path, e))?;
    write_rows(&reports_path, &rows)?;
    write_rows(&timings_path, &timings)?;

    let resumed_at = done;
    let last = opts.stop_after.map_or(p.iterations, |s| s.min(p.iterations));
    let mut reports = Vec::new();
    for i in done..last {
        let report = run_iteration(&mut state, i)?;
        save_checkpoint(
            &state.incumbent,
            &dir.join("checkpoints").join(format!("iter_{i}.ckpt")),
        )?;
        rows.push(ReportRow::from(&report));
        timings.push(TimingRow {
            i,
            seconds: report.seconds,
        });
        write_rows(&reports_path, &rows)?;
        write_rows(&timings_path, &timings)?;
        reports.push(report);
    }
    Ok(TrainRun {
        model: state.incumbent,
        reports,
        resumed_at,
    })
}
