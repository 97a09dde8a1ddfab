//! Run configuration: a flat `key=value` file whose keys are the usual
//! hyperparameter names, with command-line overrides on top.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::game::{GameKind, GameState};
use crate::mcts::SearchConfig;
use crate::nn::TrainConfig;
use crate::warmstart::EnhancementKind;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub game: GameKind,
    pub board_size: usize,
    pub win_length: usize,
    /// `I`: training iterations.
    pub iterations: usize,
    /// `I'`: iterations that use the warm-start enhancement.
    pub iteration_threshold: usize,
    /// `E`: self-play episodes per iteration.
    pub episodes: usize,
    /// `T'`: moves sampled from the search policy before switching to argmax.
    pub step_threshold: usize,
    /// `m`
    pub simulations: usize,
    /// `c`
    pub c_puct: f64,
    /// `rs`: iterations of examples kept for retraining.
    pub retrain_iterations: usize,
    /// `ep`
    pub epochs: usize,
    /// `bs`
    pub batch_size: usize,
    /// `lr`
    pub learning_rate: f64,
    /// `d`
    pub dropout: f64,
    /// `n`: arena games per iteration.
    pub arena_games: usize,
    /// `u`: fraction of decisive arena games the candidate must exceed.
    pub update_threshold: f64,
    pub enhancement: EnhancementKind,
    pub seed: u64,
    pub workers: usize,
    pub symmetry: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            game: GameKind::Gobang,
            board_size: 6,
            win_length: 4,
            iterations: 100,
            iteration_threshold: 5,
            episodes: 50,
            step_threshold: 15,
            simulations: 100,
            c_puct: 1.0,
            retrain_iterations: 20,
            epochs: 10,
            batch_size: 64,
            learning_rate: 0.005,
            dropout: 0.3,
            arena_games: 40,
            update_threshold: 0.6,
            enhancement: EnhancementKind::Baseline,
            seed: 0,
            workers: 1,
            symmetry: false,
        }
    }
}

/// Every accepted key with a one-line description, in snapshot order.
pub const KEYS: [(&str, &str); 21] = [
    ("game", "game: othello, connect4 or gobang"),
    ("board_size", "board side length"),
    ("win_length", "stones in a row needed to win (connect4, gobang)"),
    ("I", "number of training iterations"),
    ("Iprime", "iteration threshold: enhancements are active for i < Iprime"),
    ("E", "self-play episodes per iteration"),
    ("Tprime", "step threshold: sample from pi up to this move, argmax after"),
    ("m", "MCTS simulations per move"),
    ("c", "exploration weight in P-UCT"),
    ("rs", "number of retrain iterations kept in the replay buffer"),
    ("ep", "training epochs per iteration"),
    ("bs", "minibatch size"),
    ("lr", "learning rate"),
    ("d", "dropout probability"),
    ("n", "arena comparison games per iteration"),
    ("u", "update threshold on the arena win fraction"),
    ("enhancement", "baseline, rollout, rave, rora, wro or wrora"),
    ("seed", "master random seed"),
    ("workers", "worker threads for episodes and matches"),
    ("symmetry", "augment examples with board symmetries (true/false)"),
    ("output_dir", "run directory"),
];

/// Keys that do not change results and are left out of the config hash.
const UNHASHED: [&str; 2] = ["workers", "output_dir"];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pipeline: PipelineConfig::default(),
            output_dir: PathBuf::from("runs/default"),
        }
    }
}

fn range_err(key: &str, value: &str, expected: &str) -> Error {
    Error::Range {
        key: key.to_string(),
        value: value.to_string(),
        expected: expected.to_string(),
    }
}

fn parse_count(key: &str, value: &str, min: usize) -> Result<usize> {
    match value.trim().parse::<usize>() {
        Ok(v) if v >= min => Ok(v),
        _ => Err(range_err(key, value, &format!("an integer >= {min}"))),
    }
}

fn parse_real(key: &str, value: &str, ok: impl Fn(f64) -> bool, expected: &str) -> Result<f64> {
    match value.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && ok(v) => Ok(v),
        _ => Err(range_err(key, value, expected)),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.pipeline;
        match key {
            "game" => p.game = value.parse()?,
            "board_size" => p.board_size = parse_count(key, value, 1)?,
            "win_length" => p.win_length = parse_count(key, value, 1)?,
            "I" => p.iterations = parse_count(key, value, 1)?,
            "Iprime" => p.iteration_threshold = parse_count(key, value, 0)?,
            "E" => p.episodes = parse_count(key, value, 1)?,
            "Tprime" => p.step_threshold = parse_count(key, value, 0)?,
            "m" => p.simulations = parse_count(key, value, 1)?,
            "c" => p.c_puct = parse_real(key, value, |v| v > 0.0, "a real > 0")?,
            "rs" => p.retrain_iterations = parse_count(key, value, 1)?,
            "ep" => p.epochs = parse_count(key, value, 0)?,
            "bs" => p.batch_size = parse_count(key, value, 1)?,
            "lr" => p.learning_rate = parse_real(key, value, |v| v > 0.0, "a real > 0")?,
            "d" => p.dropout = parse_real(key, value, |v| (0.0..1.0).contains(&v), "a fraction in [0, 1)")?,
            "n" => p.arena_games = parse_count(key, value, 1)?,
            "u" => p.update_threshold = parse_real(key, value, |v| (0.0..=1.0).contains(&v), "a fraction in [0, 1]")?,
            "enhancement" => p.enhancement = value.parse()?,
            "seed" => {
                p.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| range_err(key, value, "a non-negative 64-bit integer"))?
            }
            "workers" => p.workers = parse_count(key, value, 1)?,
            "symmetry" => {
                p.symmetry = match value.trim().to_ascii_lowercase().as_str() {
                    "true" | "1" | "yes" | "on" => true,
                    "false" | "0" | "no" | "off" => false,
                    _ => return Err(range_err(key, value, "true or false")),
                }
            }
            "output_dir" => self.output_dir = PathBuf::from(value.trim()),
            _ => {
                return Err(Error::Config(format!(
                    "unknown key `{key}` (known keys: {})",
                    KEYS.map(|(k, _)| k).join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let p = &self.pipeline;
        Some(match key {
            "game" => p.game.to_string(),
            "board_size" => p.board_size.to_string(),
            "win_length" => p.win_length.to_string(),
            "I" => p.iterations.to_string(),
            "Iprime" => p.iteration_threshold.to_string(),
            "E" => p.episodes.to_string(),
            "Tprime" => p.step_threshold.to_string(),
            "m" => p.simulations.to_string(),
            "c" => p.c_puct.to_string(),
            "rs" => p.retrain_iterations.to_string(),
            "ep" => p.epochs.to_string(),
            "bs" => p.batch_size.to_string(),
            "lr" => p.learning_rate.to_string(),
            "d" => p.dropout.to_string(),
            "n" => p.arena_games.to_string(),
            "u" => p.update_threshold.to_string(),
            "enhancement" => p.enhancement.to_string(),
            "seed" => p.seed.to_string(),
            "workers" => p.workers.to_string(),
            "symmetry" => p.symmetry.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            _ => return None,
        })
    }

    /// Applies `key=value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Checks the combination of values (board geometry in particular).
    pub fn validate(&self) -> Result<()> {
        let p = &self.pipeline;
        GameState::new(p.game, p.board_size, p.win_length)?;
        Ok(())
    }

    pub fn snapshot(&self) -> String {
        let mut s = String::new();
        for (k, _) in KEYS {
            let _ = writeln!(s, "{k}={}", self.get(k).expect("known key"));
        }
        s
    }

    /// Digest of every result-relevant key.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, _) in KEYS {
            if !UNHASHED.contains(&k) {
                h.update(format!("{k}={}\n", self.get(k).expect("known key")));
            }
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Defaults, then the file (if any), then the overrides, in that order of
/// increasing precedence.
pub fn parse_config(file: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_text(&text)?;
    }
    for (k, v) in overrides {
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

impl PipelineConfig {
    pub fn search(&self) -> SearchConfig {
        SearchConfig {
            simulations: self.simulations,
            c_puct: self.c_puct,
        }
    }

    pub fn train(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            dropout: self.dropout,
        }
    }

    pub fn initial_state(&self) -> Result<GameState> {
        GameState::new(self.game, self.board_size, self.win_length)
    }
}
