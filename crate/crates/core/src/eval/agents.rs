//! Players that can take part in matches.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::game::{GameKind, GameState, Move};
use crate::mcts::{SearchConfig, SearchTree, Searcher, UniformEvaluator};
use crate::nn::{load_checkpoint, Model, NetShape};
use crate::pipeline::choose_from_policy;
use crate::rhea::{self, RheaConfig};
use crate::rng::StreamRng;
use crate::warmstart::{EnhancementKind, SearchStrategy};

pub const DEFAULT_SIMULATIONS: usize = 100;

/// What an agent is, as written on the command line and in CSV files:
/// `random`, `mcts[:m]`, `rave[:m]`, `rhea`, or `nn:<checkpoint>[@m]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentSpec {
    Random,
    /// MCTS with uniform priors and random-rollout leaf values.
    Mcts {
        simulations: usize,
    },
    /// As `Mcts`, with RAVE statistics.
    Rave {
        simulations: usize,
    },
    Rhea,
    /// Plain MCTS guided by a trained network.
    Neural {
        checkpoint: PathBuf,
        simulations: usize,
    },
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let with_m = |f: &mut fmt::Formatter<'_>, name: &str, m: usize| {
            if m == DEFAULT_SIMULATIONS {
                write!(f, "{name}")
            } else {
                write!(f, "{name}:{m}")
            }
        };
        match self {
            AgentSpec::Random => write!(f, "random"),
            AgentSpec::Mcts { simulations } => with_m(f, "mcts", *simulations),
            AgentSpec::Rave { simulations } => with_m(f, "rave", *simulations),
            AgentSpec::Rhea => write!(f, "rhea"),
            AgentSpec::Neural {
                checkpoint,
                simulations,
            } => {
                write!(f, "nn:{}", checkpoint.display())?;
                if *simulations != DEFAULT_SIMULATIONS {
                    write!(f, "@{simulations}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_sims(text: &str, s: &str) -> Result<usize> {
    match s.parse::<usize>() {
        Ok(m) if m > 0 => Ok(m),
        _ => Err(Error::Config(format!("bad simulation count in agent `{text}`"))),
    }
}

impl FromStr for AgentSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(path) = t.strip_prefix("nn:") {
            let (path, simulations) = match path.rsplit_once('@') {
                Some((p, m)) => (p, parse_sims(text, m)?),
                None => (path, DEFAULT_SIMULATIONS),
            };
            if path.is_empty() {
                return Err(Error::Config(format!("agent `{text}` names no checkpoint")));
            }
            return Ok(AgentSpec::Neural {
                checkpoint: PathBuf::from(path),
                simulations,
            });
        }
        let (name, m) = match t.split_once(':') {
            Some((n, m)) => (n, Some(m)),
            None => (t, None),
        };
        let simulations = m
            .map(|m| parse_sims(text, m))
            .transpose()?
            .unwrap_or(DEFAULT_SIMULATIONS);
        match (name.to_ascii_lowercase().as_str(), m) {
            ("random", None) => Ok(AgentSpec::Random),
            ("rhea", None) => Ok(AgentSpec::Rhea),
            ("mcts", _) => Ok(AgentSpec::Mcts { simulations }),
            ("rave", _) => Ok(AgentSpec::Rave { simulations }),
            _ => Err(Error::Config(format!(
                "unknown agent `{text}` (expected random, mcts[:m], rave[:m], rhea or nn:<checkpoint>[@m])"
            ))),
        }
    }
}

/// Board geometry and move-selection settings shared by both sides of a match.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameSetup {
    pub game: GameKind,
    pub board_size: usize,
    pub win_length: usize,
    pub c_puct: f64,
    /// Network agents sample from the search policy before this ply.
    pub step_threshold: usize,
}

impl GameSetup {
    pub fn new(game: GameKind) -> Self {
        GameSetup {
            game,
            board_size: 6,
            win_length: 4,
            c_puct: 1.0,
            step_threshold: 15,
        }
    }

    pub fn initial_state(&self) -> Result<GameState> {
        GameState::new(self.game, self.board_size, self.win_length)
    }
}

/// A spec with its checkpoint (if any) loaded, ready to hand out players.
#[derive(Clone, Debug)]
pub struct PreparedAgent {
    pub spec: AgentSpec,
    model: Option<Arc<Model>>,
}

impl PreparedAgent {
    pub fn new(spec: AgentSpec, setup: &GameSetup) -> Result<Self> {
        let model = match &spec {
            AgentSpec::Neural { checkpoint, .. } => {
                let shape = NetShape::new(setup.game, setup.board_size);
                Some(Arc::new(load_checkpoint(checkpoint, Some(&shape))?))
            }
            _ => None,
        };
        Ok(PreparedAgent { spec, model })
    }

    /// Wraps an in-memory model as a network agent.
    pub fn from_model(model: Model, simulations: usize, label: &str) -> Self {
        PreparedAgent {
            spec: AgentSpec::Neural {
                checkpoint: PathBuf::from(label),
                simulations,
            },
            model: Some(Arc::new(model)),
        }
    }

    /// A fresh player for one game.
    pub fn player(&self, setup: &GameSetup) -> Box<dyn Agent> {
        let rollout_searcher = |kind, m: usize| Searcher {
            config: SearchConfig {
                simulations: m,
                c_puct: setup.c_puct,
            },
            strategy: SearchStrategy {
                kind,
                weight: 1.0,
                equivalence: m as f64,
            },
        };
        match &self.spec {
            AgentSpec::Random => Box::new(RandomAgent),
            AgentSpec::Mcts { simulations } => Box::new(RolloutMctsAgent {
                searcher: rollout_searcher(EnhancementKind::Rollout, *simulations),
                tree: SearchTree::new(),
            }),
            AgentSpec::Rave { simulations } => Box::new(RolloutMctsAgent {
                searcher: rollout_searcher(EnhancementKind::RoRa, *simulations),
                tree: SearchTree::new(),
            }),
            AgentSpec::Rhea => Box::new(RheaAgent(RheaConfig::default())),
            AgentSpec::Neural { simulations, .. } => Box::new(NeuralAgent {
                model: Arc::clone(self.model.as_ref().expect("network agent has a model")),
                searcher: Searcher::plain(SearchConfig {
                    simulations: *simulations,
                    c_puct: setup.c_puct,
                }),
                tree: SearchTree::new(),
                step_threshold: setup.step_threshold,
            }),
        }
    }
}

pub trait Agent {
    fn choose(&mut self, state: &GameState, rng: &mut StreamRng) -> Result<Move>;
}

pub struct RandomAgent;

impl Agent for RandomAgent {
    fn choose(&mut self, state: &GameState, rng: &mut StreamRng) -> Result<Move> {
        state.legal_moves().choose(rng).copied().ok_or(Error::TerminalState)
    }
}

/// Slot with the most visits; ties go to the lowest move index.
pub fn most_visited(visits: &[u32]) -> usize {
    let mut best = 0;
    for (i, &n) in visits.iter().enumerate() {
        if n > visits[best] {
            best = i;
        }
    }
    best
}

/// Network-free MCTS that plays its most visited root move and keeps its
/// tree for the whole game.
pub struct RolloutMctsAgent {
    searcher: Searcher,
    tree: SearchTree,
}

impl Agent for RolloutMctsAgent {
    fn choose(&mut self, state: &GameState, rng: &mut StreamRng) -> Result<Move> {
        self.searcher.search(state, &mut self.tree, &UniformEvaluator, rng)?;
        let node = self.tree.get(&state.key()).expect("root expanded by search");
        Ok(node.moves[most_visited(&node.n)])
    }
}

pub struct RheaAgent(pub RheaConfig);

impl Agent for RheaAgent {
    fn choose(&mut self, state: &GameState, rng: &mut StreamRng) -> Result<Move> {
        rhea::choose_move(state, &self.0, rng)
    }
}

pub struct NeuralAgent {
    model: Arc<Model>,
    searcher: Searcher,
    tree: SearchTree,
    step_threshold: usize,
}

impl Agent for NeuralAgent {
    fn choose(&mut self, state: &GameState, rng: &mut StreamRng) -> Result<Move> {
        let pi = self.searcher.search(state, &mut self.tree, &*self.model, rng)?;
        Ok(choose_from_policy(&pi, state.plies(), self.step_threshold, rng))
    }
}
