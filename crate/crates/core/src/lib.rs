//! Self-play training for small board games with warm-start search
//! enhancements.
//!
//! The crate covers the whole loop: rule engines ([`game`]), network-guided
//! tree search ([`mcts`]) with rollout and RAVE enhancements
//! ([`warmstart`]), a small policy/value network ([`nn`]), the three-stage
//! self-play pipeline ([`pipeline`]), a rolling-horizon evolutionary player
//! ([`rhea`]) and match play with Elo rating ([`eval`]).

pub mod config;
pub mod error;
pub mod eval;
pub mod export;
pub mod game;
pub mod mcts;
pub mod nn;
pub mod pipeline;
pub mod rhea;
pub mod rng;
pub mod warmstart;

pub use error::{Error, Result};
pub use game::{GameKind, GameState, Move, Outcome, Player};
pub use mcts::{SearchConfig, SearchTree, Searcher};
pub use warmstart::EnhancementKind;
