//! Warm-start search enhancements.
//!
//! During the first `I'` training iterations the self-play search can swap
//! or mix the network's leaf value with random-rollout returns and can blend
//! AMAF ("all moves as first") statistics into child selection. From
//! iteration `I'` on, every kind falls back to the plain search.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{GameState, Move, StateKey};
use crate::mcts::{puct_value, SearchConfig, SearchTree, Searcher, SelectionMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnhancementKind {
    Baseline,
    Rollout,
    Rave,
    RoRa,
    WRo,
    WRoRa,
}

impl EnhancementKind {
    pub const ALL: [EnhancementKind; 6] = [
        EnhancementKind::Baseline,
        EnhancementKind::Rollout,
        EnhancementKind::Rave,
        EnhancementKind::RoRa,
        EnhancementKind::WRo,
        EnhancementKind::WRoRa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnhancementKind::Baseline => "Baseline",
            EnhancementKind::Rollout => "Rollout",
            EnhancementKind::Rave => "Rave",
            EnhancementKind::RoRa => "RoRa",
            EnhancementKind::WRo => "WRo",
            EnhancementKind::WRoRa => "WRoRa",
        }
    }

    pub fn uses_rave(self) -> bool {
        matches!(
            self,
            EnhancementKind::Rave | EnhancementKind::RoRa | EnhancementKind::WRoRa
        )
    }

    pub fn uses_rollout(self) -> bool {
        matches!(
            self,
            EnhancementKind::Rollout | EnhancementKind::RoRa | EnhancementKind::WRo | EnhancementKind::WRoRa
        )
    }
}

impl fmt::Display for EnhancementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnhancementKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnhancementKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown enhancement `{s}` (expected one of baseline, rollout, rave, rora, wro, wrora)"
                ))
            })
    }
}

/// `sqrt(equivalence / (3 * N_total + equivalence))`
pub fn rave_beta(n_total: u32, equivalence: f64) -> f64 {
    (equivalence / (3.0 * n_total as f64 + equivalence)).sqrt()
}

/// `(1 - beta) * u + beta * u_rave`
pub fn blend(u: f64, u_rave: f64, beta: f64) -> f64 {
    (1.0 - beta) * u + beta * u_rave
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlainArm {
    pub q: f64,
    pub prior: f64,
    pub n_total: u32,
    pub n: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaveArm {
    pub q: f64,
    pub n_total: u32,
    pub n: u32,
}

/// RAVE selection score. `U_rave` reuses the P-UCT form with the AMAF
/// counts; `beta` is driven by the plain visit total.
pub fn uct_rave_value(plain: PlainArm, rave: RaveArm, c: f64, equivalence: f64) -> f64 {
    let u = puct_value(plain.q, plain.prior, plain.n_total, plain.n, c);
    let u_rave = puct_value(rave.q, plain.prior, rave.n_total, rave.n, c);
    blend(u, u_rave, rave_beta(plain.n_total, equivalence))
}

/// `1 - i / I'`, defined for `0 <= i <= I'`.
pub fn schedule_weight(iteration: usize, iteration_threshold: usize) -> Result<f64> {
    if iteration_threshold == 0 {
        return Err(Error::Config("iteration threshold must be >= 1".into()));
    }
    if iteration > iteration_threshold {
        return Err(Error::Config(format!(
            "iteration {iteration} is past the warm-start threshold {iteration_threshold}"
        )));
    }
    Ok(1.0 - iteration as f64 / iteration_threshold as f64)
}

/// Uniformly random playout to the end of the game. Returns the result for
/// the side to move in `state`.
pub fn random_rollout<R: Rng + ?Sized>(state: &GameState, rng: &mut R) -> f64 {
    let mut moves = Vec::new();
    rollout_recording(state, rng, &mut moves)
}

fn rollout_recording<R: Rng + ?Sized>(state: &GameState, rng: &mut R, moves: &mut Vec<Move>) -> f64 {
    let end = state.random_playout(rng, moves);
    end.outcome().value_for(state.to_move())
}

/// Leaf value for one enhancement kind. `weight` only matters for the
/// weighted kinds.
pub fn leaf_value<R: Rng + ?Sized>(
    kind: EnhancementKind,
    state: &GameState,
    network_value: f64,
    rng: &mut R,
    weight: f64,
) -> f64 {
    let strategy = SearchStrategy {
        kind,
        weight,
        equivalence: 1.0,
    };
    strategy.leaf_value(state, network_value, rng, &mut Vec::new())
}

/// Selection, leaf-evaluation and policy-extraction rules of one searcher.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchStrategy {
    pub kind: EnhancementKind,
    /// Network/rollout mixing weight for WRo and WRoRa.
    pub weight: f64,
    /// RAVE equivalence parameter.
    pub equivalence: f64,
}

impl SearchStrategy {
    pub fn baseline(equivalence: f64) -> Self {
        SearchStrategy {
            kind: EnhancementKind::Baseline,
            weight: 0.0,
            equivalence,
        }
    }

    pub fn selection(&self) -> SelectionMode {
        if self.kind.uses_rave() {
            SelectionMode::Rave {
                equivalence: self.equivalence,
            }
        } else {
            SelectionMode::Plain
        }
    }

    pub fn uses_amaf(&self) -> bool {
        self.kind.uses_rave()
    }

    pub fn policy_from_rave(&self) -> bool {
        self.kind.uses_rave()
    }

    /// Value returned from a freshly expanded leaf. Rollout moves are
    /// appended to `moves` so AMAF can see them.
    pub fn leaf_value<R: Rng + ?Sized>(
        &self,
        state: &GameState,
        network_value: f64,
        rng: &mut R,
        moves: &mut Vec<Move>,
    ) -> f64 {
        match self.kind {
            EnhancementKind::Baseline | EnhancementKind::Rave => network_value,
            EnhancementKind::Rollout | EnhancementKind::RoRa => rollout_recording(state, rng, moves),
            EnhancementKind::WRo | EnhancementKind::WRoRa => {
                let rollout = rollout_recording(state, rng, moves);
                (1.0 - self.weight) * network_value + self.weight * rollout
            }
        }
    }
}

/// AMAF update after one simulation.
///
/// `path` holds the positions where a move was selected (root first) and
/// `actions` every move of the simulation, tree moves first and rollout moves
/// after, so `actions[t]` is the move played from `path[t]`. For each path
/// position, every move that the same player makes at or after that step and
/// that is legal there is credited once, at its first occurrence, with the
/// simulation value seen from that position. Opponent moves are skipped:
/// crediting them with our value mixes up the two sides' statistics.
pub fn amaf_backup(tree: &mut SearchTree, path: &[(StateKey, Move)], actions: &[Move], leaf_value: f64) {
    let width = actions.iter().map(|m| m.index() + 1).max().unwrap_or(0);
    let mut seen = vec![false; width];
    for (t1, (key, _)) in path.iter().enumerate() {
        let sign = if (path.len() - t1) % 2 == 1 { -1.0 } else { 1.0 };
        let v = sign * leaf_value;
        let node = tree.get_mut(key).expect("path node in tree");
        seen.iter_mut().for_each(|s| *s = false);
        for mv in actions[t1..].iter().step_by(2) {
            if std::mem::replace(&mut seen[mv.index()], true) {
                continue;
            }
            if let Some(slot) = node.slot(*mv) {
                node.update_rave(slot, v);
            }
        }
    }
}

/// Searcher for an enhancement that is still active at `iteration`.
pub fn make_enhanced_searcher(
    kind: EnhancementKind,
    iteration: usize,
    iteration_threshold: usize,
    config: SearchConfig,
) -> Result<Searcher> {
    config.validate()?;
    if kind == EnhancementKind::Baseline {
        return Ok(Searcher::plain(config));
    }
    if iteration >= iteration_threshold {
        return Err(Error::Config(format!(
            "{kind} is only active before iteration {iteration_threshold}, requested at {iteration}"
        )));
    }
    Ok(Searcher {
        config,
        strategy: SearchStrategy {
            kind,
            weight: schedule_weight(iteration, iteration_threshold)?,
            equivalence: config.simulations as f64,
        },
    })
}

/// Self-play searcher for `iteration`: the enhancement before the threshold,
/// plain search from the threshold on.
pub fn searcher_for_iteration(
    kind: EnhancementKind,
    iteration: usize,
    iteration_threshold: usize,
    config: SearchConfig,
) -> Result<Searcher> {
    if iteration >= iteration_threshold {
        config.validate()?;
        Ok(Searcher::plain(config))
    } else {
        make_enhanced_searcher(kind, iteration, iteration_threshold, config)
    }
}
