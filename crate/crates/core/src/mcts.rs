//! Network-guided Monte Carlo tree search.
//!
//! One call to [`Searcher::search`] runs `m` simulations from the root. A
//! simulation walks the tree by P-UCT (or the RAVE blend), expands the first
//! unseen position by asking the evaluator for priors and a value, and backs
//! the value up the path, flipping its sign at every ply because values are
//! always stored from the perspective of the side to move.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{GameState, Move, StateKey};
use crate::warmstart::{self, EnhancementKind, SearchStrategy};

/// Leaf evaluation: priors over the full move space plus a value in [-1, 1]
/// from the perspective of the side to move.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub policy: Vec<f64>,
    pub value: f64,
}

pub trait Evaluator {
    fn evaluate(&self, state: &GameState) -> Result<Evaluation>;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, state: &GameState) -> Result<Evaluation> {
        (**self).evaluate(state)
    }
}

/// Flat priors and a neutral value. Stands in for the network in the
/// network-free search agents.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformEvaluator;

impl Evaluator for UniformEvaluator {
    fn evaluate(&self, state: &GameState) -> Result<Evaluation> {
        let a = state.action_size();
        Ok(Evaluation {
            policy: vec![1.0 / a as f64; a],
            value: 0.0,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    /// Simulations per move (`m`).
    pub simulations: usize,
    /// Exploration weight (`c`).
    pub c_puct: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            simulations: 100,
            c_puct: 1.0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.simulations == 0 {
            return Err(Error::Config("simulations per move must be >= 1".into()));
        }
        if self.c_puct.is_nan() || self.c_puct <= 0.0 {
            return Err(Error::Config("exploration constant must be positive".into()));
        }
        Ok(())
    }
}

/// `Q + c * P * sqrt(N_total) / (N_a + 1)`
pub fn puct_value(q: f64, prior: f64, n_total: u32, n_a: u32, c: f64) -> f64 {
    q + c * prior * (n_total as f64).sqrt() / (n_a as f64 + 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SelectionMode {
    Plain,
    Rave { equivalence: f64 },
}

/// Per-position statistics. Vectors are parallel to `moves`, which is the
/// ascending list of legal moves.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeStats {
    pub moves: Vec<Move>,
    pub prior: Vec<f64>,
    pub q: Vec<f64>,
    pub n: Vec<u32>,
    pub n_total: u32,
    pub q_rave: Vec<f64>,
    pub n_rave: Vec<u32>,
    pub n_rave_total: u32,
}

impl NodeStats {
    /// Masks `raw_prior` (indexed by move) to the legal moves and
    /// renormalizes; falls back to uniform when no legal mass remains.
    pub fn new(moves: Vec<Move>, raw_prior: &[f64]) -> Self {
        let k = moves.len();
        let mut prior: Vec<f64> = moves
            .iter()
            .map(|m| raw_prior.get(m.index()).copied().unwrap_or(0.0).max(0.0))
            .collect();
        let mass: f64 = prior.iter().sum();
        if mass > 0.0 && mass.is_finite() {
            prior.iter_mut().for_each(|p| *p /= mass);
        } else {
            prior.iter_mut().for_each(|p| *p = 1.0 / k as f64);
        }
        NodeStats {
            moves,
            prior,
            q: vec![0.0; k],
            n: vec![0; k],
            n_total: 0,
            q_rave: vec![0.0; k],
            n_rave: vec![0; k],
            n_rave_total: 0,
        }
    }

    pub fn slot(&self, mv: Move) -> Option<usize> {
        self.moves.binary_search(&mv).ok()
    }

    /// Incremental-mean update of the plain statistics.
    pub fn update(&mut self, slot: usize, value: f64) {
        let n = self.n[slot] as f64;
        self.q[slot] = (n * self.q[slot] + value) / (n + 1.0);
        self.n[slot] += 1;
        self.n_total += 1;
    }

    pub fn update_rave(&mut self, slot: usize, value: f64) {
        let n = self.n_rave[slot] as f64;
        self.q_rave[slot] = (n * self.q_rave[slot] + value) / (n + 1.0);
        self.n_rave[slot] += 1;
        self.n_rave_total += 1;
    }

    fn score(&self, slot: usize, mode: SelectionMode, c: f64) -> f64 {
        let plain = warmstart::PlainArm {
            q: self.q[slot],
            prior: self.prior[slot],
            n_total: self.n_total,
            n: self.n[slot],
        };
        match mode {
            SelectionMode::Plain => puct_value(plain.q, plain.prior, plain.n_total, plain.n, c),
            SelectionMode::Rave { equivalence } => warmstart::uct_rave_value(
                plain,
                warmstart::RaveArm {
                    q: self.q_rave[slot],
                    n_total: self.n_rave_total,
                    n: self.n_rave[slot],
                },
                c,
                equivalence,
            ),
        }
    }

    /// Shift-normalized distribution over the legal moves built from Q (or
    /// Q_rave), written into a vector over the full move space.
    pub fn policy(&self, from_rave: bool, action_size: usize) -> Vec<f64> {
        let values = if from_rave { &self.q_rave } else { &self.q };
        normalize_shifted(&self.moves, values, action_size)
    }
}

pub(crate) fn normalize_shifted(moves: &[Move], values: &[f64], action_size: usize) -> Vec<f64> {
    let mut pi = vec![0.0; action_size];
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let total: f64 = values.iter().map(|v| v - min).sum();
    if total > 0.0 {
        for (m, v) in moves.iter().zip(values) {
            pi[m.index()] = (v - min) / total;
        }
    } else {
        let u = 1.0 / moves.len() as f64;
        for m in moves {
            pi[m.index()] = u;
        }
    }
    pi
}

/// Index into `stats.moves` of the best-scoring move; ties go to the lowest
/// move index.
pub fn select_child(stats: &NodeStats, mode: SelectionMode, c: f64) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for slot in 0..stats.moves.len() {
        let s = stats.score(slot, mode, c);
        if s > best_score {
            best = slot;
            best_score = s;
        }
    }
    best
}

/// Statistics for every position reached by a simulation, keyed by the
/// mover-perspective position key.
#[derive(Clone, Debug, Default)]
pub struct SearchTree {
    nodes: HashMap<StateKey, NodeStats>,
}

impl SearchTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &StateKey) -> Option<&NodeStats> {
        self.nodes.get(key)
    }

    pub fn get_mut(&mut self, key: &StateKey) -> Option<&mut NodeStats> {
        self.nodes.get_mut(key)
    }

    pub fn insert(&mut self, key: StateKey, stats: NodeStats) {
        self.nodes.insert(key, stats);
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateKey, &NodeStats)> {
        self.nodes.iter()
    }
}

/// Plain-statistics backup along `path`. `leaf_value` is from the
/// perspective of the position after the last step; each step up flips it.
pub fn backup(tree: &mut SearchTree, path: &[(StateKey, Move)], leaf_value: f64) {
    let mut v = leaf_value;
    for (key, mv) in path.iter().rev() {
        v = -v;
        let node = tree.get_mut(key).expect("path node in tree");
        let slot = node.slot(*mv).expect("path move legal");
        node.update(slot, v);
    }
}

/// Everything one simulation touched, for instrumentation.
#[derive(Clone, Debug)]
pub struct SimulationTrace {
    /// Positions where a move was selected, root first.
    pub path_states: Vec<GameState>,
    /// Every move of the simulation: tree moves then rollout moves.
    pub actions: Vec<Move>,
    /// Number of leading `actions` chosen inside the tree.
    pub tree_moves: usize,
    /// Leaf value from the perspective of the side to move at the leaf.
    pub leaf_value: f64,
    pub expanded: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Searcher {
    pub config: SearchConfig,
    pub strategy: SearchStrategy,
}

impl Searcher {
    pub fn plain(config: SearchConfig) -> Self {
        Searcher {
            config,
            strategy: SearchStrategy::baseline(config.simulations as f64),
        }
    }

    pub fn kind(&self) -> EnhancementKind {
        self.strategy.kind
    }

    /// Runs `m` simulations from `root` and returns the search policy over
    /// the full move space.
    pub fn search<E, R>(&self, root: &GameState, tree: &mut SearchTree, evaluator: &E, rng: &mut R) -> Result<Vec<f64>>
    where
        E: Evaluator + ?Sized,
        R: Rng + ?Sized,
    {
        if root.is_terminal() {
            return Err(Error::TerminalState);
        }
        for _ in 0..self.config.simulations {
            self.simulate(root, tree, evaluator, rng)?;
        }
        let node = tree.get(&root.key()).expect("root expanded by first simulation");
        Ok(node.policy(self.strategy.policy_from_rave(), root.action_size()))
    }

    /// A single simulation from `root`.
    pub fn simulate<E, R>(
        &self,
        root: &GameState,
        tree: &mut SearchTree,
        evaluator: &E,
        rng: &mut R,
    ) -> Result<SimulationTrace>
    where
        E: Evaluator + ?Sized,
        R: Rng + ?Sized,
    {
        let mode = self.strategy.selection();
        let c = self.config.c_puct;
        let mut path: Vec<(StateKey, Move)> = Vec::new();
        let mut path_states = Vec::new();
        let mut actions = Vec::new();
        let mut state = *root;
        let leaf_value;
        let mut expanded = false;
        loop {
            let outcome = state.outcome();
            if outcome.is_terminal() {
                leaf_value = outcome.value_for(state.to_move());
                break;
            }
            let key = state.key();
            match tree.get(&key) {
                None => {
                    let eval = evaluator.evaluate(&state)?;
                    tree.insert(key, NodeStats::new(state.legal_moves(), &eval.policy));
                    leaf_value = self.strategy.leaf_value(&state, eval.value, rng, &mut actions);
                    expanded = true;
                    break;
                }
                Some(node) => {
                    let mv = node.moves[select_child(node, mode, c)];
                    path.push((key, mv));
                    path_states.push(state);
                    actions.push(mv);
                    state = state.apply_unchecked(mv);
                }
            }
        }
        backup(tree, &path, leaf_value);
        if self.strategy.uses_amaf() {
            warmstart::amaf_backup(tree, &path, &actions, leaf_value);
        }
        Ok(SimulationTrace {
            tree_moves: path.len(),
            path_states,
            actions,
            leaf_value,
            expanded,
        })
    }
}

/// Move with the highest probability; ties go to the lowest index.
pub fn argmax(pi: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in pi.iter().enumerate() {
        if p > pi[best] {
            best = i;
        }
    }
    best
}
