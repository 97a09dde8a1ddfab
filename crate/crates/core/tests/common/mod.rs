//! Independent reference implementations used by the integration tests.
//! None of these call into the code they check beyond reading its output.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use warmstart::game::StateKey;
use warmstart::mcts::SearchTree;
use warmstart::{GameKind, GameState, Move, Outcome};

/// Plain 3x3 noughts and crosses: cells 0..9, +1 first player, -1 second.
pub mod ttt {
    pub const LINES: [[usize; 3]; 8] = [
        [0, 1, 2],
        [3, 4, 5],
        [6, 7, 8],
        [0, 3, 6],
        [1, 4, 7],
        [2, 5, 8],
        [0, 4, 8],
        [2, 4, 6],
    ];

    /// Some(+1/-1) for a winner, Some(0) for a full board, None otherwise.
    pub fn adjudicate(cells: &[i8; 9]) -> Option<i8> {
        for l in LINES {
            let s = cells[l[0]];
            if s != 0 && cells[l[1]] == s && cells[l[2]] == s {
                return Some(s);
            }
        }
        if cells.iter().all(|&c| c != 0) {
            Some(0)
        } else {
            None
        }
    }

    /// Game value for the side `to_move` under perfect play.
    pub fn minimax(cells: &mut [i8; 9], to_move: i8) -> i8 {
        if let Some(r) = adjudicate(cells) {
            return r * to_move;
        }
        let mut best = -2;
        for i in 0..9 {
            if cells[i] == 0 {
                cells[i] = to_move;
                best = best.max(-minimax(cells, -to_move));
                cells[i] = 0;
            }
        }
        best
    }
}

/// Minimax over the engine's own move generator and adjudication.
pub fn engine_minimax(state: &GameState, memo: &mut HashMap<StateKey, i8>) -> i8 {
    match state.outcome() {
        Outcome::Win(p) => return if p == state.to_move() { 1 } else { -1 },
        Outcome::Draw => return 0,
        Outcome::Ongoing => {}
    }
    if let Some(&v) = memo.get(&state.key()) {
        return v;
    }
    let best = state
        .legal_moves()
        .into_iter()
        .map(|m| -engine_minimax(&state.apply_move(m).unwrap(), memo))
        .max()
        .unwrap();
    memo.insert(state.key(), best);
    best
}

/// Checks every state reachable from the empty 3x3 board: legal moves,
/// terminal adjudication and minimax value against the reference. Returns
/// the number of states checked and the root value for the first player.
pub fn check_gobang3() -> Result<(usize, i8), String> {
    let root = GameState::new(GameKind::Gobang, 3, 3).unwrap();
    let mut stack = vec![root];
    let mut seen: BTreeSet<Vec<i8>> = BTreeSet::new();
    let mut memo = HashMap::new();
    while let Some(s) = stack.pop() {
        let cells: [i8; 9] = s.cells().try_into().unwrap();
        let mover = s.to_move().sign();
        let mut key = cells.to_vec();
        key.push(mover);
        if !seen.insert(key) {
            continue;
        }
        let expected = ttt::adjudicate(&cells);
        let got = match s.outcome() {
            Outcome::Ongoing => None,
            Outcome::Draw => Some(0),
            Outcome::Win(p) => Some(p.sign()),
        };
        if expected != got {
            return Err(format!(
                "adjudication differs on {cells:?}: engine {got:?}, oracle {expected:?}"
            ));
        }
        let want_moves: Vec<usize> = if expected.is_some() {
            Vec::new()
        } else {
            (0..9).filter(|&i| cells[i] == 0).collect()
        };
        let moves: Vec<usize> = s.legal_moves().iter().map(|m| m.index()).collect();
        if moves != want_moves {
            return Err(format!("legal moves differ on {cells:?}: {moves:?} vs {want_moves:?}"));
        }
        let mut c = cells;
        let oracle = ttt::minimax(&mut c, mover);
        let engine = engine_minimax(&s, &mut memo);
        if oracle != engine {
            return Err(format!(
                "minimax differs on {cells:?}: engine {engine}, oracle {oracle}"
            ));
        }
        for m in s.legal_moves() {
            stack.push(s.apply_move(m).unwrap());
        }
    }
    let mut empty = [0i8; 9];
    let root_value = ttt::minimax(&mut empty, 1);
    Ok((seen.len(), root_value))
}

/// The (position key, move) pairs whose AMAF statistics one simulation
/// should update, rescanned from the simulation's path and move list: for
/// each path position, the moves of the same player from that step on,
/// first occurrence only, restricted to moves legal at that position.
pub fn amaf_oracle(path_states: &[GameState], actions: &[Move]) -> BTreeSet<(StateKey, usize)> {
    let mut out = BTreeSet::new();
    for (t1, s) in path_states.iter().enumerate() {
        let legal: BTreeSet<usize> = s.legal_moves().iter().map(|m| m.index()).collect();
        let mut used = BTreeSet::new();
        let mut t2 = t1;
        while t2 < actions.len() {
            let a = actions[t2].index();
            if used.insert(a) && legal.contains(&a) {
                out.insert((s.key(), a));
            }
            t2 += 2;
        }
    }
    out
}

/// Pairs whose AMAF count changed anywhere in the tree, with the increase.
pub fn amaf_diff(before: &SearchTree, after: &SearchTree) -> BTreeSet<((StateKey, usize), u32)> {
    let mut out = BTreeSet::new();
    for (key, new) in after.iter() {
        let old = before.get(key);
        for (slot, mv) in new.moves.iter().enumerate() {
            let was = old.map_or(0, |o| o.n_rave[slot]);
            if new.n_rave[slot] != was {
                out.insert(((*key, mv.index()), new.n_rave[slot] - was));
            }
        }
    }
    out
}

/// Elo gap that maximizes `w log p + l log (1 - p)` with
/// `p = 1 / (1 + 10^(-d/400))`, found by bisection on the derivative.
pub fn two_agent_elo_gap(w: f64, l: f64) -> f64 {
    let deriv = |d: f64| {
        let p = 1.0 / (1.0 + 10f64.powf(-d / 400.0));
        w * (1.0 - p) - l * p
    };
    let (mut lo, mut hi) = (-2000.0, 2000.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if deriv(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
