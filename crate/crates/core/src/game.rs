//! Rule engines for Othello, Connect Four and Gobang behind one immutable
//! two-player state type.
//!
//! Cells are addressed row-major with row 0 at the top. Moves are plain
//! indices into the game's move space: a cell for Othello and Gobang, a
//! column for Connect Four. Othello reserves one extra slot, `size * size`,
//! for the pass move.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

pub const MAX_SIZE: usize = 8;
pub const MAX_CELLS: usize = MAX_SIZE * MAX_SIZE;

const DIRECTIONS: [(i32, i32); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GameKind {
    Othello,
    ConnectFour,
    Gobang,
}

impl GameKind {
    pub const ALL: [GameKind; 3] = [GameKind::Gobang, GameKind::ConnectFour, GameKind::Othello];

    pub fn name(self) -> &'static str {
        match self {
            GameKind::Othello => "othello",
            GameKind::ConnectFour => "connect4",
            GameKind::Gobang => "gobang",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            GameKind::Othello => 0,
            GameKind::ConnectFour => 1,
            GameKind::Gobang => 2,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(GameKind::Othello),
            1 => Some(GameKind::ConnectFour),
            2 => Some(GameKind::Gobang),
            _ => None,
        }
    }

    /// Size of the move space for a board of the given size.
    pub fn action_size(self, size: usize) -> usize {
        match self {
            GameKind::Othello => size * size + 1,
            GameKind::ConnectFour => size,
            GameKind::Gobang => size * size,
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "othello" | "reversi" => Ok(GameKind::Othello),
            "connect4" | "connectfour" | "c4" => Ok(GameKind::ConnectFour),
            "gobang" | "gomoku" => Ok(GameKind::Gobang),
            _ => Err(Error::Config(format!(
                "unknown game `{s}` (expected othello, connect4 or gobang)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    First,
    Second,
}

impl Player {
    pub fn sign(self) -> i8 {
        match self {
            Player::First => 1,
            Player::Second => -1,
        }
    }

    pub fn from_sign(sign: i8) -> Option<Self> {
        match sign {
            1 => Some(Player::First),
            -1 => Some(Player::Second),
            _ => None,
        }
    }

    pub fn opponent(self) -> Self {
        match self {
            Player::First => Player::Second,
            Player::Second => Player::First,
        }
    }
}

impl std::ops::Neg for Player {
    type Output = Player;

    fn neg(self) -> Player {
        self.opponent()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move(u16);

impl Move {
    pub fn new(index: usize) -> Self {
        Move(index as u16)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ongoing,
    Win(Player),
    Draw,
}

impl Outcome {
    pub fn is_terminal(self) -> bool {
        !matches!(self, Outcome::Ongoing)
    }

    /// Terminal reward from `player`'s point of view.
    pub fn value_for(self, player: Player) -> f64 {
        match self {
            Outcome::Win(w) if w == player => 1.0,
            Outcome::Win(_) => -1.0,
            _ => 0.0,
        }
    }
}

/// Key identifying a position from the mover's perspective; two bits per cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(u128);

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameState {
    kind: GameKind,
    size: u8,
    win_length: u8,
    cells: [i8; MAX_CELLS],
    to_move: Player,
    plies: u16,
    winner: Option<Player>,
}

impl fmt::Debug for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GameState({} {}x{}, {:?} to move)\n{}",
            self.kind,
            self.size,
            self.size,
            self.to_move,
            self.render()
        )
    }
}

impl GameState {
    pub fn new(kind: GameKind, size: usize, win_length: usize) -> Result<Self> {
        if size == 0 || size > MAX_SIZE {
            return Err(Error::Config(format!("board size {size} outside 1..={MAX_SIZE}")));
        }
        match kind {
            GameKind::Othello => {
                if size < 4 || !size.is_multiple_of(2) {
                    return Err(Error::Config(format!(
                        "othello needs an even board size >= 4, got {size}"
                    )));
                }
            }
            GameKind::ConnectFour | GameKind::Gobang => {
                if win_length == 0 || win_length > size {
                    return Err(Error::Config(format!(
                        "{kind} needs 1 <= win length <= board size, got {win_length} on {size}"
                    )));
                }
            }
        }
        let mut state = GameState {
            kind,
            size: size as u8,
            win_length: win_length as u8,
            cells: [0; MAX_CELLS],
            to_move: Player::First,
            plies: 0,
            winner: None,
        };
        if kind == GameKind::Othello {
            let c = size / 2;
            state.cells[(c - 1) * size + (c - 1)] = -1;
            state.cells[(c - 1) * size + c] = 1;
            state.cells[c * size + (c - 1)] = 1;
            state.cells[c * size + c] = -1;
        }
        Ok(state)
    }

    /// Builds a position from explicit cell contents. Connection-game wins
    /// already present on the board are detected.
    pub fn from_cells(kind: GameKind, size: usize, win_length: usize, cells: &[i8], to_move: Player) -> Result<Self> {
        let mut state = Self::new(kind, size, win_length)?;
        if cells.len() != size * size {
            return Err(Error::Config(format!(
                "expected {} cells, got {}",
                size * size,
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(Error::Config(format!("cell value {bad} not in {{-1, 0, 1}}")));
        }
        state.cells = [0; MAX_CELLS];
        state.cells[..cells.len()].copy_from_slice(cells);
        state.to_move = to_move;
        state.plies = cells.iter().filter(|&&v| v != 0).count() as u16;
        if kind != GameKind::Othello {
            state.winner = state.scan_winner();
        }
        Ok(state)
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.size as usize
    }

    pub fn win_length(&self) -> usize {
        self.win_length as usize
    }

    pub fn to_move(&self) -> Player {
        self.to_move
    }

    pub fn plies(&self) -> usize {
        self.plies as usize
    }

    pub fn cells(&self) -> &[i8] {
        &self.cells[..self.num_cells()]
    }

    pub fn cell(&self, row: usize, col: usize) -> i8 {
        self.cells[row * self.size() + col]
    }

    pub fn num_cells(&self) -> usize {
        self.size() * self.size()
    }

    pub fn action_size(&self) -> usize {
        self.kind.action_size(self.size())
    }

    /// The pass move; only meaningful for Othello.
    pub fn pass_move(&self) -> Move {
        Move::new(self.num_cells())
    }

    pub fn is_pass(&self, mv: Move) -> bool {
        self.kind == GameKind::Othello && mv.index() == self.num_cells()
    }

    pub fn piece_count(&self) -> usize {
        self.cells().iter().filter(|&&v| v != 0).count()
    }

    pub fn legal_moves(&self) -> Vec<Move> {
        let mut out = Vec::with_capacity(self.action_size());
        self.legal_moves_into(&mut out);
        out
    }

    /// Fills `out` with the legal moves in ascending index order. Empty on
    /// terminal positions.
    pub fn legal_moves_into(&self, out: &mut Vec<Move>) {
        out.clear();
        match self.kind {
            GameKind::ConnectFour => {
                if self.winner.is_some() {
                    return;
                }
                let n = self.size();
                out.extend((0..n).filter(|&c| self.cells[c] == 0).map(Move::new));
            }
            GameKind::Gobang => {
                if self.winner.is_some() {
                    return;
                }
                out.extend((0..self.num_cells()).filter(|&i| self.cells[i] == 0).map(Move::new));
            }
            GameKind::Othello => {
                let me = self.to_move.sign();
                out.extend((0..self.num_cells()).filter(|&i| self.flips_any(i, me)).map(Move::new));
                if out.is_empty() && self.has_placing_move(-me) {
                    out.push(self.pass_move());
                }
            }
        }
    }

    pub fn is_legal(&self, mv: Move) -> bool {
        let i = mv.index();
        match self.kind {
            GameKind::ConnectFour => self.winner.is_none() && i < self.size() && self.cells[i] == 0,
            GameKind::Gobang => self.winner.is_none() && i < self.num_cells() && self.cells[i] == 0,
            GameKind::Othello => {
                let me = self.to_move.sign();
                if self.is_pass(mv) {
                    !self.has_placing_move(me) && self.has_placing_move(-me)
                } else {
                    i < self.num_cells() && self.flips_any(i, me)
                }
            }
        }
    }

    pub fn apply_move(&self, mv: Move) -> Result<GameState> {
        if !self.is_legal(mv) {
            return Err(Error::IllegalMove {
                mv: mv.index(),
                board: self.render(),
            });
        }
        Ok(self.apply_unchecked(mv))
    }

    /// Applies a move already known to be legal.
    pub(crate) fn apply_unchecked(&self, mv: Move) -> GameState {
        let mut next = *self;
        let me = self.to_move.sign();
        let n = self.size();
        match self.kind {
            GameKind::ConnectFour => {
                let col = mv.index();
                let row = (0..n)
                    .rev()
                    .find(|&r| self.cells[r * n + col] == 0)
                    .expect("column has room");
                let idx = row * n + col;
                next.cells[idx] = me;
                if next.completes_line(idx) {
                    next.winner = Some(self.to_move);
                }
            }
            GameKind::Gobang => {
                let idx = mv.index();
                next.cells[idx] = me;
                if next.completes_line(idx) {
                    next.winner = Some(self.to_move);
                }
            }
            GameKind::Othello => {
                if !self.is_pass(mv) {
                    let idx = mv.index();
                    next.cells[idx] = me;
                    let (r0, c0) = ((idx / n) as i32, (idx % n) as i32);
                    for (dr, dc) in DIRECTIONS {
                        let run = self.flip_run(r0, c0, dr, dc, me);
                        for k in 1..=run as i32 {
                            let (r, c) = (r0 + dr * k, c0 + dc * k);
                            next.cells[(r as usize) * n + c as usize] = me;
                        }
                    }
                }
            }
        }
        next.to_move = self.to_move.opponent();
        next.plies = self.plies + 1;
        next
    }

    pub fn outcome(&self) -> Outcome {
        match self.kind {
            GameKind::ConnectFour | GameKind::Gobang => {
                if let Some(w) = self.winner {
                    Outcome::Win(w)
                } else if self.cells().iter().all(|&v| v != 0) {
                    Outcome::Draw
                } else {
                    Outcome::Ongoing
                }
            }
            GameKind::Othello => {
                let me = self.to_move.sign();
                let full = self.cells().iter().all(|&v| v != 0);
                if !full && (self.has_placing_move(me) || self.has_placing_move(-me)) {
                    return Outcome::Ongoing;
                }
                let balance: i32 = self.cells().iter().map(|&v| v as i32).sum();
                match balance.signum() {
                    1 => Outcome::Win(Player::First),
                    -1 => Outcome::Win(Player::Second),
                    _ => Outcome::Draw,
                }
            }
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.outcome().is_terminal()
    }

    /// Position key from the mover's perspective: a position and its
    /// colour-swapped twin with the other side to move share a key.
    pub fn key(&self) -> StateKey {
        let me = self.to_move.sign();
        let mut key = 0u128;
        for (i, &v) in self.cells().iter().enumerate() {
            let code: u128 = match v * me {
                1 => 1,
                -1 => 2,
                _ => 0,
            };
            key |= code << (2 * i);
        }
        StateKey(key)
    }

    pub fn encode(&self) -> StateEncoding {
        let me = self.to_move.sign();
        StateEncoding {
            size: self.size(),
            plane: self.cells().iter().map(|&v| v * me).collect(),
        }
    }

    /// Inverse of [`encode`](Self::encode) given the side to move.
    pub fn decode(kind: GameKind, win_length: usize, encoding: &StateEncoding, to_move: Player) -> Result<GameState> {
        let me = to_move.sign();
        let cells: Vec<i8> = encoding.plane.iter().map(|&v| v * me).collect();
        GameState::from_cells(kind, encoding.size, win_length, &cells, to_move)
    }

    /// One character per cell, row-major: `X` first player, `O` second, `.` empty.
    pub fn render(&self) -> String {
        let n = self.size();
        let mut s = String::with_capacity(n * (n + 1));
        for r in 0..n {
            for c in 0..n {
                s.push(match self.cells[r * n + c] {
                    1 => 'X',
                    -1 => 'O',
                    _ => '.',
                });
            }
            s.push('\n');
        }
        s
    }

    /// Plays uniformly random moves to the end. Returns the terminal state
    /// and appends the moves played to `moves`.
    pub fn random_playout<R: Rng + ?Sized>(&self, rng: &mut R, moves: &mut Vec<Move>) -> GameState {
        let mut state = *self;
        let mut legal = Vec::with_capacity(self.action_size());
        loop {
            state.legal_moves_into(&mut legal);
            if legal.is_empty() {
                return state;
            }
            let mv = legal[rng.gen_range(0..legal.len())];
            moves.push(mv);
            state = state.apply_unchecked(mv);
        }
    }

    fn completes_line(&self, idx: usize) -> bool {
        let n = self.size() as i32;
        let who = self.cells[idx];
        let (r0, c0) = ((idx as i32) / n, (idx as i32) % n);
        let need = self.win_length as i32;
        for (dr, dc) in [(0, 1), (1, 0), (1, 1), (1, -1)] {
            let mut count = 1;
            for dir in [1, -1] {
                let (mut r, mut c) = (r0 + dr * dir, c0 + dc * dir);
                while r >= 0 && r < n && c >= 0 && c < n && self.cells[(r * n + c) as usize] == who {
                    count += 1;
                    r += dr * dir;
                    c += dc * dir;
                }
            }
            if count >= need {
                return true;
            }
        }
        false
    }

    fn scan_winner(&self) -> Option<Player> {
        let mut found = None;
        for idx in 0..self.num_cells() {
            if self.cells[idx] != 0 && self.completes_line(idx) {
                found = Player::from_sign(self.cells[idx]);
                break;
            }
        }
        found
    }

    /// Number of opponent stones flipped in one direction by playing at
    /// (r0, c0) as `me`.
    fn flip_run(&self, r0: i32, c0: i32, dr: i32, dc: i32, me: i8) -> usize {
        let n = self.size() as i32;
        let (mut r, mut c) = (r0 + dr, c0 + dc);
        let mut run = 0;
        while r >= 0 && r < n && c >= 0 && c < n {
            let v = self.cells[(r * n + c) as usize];
            if v == -me {
                run += 1;
            } else if v == me {
                return run;
            } else {
                return 0;
            }
            r += dr;
            c += dc;
        }
        0
    }

    fn flips_any(&self, idx: usize, me: i8) -> bool {
        if self.cells[idx] != 0 {
            return false;
        }
        let n = self.size();
        let (r0, c0) = ((idx / n) as i32, (idx % n) as i32);
        DIRECTIONS.iter().any(|&(dr, dc)| self.flip_run(r0, c0, dr, dc, me) > 0)
    }

    fn has_placing_move(&self, me: i8) -> bool {
        (0..self.num_cells()).any(|i| self.flips_any(i, me))
    }
}

/// Board plane from the mover's perspective: mover's pieces are +1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateEncoding {
    pub size: usize,
    pub plane: Vec<i8>,
}

impl StateEncoding {
    pub fn to_f32(&self) -> Vec<f32> {
        self.plane.iter().map(|&v| v as f32).collect()
    }
}

/// Dihedral images of a training pair. Square games yield all 8 images;
/// Connect Four only the identity and the left-right mirror, since gravity
/// breaks the other symmetries.
pub fn symmetries(kind: GameKind, enc: &StateEncoding, pi: &[f64]) -> Vec<(StateEncoding, Vec<f64>)> {
    let n = enc.size;
    debug_assert_eq!(pi.len(), kind.action_size(n));
    match kind {
        GameKind::ConnectFour => {
            let mut plane = vec![0i8; n * n];
            for r in 0..n {
                for c in 0..n {
                    plane[r * n + (n - 1 - c)] = enc.plane[r * n + c];
                }
            }
            let mirrored: Vec<f64> = pi.iter().rev().copied().collect();
            vec![(enc.clone(), pi.to_vec()), (StateEncoding { size: n, plane }, mirrored)]
        }
        GameKind::Othello | GameKind::Gobang => (0..8)
            .map(|t| {
                let mut plane = vec![0i8; n * n];
                let mut p = pi.to_vec();
                for r in 0..n {
                    for c in 0..n {
                        let (tr, tc) = dihedral(t, r, c, n);
                        plane[tr * n + tc] = enc.plane[r * n + c];
                        p[tr * n + tc] = pi[r * n + c];
                    }
                }
                (StateEncoding { size: n, plane }, p)
            })
            .collect(),
    }
}

fn dihedral(t: usize, r: usize, c: usize, n: usize) -> (usize, usize) {
    let m = n - 1;
    match t {
        0 => (r, c),
        1 => (c, m - r),
        2 => (m - r, m - c),
        3 => (m - c, r),
        4 => (r, m - c),
        5 => (m - r, c),
        6 => (c, r),
        _ => (m - c, m - r),
    }
}
