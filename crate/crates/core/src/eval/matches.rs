//! Matches, round robins and the four-agent orientation table.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::agents::{AgentSpec, GameSetup, PreparedAgent};
use super::elo::PairResult;
use crate::error::{Error, Result};
use crate::game::{GameKind, Outcome, Player};
use crate::pipeline::with_pool;
use crate::rng::substream;

/// One line of `records.csv`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRow {
    #[serde(rename = "agentA")]
    pub agent_a: String,
    #[serde(rename = "agentB")]
    pub agent_b: String,
    pub game_index: usize,
    /// `A` or `B`.
    pub first_mover: char,
    /// `A`, `B` or `D`.
    pub result: char,
    pub moves: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchRecord {
    pub agent_a: String,
    pub agent_b: String,
    pub wins_a: usize,
    pub wins_b: usize,
    pub draws: usize,
    pub games: Vec<GameRow>,
}

impl MatchRecord {
    pub fn total(&self) -> usize {
        self.wins_a + self.wins_b + self.draws
    }

    /// Score of A in percent, draws counting half.
    pub fn score_a(&self) -> f64 {
        100.0 * (self.wins_a as f64 + 0.5 * self.draws as f64) / self.total() as f64
    }

    pub fn pair_result(&self) -> PairResult {
        PairResult {
            agent_a: self.agent_a.clone(),
            agent_b: self.agent_b.clone(),
            wins_a: self.wins_a as u64,
            wins_b: self.wins_b as u64,
            draws: self.draws as u64,
        }
    }

    /// Rebuilds match records from game rows, grouped by ordered agent pair
    /// in first-appearance order.
    pub fn from_rows(rows: &[GameRow]) -> Vec<MatchRecord> {
        let mut out: Vec<MatchRecord> = Vec::new();
        for row in rows {
            let pos = out
                .iter()
                .position(|m| m.agent_a == row.agent_a && m.agent_b == row.agent_b);
            let rec = match pos {
                Some(p) => &mut out[p],
                None => {
                    out.push(MatchRecord {
                        agent_a: row.agent_a.clone(),
                        agent_b: row.agent_b.clone(),
                        wins_a: 0,
                        wins_b: 0,
                        draws: 0,
                        games: Vec::new(),
                    });
                    out.last_mut().unwrap()
                }
            };
            match row.result {
                'A' => rec.wins_a += 1,
                'B' => rec.wins_b += 1,
                _ => rec.draws += 1,
            }
            rec.games.push(row.clone());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchConfig {
    pub setup: GameSetup,
    pub games: usize,
    pub seed: u64,
    pub workers: usize,
}

/// Plays `games` games between `a` and `b`, alternating colours with `a`
/// first in even games. `match_id` separates the random streams of
/// different matches under one seed.
pub fn play_match(a: &PreparedAgent, b: &PreparedAgent, cfg: &MatchConfig, match_id: u64) -> Result<MatchRecord> {
    if cfg.games == 0 {
        return Err(Error::Config("a match needs at least one game".into()));
    }
    let setup = cfg.setup;
    let results: Vec<Result<(Outcome, usize)>> = with_pool(cfg.workers, || {
        use rayon::prelude::*;
        (0..cfg.games)
            .into_par_iter()
            .map(|g| {
                let (first, second) = if g % 2 == 0 { (a, b) } else { (b, a) };
                let mut players = [first.player(&setup), second.player(&setup)];
                let mut rngs = [
                    substream(cfg.seed, "match", &[match_id, g as u64, 0]),
                    substream(cfg.seed, "match", &[match_id, g as u64, 1]),
                ];
                let mut state = setup.initial_state()?;
                let mut moves = 0;
                while !state.is_terminal() {
                    let side = match state.to_move() {
                        Player::First => 0,
                        Player::Second => 1,
                    };
                    let mv = players[side].choose(&state, &mut rngs[side])?;
                    state = state.apply_move(mv)?;
                    moves += 1;
                }
                Ok((state.outcome(), moves))
            })
            .collect()
    })?;
    let mut rec = MatchRecord {
        agent_a: a.spec.to_string(),
        agent_b: b.spec.to_string(),
        wins_a: 0,
        wins_b: 0,
        draws: 0,
        games: Vec::with_capacity(cfg.games),
    };
    for (g, r) in results.into_iter().enumerate() {
        let (outcome, moves) = r?;
        let a_first = g % 2 == 0;
        let result = match outcome {
            Outcome::Win(p) if (p == Player::First) == a_first => 'A',
            Outcome::Win(_) => 'B',
            _ => 'D',
        };
        match result {
            'A' => rec.wins_a += 1,
            'B' => rec.wins_b += 1,
            _ => rec.draws += 1,
        }
        rec.games.push(GameRow {
            agent_a: rec.agent_a.clone(),
            agent_b: rec.agent_b.clone(),
            game_index: g,
            first_mover: if a_first { 'A' } else { 'B' },
            result,
            moves,
            seed: cfg.seed,
        });
    }
    Ok(rec)
}

/// Every unordered pair plays once, in index order: (0,1), (0,2), ... (k-2,k-1).
pub fn round_robin(agents: &[PreparedAgent], cfg: &MatchConfig) -> Result<Vec<MatchRecord>> {
    if agents.len() < 2 {
        return Err(Error::Config("a round robin needs at least two agents".into()));
    }
    let mut out = Vec::new();
    let mut id = 0;
    for i in 0..agents.len() {
        for j in i + 1..agents.len() {
            out.push(play_match(&agents[i], &agents[j], cfg, id)?);
            id += 1;
        }
    }
    Ok(out)
}

pub const ORIENTATION_AGENTS: [&str; 4] = ["random", "mcts", "rave", "rhea"];

/// Win rates (percent, draws half) of column agent against row agent for
/// one game. The diagonal is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientationTable {
    pub game: GameKind,
    pub agents: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
    pub records: Vec<MatchRecord>,
}

impl OrientationTable {
    /// Score of `column` against `row`, in percent.
    pub fn win_rate(&self, column: &str, row: &str) -> Option<f64> {
        let r = self.agents.iter().position(|a| a == row)?;
        let c = self.agents.iter().position(|a| a == column)?;
        self.cells[r][c]
    }
}

/// All six pairings of random, MCTS, RAVE and RHEA on each game.
pub fn orientation_experiment(
    games: &[GameKind],
    games_per_pairing: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<OrientationTable>> {
    let mut out = Vec::new();
    for (gi, &game) in games.iter().enumerate() {
        let setup = GameSetup::new(game);
        let agents: Vec<PreparedAgent> = ORIENTATION_AGENTS
            .iter()
            .map(|n| PreparedAgent::new(n.parse::<AgentSpec>()?, &setup))
            .collect::<Result<_>>()?;
        let cfg = MatchConfig {
            setup,
            games: games_per_pairing,
            seed,
            workers,
        };
        let k = agents.len();
        let mut cells = vec![vec![None; k]; k];
        let mut records = Vec::new();
        let mut id = 0;
        for i in 0..k {
            for j in i + 1..k {
                let rec = play_match(&agents[i], &agents[j], &cfg, (gi * 100 + id) as u64)?;
                id += 1;
                let a = rec.score_a();
                cells[j][i] = Some(a);
                cells[i][j] = Some(100.0 - a);
                records.push(rec);
            }
        }
        out.push(OrientationTable {
            game,
            agents: ORIENTATION_AGENTS.iter().map(|s| s.to_string()).collect(),
            cells,
            records,
        });
    }
    Ok(out)
}

/// Writes the tables as CSV: one block of rows per game, `row` naming the
/// row agent and one column per column agent.
pub fn write_orientation_csv(path: &Path, tables: &[OrientationTable]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut header = vec!["game".to_string(), "row".to_string()];
    header.extend(ORIENTATION_AGENTS.iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for t in tables {
        for (r, row_agent) in t.agents.iter().enumerate() {
            let mut rec = vec![t.game.to_string(), row_agent.clone()];
            rec.extend(
                t.cells[r]
                    .iter()
                    .map(|c| c.map_or(String::new(), |v| format!("{v:.1}"))),
            );
            w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_records_csv(path: &Path, records: &[MatchRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for rec in records {
        for row in &rec.games {
            w.serialize(row).map_err(|e| Error::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records_csv(path: &Path) -> Result<Vec<GameRow>> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    rd.deserialize().map(|r| r.map_err(|e| Error::csv(path, e))).collect()
}

#[derive(Serialize, Deserialize)]
struct EloRow {
    agent: String,
    rating: f64,
    games: u64,
}

pub fn write_elo_csv(path: &Path, table: &super::elo::EloTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for r in &table.ratings {
        w.serialize(EloRow {
            agent: r.agent.clone(),
            rating: r.rating,
            games: r.games,
        })
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_regroup_into_records() {
        let setup = GameSetup {
            board_size: 3,
            win_length: 3,
            ..GameSetup::new(GameKind::Gobang)
        };
        let a = PreparedAgent::new(AgentSpec::Random, &setup).unwrap();
        let b = PreparedAgent::new(AgentSpec::Mcts { simulations: 5 }, &setup).unwrap();
        let cfg = MatchConfig {
            setup,
            games: 6,
            seed: 1,
            workers: 1,
        };
        let rec = play_match(&a, &b, &cfg, 0).unwrap();
        assert_eq!(rec.total(), 6);
        assert_eq!(rec.games.iter().filter(|g| g.first_mover == 'A').count(), 3);
        assert_eq!(MatchRecord::from_rows(&rec.games), vec![rec.clone()]);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        write_records_csv(&path, std::slice::from_ref(&rec)).unwrap();
        assert_eq!(read_records_csv(&path).unwrap(), rec.games);
    }
}
