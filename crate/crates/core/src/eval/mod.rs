//! Match play, tournaments and ratings.

pub mod agents;
pub mod elo;
pub mod matches;

pub use agents::{Agent, AgentSpec, GameSetup, PreparedAgent};
pub use elo::{compute_elo, EloTable, PairResult, Rating};
pub use matches::{
    orientation_experiment, play_match, read_records_csv, round_robin, write_elo_csv, write_orientation_csv,
    write_records_csv, GameRow, MatchConfig, MatchRecord, OrientationTable,
};
