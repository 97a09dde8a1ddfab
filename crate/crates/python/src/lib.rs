//! Python module `pywarmstart`: game states, search, the network, RHEA,
//! matches and Elo fitting.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use warmstart::eval::{self, AgentSpec, GameSetup, MatchConfig, PairResult, PreparedAgent};
use warmstart::mcts::{SearchConfig, SearchTree, UniformEvaluator};
use warmstart::nn::{load_checkpoint, save_checkpoint, Model, NetShape};
use warmstart::rng::substream;
use warmstart::warmstart::{searcher_for_iteration, PlainArm, RaveArm};
use warmstart::{rhea, GameKind, GameState, Move, Outcome};

fn err(e: warmstart::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_game(name: &str) -> PyResult<GameKind> {
    name.parse().map_err(err)
}

#[pyclass(name = "GameState", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGameState(GameState);

#[pymethods]
impl PyGameState {
    #[new]
    #[pyo3(signature = (game, size = 6, win_length = 4))]
    fn new(game: &str, size: usize, win_length: usize) -> PyResult<Self> {
        GameState::new(parse_game(game)?, size, win_length)
            .map(PyGameState)
            .map_err(err)
    }

    #[getter]
    fn game(&self) -> String {
        self.0.kind().to_string()
    }

    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    /// +1 for the first player, -1 for the second.
    #[getter]
    fn to_move(&self) -> i8 {
        self.0.to_move().sign()
    }

    #[getter]
    fn cells(&self) -> Vec<i8> {
        self.0.cells().to_vec()
    }

    fn legal_moves(&self) -> Vec<usize> {
        self.0.legal_moves().iter().map(|m| m.index()).collect()
    }

    fn apply(&self, mv: usize) -> PyResult<Self> {
        self.0.apply_move(Move::new(mv)).map(PyGameState).map_err(err)
    }

    fn is_terminal(&self) -> bool {
        self.0.is_terminal()
    }

    /// None while the game is running, else +1 / -1 for the winner or 0.
    fn outcome(&self) -> Option<i8> {
        match self.0.outcome() {
            Outcome::Ongoing => None,
            Outcome::Draw => Some(0),
            Outcome::Win(p) => Some(p.sign()),
        }
    }

    /// Board from the mover's perspective.
    fn encode(&self) -> Vec<i8> {
        self.0.encode().plane
    }

    fn __str__(&self) -> String {
        self.0.render()
    }

    fn __repr__(&self) -> String {
        format!(
            "GameState({}, {}x{}, {} plies)",
            self.0.kind(),
            self.0.size(),
            self.0.size(),
            self.0.plies()
        )
    }
}

#[pyclass(name = "Model", frozen)]
struct PyModel(Model);

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (game, size = 6, seed = 0))]
    fn new(game: &str, size: usize, seed: u64) -> PyResult<Self> {
        Ok(PyModel(Model::seeded(NetShape::new(parse_game(game)?, size), seed)))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        load_checkpoint(&path, None).map(PyModel).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_checkpoint(&self.0, &path).map_err(err)
    }

    fn num_params(&self) -> usize {
        self.0.num_params()
    }

    /// Returns `(policy, value)` for the side to move.
    fn predict(&self, state: &PyGameState) -> PyResult<(Vec<f64>, f64)> {
        let p = self.0.predict(&state.0.encode().to_f32()).map_err(err)?;
        Ok((p.policy, p.value))
    }
}

/// Search policy over the full move space. Without a model, priors are
/// uniform and the network value is 0.
#[pyfunction]
#[pyo3(signature = (state, simulations = 100, c = 1.0, enhancement = "Baseline", iteration = 0, iprime = 5, seed = 0, model = None))]
#[allow(clippy::too_many_arguments)]
fn search(
    state: &PyGameState,
    simulations: usize,
    c: f64,
    enhancement: &str,
    iteration: usize,
    iprime: usize,
    seed: u64,
    model: Option<PyRef<'_, PyModel>>,
) -> PyResult<Vec<f64>> {
    let kind = enhancement.parse().map_err(err)?;
    let config = SearchConfig { simulations, c_puct: c };
    let searcher = searcher_for_iteration(kind, iteration, iprime, config).map_err(err)?;
    let mut tree = SearchTree::new();
    let mut rng = substream(seed, "python-search", &[]);
    match model {
        Some(m) => searcher.search(&state.0, &mut tree, &m.0, &mut rng),
        None => searcher.search(&state.0, &mut tree, &UniformEvaluator, &mut rng),
    }
    .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (state, seed = 0))]
fn rhea_move(state: &PyGameState, seed: u64) -> PyResult<usize> {
    let mut rng = substream(seed, "python-rhea", &[]);
    rhea::choose_move(&state.0, &rhea::RheaConfig::default(), &mut rng)
        .map(|m| m.index())
        .map_err(err)
}

#[pyfunction]
fn puct_value(q: f64, prior: f64, n_total: u32, n_a: u32, c: f64) -> f64 {
    warmstart::mcts::puct_value(q, prior, n_total, n_a, c)
}

#[pyfunction]
fn rave_beta(n_total: u32, equivalence: f64) -> f64 {
    warmstart::warmstart::rave_beta(n_total, equivalence)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn uct_rave_value(
    q: f64,
    prior: f64,
    n_total: u32,
    n: u32,
    q_rave: f64,
    n_rave_total: u32,
    n_rave: u32,
    c: f64,
    equivalence: f64,
) -> f64 {
    warmstart::warmstart::uct_rave_value(
        PlainArm { q, prior, n_total, n },
        RaveArm {
            q: q_rave,
            n_total: n_rave_total,
            n: n_rave,
        },
        c,
        equivalence,
    )
}

#[pyfunction]
fn schedule_weight(iteration: usize, iprime: usize) -> PyResult<f64> {
    warmstart::warmstart::schedule_weight(iteration, iprime).map_err(err)
}

/// Mean of `q / h` over `(q, h)` playout results.
#[pyfunction]
fn rhea_fitness(results: Vec<(f64, usize)>) -> f64 {
    rhea::fitness_from_results(&results)
}

/// Ratings from `(agent_a, agent_b, wins_a, wins_b, draws)` tuples.
#[pyfunction]
fn compute_elo(results: Vec<(String, String, u64, u64, u64)>) -> PyResult<HashMap<String, f64>> {
    let pairs: Vec<PairResult> = results
        .into_iter()
        .map(|(agent_a, agent_b, wins_a, wins_b, draws)| PairResult {
            agent_a,
            agent_b,
            wins_a,
            wins_b,
            draws,
        })
        .collect();
    let table = eval::compute_elo(&pairs).map_err(err)?;
    Ok(table.ratings.into_iter().map(|r| (r.agent, r.rating)).collect())
}

/// Plays `games` games and returns `(wins_a, draws, wins_b)`.
#[pyfunction]
#[pyo3(signature = (a, b, games = 10, game = "gobang", size = 6, win_length = 4, seed = 0))]
fn play_match(
    a: &str,
    b: &str,
    games: usize,
    game: &str,
    size: usize,
    win_length: usize,
    seed: u64,
) -> PyResult<(usize, usize, usize)> {
    let setup = GameSetup {
        board_size: size,
        win_length,
        ..GameSetup::new(parse_game(game)?)
    };
    let prep = |s: &str| -> PyResult<PreparedAgent> {
        let spec: AgentSpec = s.parse().map_err(err)?;
        PreparedAgent::new(spec, &setup).map_err(err)
    };
    let cfg = MatchConfig {
        setup,
        games,
        seed,
        workers: 1,
    };
    let rec = eval::play_match(&prep(a)?, &prep(b)?, &cfg, 0).map_err(err)?;
    Ok((rec.wins_a, rec.draws, rec.wins_b))
}

#[pymodule]
fn pywarmstart(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGameState>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(rhea_move, m)?)?;
    m.add_function(wrap_pyfunction!(puct_value, m)?)?;
    m.add_function(wrap_pyfunction!(rave_beta, m)?)?;
    m.add_function(wrap_pyfunction!(uct_rave_value, m)?)?;
    m.add_function(wrap_pyfunction!(schedule_weight, m)?)?;
    m.add_function(wrap_pyfunction!(rhea_fitness, m)?)?;
    m.add_function(wrap_pyfunction!(compute_elo, m)?)?;
    m.add_function(wrap_pyfunction!(play_match, m)?)?;
    Ok(())
}
