//! Rolling-horizon evolutionary move chooser.
//!
//! An individual is a fixed-length list of genes. A gene is read as an index
//! into the sorted list of moves legal at the time it is played (modulo the
//! list length), so every sequence is playable from any position.

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{GameState, Move, Outcome};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RheaConfig {
    pub population: usize,
    pub mutation_rate: f64,
    pub horizon: usize,
    /// Playouts per fitness evaluation.
    pub rollouts_per_individual: usize,
    /// Total playouts per move, initial population included.
    pub rollout_budget: usize,
}

impl Default for RheaConfig {
    fn default() -> Self {
        RheaConfig {
            population: 10,
            mutation_rate: 0.2,
            horizon: 10,
            rollouts_per_individual: 2,
            rollout_budget: 100,
        }
    }
}

impl RheaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("RHEA population must be >= 2".into()));
        }
        if self.horizon == 0 || self.rollouts_per_individual == 0 {
            return Err(Error::Config("RHEA horizon and rollouts must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::Config("RHEA mutation rate must lie in [0, 1]".into()));
        }
        if self.rollout_budget < self.population * self.rollouts_per_individual {
            return Err(Error::Config(format!(
                "RHEA budget {} cannot evaluate the initial population of {}",
                self.rollout_budget, self.population
            )));
        }
        Ok(())
    }
}

/// Genes are drawn from `0..GENE_RANGE`; any value works since they are
/// reduced modulo the legal-move count.
pub const GENE_RANGE: u32 = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genes: Vec<u32>,
    pub fitness: f64,
}

pub fn random_genes<R: Rng + ?Sized>(horizon: usize, rng: &mut R) -> Vec<u32> {
    (0..horizon).map(|_| rng.gen_range(0..GENE_RANGE)).collect()
}

/// Fitness from per-playout results `(Q_i, h_i)`: the mean of `Q_i / h_i`.
pub fn fitness_from_results(results: &[(f64, usize)]) -> f64 {
    let total: f64 = results.iter().map(|&(q, h)| q / h as f64).sum();
    total / results.len() as f64
}

fn gene_move(state: &GameState, gene: u32, legal: &mut Vec<Move>) -> Move {
    state.legal_moves_into(legal);
    legal[gene as usize % legal.len()]
}

/// One playout: our moves follow `genes`, the opponent plays randomly; past
/// the horizon both sides play randomly. Returns `(Q, h)` for the side to
/// move in `state`, with `h` the number of plies played.
pub fn playout<R: Rng + ?Sized>(genes: &[u32], state: &GameState, rng: &mut R) -> (f64, usize) {
    let me = state.to_move();
    let mut s = *state;
    let mut legal = Vec::new();
    let mut own = 0;
    let mut plies = 0;
    while !s.is_terminal() {
        let mv = if s.to_move() == me && own < genes.len() {
            own += 1;
            gene_move(&s, genes[own - 1], &mut legal)
        } else {
            s.legal_moves_into(&mut legal);
            legal[rng.gen_range(0..legal.len())]
        };
        s = s.apply_unchecked(mv);
        plies += 1;
    }
    let q = match s.outcome() {
        Outcome::Win(p) if p == me => 1.0,
        Outcome::Win(_) => -1.0,
        _ => 0.0,
    };
    (q, plies)
}

pub fn evaluate_fitness<R: Rng + ?Sized>(genes: &[u32], state: &GameState, cfg: &RheaConfig, rng: &mut R) -> f64 {
    let results: Vec<(f64, usize)> = (0..cfg.rollouts_per_individual)
        .map(|_| playout(genes, state, rng))
        .collect();
    fitness_from_results(&results)
}

/// Resamples each gene independently with probability `rate`.
pub fn mutate<R: Rng + ?Sized>(genes: &[u32], rate: f64, rng: &mut R) -> Vec<u32> {
    genes
        .iter()
        .map(|&g| {
            if rng.gen_bool(rate) {
                rng.gen_range(0..GENE_RANGE)
            } else {
                g
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RheaChoice {
    pub mv: Move,
    pub rollouts: usize,
    pub population: Vec<Individual>,
}

/// Runs the (mu+1) evolution under the rollout budget and plays the first
/// gene of the best individual.
pub fn evolve<R: Rng + ?Sized>(state: &GameState, cfg: &RheaConfig, rng: &mut R) -> Result<RheaChoice> {
    cfg.validate()?;
    if state.is_terminal() {
        return Err(Error::TerminalState);
    }
    let legal = state.legal_moves();
    if legal.len() == 1 {
        return Ok(RheaChoice {
            mv: legal[0],
            rollouts: 0,
            population: Vec::new(),
        });
    }
    let n = cfg.rollouts_per_individual;
    let mut rollouts = 0;
    let mut population: Vec<Individual> = (0..cfg.population)
        .map(|_| {
            let genes = random_genes(cfg.horizon, rng);
            let fitness = evaluate_fitness(&genes, state, cfg, rng);
            rollouts += n;
            Individual { genes, fitness }
        })
        .collect();
    while rollouts + n <= cfg.rollout_budget {
        let parent = &population[rng.gen_range(0..population.len())];
        let genes = mutate(&parent.genes, cfg.mutation_rate, rng);
        let fitness = evaluate_fitness(&genes, state, cfg, rng);
        rollouts += n;
        population.push(Individual { genes, fitness });
        // Drop the worst; among equals the oldest goes first.
        let worst = (0..population.len())
            .min_by(|&a, &b| population[a].fitness.total_cmp(&population[b].fitness))
            .expect("non-empty population");
        population.remove(worst);
    }
    let best = (0..population.len())
        .max_by(|&a, &b| population[a].fitness.total_cmp(&population[b].fitness).then(b.cmp(&a)))
        .expect("non-empty population");
    let mv = legal[population[best].genes[0] as usize % legal.len()];
    Ok(RheaChoice {
        mv,
        rollouts,
        population,
    })
}

pub fn choose_move<R: Rng + ?Sized>(state: &GameState, cfg: &RheaConfig, rng: &mut R) -> Result<Move> {
    evolve(state, cfg, rng).map(|c| c.mv)
}
