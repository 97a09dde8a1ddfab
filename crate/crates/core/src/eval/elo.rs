//! Bradley-Terry ratings fitted by minorization-maximization.
//!
//! Every pair that played gets one virtual win and one virtual loss added
//! as a prior, draws count half a win to each side, and strengths are
//! reported as `400 log10(gamma)` shifted to mean zero.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Aggregated results of one pairing. Orientation does not matter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairResult {
    pub agent_a: String,
    pub agent_b: String,
    pub wins_a: u64,
    pub wins_b: u64,
    pub draws: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rating {
    pub agent: String,
    pub rating: f64,
    pub games: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EloTable {
    /// Sorted by agent name.
    pub ratings: Vec<Rating>,
    pub iterations: usize,
    /// Norm of the log-likelihood gradient in log-strength at the end.
    pub gradient_norm: f64,
}

impl EloTable {
    pub fn rating(&self, agent: &str) -> Option<f64> {
        self.ratings.iter().find(|r| r.agent == agent).map(|r| r.rating)
    }
}

pub const PRIOR_GAMES: f64 = 1.0;
const TOLERANCE: f64 = 0.01;
const MAX_ITERATIONS: usize = 100_000;

fn scale(gamma: f64) -> f64 {
    400.0 * gamma.log10()
}

/// Fits ratings to `results`. Fails if the decisive-game graph does not
/// connect every agent.
pub fn compute_elo(results: &[PairResult]) -> Result<EloTable> {
    // Canonical pair table: (low, high) -> (wins low, wins high, draws), so
    // neither record order nor orientation affects the arithmetic.
    let mut pairs: BTreeMap<(String, String), (u64, u64, u64)> = BTreeMap::new();
    let mut names = BTreeSet::new();
    for r in results {
        names.insert(r.agent_a.clone());
        names.insert(r.agent_b.clone());
        if r.agent_a == r.agent_b {
            continue;
        }
        let (key, wl, wh) = if r.agent_a < r.agent_b {
            ((r.agent_a.clone(), r.agent_b.clone()), r.wins_a, r.wins_b)
        } else {
            ((r.agent_b.clone(), r.agent_a.clone()), r.wins_b, r.wins_a)
        };
        let e = pairs.entry(key).or_default();
        e.0 += wl;
        e.1 += wh;
        e.2 += r.draws;
    }
    let names: Vec<String> = names.into_iter().collect();
    if names.is_empty() {
        return Err(Error::Config("no match results to rate".into()));
    }
    let k = names.len();
    let idx = |n: &str| names.binary_search_by(|x| x.as_str().cmp(n)).unwrap();

    // Connectivity over decisive results.
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for ((a, b), &(wa, wb, _)) in &pairs {
        if wa + wb > 0 {
            let (ra, rb) = (find(&mut parent, idx(a)), find(&mut parent, idx(b)));
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut components: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (i, name) in names.iter().enumerate() {
        let r = find(&mut parent, i);
        components.entry(r).or_default().push(name);
    }
    if components.len() > 1 {
        let listed: Vec<String> = components.values().map(|c| format!("{{{}}}", c.join(", "))).collect();
        return Err(Error::Disconnected(listed.join(" ")));
    }

    // Per-agent totals with the prior folded in.
    struct Edge {
        a: usize,
        b: usize,
        games: f64,
    }
    let mut wins = vec![0.0f64; k];
    let mut games = vec![0u64; k];
    let mut edges = Vec::with_capacity(pairs.len());
    for ((a, b), &(wa, wb, d)) in &pairs {
        let (ia, ib) = (idx(a), idx(b));
        let played = wa + wb + d;
        games[ia] += played;
        games[ib] += played;
        if played == 0 {
            continue;
        }
        wins[ia] += wa as f64 + 0.5 * d as f64 + PRIOR_GAMES;
        wins[ib] += wb as f64 + 0.5 * d as f64 + PRIOR_GAMES;
        edges.push(Edge {
            a: ia,
            b: ib,
            games: played as f64 + 2.0 * PRIOR_GAMES,
        });
    }

    let mut gamma = vec![1.0f64; k];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut denom = vec![0.0f64; k];
        for e in &edges {
            let t = e.games / (gamma[e.a] + gamma[e.b]);
            denom[e.a] += t;
            denom[e.b] += t;
        }
        let mut next: Vec<f64> = (0..k)
            .map(|i| if denom[i] > 0.0 { wins[i] / denom[i] } else { gamma[i] })
            .collect();
        // Pin the first agent at 1; symmetric inputs then stay exactly equal.
        let anchor = next[0];
        next.iter_mut().for_each(|g| *g /= anchor);
        let change = (0..k)
            .map(|i| (scale(next[i]) - scale(gamma[i])).abs())
            .fold(0.0, f64::max);
        gamma = next;
        if change < TOLERANCE {
            break;
        }
    }

    let mut grad = wins.clone();
    for e in &edges {
        let s = gamma[e.a] + gamma[e.b];
        grad[e.a] -= e.games * gamma[e.a] / s;
        grad[e.b] -= e.games * gamma[e.b] / s;
    }
    let gradient_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();

    let raw: Vec<f64> = gamma.iter().map(|&g| scale(g)).collect();
    let mean = raw.iter().sum::<f64>() / k as f64;
    let ratings = names
        .iter()
        .enumerate()
        .map(|(i, n)| Rating {
            agent: n.clone(),
            rating: raw[i] - mean,
            games: games[i],
        })
        .collect();
    Ok(EloTable {
        ratings,
        iterations,
        gradient_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(a: &str, b: &str, wa: u64, wb: u64, d: u64) -> PairResult {
        PairResult {
            agent_a: a.into(),
            agent_b: b.into(),
            wins_a: wa,
            wins_b: wb,
            draws: d,
        }
    }

    #[test]
    fn even_record_gives_zero() {
        let t = compute_elo(&[pr("a", "b", 10, 10, 0)]).unwrap();
        assert_eq!(t.rating("a"), Some(0.0));
        assert_eq!(t.rating("b"), Some(0.0));
    }

    #[test]
    fn draws_alone_do_not_connect() {
        let err = compute_elo(&[pr("a", "b", 3, 1, 0), pr("c", "d", 0, 0, 5), pr("c", "a", 0, 0, 2)]).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("{a, b}") && msg.contains("{c}") && msg.contains("{d}"),
            "{msg}"
        );
    }
}
