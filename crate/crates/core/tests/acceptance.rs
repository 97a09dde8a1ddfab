//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one `PASS`/`FAIL` line per criterion; exits nonzero if any fails.
//!
//! Pass criterion numbers as arguments to run a subset, e.g.
//! `cargo test --test acceptance -- 3 7`.

mod common;

use std::path::Path;
use std::process::Command;

use warmstart::config::RunConfig;
use warmstart::eval::{
    compute_elo, orientation_experiment, play_match, GameSetup, MatchConfig, PairResult, PreparedAgent,
};
use warmstart::mcts::{puct_value, SearchConfig, SearchTree, UniformEvaluator};
use warmstart::nn::{make_batch, Adam, NetShape, Network, TrainingExample};
use warmstart::pipeline::{train_loop, LoopOptions};
use warmstart::rhea::fitness_from_results;
use warmstart::rng::substream;
use warmstart::warmstart::{blend, leaf_value, make_enhanced_searcher, rave_beta, schedule_weight};
use warmstart::{EnhancementKind, GameKind, GameState};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{what}: got {got}, want {want}"))
}

fn orientation() -> Check {
    let tables = orientation_experiment(&GameKind::ALL, 100, 7, 1).map_err(|e| e.to_string())?;
    let rate = |g: GameKind, col: &str, row: &str| {
        tables
            .iter()
            .find(|t| t.game == g)
            .and_then(|t| t.win_rate(col, row))
            .unwrap_or(f64::NAN)
    };
    let checks = [
        (GameKind::Gobang, "mcts", "random", 90.0, 100.0),
        (GameKind::ConnectFour, "mcts", "random", 95.0, 100.0),
        (GameKind::Gobang, "rave", "random", 95.0, 100.0),
        (GameKind::ConnectFour, "rave", "random", 95.0, 100.0),
        (GameKind::Gobang, "rave", "mcts", 70.0, 100.0),
        (GameKind::Gobang, "rhea", "random", 70.0, 100.0),
        (GameKind::ConnectFour, "rhea", "random", 70.0, 100.0),
        (GameKind::Othello, "rhea", "random", 35.0, 65.0),
    ];
    let mut summary = Vec::new();
    let mut failed = Vec::new();
    for (g, col, row, lo, hi) in checks {
        let r = rate(g, col, row);
        let line = format!("{g} {col} vs {row} {r:.1}% (need {lo}-{hi})");
        if (lo..=hi).contains(&r) {
            summary.push(line);
        } else {
            failed.push(line);
        }
    }
    if failed.is_empty() {
        Ok(summary.join("; "))
    } else {
        Err(format!("{}; passing: {}", failed.join("; "), summary.join("; ")))
    }
}

fn scaled_training() -> Check {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let setup = GameSetup::new(GameKind::ConnectFour);
    let (mut wins, mut draws, mut losses) = (0, 0, 0);
    let mut per_seed = Vec::new();
    for seed in 1..=3u64 {
        let mut models = Vec::new();
        for kind in ["wrora", "baseline"] {
            let mut cfg = RunConfig::default();
            for (k, v) in [
                ("game", "connect4"),
                ("board_size", "6"),
                ("win_length", "4"),
                ("I", "15"),
                ("Iprime", "5"),
                ("E", "20"),
                ("m", "50"),
                ("enhancement", kind),
            ] {
                cfg.set(k, v).map_err(|e| e.to_string())?;
            }
            cfg.pipeline.seed = seed;
            cfg.output_dir = root.path().join(format!("{kind}-{seed}"));
            let run = train_loop(&cfg, LoopOptions::default()).map_err(|e| e.to_string())?;
            models.push(run.model);
        }
        let baseline = PreparedAgent::from_model(models.pop().unwrap(), 50, "baseline");
        let wrora = PreparedAgent::from_model(models.pop().unwrap(), 50, "wrora");
        let mcfg = MatchConfig {
            setup,
            games: 20,
            seed,
            workers: 1,
        };
        let rec = play_match(&wrora, &baseline, &mcfg, 0).map_err(|e| e.to_string())?;
        per_seed.push(format!("{}-{}-{}", rec.wins_a, rec.draws, rec.wins_b));
        wins += rec.wins_a;
        draws += rec.draws;
        losses += rec.wins_b;
    }
    let line = format!(
        "WRoRa vs Baseline {wins} wins, {draws} draws, {losses} losses of 60 (per seed {}), need > 30 wins",
        per_seed.join(", ")
    );
    if wins > 30 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn formulas() -> Check {
    const TOL: f64 = 1e-12;
    // P-UCT, against the expression written out by hand.
    for &(q, p, nt, na, c) in &[
        (0.0, 0.5, 0u32, 0u32, 1.0),
        (0.3, 0.2, 16, 3, 1.5),
        (-1.0, 1.0, 100, 99, 0.5),
    ] {
        let want = q + c * p * (nt as f64).sqrt() / (1.0 + na as f64);
        close(puct_value(q, p, nt, na, c), want, TOL, "puct")?;
    }
    close(puct_value(0.5, 0.3, 9, 2, 1.0), 0.8, TOL, "puct 0.5+0.3*3/3")?;
    // beta
    close(rave_beta(0, 100.0), 1.0, TOL, "beta(0)")?;
    close(rave_beta(100, 100.0), 0.5, TOL, "beta(100;100)")?;
    // blend endpoints and convexity
    close(blend(0.7, -0.2, 0.0), 0.7, TOL, "blend beta=0")?;
    close(blend(0.7, -0.2, 1.0), -0.2, TOL, "blend beta=1")?;
    for b in [0.1, 0.25, 0.5, 0.9] {
        let v = blend(0.7, -0.2, b);
        ensure((-0.2..=0.7).contains(&v), || {
            format!("blend({b}) = {v} outside [u_rave, u]")
        })?;
        close(v, 0.7 - 0.9 * b, TOL, "blend affine")?;
    }
    // weighted leaf values: w = 0 is the network, w = 1 the rollout
    let s = GameState::new(GameKind::Gobang, 3, 3).unwrap();
    for kind in [EnhancementKind::WRo, EnhancementKind::WRoRa] {
        let roll = leaf_value(EnhancementKind::Rollout, &s, 0.0, &mut substream(5, "f", &[]), 1.0);
        let at = |w: f64| leaf_value(kind, &s, 0.4, &mut substream(5, "f", &[]), w);
        close(at(0.0), 0.4, TOL, "weighted leaf w=0")?;
        close(at(1.0), roll, TOL, "weighted leaf w=1")?;
        for w in [0.2, 0.6] {
            close(at(w), (1.0 - w) * 0.4 + w * roll, TOL, "weighted leaf convex")?;
        }
    }
    // schedule weight endpoints and affinity
    close(schedule_weight(0, 5).unwrap(), 1.0, TOL, "w(0)")?;
    close(schedule_weight(5, 5).unwrap(), 0.0, TOL, "w(I')")?;
    let (w0, w1, w2) = (
        schedule_weight(0, 7).unwrap(),
        schedule_weight(1, 7).unwrap(),
        schedule_weight(2, 7).unwrap(),
    );
    close(w0 - w1, w1 - w2, TOL, "w affine")?;
    close(w0 - w1, 1.0 / 7.0, TOL, "w slope")?;
    // RHEA fitness
    close(
        fitness_from_results(&[(1.0, 3), (-1.0, 2), (0.0, 4)]),
        (1.0 / 3.0 - 0.5) / 3.0,
        TOL,
        "fitness",
    )?;
    close(fitness_from_results(&[(1.0, 1)]), 1.0, TOL, "fitness single")?;
    Ok("P-UCT, beta, blend, weighted leaf, schedule and fitness within 1e-12".into())
}

fn gobang_oracle() -> Check {
    let (states, value) = common::check_gobang3()?;
    ensure(value == 0, || format!("perfect-play value {value}, expected draw"))?;
    Ok(format!(
        "{states} reachable 3x3 states agree with minimax; value is a draw"
    ))
}

fn tiny_batch(kind: GameKind, size: usize, n: usize, seed: u64) -> Vec<TrainingExample> {
    use rand::Rng;
    let mut rng = substream(seed, "batch", &[]);
    let mut out = Vec::new();
    while out.len() < n {
        let mut moves = Vec::new();
        let start = GameState::new(kind, size, size.min(4)).unwrap();
        start.random_playout(&mut rng, &mut moves);
        let cut = rng.gen_range(0..moves.len().max(1));
        let mut s = start;
        for m in &moves[..cut] {
            s = s.apply_move(*m).unwrap();
        }
        if s.is_terminal() {
            continue;
        }
        let legal = s.legal_moves();
        let mut pi = vec![0f32; s.action_size()];
        let mut total = 0.0;
        for m in &legal {
            let w: f32 = rng.gen_range(0.1..1.0);
            pi[m.index()] = w;
            total += w;
        }
        pi.iter_mut().for_each(|p| *p /= total);
        out.push(TrainingExample {
            encoding: s.encode(),
            pi,
            z: [-1.0, 0.0, 1.0][rng.gen_range(0..3)],
        });
    }
    out
}

fn gradient_check() -> Check {
    use rand::Rng;
    let mut worst = 0.0f64;
    for kind in GameKind::ALL {
        let shape = NetShape::with_widths(kind, 4, 3, 5);
        let mut net = Network::<f64>::seeded(shape, 11);
        // Biases start at zero, which puts empty-patch units exactly on the
        // ReLU kink where finite differences are meaningless.
        let mut rng = substream(11, "bias", &[]);
        for t in [1, 3, 5, 7, 9, 11] {
            net.params_mut()[t]
                .iter_mut()
                .for_each(|b| *b = rng.gen_range(-0.1..0.1));
        }
        let examples = tiny_batch(kind, 4, 4, 3);
        let refs: Vec<&TrainingExample> = examples.iter().collect();
        let batch = make_batch::<f64>(&refs);
        let (_, grads) = net.loss_and_grad(&batch, None);
        let h = 1e-6;
        for (t, g) in grads.iter().enumerate() {
            let mut num = vec![0.0; g.len()];
            for (i, slot) in num.iter_mut().enumerate() {
                let mut plus = net.clone();
                plus.params_mut()[t][i] += h;
                let mut minus = net.clone();
                minus.params_mut()[t][i] -= h;
                *slot = (plus.batch_loss(&batch) - minus.batch_loss(&batch)) / (2.0 * h);
            }
            let diff: f64 = g.iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale: f64 =
                g.iter().map(|a| a * a).sum::<f64>().sqrt() + num.iter().map(|b| b * b).sum::<f64>().sqrt();
            let rel = if scale == 0.0 { 0.0 } else { diff / scale };
            ensure(rel < 1e-3, || format!("{kind} tensor {t}: relative error {rel:e}"))?;
            worst = worst.max(rel);
        }

        let mut adam = Adam::new(&net, 1e-3);
        let mut prev = net.batch_loss(&batch);
        let first = prev;
        for step in 0..50 {
            let (_, grads) = net.loss_and_grad(&batch, None);
            adam.apply(&mut net, &grads);
            let l = net.batch_loss(&batch);
            ensure(l < prev, || format!("{kind}: loss rose at step {step}: {prev} -> {l}"))?;
            prev = l;
        }
        ensure(prev < first, || format!("{kind}: no progress"))?;
    }
    Ok(format!(
        "worst per-tensor relative error {worst:.1e}; loss fell at each of 50 steps on all 3 games"
    ))
}

fn amaf() -> Check {
    let mut total = 0;
    for kind in GameKind::ALL {
        let root = GameState::new(kind, 6, 4).unwrap();
        let searcher = make_enhanced_searcher(
            EnhancementKind::RoRa,
            0,
            1,
            SearchConfig {
                simulations: 1000,
                c_puct: 1.0,
            },
        )
        .map_err(|e| e.to_string())?;
        let mut tree = SearchTree::new();
        let mut rng = substream(21, "amaf", &[kind as u64]);
        for sim in 0..1000 {
            let before = tree.clone();
            let trace = searcher
                .simulate(&root, &mut tree, &UniformEvaluator, &mut rng)
                .map_err(|e| e.to_string())?;
            let got = common::amaf_diff(&before, &tree);
            if let Some((pair, inc)) = got.iter().find(|(_, inc)| *inc != 1) {
                return Err(format!("{kind} simulation {sim}: {pair:?} incremented by {inc}"));
            }
            let got: std::collections::BTreeSet<_> = got.into_iter().map(|(p, _)| p).collect();
            let want = common::amaf_oracle(&trace.path_states, &trace.actions);
            ensure(got == want, || {
                format!(
                    "{kind} simulation {sim}: {} updated pairs, oracle {}; extra {:?}, missing {:?}",
                    got.len(),
                    want.len(),
                    got.difference(&want).next(),
                    want.difference(&got).next()
                )
            })?;
            total += got.len();
        }
    }
    Ok(format!(
        "3000 simulations, {total} updated pairs, all equal to the rescan oracle"
    ))
}

fn pair(a: &str, b: &str, wa: u64, wb: u64, d: u64) -> PairResult {
    PairResult {
        agent_a: a.into(),
        agent_b: b.into(),
        wins_a: wa,
        wins_b: wb,
        draws: d,
    }
}

fn elo() -> Check {
    let fit = |p: &[PairResult]| compute_elo(p).map_err(|e| e.to_string());
    for case in [
        vec![pair("a", "b", 10, 10, 0)],
        vec![pair("a", "b", 0, 0, 7), pair("a", "b", 3, 3, 0)],
        vec![
            pair("a", "b", 5, 5, 2),
            pair("b", "c", 5, 5, 2),
            pair("a", "c", 5, 5, 2),
        ],
    ] {
        let t = fit(&case)?;
        for r in &t.ratings {
            ensure(r.rating == 0.0, || {
                format!("symmetric case {case:?}: {} rated {}", r.agent, r.rating)
            })?;
        }
    }

    let t = fit(&[pair("a", "b", 15, 5, 0)])?;
    let gap = t.rating("a").unwrap() - t.rating("b").unwrap();
    let want = common::two_agent_elo_gap(16.0, 6.0);
    close(gap, want, 0.1, "15-5 gap")?;

    let records = vec![
        pair("x", "y", 12, 6, 2),
        pair("y", "z", 9, 9, 2),
        pair("z", "x", 4, 14, 2),
        pair("w", "x", 3, 15, 2),
    ];
    let base = fit(&records)?;
    let mut reversed = records.clone();
    reversed.reverse();
    let flipped: Vec<PairResult> = records
        .iter()
        .map(|p| pair(&p.agent_b, &p.agent_a, p.wins_b, p.wins_a, p.draws))
        .collect();
    for other in [fit(&reversed)?, fit(&flipped)?] {
        for (a, b) in base.ratings.iter().zip(&other.ratings) {
            ensure(a.agent == b.agent && a.rating.to_bits() == b.rating.to_bits(), || {
                format!("{} {} vs {} {}", a.agent, a.rating, b.agent, b.rating)
            })?;
        }
    }
    Ok(format!(
        "symmetric cases exactly 0; 15-5 gap {gap:.3} vs oracle {want:.3}; order and orientation bitwise invariant"
    ))
}

fn run_cli(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_warmstart"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n != "timings.csv") {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("r{k}"));
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        run_cli(
            &[
                "orientation",
                "--games",
                "20",
                "--seed",
                "3",
                "--workers",
                "1",
                "--out",
                "orientation.csv",
                "--records",
                "records.csv",
            ],
            &dir,
        )?;
        run_cli(
            &[
                "train",
                "--game",
                "gobang",
                "--I",
                "1",
                "--E",
                "4",
                "--m",
                "25",
                "--ep",
                "2",
                "--n",
                "4",
                "--seed",
                "3",
                "--workers",
                "1",
                "--output_dir",
                "run",
            ],
            &dir,
        )?;
        runs.push(tree_bytes(&dir));
    }
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    ensure(names.iter().any(|n| n.ends_with(".ckpt")), || {
        format!("no checkpoint among {names:?}")
    })?;
    ensure(runs[0] == runs[1], || {
        let diff: Vec<&String> = runs[0]
            .iter()
            .zip(&runs[1])
            .filter(|(a, b)| a != b)
            .map(|(a, _)| &a.0)
            .collect();
        format!("outputs differ: {diff:?}")
    })?;
    Ok(format!("{} output files byte-identical across two runs", names.len()))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [Criterion; 8] = [
        ("orientation win rates", orientation),
        ("scaled Connect Four training comparison", scaled_training),
        ("formulas", formulas),
        ("3x3 Gobang against minimax", gobang_oracle),
        ("gradient check and loss decrease", gradient_check),
        ("AMAF updates against the rescan oracle", amaf),
        ("Elo engine", elo),
        ("CLI determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = std::time::Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("PASS criterion {n} ({name}, {secs:.1}s): {msg}"),
            Err(msg) => {
                failures += 1;
                println!("FAIL criterion {n} ({name}, {secs:.1}s): {msg}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
