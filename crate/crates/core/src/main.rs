use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};

use warmstart::config::{parse_config, RunConfig, KEYS};
use warmstart::eval::{
    compute_elo, orientation_experiment, play_match, read_records_csv, round_robin, write_elo_csv,
    write_orientation_csv, write_records_csv, AgentSpec, EloTable, GameSetup, MatchConfig, MatchRecord, PairResult,
    PreparedAgent,
};
use warmstart::export::export_results;
use warmstart::pipeline::{train_loop, LoopOptions};
use warmstart::{GameKind, Result};

fn keys_help() -> String {
    let defaults = RunConfig::default();
    let mut s = String::from("Run configuration keys (config file `key=value`, or `train --<key> <value>`):\n");
    for (k, d) in KEYS {
        let v = defaults.get(k).unwrap_or_default();
        s.push_str(&format!("  {k:<12} {d} [default: {v}]\n"));
    }
    s
}

fn game_args(cmd: Command) -> Command {
    cmd.arg(
        Arg::new("game")
            .long("game")
            .default_value("gobang")
            .help("othello, connect4 or gobang"),
    )
    .arg(
        Arg::new("board_size")
            .long("board-size")
            .value_parser(value_parser!(usize))
            .default_value("6"),
    )
    .arg(
        Arg::new("win_length")
            .long("win-length")
            .value_parser(value_parser!(usize))
            .default_value("4"),
    )
    .arg(
        Arg::new("seed")
            .long("seed")
            .value_parser(value_parser!(u64))
            .default_value("0"),
    )
    .arg(
        Arg::new("workers")
            .long("workers")
            .value_parser(value_parser!(usize))
            .default_value("1"),
    )
}

fn cli() -> Command {
    let mut train = Command::new("train")
        .about("Run the self-play training loop (resumes an existing run directory)")
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("key=value config file"),
        )
        .after_help(keys_help());
    for (k, d) in KEYS {
        train = train.arg(Arg::new(k).long(k).value_name("VALUE").help(d));
    }

    Command::new("warmstart")
        .about("Self-play training with warm-start search enhancements for Othello, Connect Four and Gobang")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .after_help(keys_help())
        .subcommand(train)
        .subcommand(
            Command::new("orientation")
                .about("Random, MCTS, RAVE and RHEA against each other on all three games")
                .arg(
                    Arg::new("games")
                        .long("games")
                        .value_parser(value_parser!(usize))
                        .default_value("100")
                        .help("games per pairing"),
                )
                .arg(
                    Arg::new("seed")
                        .long("seed")
                        .value_parser(value_parser!(u64))
                        .default_value("0"),
                )
                .arg(
                    Arg::new("workers")
                        .long("workers")
                        .value_parser(value_parser!(usize))
                        .default_value("1"),
                )
                .arg(Arg::new("out").long("out").default_value("orientation.csv"))
                .arg(
                    Arg::new("records")
                        .long("records")
                        .help("also write per-game records here"),
                ),
        )
        .subcommand(game_args(
            Command::new("tournament")
                .about("Round robin over the listed agents, then Elo ratings")
                .arg(
                    Arg::new("agents")
                        .required(true)
                        .num_args(2..)
                        .help("random, mcts[:m], rave[:m], rhea or nn:<checkpoint>[@m]"),
                )
                .arg(
                    Arg::new("games")
                        .long("games")
                        .value_parser(value_parser!(usize))
                        .default_value("20")
                        .help("games per pair"),
                )
                .arg(Arg::new("out_dir").long("out-dir").default_value("tournament")),
        ))
        .subcommand(
            Command::new("elo")
                .about("Fit Elo ratings to a records.csv")
                .arg(Arg::new("records").required(true))
                .arg(Arg::new("out").long("out").help("write elo.csv here")),
        )
        .subcommand(game_args(
            Command::new("pit")
                .about("Play a match between two agents")
                .arg(Arg::new("a").required(true))
                .arg(Arg::new("b").required(true))
                .arg(
                    Arg::new("games")
                        .long("games")
                        .value_parser(value_parser!(usize))
                        .default_value("20"),
                )
                .arg(Arg::new("records").long("records").help("write per-game records here")),
        ))
        .subcommand(
            Command::new("export")
                .about("Collect reports and records of run directories")
                .arg(Arg::new("runs").required(true).num_args(1..).action(ArgAction::Append))
                .arg(Arg::new("out").long("out").default_value("export")),
        )
}

fn setup_from(m: &ArgMatches) -> Result<GameSetup> {
    let game: GameKind = m.get_one::<String>("game").unwrap().parse()?;
    let setup = GameSetup {
        board_size: *m.get_one("board_size").unwrap(),
        win_length: *m.get_one("win_length").unwrap(),
        ..GameSetup::new(game)
    };
    setup.initial_state()?;
    Ok(setup)
}

fn print_elo(table: &EloTable) {
    println!("agent,rating,games");
    for r in &table.ratings {
        println!("{},{:.1},{}", r.agent, r.rating, r.games);
    }
}

fn print_record(rec: &MatchRecord) {
    println!(
        "{} vs {}: {} wins, {} draws, {} losses ({:.1}%)",
        rec.agent_a,
        rec.agent_b,
        rec.wins_a,
        rec.draws,
        rec.wins_b,
        rec.score_a()
    );
}

fn run(m: ArgMatches) -> Result<()> {
    match m.subcommand() {
        Some(("train", m)) => {
            let file = m.get_one::<String>("config").map(PathBuf::from);
            let overrides: Vec<(String, String)> = KEYS
                .iter()
                .filter_map(|(k, _)| m.get_one::<String>(k).map(|v| (k.to_string(), v.clone())))
                .collect();
            let cfg = parse_config(file.as_deref(), &overrides)?;
            println!("run directory {} (config {})", cfg.output_dir.display(), cfg.hash());
            let run = train_loop(&cfg, LoopOptions::default())?;
            if run.resumed_at > 0 {
                println!("resumed after {} finished iterations", run.resumed_at);
            }
            for r in &run.reports {
                println!(
                    "iteration {}: {} examples, loss {:.4}, arena {}/{}/{} {}",
                    r.iteration,
                    r.examples,
                    r.mean_loss(),
                    r.arena.wins,
                    r.arena.draws,
                    r.arena.losses,
                    if r.accepted { "accepted" } else { "rejected" }
                );
            }
        }
        Some(("orientation", m)) => {
            let tables = orientation_experiment(
                &GameKind::ALL,
                *m.get_one("games").unwrap(),
                *m.get_one("seed").unwrap(),
                *m.get_one("workers").unwrap(),
            )?;
            let out = Path::new(m.get_one::<String>("out").unwrap());
            write_orientation_csv(out, &tables)?;
            if let Some(path) = m.get_one::<String>("records") {
                let records: Vec<MatchRecord> = tables.iter().flat_map(|t| t.records.clone()).collect();
                write_records_csv(Path::new(path), &records)?;
            }
            print!(
                "{}",
                std::fs::read_to_string(out).map_err(|e| warmstart::Error::io(out, e))?
            );
        }
        Some(("tournament", m)) => {
            let setup = setup_from(m)?;
            let agents: Vec<PreparedAgent> = m
                .get_many::<String>("agents")
                .unwrap()
                .map(|a| PreparedAgent::new(a.parse::<AgentSpec>()?, &setup))
                .collect::<Result<_>>()?;
            let cfg = MatchConfig {
                setup,
                games: *m.get_one("games").unwrap(),
                seed: *m.get_one("seed").unwrap(),
                workers: *m.get_one("workers").unwrap(),
            };
            let records = round_robin(&agents, &cfg)?;
            let dir = PathBuf::from(m.get_one::<String>("out_dir").unwrap());
            std::fs::create_dir_all(&dir).map_err(|e| warmstart::Error::io(&dir, e))?;
            write_records_csv(&dir.join("records.csv"), &records)?;
            records.iter().for_each(print_record);
            let pairs: Vec<PairResult> = records.iter().map(MatchRecord::pair_result).collect();
            let table = compute_elo(&pairs)?;
            write_elo_csv(&dir.join("elo.csv"), &table)?;
            print_elo(&table);
        }
        Some(("elo", m)) => {
            let rows = read_records_csv(Path::new(m.get_one::<String>("records").unwrap()))?;
            let pairs: Vec<PairResult> = MatchRecord::from_rows(&rows)
                .iter()
                .map(MatchRecord::pair_result)
                .collect();
            let table = compute_elo(&pairs)?;
            if let Some(out) = m.get_one::<String>("out") {
                write_elo_csv(Path::new(out), &table)?;
            }
            print_elo(&table);
        }
        Some(("pit", m)) => {
            let setup = setup_from(m)?;
            let a = PreparedAgent::new(m.get_one::<String>("a").unwrap().parse()?, &setup)?;
            let b = PreparedAgent::new(m.get_one::<String>("b").unwrap().parse()?, &setup)?;
            let cfg = MatchConfig {
                setup,
                games: *m.get_one("games").unwrap(),
                seed: *m.get_one("seed").unwrap(),
                workers: *m.get_one("workers").unwrap(),
            };
            let rec = play_match(&a, &b, &cfg, 0)?;
            if let Some(path) = m.get_one::<String>("records") {
                write_records_csv(Path::new(path), std::slice::from_ref(&rec))?;
            }
            print_record(&rec);
        }
        Some(("export", m)) => {
            let runs: Vec<PathBuf> = m.get_many::<String>("runs").unwrap().map(PathBuf::from).collect();
            let out = PathBuf::from(m.get_one::<String>("out").unwrap());
            let summary = export_results(&runs, &out)?;
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
        }
        _ => unreachable!("clap requires a subcommand"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(cli().get_matches()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
