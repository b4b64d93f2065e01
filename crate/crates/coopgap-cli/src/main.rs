//! Command line for the coopgap library: sample games, evaluate gaps and
//! bounds, run reveal policies, audit gap supermodularity, and drive the
//! experiment harness.
//!
//! Players are 1-based on the command line and in emitted JSON; the library
//! itself indexes from 0.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coopgap::analysis::{
    audit_gap_supermodularity, check_criterion, criterion_coefficient, criterion_witness_quad,
    AuditOptions,
};
use coopgap::experiment::{load_config, run_experiment, TRIAL_STREAM_BASE};
use coopgap::game::{Coalition, Game, KnownSet};
use coopgap::gap::gap_report;
use coopgap::generators::Distribution;
use coopgap::policies::{default_kappa, PolicyKind, PreparedPolicy};
use coopgap::Error;

#[derive(Parser)]
#[command(name = "coopgap", version, about = "Gap analysis for incompletely known cooperative games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample games from a distribution, one JSON object per line.
    Generate {
        /// Game family (factory, factory-square, factory-exp, noisy-factory,
        /// graph-uniform, graph-decreasing, graph-poisson, totally-monotonic,
        /// symmetric, unanimity).
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Pin the factory owner (1-based player).
        #[arg(long)]
        fixed_owner: Option<usize>,
        /// Coalition density for the totally-monotonic family.
        #[arg(long)]
        density: Option<f64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gap report for a game under partial information.
    Gap {
        /// Game JSON file ({"n": .., "values": [..]}).
        #[arg(long)]
        game: PathBuf,
        /// Extra revealed coalitions beyond singletons and the grand
        /// coalition, e.g. "1,2;1,3" (players 1-based, ';' separated).
        #[arg(long, default_value = "")]
        reveal: String,
    },
    /// Run a reveal policy over sampled trial games; per-step CSV rows.
    /// Gaps are on the normalized scale (worth 1 for the grand coalition,
    /// 0 for singletons).
    Run {
        /// Policy (random, offline-greedy, offline-optimal, oracle-greedy,
        /// oracle-optimal, largest-first).
        #[arg(long)]
        policy: String,
        /// Trial game family (see `generate --kind`).
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: usize,
        /// Reveal budget.
        #[arg(long)]
        t: usize,
        /// Samples for offline gap estimation (defaults per player count).
        #[arg(long)]
        kappa: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long)]
        fixed_owner: Option<usize>,
        #[arg(long)]
        density: Option<f64>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit whether the game's gap is supermodular over reveals.
    Audit {
        #[arg(long)]
        game: PathBuf,
        /// Force exhaustive enumeration (player count at most 5).
        #[arg(long)]
        exhaustive: bool,
        /// Randomized mode with this many sampled reveal pairs.
        #[arg(long, conflicts_with = "exhaustive")]
        budget: Option<u64>,
        /// Lift the cap on the number of extra known coalitions.
        #[arg(long)]
        full: bool,
        /// Also report the pair-excess criterion (six or more players).
        #[arg(long)]
        criterion: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a config-driven experiment; prints the files written.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::SizeLimit { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> coopgap::Result<()> {
    match command {
        Command::Generate {
            kind,
            n,
            seed,
            count,
            fixed_owner,
            density,
            out,
        } => {
            let dist = distribution(&kind, n, fixed_owner, density)?;
            let mut lines = String::new();
            for index in 0..count {
                let game = dist.sample(seed, index)?;
                let mut value: serde_json::Value = serde_json::from_str(&game.to_json())?;
                let obj = value.as_object_mut().expect("game JSON is an object");
                obj.insert("kind".into(), dist.kind.as_str().into());
                obj.insert("seed".into(), seed.into());
                obj.insert("index".into(), index.into());
                lines.push_str(&serde_json::to_string(&value)?);
                lines.push('\n');
            }
            emit(out.as_deref(), &lines)
        }
        Command::Gap { game, reveal } => {
            let g = read_game(&game)?;
            let extras = parse_reveals(&reveal, g.n())?;
            let k = KnownSet::with_extras(g.n(), &extras);
            let report = gap_report(&g, &k)?;
            let output = serde_json::json!({
                "n": g.n(),
                "revealed": extras.iter().map(|c| players_1based(*c)).collect::<Vec<_>>(),
                "gap": report.gap,
                "delta": report.delta,
                "utopian_shapley": report.utopian_shapley,
            });
            println!("{}", serde_json::to_string_pretty(&output)?);
            Ok(())
        }
        Command::Run {
            policy,
            dist,
            n,
            t,
            kappa,
            seed,
            trials,
            fixed_owner,
            density,
            out,
        } => {
            let kind: PolicyKind = policy.parse()?;
            let dist = distribution(&dist, n, fixed_owner, density)?;
            let kappa = kappa.unwrap_or_else(|| default_kappa(n));
            let prepared = PreparedPolicy::prepare(kind, Some(&dist), n, t, kappa, seed)?;
            let mut csv = format!(
                "# policy={} dist={} n={n} t={t} kappa={kappa} seed={seed} trials={trials}\n",
                kind.as_str(),
                dist.kind.as_str()
            );
            csv.push_str("trial,step,revealed_bitmask,gap\n");
            for trial in 0..trials {
                let game = dist.sample(seed, TRIAL_STREAM_BASE + trial)?.normalize()?.game;
                let trajectory = prepared.trajectory(&game, trial)?;
                csv.push_str(&format!("{trial},0,0,{}\n", trajectory.gaps[0]));
                for (step, c) in trajectory.revealed.iter().enumerate() {
                    csv.push_str(&format!(
                        "{trial},{},{},{}\n",
                        step + 1,
                        c.bits(),
                        trajectory.gaps[step + 1]
                    ));
                }
            }
            emit(out.as_deref(), &csv)
        }
        Command::Audit {
            game,
            exhaustive,
            budget,
            full,
            criterion,
            seed,
        } => {
            let g = read_game(&game)?;
            let opts = AuditOptions {
                exhaustive: exhaustive || (budget.is_none() && g.n() <= 5),
                extras_cap: if full { None } else { Some(4) },
                budget: budget.unwrap_or(20_000),
                seed,
            };
            let report = audit_gap_supermodularity(&g, &opts)?;
            let witness = report.witness.as_ref().map(|w| {
                serde_json::json!({
                    "known_extras": w.extras.iter().map(|c| players_1based(*c)).collect::<Vec<_>>(),
                    "s": players_1based(w.s),
                    "z": players_1based(w.z),
                    "value": w.value,
                })
            });
            let mut output = serde_json::json!({
                "n": g.n(),
                "exhaustive": opts.exhaustive,
                "supermodular": report.supermodular,
                "quads_checked": report.quads_checked,
                "witness": witness,
            });
            if criterion {
                let quad = check_criterion(&g)?;
                let entry = match quad {
                    Some(q) => serde_json::json!({
                        "coefficient": criterion_coefficient(g.n())?,
                        "quadruple": q.iter().map(|p| p + 1).collect::<Vec<_>>(),
                        "quad_value": criterion_witness_quad(&g, q)?,
                    }),
                    None => serde_json::json!({
                        "coefficient": criterion_coefficient(g.n())?,
                        "quadruple": null,
                    }),
                };
                output
                    .as_object_mut()
                    .expect("output is an object")
                    .insert("criterion".into(), entry);
            }
            println!("{}", serde_json::to_string_pretty(&output)?);
            Ok(())
        }
        Command::Experiment { config } => {
            let cfg = load_config(&config)?;
            for path in run_experiment(&cfg)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn distribution(
    kind: &str,
    n: usize,
    fixed_owner: Option<usize>,
    density: Option<f64>,
) -> coopgap::Result<Distribution> {
    let mut dist = Distribution::new(kind.parse()?, n);
    if let Some(owner) = fixed_owner {
        if owner == 0 || owner > n {
            return Err(Error::InvalidArgument(format!(
                "--fixed-owner is 1-based and must be in 1..={n}, got {owner}"
            )));
        }
        dist = dist.with_fixed_owner(owner - 1);
    }
    if let Some(density) = density {
        dist = dist.with_density(density);
    }
    Ok(dist)
}

fn read_game(path: &PathBuf) -> coopgap::Result<Game> {
    Game::from_json(&std::fs::read_to_string(path)?)
}

/// Parses "1,2;1,3" (1-based players, ';' between coalitions).
fn parse_reveals(spec: &str, n: usize) -> coopgap::Result<Vec<Coalition>> {
    let mut out = Vec::new();
    for part in spec.split(';').filter(|p| !p.trim().is_empty()) {
        let mut players = Vec::new();
        for token in part.split(',') {
            let p: usize = token.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("cannot parse player {token:?} in {part:?}"))
            })?;
            if p == 0 || p > n {
                return Err(Error::InvalidArgument(format!(
                    "player {p} out of range 1..={n} in {part:?}"
                )));
            }
            players.push(p - 1);
        }
        out.push(Coalition::from_players(&players));
    }
    Ok(out)
}

fn players_1based(c: Coalition) -> Vec<usize> {
    c.players().map(|p| p + 1).collect()
}

fn emit(out: Option<&std::path::Path>, content: &str) -> coopgap::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}
