//! Config-driven experiment runner: gap-vs-reveals curves, coalition-size
//! selection histograms, and the largest-first scaling study.
//!
//! A run is a pure function of its config: trial games are drawn from
//! dedicated RNG streams, trials are scored in parallel but aggregated in
//! trial order, and every CSV embeds a hash of the config that produced it.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{line_chart, Series};
use crate::game::Game;
use crate::generators::{Distribution, DistributionKind};
use crate::policies::{default_kappa, PolicyKind, PreparedPolicy, Trajectory, OPTIMAL_MAX_PLAYERS};
use crate::{Error, Result, MAX_PLAYERS};

/// Trial games are drawn from streams `TRIAL_STREAM_BASE..`, disjoint from
/// the streams `0..kappa` that drive offline gap estimation.
pub const TRIAL_STREAM_BASE: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Mean gap per reveal step, per policy.
    GapCurves,
    /// Cumulative fraction of selected coalitions per size, per step.
    SelectionHistogram,
    /// Gap after revealing the largest coalitions vs a random budget of the
    /// same size, across player counts.
    LargestFirstScaling,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::GapCurves => "gap_curves",
            ExperimentKind::SelectionHistogram => "selection_histogram",
            ExperimentKind::LargestFirstScaling => "largest_first_scaling",
        }
    }
}

/// Optional distribution parameters. `fixed_owner` is 1-based in configs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistParams {
    pub fixed_owner: Option<usize>,
    pub density: Option<f64>,
    /// Smallest player count for the scaling experiment.
    pub n_min: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    pub kind: DistributionKind,
    pub n: usize,
    #[serde(default)]
    pub params: DistParams,
}

impl DistributionConfig {
    /// The distribution at the configured player count.
    pub fn build(&self) -> Result<Distribution> {
        self.build_for(self.n)
    }

    /// The distribution at a different player count (scaling experiment).
    pub fn build_for(&self, n: usize) -> Result<Distribution> {
        let mut dist = Distribution::new(self.kind, n);
        if let Some(owner) = self.params.fixed_owner {
            if owner == 0 || owner > n {
                return Err(Error::Config(format!(
                    "fixed_owner must be a 1-based player in 1..={n}, got {owner}"
                )));
            }
            dist = dist.with_fixed_owner(owner - 1);
        }
        if let Some(density) = self.params.density {
            dist = dist.with_density(density);
        }
        Ok(dist)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub distribution: DistributionConfig,
    pub policies: Vec<PolicyKind>,
    /// Reveal budget (steps per trajectory).
    pub t: usize,
    pub trials: usize,
    /// Samples for offline gap estimation; defaults per player count.
    #[serde(default)]
    pub kappa: Option<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// Reads and parses a config file; parse errors name the offending field.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn validate_config(cfg: &ExperimentConfig) -> Result<()> {
    let n = cfg.distribution.n;
    if !(2..=MAX_PLAYERS).contains(&n) {
        return Err(Error::Config(format!(
            "distribution.n must be in 2..={MAX_PLAYERS}, got {n}"
        )));
    }
    if cfg.policies.is_empty() {
        return Err(Error::Config("policies must not be empty".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if cfg.kappa == Some(0) {
        return Err(Error::Config("kappa must be at least 1".into()));
    }
    for &p in &cfg.policies {
        if p.is_optimal() && n > OPTIMAL_MAX_PLAYERS {
            return Err(Error::SizeLimit {
                n,
                limit: OPTIMAL_MAX_PLAYERS,
            });
        }
    }
    let available = (1usize << n) - n - 2;
    if cfg.t > available {
        return Err(Error::BudgetInfeasible {
            requested: cfg.t,
            available,
        });
    }
    if let Some(density) = cfg.distribution.params.density {
        if !(density > 0.0 && density <= 1.0) {
            return Err(Error::Config(format!(
                "density must be in (0, 1], got {density}"
            )));
        }
    }
    // the scaling study sweeps n_min..=n and needs every count to have
    // unknown coalitions
    let n_min = cfg.distribution.params.n_min.unwrap_or(3);
    if cfg.experiment == ExperimentKind::LargestFirstScaling {
        if n_min < 3 || n_min > n {
            return Err(Error::Config(format!(
                "n_min must be in 3..={n}, got {n_min}"
            )));
        }
        if let Some(owner) = cfg.distribution.params.fixed_owner {
            if owner > n_min {
                return Err(Error::Config(format!(
                    "fixed_owner {owner} exceeds the smallest player count {n_min}"
                )));
            }
        }
    }
    // side effect: surfaces owner/density issues early
    cfg.distribution.build()?;
    Ok(())
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Hash of the canonical JSON form of the config, embedded in every CSV so
/// outputs can be matched to the run that produced them.
pub fn config_hash(cfg: &ExperimentConfig) -> u64 {
    fnv1a(serde_json::to_string(cfg).expect("configs serialize").as_bytes())
}

/// Sample mean, sample standard deviation, and standard error of the mean.
pub fn summary_stats(xs: &[f64]) -> (f64, f64, f64) {
    let count = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / count;
    if xs.len() < 2 {
        return (mean, 0.0, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1.0);
    let std = var.sqrt();
    (mean, std, std / count.sqrt())
}

/// Runs the configured experiment and returns the files written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    validate_config(cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    match cfg.experiment {
        ExperimentKind::GapCurves => gap_curves(cfg),
        ExperimentKind::SelectionHistogram => selection_histogram(cfg),
        ExperimentKind::LargestFirstScaling => largest_first_scaling(cfg),
    }
}

/// Trial games, normalized so gaps are comparable across samples.
fn trial_games(dist: &Distribution, trials: usize, seed: u64) -> Result<Vec<Game>> {
    (0..trials)
        .map(|j| {
            let g = dist.sample(seed, TRIAL_STREAM_BASE + j as u64)?;
            Ok(g.normalize()?.game)
        })
        .collect()
}

/// Scores every trial in parallel; results come back in trial order.
fn trajectories(policy: &PreparedPolicy, games: &[Game]) -> Result<Vec<Trajectory>> {
    let results: Vec<Result<Trajectory>> = games
        .par_iter()
        .enumerate()
        .map(|(j, g)| policy.trajectory(g, j as u64))
        .collect();
    results.into_iter().collect()
}

fn write_csv(
    cfg: &ExperimentConfig,
    name: &str,
    header: &str,
    rows: &[String],
) -> Result<PathBuf> {
    let path = cfg.out_dir.join(name);
    let mut out = format!(
        "# config_hash={:016x} seed={}\n{header}\n",
        config_hash(cfg),
        cfg.seed
    );
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    fs::write(&path, out)?;
    Ok(path)
}

fn write_svg(cfg: &ExperimentConfig, name: &str, svg: String) -> Result<PathBuf> {
    let path = cfg.out_dir.join(name);
    fs::write(&path, svg)?;
    Ok(path)
}

fn gap_curves(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dist = cfg.distribution.build()?;
    let n = dist.n;
    let kappa = cfg.kappa.unwrap_or_else(|| default_kappa(n));
    let games = trial_games(&dist, cfg.trials, cfg.seed)?;
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for &kind in &cfg.policies {
        let policy = PreparedPolicy::prepare(kind, Some(&dist), n, cfg.t, kappa, cfg.seed)?;
        let trajs = trajectories(&policy, &games)?;
        let mut points = Vec::with_capacity(cfg.t + 1);
        let mut band = Vec::with_capacity(cfg.t + 1);
        for step in 0..=cfg.t {
            let xs: Vec<f64> = trajs.iter().map(|tr| tr.gaps[step]).collect();
            let (mean, std, stderr) = summary_stats(&xs);
            rows.push(format!("{},{step},{mean},{std},{stderr}", kind.as_str()));
            points.push((step as f64, mean));
            band.push((step as f64, mean - std, mean + std));
        }
        series.push(Series::new(kind.as_str(), points).with_band(band));
    }
    let csv = write_csv(cfg, "gap_curves.csv", "policy,step,mean,std,stderr", &rows)?;
    let svg = write_svg(
        cfg,
        "gap_curves.svg",
        line_chart(
            "Mean utopian gap per revealed coalition",
            "revealed coalitions",
            "mean gap (normalized)",
            &series,
        ),
    )?;
    Ok(vec![csv, svg])
}

fn selection_histogram(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dist = cfg.distribution.build()?;
    let n = dist.n;
    let kappa = cfg.kappa.unwrap_or_else(|| default_kappa(n));
    let games = trial_games(&dist, cfg.trials, cfg.seed)?;
    let sizes: Vec<usize> = (2..n).collect();
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for &kind in &cfg.policies {
        let policy = PreparedPolicy::prepare(kind, Some(&dist), n, cfg.t, kappa, cfg.seed)?;
        let trajs = trajectories(&policy, &games)?;
        // counts[step - 1][size] over all reveals up to `step`, all trials
        let mut counts = vec![vec![0u64; n + 1]; cfg.t];
        for tr in &trajs {
            let mut running = vec![0u64; n + 1];
            for (step, c) in tr.revealed.iter().enumerate() {
                running[c.size()] += 1;
                for (size, cell) in counts[step].iter_mut().enumerate() {
                    *cell += running[size];
                }
            }
        }
        let mut by_size: Vec<Vec<(f64, f64)>> = vec![Vec::new(); sizes.len()];
        for step in 1..=cfg.t {
            let total = (step * cfg.trials) as f64;
            for (si, &size) in sizes.iter().enumerate() {
                let fraction = counts[step - 1][size] as f64 / total;
                rows.push(format!("{},{step},{size},{fraction}", kind.as_str()));
                by_size[si].push((step as f64, fraction));
            }
        }
        for (si, &size) in sizes.iter().enumerate() {
            series.push(Series::new(
                format!("{} size {size}", kind.as_str()),
                by_size[si].clone(),
            ));
        }
    }
    let csv = write_csv(
        cfg,
        "selection_histogram.csv",
        "policy,step,size,fraction",
        &rows,
    )?;
    let svg = write_svg(
        cfg,
        "selection_histogram.svg",
        line_chart(
            "Cumulative share of selected coalitions by size",
            "revealed coalitions",
            "fraction of selections",
            &series,
        ),
    )?;
    Ok(vec![csv, svg])
}

fn largest_first_scaling(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let n_max = cfg.distribution.n;
    let n_min = cfg.distribution.params.n_min.unwrap_or(3);
    let mut rows = Vec::new();
    let mut by_policy: Vec<Vec<(f64, f64)>> = vec![Vec::new(); cfg.policies.len()];
    for n in n_min..=n_max {
        let dist = cfg.distribution.build_for(n)?;
        let kappa = cfg.kappa.unwrap_or_else(|| default_kappa(n));
        let games = trial_games(&dist, cfg.trials, cfg.seed)?;
        // with the default t >= n this reveals every size-(n-1) coalition
        // under the largest-first policy
        let budget = cfg.t.min(n);
        for (pi, &kind) in cfg.policies.iter().enumerate() {
            let policy = PreparedPolicy::prepare(kind, Some(&dist), n, budget, kappa, cfg.seed)?;
            let trajs = trajectories(&policy, &games)?;
            let initial: Vec<f64> = trajs.iter().map(|tr| tr.gaps[0]).collect();
            let finals: Vec<f64> = trajs.iter().map(|tr| tr.gaps[budget]).collect();
            let (mean_initial, _, _) = summary_stats(&initial);
            let (mean, std, stderr) = summary_stats(&finals);
            let reduction = if mean_initial > 0.0 {
                1.0 - mean / mean_initial
            } else {
                0.0
            };
            rows.push(format!(
                "{n},{},{budget},{mean_initial},{mean},{std},{stderr},{reduction}",
                kind.as_str()
            ));
            by_policy[pi].push((n as f64, mean));
        }
    }
    let mut series = Vec::new();
    for (pi, &kind) in cfg.policies.iter().enumerate() {
        series.push(Series::new(kind.as_str(), by_policy[pi].clone()));
    }
    let csv = write_csv(
        cfg,
        "largest_first_scaling.csv",
        "n,policy,budget,mean_initial,mean_gap,std,stderr,reduction",
        &rows,
    )?;
    let svg = write_svg(
        cfg,
        "largest_first_scaling.svg",
        line_chart(
            "Gap after the budget is spent, by player count",
            "players",
            "mean gap (normalized)",
            &series,
        ),
    )?;
    Ok(vec![csv, svg])
}
