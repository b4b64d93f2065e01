//! Revelation policies: which coalition values to acquire, in what order,
//! and how much gap each acquisition removes.
//!
//! Offline policies pick reveals from distribution knowledge alone, scored by
//! Monte-Carlo estimates of the expected gap; oracle policies see the true
//! game and mark the best achievable. Ties between equally good candidates
//! always resolve to the lexicographically smallest bitmask (sequence), so
//! every policy is deterministic given its inputs.

use rand::seq::SliceRandom;

use crate::bounds::bounds_pair;
use crate::game::{Coalition, Game, KnownSet};
use crate::gap::GapWeights;
use crate::generators::{rng_for, Distribution};
use crate::{Error, Result};

/// Player counts above this make subset enumeration infeasible.
pub const OPTIMAL_MAX_PLAYERS: usize = 5;

/// Gap differences below this count as ties and fall through to the
/// lexicographic tie-break.
const TIE_TOL: f64 = 1e-12;

/// Default Monte-Carlo sample counts for offline policies.
pub fn default_kappa(n: usize) -> usize {
    if n <= 4 {
        100
    } else {
        10
    }
}

/// One policy run: the coalitions revealed in order and the gap after each
/// step, with `gaps[0]` the minimal-information gap (so `gaps` has one more
/// entry than `revealed`).
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub revealed: Vec<Coalition>,
    pub gaps: Vec<f64>,
}

/// Evaluates gaps for a fixed bag of sampled games, so candidate reveal sets
/// can be compared against common samples. Samples are normalized once;
/// reported gaps are on each sample's input scale.
pub struct GapEvaluator {
    n: usize,
    weights: GapWeights,
    samples: Vec<(Game, f64)>,
}

impl GapEvaluator {
    /// Draws `kappa` games (streams `0..kappa` of `seed`).
    pub fn from_distribution(dist: &Distribution, kappa: usize, seed: u64) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::InvalidArgument("kappa must be at least 1".into()));
        }
        let mut samples = Vec::with_capacity(kappa);
        for j in 0..kappa {
            let g = dist.sample(seed, j as u64)?;
            let norm = g.normalize()?;
            let factor = norm.raw_factor();
            samples.push((norm.game, factor));
        }
        Ok(GapEvaluator {
            n: dist.n,
            weights: GapWeights::new(dist.n),
            samples,
        })
    }

    /// Point evaluation on a single known game.
    pub fn from_game(g: &Game) -> Result<Self> {
        let norm = g.normalize()?;
        let factor = norm.raw_factor();
        Ok(GapEvaluator {
            n: g.n(),
            weights: GapWeights::new(g.n()),
            samples: vec![(norm.game, factor)],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn gap_of(&self, sample: &(Game, f64), k: &KnownSet) -> Result<f64> {
        let bp = bounds_pair(&sample.0, k)?;
        let mut total = 0.0;
        for s in 0..sample.0.num_coalitions() {
            let width = bp.upper()[s] - bp.lower()[s];
            total += self.weights.for_size((s as u32).count_ones() as usize) * width;
        }
        Ok(total * sample.1)
    }

    /// Mean gap over the samples under the given known set.
    pub fn mean_gap(&self, k: &KnownSet) -> Result<f64> {
        let mut total = 0.0;
        for sample in &self.samples {
            total += self.gap_of(sample, k)?;
        }
        Ok(total / self.samples.len() as f64)
    }

    /// Mean gap with the minimal information plus `extras` revealed.
    pub fn mean_gap_extras(&self, extras: &[Coalition]) -> Result<f64> {
        self.mean_gap(&KnownSet::with_extras(self.n, extras))
    }
}

/// Monte-Carlo estimate of the expected gap after revealing `revealed`.
pub fn expected_gap(
    dist: &Distribution,
    revealed: &[Coalition],
    kappa: usize,
    seed: u64,
) -> Result<f64> {
    GapEvaluator::from_distribution(dist, kappa, seed)?.mean_gap_extras(revealed)
}

fn check_budget(n: usize, t: usize) -> Result<Vec<Coalition>> {
    let unknowns = KnownSet::minimal(n).unknown();
    if t > unknowns.len() {
        return Err(Error::BudgetInfeasible {
            requested: t,
            available: unknowns.len(),
        });
    }
    Ok(unknowns)
}

fn check_optimal_size(n: usize) -> Result<()> {
    if n > OPTIMAL_MAX_PLAYERS {
        return Err(Error::SizeLimit {
            n,
            limit: OPTIMAL_MAX_PLAYERS,
        });
    }
    Ok(())
}

/// Exhaustive best subset of `t` reveals under the evaluator's mean gap.
/// Candidates are enumerated in lexicographic order of their sorted bitmask
/// sequence and only strict improvements replace the incumbent, so ties
/// resolve to the lexicographically smallest set.
fn best_subset(eval: &GapEvaluator, t: usize) -> Result<Vec<Coalition>> {
    use itertools::Itertools;
    let unknowns = check_budget(eval.n(), t)?;
    let mut best: Option<(f64, Vec<Coalition>)> = None;
    for combo in unknowns.into_iter().combinations(t) {
        let value = eval.mean_gap_extras(&combo)?;
        match &best {
            Some((incumbent, _)) if value >= incumbent - TIE_TOL => {}
            _ => best = Some((value, combo)),
        }
    }
    Ok(best.expect("at least the empty combination exists").1)
}

/// Greedy reveal order: each step adds the single coalition that minimizes
/// the evaluator's mean gap given the prefix, ties to the smallest bitmask.
fn greedy_order(eval: &GapEvaluator, t: usize) -> Result<Vec<Coalition>> {
    let unknowns = check_budget(eval.n(), t)?;
    let mut chosen: Vec<Coalition> = Vec::with_capacity(t);
    let mut remaining = unknowns;
    for _ in 0..t {
        let mut best: Option<(f64, usize)> = None;
        for (pos, &c) in remaining.iter().enumerate() {
            chosen.push(c);
            let value = eval.mean_gap_extras(&chosen)?;
            chosen.pop();
            match &best {
                Some((incumbent, _)) if value >= incumbent - TIE_TOL => {}
                _ => best = Some((value, pos)),
            }
        }
        let (_, pos) = best.expect("budget check guarantees candidates");
        chosen.push(remaining.remove(pos));
    }
    Ok(chosen)
}

/// Best size-`t` reveal set for the distribution, estimated on `kappa`
/// common samples. Exhaustive; limited to small player counts.
pub fn offline_optimal(
    dist: &Distribution,
    t: usize,
    kappa: usize,
    seed: u64,
) -> Result<Vec<Coalition>> {
    check_optimal_size(dist.n)?;
    best_subset(&GapEvaluator::from_distribution(dist, kappa, seed)?, t)
}

/// Greedy reveal order for the distribution on `kappa` common samples.
pub fn offline_greedy(
    dist: &Distribution,
    t: usize,
    kappa: usize,
    seed: u64,
) -> Result<Vec<Coalition>> {
    greedy_order(&GapEvaluator::from_distribution(dist, kappa, seed)?, t)
}

/// Best size-`t` reveal set when the true game is known.
pub fn oracle_optimal(g: &Game, t: usize) -> Result<Vec<Coalition>> {
    check_optimal_size(g.n())?;
    best_subset(&GapEvaluator::from_game(g)?, t)
}

/// Greedy reveal order when the true game is known.
pub fn oracle_greedy(g: &Game, t: usize) -> Result<Vec<Coalition>> {
    greedy_order(&GapEvaluator::from_game(g)?, t)
}

/// `t` unknown coalitions drawn uniformly without replacement.
pub fn random_policy(n: usize, t: usize, seed: u64) -> Result<Vec<Coalition>> {
    let mut unknowns = check_budget(n, t)?;
    let mut rng = rng_for(seed, 0);
    unknowns.shuffle(&mut rng);
    unknowns.truncate(t);
    Ok(unknowns)
}

/// Unknown coalitions by decreasing size, ties by ascending bitmask.
pub fn largest_first(n: usize, t: usize) -> Result<Vec<Coalition>> {
    let mut unknowns = check_budget(n, t)?;
    unknowns.sort_by_key(|c| (std::cmp::Reverse(c.size()), c.bits()));
    unknowns.truncate(t);
    Ok(unknowns)
}

/// What a sequential policy is allowed to see: the full game filtered through
/// the current known set. Values of unknown coalitions are unreadable.
pub struct GameView<'a> {
    game: &'a Game,
    known: &'a KnownSet,
}

impl<'a> GameView<'a> {
    pub fn n(&self) -> usize {
        self.game.n()
    }

    /// The coalition's value if it has been revealed, `None` otherwise.
    pub fn value(&self, c: Coalition) -> Option<f64> {
        if self.known.contains(c) {
            Some(self.game.value(c))
        } else {
            None
        }
    }

    pub fn known(&self) -> &KnownSet {
        self.known
    }

    pub fn unknown(&self) -> Vec<Coalition> {
        self.known.unknown()
    }
}

/// A sequential revelation policy, consulted once per step with the current
/// masked view of the game.
pub trait OnlinePolicy {
    fn choose(&mut self, view: &GameView<'_>) -> Coalition;
}

/// Reveals a pre-shuffled permutation of the unknown coalitions.
pub struct RandomReveal {
    order: Vec<Coalition>,
    next: usize,
}

impl RandomReveal {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut order = KnownSet::minimal(n).unknown();
        let mut rng = rng_for(seed, 0);
        order.shuffle(&mut rng);
        RandomReveal { order, next: 0 }
    }
}

impl OnlinePolicy for RandomReveal {
    fn choose(&mut self, _view: &GameView<'_>) -> Coalition {
        let c = self.order[self.next];
        self.next += 1;
        c
    }
}

/// Always reveals the largest unknown coalition (ties to smallest bitmask).
pub struct LargestFirstReveal;

impl OnlinePolicy for LargestFirstReveal {
    fn choose(&mut self, view: &GameView<'_>) -> Coalition {
        view.unknown()
            .into_iter()
            .max_by_key(|c| (c.size(), std::cmp::Reverse(c.bits())))
            .expect("runner never asks beyond the unknown count")
    }
}

/// Runs a sequential policy for `t` steps against the true game, enforcing
/// the masked view, and records the gap after every reveal.
pub fn run_online(policy: &mut dyn OnlinePolicy, game: &Game, t: usize) -> Result<Trajectory> {
    check_budget(game.n(), t)?;
    let eval = GapEvaluator::from_game(game)?;
    let mut k = KnownSet::minimal(game.n());
    let mut gaps = vec![eval.mean_gap(&k)?];
    let mut revealed = Vec::with_capacity(t);
    for _ in 0..t {
        let choice = {
            let view = GameView { game, known: &k };
            policy.choose(&view)
        };
        if choice.index() >= game.num_coalitions() || k.contains(choice) {
            return Err(Error::InvalidArgument(format!(
                "policy chose an invalid or already-known coalition {:?}",
                choice
            )));
        }
        k = k.with(choice);
        gaps.push(eval.mean_gap(&k)?);
        revealed.push(choice);
    }
    Ok(Trajectory { revealed, gaps })
}

/// The built-in policies by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Random,
    OfflineGreedy,
    OfflineOptimal,
    OracleGreedy,
    OracleOptimal,
    LargestFirst,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Random,
        PolicyKind::OfflineGreedy,
        PolicyKind::OfflineOptimal,
        PolicyKind::OracleGreedy,
        PolicyKind::OracleOptimal,
        PolicyKind::LargestFirst,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::OfflineGreedy => "offline-greedy",
            PolicyKind::OfflineOptimal => "offline-optimal",
            PolicyKind::OracleGreedy => "oracle-greedy",
            PolicyKind::OracleOptimal => "oracle-optimal",
            PolicyKind::LargestFirst => "largest-first",
        }
    }

    /// Whether the policy enumerates subsets exhaustively (and so is limited
    /// to small player counts).
    pub fn is_optimal(self) -> bool {
        matches!(self, PolicyKind::OfflineOptimal | PolicyKind::OracleOptimal)
    }

    /// Whether the policy needs distribution knowledge rather than the game.
    pub fn is_offline(self) -> bool {
        matches!(self, PolicyKind::OfflineGreedy | PolicyKind::OfflineOptimal)
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown policy {s:?}; expected one of {}",
                    PolicyKind::ALL.map(|k| k.as_str()).join(", ")
                ))
            })
    }
}

enum Plan {
    /// A fixed reveal order shared by every trial.
    Fixed(Vec<Coalition>),
    /// One optimal set per budget `1..=t`; the sets need not nest, so each
    /// step's gap is the gap of that budget's own solution.
    PerBudget(Vec<Vec<Coalition>>),
    /// Decided per trial (random draws or oracle access to the trial game).
    PerTrial,
}

/// A policy prepared for repeated trials: offline plans are computed once
/// here and reused, oracle and random policies defer to the trial.
pub struct PreparedPolicy {
    kind: PolicyKind,
    n: usize,
    t: usize,
    seed: u64,
    plan: Plan,
}

impl PreparedPolicy {
    /// `dist` is required for the offline policies and ignored otherwise.
    /// `seed` drives both offline estimation and per-trial randomness.
    pub fn prepare(
        kind: PolicyKind,
        dist: Option<&Distribution>,
        n: usize,
        t: usize,
        kappa: usize,
        seed: u64,
    ) -> Result<Self> {
        check_budget(n, t)?;
        if kind.is_optimal() {
            check_optimal_size(n)?;
        }
        let plan = match kind {
            PolicyKind::LargestFirst => Plan::Fixed(largest_first(n, t)?),
            PolicyKind::OfflineGreedy | PolicyKind::OfflineOptimal => {
                let dist = dist.ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "{} needs a distribution",
                        kind.as_str()
                    ))
                })?;
                if dist.n != n {
                    return Err(Error::InvalidArgument(
                        "distribution and policy player counts differ".into(),
                    ));
                }
                let eval = GapEvaluator::from_distribution(dist, kappa, seed)?;
                if kind == PolicyKind::OfflineGreedy {
                    Plan::Fixed(greedy_order(&eval, t)?)
                } else {
                    let mut sets = Vec::with_capacity(t);
                    for budget in 1..=t {
                        sets.push(best_subset(&eval, budget)?);
                    }
                    Plan::PerBudget(sets)
                }
            }
            PolicyKind::Random | PolicyKind::OracleGreedy | PolicyKind::OracleOptimal => {
                Plan::PerTrial
            }
        };
        Ok(PreparedPolicy {
            kind,
            n,
            t,
            seed,
            plan,
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// Scores the policy on one trial game. `trial` namespaces per-trial
    /// randomness so trials stay independent and reproducible.
    pub fn trajectory(&self, game: &Game, trial: u64) -> Result<Trajectory> {
        if game.n() != self.n {
            return Err(Error::InvalidArgument(
                "trial game has the wrong player count".into(),
            ));
        }
        match (&self.plan, self.kind) {
            (Plan::Fixed(order), _) => score_order(game, order, self.t),
            (Plan::PerBudget(sets), _) => score_budgets(game, sets, self.t),
            (Plan::PerTrial, PolicyKind::Random) => {
                let mut policy =
                    RandomReveal::new(self.n, self.seed ^ (0x9e3779b97f4a7c15u64.wrapping_mul(trial + 1)));
                run_online(&mut policy, game, self.t)
            }
            (Plan::PerTrial, PolicyKind::OracleGreedy) => {
                let order = greedy_order(&GapEvaluator::from_game(game)?, self.t)?;
                score_order(game, &order, self.t)
            }
            (Plan::PerTrial, PolicyKind::OracleOptimal) => {
                let eval = GapEvaluator::from_game(game)?;
                let mut sets = Vec::with_capacity(self.t);
                for budget in 1..=self.t {
                    sets.push(best_subset(&eval, budget)?);
                }
                score_budgets(game, &sets, self.t)
            }
            (Plan::PerTrial, _) => unreachable!("per-trial plan for a planned policy"),
        }
    }
}

fn score_order(game: &Game, order: &[Coalition], t: usize) -> Result<Trajectory> {
    let eval = GapEvaluator::from_game(game)?;
    let mut k = KnownSet::minimal(game.n());
    let mut gaps = vec![eval.mean_gap(&k)?];
    let mut revealed = Vec::with_capacity(t);
    for &c in order.iter().take(t) {
        k = k.with(c);
        gaps.push(eval.mean_gap(&k)?);
        revealed.push(c);
    }
    Ok(Trajectory { revealed, gaps })
}

fn score_budgets(game: &Game, sets: &[Vec<Coalition>], t: usize) -> Result<Trajectory> {
    let eval = GapEvaluator::from_game(game)?;
    let mut gaps = vec![eval.mean_gap(&KnownSet::minimal(game.n()))?];
    for budget in 1..=t {
        gaps.push(eval.mean_gap_extras(&sets[budget - 1])?);
    }
    // the reveal column lists the final budget's set in tie-break order
    let mut revealed = sets[t - 1].clone();
    revealed.sort();
    Ok(Trajectory { revealed, gaps })
}
