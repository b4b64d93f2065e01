//! Samplers for the game families used in experiments.
//!
//! Sampling is a pure function of `(kind, n, seed, params, index)`: every
//! sample gets its own counter-mode stream of a seeded ChaCha generator, so
//! runs are reproducible and samples can be drawn in parallel or out of
//! order without changing the result.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Poisson};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::game::{Coalition, Game};
use crate::{Error, Result};

/// A deterministic generator keyed by seed and sample index.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The supported game families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    /// One owner, workers worth nothing without them: `v(S) = |S| - 1` when
    /// the owner is in `S`, else 0.
    Factory,
    /// Factory with quadratically growing synergies: `(|S| - 1)^2`.
    FactorySquare,
    /// Factory with exponential synergies: `exp(|S| - 1)` with the owner,
    /// 1 otherwise (not superadditive; kept for stress experiments).
    FactoryExp,
    /// Factory with worker productivities drawn uniformly from [0,1).
    NoisyFactory,
    /// Pairwise synergies summed over a complete weighted graph,
    /// weights uniform on [0,1).
    GraphUniform,
    /// Graph weights with density `2 - 2x` on [0,1] (small weights likelier).
    GraphDecreasing,
    /// Graph weights drawn from Poisson(1).
    GraphPoisson,
    /// Non-negative mixtures of unanimity games on coalitions of size >= 2.
    TotallyMonotonic,
    /// Symmetric games whose per-size worths grow by a uniform margin over
    /// the best split, so every sample is strictly superadditive in sizes.
    SymmetricSuperadditive,
    /// A single unanimity game on a uniformly chosen coalition of size >= 2.
    Unanimity,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 10] = [
        DistributionKind::Factory,
        DistributionKind::FactorySquare,
        DistributionKind::FactoryExp,
        DistributionKind::NoisyFactory,
        DistributionKind::GraphUniform,
        DistributionKind::GraphDecreasing,
        DistributionKind::GraphPoisson,
        DistributionKind::TotallyMonotonic,
        DistributionKind::SymmetricSuperadditive,
        DistributionKind::Unanimity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistributionKind::Factory => "factory",
            DistributionKind::FactorySquare => "factory-square",
            DistributionKind::FactoryExp => "factory-exp",
            DistributionKind::NoisyFactory => "noisy-factory",
            DistributionKind::GraphUniform => "graph-uniform",
            DistributionKind::GraphDecreasing => "graph-decreasing",
            DistributionKind::GraphPoisson => "graph-poisson",
            DistributionKind::TotallyMonotonic => "totally-monotonic",
            DistributionKind::SymmetricSuperadditive => "symmetric",
            DistributionKind::Unanimity => "unanimity",
        }
    }
}

impl FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistributionKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown distribution kind {s:?}; expected one of {}",
                    DistributionKind::ALL.map(|k| k.as_str()).join(", ")
                ))
            })
    }
}

/// A game family with its parameters; [`Distribution::sample`] draws from it.
#[derive(Clone, Debug)]
pub struct Distribution {
    pub kind: DistributionKind,
    pub n: usize,
    /// Pins the factory owner instead of drawing it per sample (0-based).
    pub fixed_owner: Option<usize>,
    /// Expected fraction of coalitions carrying a unanimity coefficient in
    /// the totally monotonic family.
    pub density: f64,
}

impl Distribution {
    pub fn new(kind: DistributionKind, n: usize) -> Self {
        Distribution {
            kind,
            n,
            fixed_owner: None,
            density: 0.3,
        }
    }

    pub fn with_fixed_owner(mut self, owner: usize) -> Self {
        self.fixed_owner = Some(owner);
        self
    }

    pub fn with_density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    /// Draws sample `index` of the run identified by `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> Result<Game> {
        let n = self.n;
        if let Some(o) = self.fixed_owner {
            if o >= n {
                return Err(Error::InvalidArgument(format!(
                    "fixed owner {o} out of range for n={n}"
                )));
            }
        }
        let mut rng = rng_for(seed, index);
        // redraw degenerate samples (e.g. an all-zero Poisson graph) so
        // normalization downstream always succeeds
        loop {
            let game = self.draw_once(&mut rng);
            if game.normalize().is_ok() {
                return Ok(game);
            }
        }
    }

    fn draw_once(&self, rng: &mut ChaCha8Rng) -> Game {
        let n = self.n;
        let owner = |rng: &mut ChaCha8Rng| {
            self.fixed_owner.unwrap_or_else(|| rng.random_range(0..n))
        };
        match self.kind {
            DistributionKind::Factory => factory_game(n, owner(rng)),
            DistributionKind::FactorySquare => factory_square_game(n, owner(rng)),
            DistributionKind::FactoryExp => factory_exp_game(n, owner(rng)),
            DistributionKind::NoisyFactory => {
                let o = owner(rng);
                let productivity: Vec<f64> = (0..n)
                    .map(|i| if i == o { 0.0 } else { rng.random::<f64>() })
                    .collect();
                noisy_factory_game(n, o, &productivity)
            }
            DistributionKind::GraphUniform => {
                let w = sample_edge_weights(n, rng, |r| r.random::<f64>());
                graph_game(n, &w)
            }
            DistributionKind::GraphDecreasing => {
                // inverse CDF of the density 2 - 2x on [0,1]
                let w = sample_edge_weights(n, rng, |r| {
                    1.0 - (1.0 - r.random::<f64>()).sqrt()
                });
                graph_game(n, &w)
            }
            DistributionKind::GraphPoisson => {
                let poisson = Poisson::new(1.0).expect("valid rate");
                let w = sample_edge_weights(n, rng, |r| poisson.sample(r));
                graph_game(n, &w)
            }
            DistributionKind::TotallyMonotonic => {
                sample_totally_monotonic(n, self.density, rng)
            }
            DistributionKind::SymmetricSuperadditive => sample_symmetric(n, rng),
            DistributionKind::Unanimity => {
                let candidates: Vec<Coalition> = (0..1u32 << n)
                    .map(|s| Coalition(s as u16))
                    .filter(|c| c.size() >= 2)
                    .collect();
                let pick = candidates[rng.random_range(0..candidates.len())];
                unanimity_game(n, pick)
            }
        }
    }
}

/// `v(S) = |S| - 1` when the owner is present, else 0.
pub fn factory_game(n: usize, owner: usize) -> Game {
    Game::from_fn(n, |c| {
        if c.contains(owner) {
            c.size() as f64 - 1.0
        } else {
            0.0
        }
    })
    .expect("factory games are valid")
}

/// `v(S) = (|S| - 1)^2` when the owner is present, else 0.
pub fn factory_square_game(n: usize, owner: usize) -> Game {
    Game::from_fn(n, |c| {
        if c.contains(owner) {
            let k = c.size() as f64 - 1.0;
            k * k
        } else {
            0.0
        }
    })
    .expect("factory-square games are valid")
}

/// `v(S) = exp(|S| - 1)` when the owner is present, 1 otherwise (and 0 on the
/// empty coalition).
pub fn factory_exp_game(n: usize, owner: usize) -> Game {
    Game::from_fn(n, |c| {
        if c.is_empty() {
            0.0
        } else if c.contains(owner) {
            (c.size() as f64 - 1.0).exp()
        } else {
            1.0
        }
    })
    .expect("factory-exp games are valid")
}

/// `v(S)` is the summed productivity of members when the owner is present,
/// else 0; the owner's own productivity must be 0.
pub fn noisy_factory_game(n: usize, owner: usize, productivity: &[f64]) -> Game {
    assert_eq!(productivity.len(), n);
    assert_eq!(productivity[owner], 0.0);
    Game::from_fn(n, |c| {
        if c.contains(owner) {
            c.players().map(|i| productivity[i]).sum()
        } else {
            0.0
        }
    })
    .expect("noisy-factory games are valid")
}

/// Index of edge `{i, j}` (with `i < j`) in a flat weight vector.
pub fn edge_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    // edges sorted by (i, j): all edges with first endpoint < i come first
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

fn sample_edge_weights(
    n: usize,
    rng: &mut ChaCha8Rng,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> Vec<f64> {
    (0..n * (n - 1) / 2).map(|_| draw(rng)).collect()
}

/// `v(S)` sums the weights of all edges inside `S`.
pub fn graph_game(n: usize, weights: &[f64]) -> Game {
    assert_eq!(weights.len(), n * (n - 1) / 2);
    Game::from_fn(n, |c| {
        let mut total = 0.0;
        for i in c.players() {
            for j in c.players() {
                if i < j {
                    total += weights[edge_index(n, i, j)];
                }
            }
        }
        total
    })
    .expect("graph games are valid")
}

/// The unanimity game on `t`: worth 1 exactly when a coalition covers `t`.
pub fn unanimity_game(n: usize, t: Coalition) -> Game {
    Game::from_fn(n, |c| if t.is_subset_of(c) && !t.is_empty() { 1.0 } else { 0.0 })
        .expect("unanimity games are valid")
}

/// A non-negative mixture of unanimity games.
pub fn totally_monotonic_game(n: usize, coefficients: &[(Coalition, f64)]) -> Game {
    Game::from_fn(n, |c| {
        coefficients
            .iter()
            .filter(|(s, _)| s.is_subset_of(c))
            .map(|(_, a)| a)
            .sum()
    })
    .expect("unanimity mixtures are valid")
}

fn sample_totally_monotonic(n: usize, density: f64, rng: &mut ChaCha8Rng) -> Game {
    // redraw until at least one coefficient lands, so the sample is essential
    loop {
        let mut coefficients = Vec::new();
        for s in 0..1u32 << n {
            let c = Coalition(s as u16);
            if c.size() >= 2 && rng.random_bool(density) {
                coefficients.push((c, rng.random::<f64>()));
            }
        }
        if !coefficients.is_empty() {
            return totally_monotonic_game(n, &coefficients);
        }
    }
}

/// A symmetric game: each coalition's worth depends only on its size.
/// `per_size[k - 1]` is the worth of size-`k` coalitions.
pub fn symmetric_game(n: usize, per_size: &[f64]) -> Game {
    assert_eq!(per_size.len(), n);
    Game::from_fn(n, |c| {
        if c.is_empty() {
            0.0
        } else {
            per_size[c.size() - 1]
        }
    })
    .expect("symmetric games are valid")
}

fn sample_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Game {
    let mut per_size = vec![0.0; n];
    for k in 2..=n {
        let best_split = (1..k)
            .map(|j| per_size[j - 1] + per_size[k - j - 1])
            .fold(f64::NEG_INFINITY, f64::max);
        per_size[k - 1] = best_split + rng.random::<f64>();
    }
    symmetric_game(n, &per_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::KnownSet;

    #[test]
    fn kind_names_round_trip() {
        for kind in DistributionKind::ALL {
            assert_eq!(kind.as_str().parse::<DistributionKind>().unwrap(), kind);
        }
        assert!("gaussian".parse::<DistributionKind>().is_err());
    }

    #[test]
    fn factory_values() {
        let g = factory_game(4, 1);
        assert_eq!(g.value(Coalition::from_players(&[1])), 0.0);
        assert_eq!(g.value(Coalition::from_players(&[0, 2])), 0.0);
        assert_eq!(g.value(Coalition::from_players(&[1, 2])), 1.0);
        assert_eq!(g.value(Coalition::grand(4)), 3.0);
        assert!(g.is_superadditive());
        // a factory is a sum of owner-worker unanimity games, hence convex
        assert!(g.is_supermodular());
    }

    #[test]
    fn factory_variants() {
        let sq = factory_square_game(4, 0);
        assert_eq!(sq.value(Coalition::grand(4)), 9.0);
        assert!(sq.is_superadditive());
        let ex = factory_exp_game(4, 0);
        assert_eq!(ex.value(Coalition::EMPTY), 0.0);
        assert!((ex.value(Coalition::grand(4)) - 3.0f64.exp()).abs() < 1e-12);
        // workers without the owner are worth 1, so two lone workers beat a
        // worker pair: the exponential variant is not superadditive
        assert_eq!(ex.value(Coalition::from_players(&[1, 2])), 1.0);
        assert!(!ex.is_superadditive());
    }

    #[test]
    fn graph_values_sum_inside_edges() {
        let n = 5;
        let mut w = vec![0.0; n * (n - 1) / 2];
        w[edge_index(n, 0, 1)] = 1.0;
        w[edge_index(n, 2, 3)] = 1.0;
        let g = graph_game(n, &w);
        assert_eq!(g.value(Coalition::from_players(&[0, 1])), 1.0);
        assert_eq!(g.value(Coalition::from_players(&[2, 3])), 1.0);
        assert_eq!(g.value(Coalition::from_players(&[0, 1, 2])), 1.0);
        assert_eq!(g.value(Coalition::grand(5)), 2.0);
        // all-ones weights: a triangle is worth its three edges
        let ones = vec![1.0; n * (n - 1) / 2];
        let h = graph_game(n, &ones);
        assert_eq!(h.value(Coalition::from_players(&[0, 1, 2])), 3.0);
    }

    #[test]
    fn sampling_is_deterministic_per_seed_and_index() {
        for kind in DistributionKind::ALL {
            let dist = Distribution::new(kind, 4);
            let a = dist.sample(7, 3).unwrap();
            let b = dist.sample(7, 3).unwrap();
            assert_eq!(a, b, "kind {kind:?} not reproducible");
            let c = dist.sample(7, 4).unwrap();
            let d = dist.sample(8, 3).unwrap();
            assert!(a != c || a != d, "kind {kind:?} ignores seed and index");
        }
    }

    #[test]
    fn samples_are_superadditive() {
        // every family except the exponential factory
        for kind in DistributionKind::ALL {
            if kind == DistributionKind::FactoryExp {
                continue;
            }
            for n in [3, 4, 5] {
                let dist = Distribution::new(kind, n);
                for idx in 0..40 {
                    let g = dist.sample(11, idx).unwrap();
                    assert!(
                        g.is_superadditive(),
                        "kind {kind:?} n={n} sample {idx} not superadditive"
                    );
                }
            }
        }
    }

    #[test]
    fn totally_monotonic_samples_are_supermodular() {
        let dist = Distribution::new(DistributionKind::TotallyMonotonic, 5).with_density(0.2);
        for idx in 0..60 {
            let g = dist.sample(3, idx).unwrap();
            assert!(g.is_supermodular());
            assert!(g.normalize().is_ok(), "sample {idx} is degenerate");
        }
    }

    #[test]
    fn fixed_owner_factory_is_a_point_mass() {
        let dist = Distribution::new(DistributionKind::Factory, 4).with_fixed_owner(2);
        let a = dist.sample(1, 0).unwrap();
        let b = dist.sample(99, 57).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, factory_game(4, 2));
    }

    #[test]
    fn owner_draw_covers_all_players() {
        let dist = Distribution::new(DistributionKind::Factory, 4);
        let mut seen = [false; 4];
        for idx in 0..64 {
            let g = dist.sample(5, idx).unwrap();
            for (p, hit) in seen.iter_mut().enumerate() {
                if g.value(Coalition::singleton(p)) == 0.0
                    && g.value(Coalition::grand(4).minus(Coalition::singleton(p))) == 0.0
                {
                    *hit = true;
                }
            }
        }
        assert!(seen.iter().all(|s| *s), "owner never drawn for some player");
    }

    #[test]
    fn symmetric_samples_grow_superadditively() {
        let dist = Distribution::new(DistributionKind::SymmetricSuperadditive, 5);
        let g = dist.sample(21, 0).unwrap();
        for k in [3usize, 4, 5] {
            let whole = g.value(Coalition::grand(5).minus(Coalition(((1u32 << (5 - k)) - 1) as u16)));
            for j in 1..k {
                let a = Coalition(((1u32 << j) - 1) as u16);
                let b = Coalition((((1u32 << k) - 1) ^ ((1u32 << j) - 1)) as u16);
                assert!(g.value(a) + g.value(b) <= whole + 1e-9);
            }
        }
    }

    #[test]
    fn unanimity_bounds_collapse_once_the_carrier_is_known() {
        let t = Coalition::from_players(&[0, 1]);
        let g = unanimity_game(4, t);
        let k = KnownSet::with_extras(4, &[t]);
        let gap = crate::gap::gap_closed_form(&g, &k).unwrap();
        let full = crate::gap::gap_closed_form(&g, &KnownSet::minimal(4)).unwrap();
        assert!(gap < full);
    }
}
