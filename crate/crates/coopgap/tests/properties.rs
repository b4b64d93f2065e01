//! Randomized cross-module properties: serialization round-trips,
//! normalization, bound bracketing, and gap structure.

use proptest::prelude::*;

use coopgap::bounds::{bounds_pair, optimistic_extension};
use coopgap::game::{Coalition, Game, KnownSet};
use coopgap::gap::{gap_closed_form, shapley};
use coopgap::generators::{Distribution, DistributionKind};
use coopgap::policies::random_policy;

const TOL: f64 = 1e-9;

/// One superadditive sample, rotating through every family that guarantees
/// superadditivity.
fn superadditive_sample(n: usize, seed: u64) -> Game {
    let kinds = [
        DistributionKind::Factory,
        DistributionKind::FactorySquare,
        DistributionKind::NoisyFactory,
        DistributionKind::GraphUniform,
        DistributionKind::GraphDecreasing,
        DistributionKind::GraphPoisson,
        DistributionKind::TotallyMonotonic,
        DistributionKind::SymmetricSuperadditive,
        DistributionKind::Unanimity,
    ];
    let kind = kinds[(seed % kinds.len() as u64) as usize];
    Distribution::new(kind, n)
        .sample(seed, 1)
        .expect("samplers are total")
}

fn arb_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0f64..10.0, (1usize << n) - 1).prop_map(|tail| {
        let mut values = vec![0.0];
        values.extend(tail);
        values
    })
}

proptest! {
    #[test]
    fn game_json_round_trips(n in 2usize..=5, values in arb_values(5)) {
        let g = Game::new(n, values[..1 << n].to_vec()).unwrap();
        let back = Game::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn known_set_json_round_trips(n in 3usize..=6, seed in any::<u64>(), t in 0usize..=6) {
        let unknowns = (1usize << n) - n - 2;
        let extras = random_policy(n, t.min(unknowns), seed).unwrap();
        let k = KnownSet::with_extras(n, &extras);
        let back = KnownSet::from_json(&k.to_json()).unwrap();
        prop_assert_eq!(back.members(), k.members());
    }

    #[test]
    fn normalization_is_idempotent(n in 3usize..=6, seed in any::<u64>()) {
        let g = superadditive_sample(n, seed);
        let norm = g.normalize().unwrap();
        prop_assert!(norm.game.is_normalized());
        let again = norm.game.normalize().unwrap();
        prop_assert!((again.scale - 1.0).abs() < TOL);
        for i in 0..n {
            prop_assert!(again.shift[i].abs() < TOL);
        }
        for c in norm.game.coalitions() {
            prop_assert!((again.game.value(c) - norm.game.value(c)).abs() < TOL);
        }
    }

    #[test]
    fn bounds_bracket_the_game_and_shrink(
        n in 3usize..=5,
        seed in any::<u64>(),
        t in 0usize..=4,
    ) {
        let g = superadditive_sample(n, seed).normalize().unwrap().game;
        let unknowns = (1usize << n) - n - 2;
        let extras = random_policy(n, (t + 1).min(unknowns), seed ^ 0xabcdef).unwrap();
        let smaller = KnownSet::with_extras(n, &extras[..extras.len() - 1]);
        let larger = KnownSet::with_extras(n, &extras);

        let before = bounds_pair(&g, &smaller).unwrap();
        let after = bounds_pair(&g, &larger).unwrap();
        for c in g.coalitions() {
            // bounds bracket the true superadditive game...
            prop_assert!(before.lower_of(c) <= g.value(c) + TOL);
            prop_assert!(g.value(c) <= before.upper_of(c) + TOL);
            // ...pin every known coalition...
            if larger.contains(c) {
                prop_assert!((after.lower_of(c) - g.value(c)).abs() < TOL);
                prop_assert!((after.upper_of(c) - g.value(c)).abs() < TOL);
            }
            // ...and only tighten as information grows
            prop_assert!(after.lower_of(c) >= before.lower_of(c) - TOL);
            prop_assert!(after.upper_of(c) <= before.upper_of(c) + TOL);
        }
    }

    #[test]
    fn gap_is_nonnegative_monotone_and_subadditive(
        n in 3usize..=5,
        seed in any::<u64>(),
        t in 0usize..=3,
    ) {
        let g = superadditive_sample(n, seed);
        let unknowns = (1usize << n) - n - 2;
        let reveals = random_policy(n, (2 * t).min(unknowns), seed ^ 0x5eed).unwrap();
        let (x, y) = reveals.split_at(reveals.len() / 2);
        let both = KnownSet::with_extras(n, &reveals);
        let kx = KnownSet::with_extras(n, x);
        let ky = KnownSet::with_extras(n, y);

        let gap_x = gap_closed_form(&g, &kx).unwrap();
        let gap_y = gap_closed_form(&g, &ky).unwrap();
        let gap_both = gap_closed_form(&g, &both).unwrap();
        prop_assert!(gap_x >= -TOL);
        prop_assert!(gap_both <= gap_x + TOL, "gap grew under more information");
        prop_assert!(gap_x + gap_y >= gap_both - TOL, "subadditivity violated");

        let full = gap_closed_form(&g, &KnownSet::full(n)).unwrap();
        prop_assert!(full.abs() < TOL);
    }

    #[test]
    fn shapley_is_efficient_and_respects_symmetry(n in 3usize..=6, seed in any::<u64>()) {
        let g = superadditive_sample(n, seed);
        let phi = shapley(&g);
        let total: f64 = phi.iter().sum();
        prop_assert!((total - g.grand_value()).abs() < 1e-6 * g.grand_value().abs().max(1.0));
    }

    #[test]
    fn optimistic_extension_stays_superadditive(
        n in 3usize..=5,
        seed in any::<u64>(),
        t in 0usize..=3,
    ) {
        let g = superadditive_sample(n, seed).normalize().unwrap().game;
        let k = KnownSet::with_extras(n, &random_policy(n, t, seed ^ 0xfeed).unwrap());
        let bp = bounds_pair(&g, &k).unwrap();
        for player in 0..n {
            let ext = optimistic_extension(&g, &k, Coalition::singleton(player)).unwrap();
            prop_assert!(ext.is_superadditive());
            for c in g.coalitions() {
                prop_assert!(ext.value(c) >= bp.lower_of(c) - TOL);
                prop_assert!(ext.value(c) <= bp.upper_of(c) + TOL);
                if c.contains(player) {
                    prop_assert!((ext.value(c) - bp.upper_of(c)).abs() < TOL);
                }
            }
        }
    }

    #[test]
    fn supermodular_samples_are_superadditive(seed in any::<u64>()) {
        let g = Distribution::new(DistributionKind::TotallyMonotonic, 5)
            .sample(seed, 0)
            .unwrap();
        prop_assert!(g.is_supermodular());
        prop_assert!(g.is_superadditive());
    }
}
