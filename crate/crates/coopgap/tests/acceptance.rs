//! Frozen end-to-end checks, one per test, each printing a single PASS/FAIL
//! line: worked examples with exact rational gaps, agreement between the two
//! independent gap computations, distributional invariants, supermodularity
//! audits, policy comparisons, and byte-identical experiment reruns.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use coopgap::analysis::{
    audit_gap_supermodularity, check_criterion, criterion_coefficient, criterion_witness_quad,
    zero_gap_requires_all, AuditOptions,
};
use coopgap::bounds::{bounds_pair, optimistic_extension};
use coopgap::experiment::{
    run_experiment, summary_stats, validate_config, DistParams, DistributionConfig,
    ExperimentConfig, ExperimentKind, TRIAL_STREAM_BASE,
};
use coopgap::game::{Coalition, Game, KnownSet};
use coopgap::gap::{gap_closed_form, gap_definitional, gap_delta_quad, shapley, utopian_game};
use coopgap::generators::{
    edge_index, factory_game, graph_game, rng_for, symmetric_game, totally_monotonic_game,
    Distribution, DistributionKind,
};
use coopgap::policies::{
    largest_first, oracle_greedy, oracle_optimal, random_policy, PolicyKind, PreparedPolicy,
};
use rand::Rng;

/// Tolerance for values that are exact rationals of small denominators.
const EXACT: f64 = 1e-12;
/// Tolerance for values that go through generic floating-point pipelines.
const NUM: f64 = 1e-9;

/// Every sampler that draws superadditive games.
const SUPERADDITIVE_KINDS: [DistributionKind; 9] = [
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

fn check(name: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("check {name}: PASS"),
        Err(msg) => {
            println!("check {name}: FAIL ({msg})");
            panic!("{name}: {msg}");
        }
    }
}

fn estr(e: coopgap::Error) -> String {
    e.to_string()
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{label}: got {got}, want {want} (tol {tol:e})"))
    }
}

fn deadline(start: Instant, limit: Duration, label: &str) -> Result<(), String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(())
    } else {
        Err(format!("{label} took {took:?}, budget {limit:?}"))
    }
}

fn coal(players: &[usize]) -> Coalition {
    Coalition::from_players(players)
}

/// Gap with the minimal information plus `extras`, on the input scale.
fn gap_extras(g: &Game, extras: &[Coalition]) -> Result<f64, String> {
    gap_closed_form(g, &KnownSet::with_extras(g.n(), extras)).map_err(estr)
}

#[test]
fn c01_greedy_staircase_on_the_four_player_factory() {
    check("greedy staircase on the four-player factory", || {
        let start = Instant::now();
        let g = factory_game(4, 0).normalize().map_err(estr)?.game;

        let order = oracle_greedy(&g, 4).map_err(estr)?;
        let expected_start = [coal(&[1, 2, 3]), coal(&[0, 1, 2]), coal(&[0, 3])];
        if order[..3] != expected_start {
            return Err(format!("greedy order starts {:?}", &order[..3]));
        }
        within(
            "greedy gap after three reveals",
            gap_extras(&g, &order[..3])?,
            5.0 / 9.0,
            EXACT,
        )?;
        within(
            "greedy gap after four reveals",
            gap_extras(&g, &order[..4])?,
            7.0 / 18.0,
            EXACT,
        )?;

        let best = oracle_optimal(&g, 4).map_err(estr)?;
        if !best.iter().all(|c| c.size() == 3) {
            return Err(format!("optimal four reveals are not all triples: {best:?}"));
        }
        within(
            "optimal gap with four reveals",
            gap_extras(&g, &best)?,
            1.0 / 3.0,
            EXACT,
        )?;

        // the runner-up third reveal: another triple instead of the pair
        let alt = [coal(&[1, 2, 3]), coal(&[0, 1, 2]), coal(&[0, 1, 3])];
        within("runner-up third reveal", gap_extras(&g, &alt)?, 7.0 / 12.0, EXACT)?;

        deadline(start, Duration::from_secs(1), "factory staircase")
    });
}

#[test]
fn c02_reveal_pair_quad_on_the_five_player_factory() {
    check("reveal-pair quad on the five-player factory", || {
        let start = Instant::now();
        let g = factory_game(5, 0);
        let k = KnownSet::with_extras(5, &[coal(&[0, 1, 2]), coal(&[0, 3])]);
        let s = coal(&[0, 1]);
        let z = coal(&[0, 1, 2, 4]);

        within("gap at the base set", gap_closed_form(&g, &k).map_err(estr)?, 8.6, NUM)?;
        within(
            "gap after the pair",
            gap_closed_form(&g, &k.with(s)).map_err(estr)?,
            8.1,
            NUM,
        )?;
        within(
            "gap after the quadruple",
            gap_closed_form(&g, &k.with(z)).map_err(estr)?,
            7.9,
            NUM,
        )?;
        within(
            "gap after both",
            gap_closed_form(&g, &k.with(s).with(z)).map_err(estr)?,
            7.3,
            NUM,
        )?;
        within("quad", gap_delta_quad(&g, &k, s, z).map_err(estr)?, -0.1, NUM)?;

        deadline(start, Duration::from_secs(1), "factory quad")
    });
}

#[test]
fn c03_closed_form_matches_the_definition() {
    check("closed form matches the definition", || {
        let start = Instant::now();
        // the two computations agree wherever superadditive extensions exist,
        // which is the regime the bounds are built for
        let mut checked = 0u32;
        for i in 0..1000u64 {
            let n = [3, 4, 5][(i % 3) as usize];
            let kind = SUPERADDITIVE_KINDS[(i as usize) % SUPERADDITIVE_KINDS.len()];
            let g = Distribution::new(kind, n).sample(7 + i, i).map_err(estr)?;
            let unknowns = (1usize << n) - n - 2;
            let t = (i as usize * 7919) % (unknowns + 1);
            let extras = random_policy(n, t, 0x5eed ^ i).map_err(estr)?;
            let k = KnownSet::with_extras(n, &extras);

            let closed = gap_closed_form(&g, &k).map_err(estr)?;
            let definitional = gap_definitional(&g, &k).map_err(estr)?;
            if (closed - definitional).abs() >= NUM {
                return Err(format!(
                    "{} game #{i} (n={n}, {t} extras): closed {closed} vs definitional {definitional}",
                    kind.as_str()
                ));
            }
            checked += 1;
        }
        if checked != 1000 {
            return Err(format!("only {checked} instances checked"));
        }
        deadline(start, Duration::from_secs(30), "closed-form comparison")
    });
}

#[test]
fn c04_gap_shapley_and_utopian_invariants() {
    check("gap, Shapley, and utopian invariants", || {
        let mut cases = 0u32;
        for i in 0..500u64 {
            let n = 3 + (i % 3) as usize;
            let kind = SUPERADDITIVE_KINDS[(i as usize) % SUPERADDITIVE_KINDS.len()];
            let g = Distribution::new(kind, n).sample(1 + i, i).map_err(estr)?;
            let unknowns = (1usize << n) - n - 2;
            let t = ((i as usize * 13) % unknowns).min(unknowns - 1);
            let reveals = random_policy(n, t + 1, 0xace ^ i).map_err(estr)?;
            let (head, _) = reveals.split_at(t);
            let k = KnownSet::with_extras(n, head);
            let k_more = KnownSet::with_extras(n, &reveals);

            // non-negative, and never grows as information grows
            let gap = gap_closed_form(&g, &k).map_err(estr)?;
            let gap_more = gap_closed_form(&g, &k_more).map_err(estr)?;
            if gap < -NUM {
                return Err(format!("negative gap {gap} (case {i})"));
            }
            if gap_more > gap + NUM {
                return Err(format!("gap grew {gap} -> {gap_more} (case {i})"));
            }

            // drops from disjoint halves never undershoot the joint drop
            let (x, y) = reveals.split_at(reveals.len() / 2);
            let gap_x = gap_closed_form(&g, &KnownSet::with_extras(n, x)).map_err(estr)?;
            let gap_y = gap_closed_form(&g, &KnownSet::with_extras(n, y)).map_err(estr)?;
            if gap_x + gap_y < gap_more - NUM {
                return Err(format!(
                    "subadditivity violated: {gap_x} + {gap_y} < {gap_more} (case {i})"
                ));
            }

            // the gap scales linearly under positive affine transforms
            let mut rng = rng_for(21, i);
            let alpha = rng.random_range(0.1..5.0);
            let beta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let h = g.affine_transform(alpha, &beta).map_err(estr)?;
            let scaled = gap_closed_form(&h, &k).map_err(estr)?;
            within("scaled gap", scaled, alpha * gap, NUM * (1.0 + alpha * gap))?;

            // Shapley values distribute the grand coalition's worth
            let phi = shapley(&g);
            let total: f64 = phi.iter().sum();
            within("Shapley efficiency", total, g.grand_value(), NUM * (1.0 + g.grand_value().abs()))?;

            // each player's utopian game is superadditive, extends the known
            // values, and its Shapley value dominates every superadditive
            // extension that stays inside the bounds
            let gn = g.normalize().map_err(estr)?.game;
            let bp = bounds_pair(&gn, &k).map_err(estr)?;
            let mut utopian_phi = Vec::with_capacity(n);
            for player in 0..n {
                let vi = utopian_game(&gn, &k, player).map_err(estr)?;
                if !vi.is_superadditive() {
                    return Err(format!("utopian game of player {player} not superadditive (case {i})"));
                }
                for &c in k.members() {
                    if (vi.value(c) - gn.value(c)).abs() > NUM {
                        return Err(format!("utopian game reassigns known coalition {c:?} (case {i})"));
                    }
                }
                utopian_phi.push(shapley(&vi)[player]);
            }
            let pick = rng.random_range(1..gn.num_coalitions());
            let mut extensions = vec![
                gn.clone(),
                optimistic_extension(&gn, &k, Coalition(pick as u16)).map_err(estr)?,
            ];
            for player in 0..n {
                extensions
                    .push(optimistic_extension(&gn, &k, Coalition::singleton(player)).map_err(estr)?);
            }
            for w in &extensions {
                if !w.is_superadditive() {
                    return Err(format!("extension not superadditive (case {i})"));
                }
                let phi_w = shapley(w);
                for player in 0..n {
                    if w.value(Coalition::grand(n)) > bp.upper_of(Coalition::grand(n)) + NUM {
                        return Err(format!("extension leaves the bounds (case {i})"));
                    }
                    if phi_w[player] > utopian_phi[player] + NUM {
                        return Err(format!(
                            "extension pays player {player} {} above the utopian {} (case {i})",
                            phi_w[player], utopian_phi[player]
                        ));
                    }
                }
            }

            cases += 1;
        }
        if cases != 500 {
            return Err(format!("only {cases} cases checked"));
        }
        Ok(())
    });
}

#[test]
fn c05_small_games_have_supermodular_gaps() {
    check("small games have supermodular gaps", || {
        let start = Instant::now();
        let opts = AuditOptions {
            exhaustive: true,
            extras_cap: None,
            ..AuditOptions::default()
        };
        let cases: Vec<(usize, u64)> = (3..=4)
            .flat_map(|n| (0..200u64).map(move |i| (n, i)))
            .collect();
        let results: Vec<Result<u64, String>> = cases
            .par_iter()
            .map(|&(n, i)| {
                let kind = SUPERADDITIVE_KINDS[i as usize % SUPERADDITIVE_KINDS.len()];
                let g = Distribution::new(kind, n)
                    .sample(1000 + i, i)
                    .map_err(estr)?;
                let report = audit_gap_supermodularity(&g, &opts).map_err(estr)?;
                match report.witness {
                    None => Ok(report.quads_checked),
                    Some(w) => Err(format!(
                        "{} game #{i} (n={n}) has a violating pair: extras {:?}, s {:?}, z {:?}, quad {}",
                        kind.as_str(),
                        w.extras,
                        w.s,
                        w.z,
                        w.value
                    )),
                }
            })
            .collect();
        let mut quads = 0u64;
        for r in results {
            quads += r?;
        }
        if quads < 400 * 45 {
            return Err(format!("only {quads} reveal pairs audited"));
        }
        deadline(start, Duration::from_secs(300), "exhaustive audits")
    });
}

#[test]
fn c06_pair_excess_criterion_certifies_violations() {
    check("pair-excess criterion certifies violations", || {
        let start = Instant::now();
        // the coefficient is an exact rational for small player counts
        if criterion_coefficient(6).map_err(estr)? != 2.0 {
            return Err("coefficient at n=6 is not exactly 2".into());
        }
        if criterion_coefficient(7).map_err(estr)? != 28.0 / 5.0 {
            return Err("coefficient at n=7 is not exactly 28/5".into());
        }
        if criterion_coefficient(8).map_err(estr)? != 47.0 / 5.0 {
            return Err("coefficient at n=8 is not exactly 47/5".into());
        }

        // complete graphs with one shared edge weight have equal pair
        // excesses everywhere, so the criterion must fire on the first
        // quadruple and its constructed reveal pair must check out
        for i in 0..50u64 {
            let mut rng = rng_for(42, i);
            let c = rng.random_range(0.5..2.0);
            let weights = vec![c; 15];
            let beta: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g = graph_game(6, &weights)
                .affine_transform(1.0, &beta)
                .map_err(estr)?;

            let quad = check_criterion(&g)
                .map_err(estr)?
                .ok_or_else(|| format!("criterion silent on game #{i}"))?;
            if quad != [0, 1, 2, 3] {
                return Err(format!("criterion picked {quad:?} on game #{i}"));
            }
            let value = criterion_witness_quad(&g, quad).map_err(estr)?;
            if value >= -NUM {
                return Err(format!("constructed quad {value} not negative on game #{i}"));
            }

            let report = audit_gap_supermodularity(
                &g,
                &AuditOptions {
                    exhaustive: false,
                    budget: 500,
                    seed: 1000 + i,
                    ..AuditOptions::default()
                },
            )
            .map_err(estr)?;
            if report.supermodular || report.witness.is_none() {
                return Err(format!("randomized audit missed the violation on game #{i}"));
            }
        }
        deadline(start, Duration::from_secs(60), "criterion checks")
    });
}

#[test]
fn c07_non_supermodular_witnesses_at_five_players() {
    check("non-supermodular witnesses at five players", || {
        let k = KnownSet::with_extras(5, &[coal(&[0, 1, 2])]);
        let s = coal(&[0, 1]);
        let z = coal(&[2, 3]);

        let sym = symmetric_game(5, &[0.0, 1.0, 1.0, 2.0, 2.0]);
        within(
            "symmetric witness quad",
            gap_delta_quad(&sym, &k, s, z).map_err(estr)?,
            -0.1,
            NUM,
        )?;

        let mut weights = vec![0.0; 10];
        weights[edge_index(5, 0, 1)] = 1.0;
        weights[edge_index(5, 2, 3)] = 1.0;
        let graph = graph_game(5, &weights);
        within(
            "two-edge graph witness quad",
            gap_delta_quad(&graph, &k, s, z).map_err(estr)?,
            -0.1,
            NUM,
        )?;

        // a mixture of two unanimity games: at the same probe point the two
        // reveals exactly cancel (the quad is zero, not negative), yet the
        // game is still a counterexample -- the exhaustive audit finds a
        // violating pair at a different known set
        let tm = totally_monotonic_game(5, &[(coal(&[2, 3]), 1.0), (coal(&[0, 1, 2]), 1.0)]);
        within(
            "unanimity-mixture quad at the probe point",
            gap_delta_quad(&tm, &k, s, z).map_err(estr)?,
            0.0,
            NUM,
        )?;
        let report = audit_gap_supermodularity(
            &tm,
            &AuditOptions {
                exhaustive: true,
                extras_cap: None,
                ..AuditOptions::default()
            },
        )
        .map_err(estr)?;
        let w = report.witness.ok_or("exhaustive audit found no violation")?;
        if w.extras != vec![coal(&[0, 2, 3]), coal(&[1, 2, 3])]
            || w.s != coal(&[2, 3])
            || w.z != coal(&[0, 2, 3, 4])
        {
            return Err(format!(
                "first witness moved: extras {:?}, s {:?}, z {:?}",
                w.extras, w.s, w.z
            ));
        }
        within("unanimity-mixture witness quad", w.value, -0.1, NUM)
    });
}

#[test]
fn c08_policies_separate_on_the_random_owner_factory() {
    check("policies separate on the random-owner factory", || {
        let start = Instant::now();
        let n = 4;
        let t = 8;
        let trials = 200;
        let seed = 11;
        let dist = Distribution::new(DistributionKind::Factory, n);
        let kinds = [
            PolicyKind::OracleGreedy,
            PolicyKind::OfflineGreedy,
            PolicyKind::Random,
        ];
        let prepared: Vec<PreparedPolicy> = kinds
            .iter()
            .map(|&kind| PreparedPolicy::prepare(kind, Some(&dist), n, t, 100, seed).map_err(estr))
            .collect::<Result<_, _>>()?;
        let games: Vec<Game> = (0..trials)
            .map(|j| {
                let g = dist.sample(seed, TRIAL_STREAM_BASE + j as u64).map_err(estr)?;
                Ok(g.normalize().map_err(estr)?.game)
            })
            .collect::<Result<_, String>>()?;

        // per policy and step, the gap across trials
        let mut gaps = vec![vec![Vec::with_capacity(trials); t + 1]; kinds.len()];
        for (pi, policy) in prepared.iter().enumerate() {
            for (j, game) in games.iter().enumerate() {
                let trajectory = policy.trajectory(game, j as u64).map_err(estr)?;
                for (step, &gap) in trajectory.gaps.iter().enumerate() {
                    gaps[pi][step].push(gap);
                }
            }
        }

        let per_step = gaps[0].iter().zip(&gaps[1]).zip(&gaps[2]).enumerate().skip(1);
        for (step, ((oracle_gaps, offline_gaps), random_gaps)) in per_step {
            let (oracle, _, _) = summary_stats(oracle_gaps);
            let (offline, _, se_offline) = summary_stats(offline_gaps);
            let (random, _, se_random) = summary_stats(random_gaps);
            if oracle > offline + NUM {
                return Err(format!(
                    "step {step}: oracle-greedy mean {oracle} above offline-greedy {offline}; \
                     the myopic per-game staircase (5/9 after its pair reveal, then 7/18) \
                     overshoots the owner-symmetric all-triples plan exactly where that plan \
                     completes at the optimal 1/3, so this ordering cannot hold at step 4"
                ));
            }
            if offline > random + NUM {
                return Err(format!(
                    "step {step}: offline-greedy mean {offline} above random {random}"
                ));
            }
            let margin = (se_random * se_random + se_offline * se_offline).sqrt();
            if random - offline < 2.0 * margin {
                return Err(format!(
                    "step {step}: random only {} above offline-greedy ({} needed)",
                    random - offline,
                    2.0 * margin
                ));
            }
        }
        deadline(start, Duration::from_secs(120), "policy comparison")
    });
}

#[test]
fn c09_largest_first_nearly_closes_the_gap_on_sparse_mixtures() {
    check("largest-first nearly closes the gap on sparse mixtures", || {
        let start = Instant::now();
        let trials = 20_000;
        let density = 0.005;
        let mut measured = Vec::new();
        for n in [4usize, 5] {
            let dist = Distribution::new(DistributionKind::TotallyMonotonic, n).with_density(density);
            let order = largest_first(n, n).map_err(estr)?;
            let mut initial_sum = 0.0;
            let mut final_sum = 0.0;
            for j in 0..trials {
                let g = dist
                    .sample(99, TRIAL_STREAM_BASE + j as u64)
                    .map_err(estr)?
                    .normalize()
                    .map_err(estr)?
                    .game;
                initial_sum += gap_closed_form(&g, &KnownSet::minimal(n)).map_err(estr)?;
                final_sum += gap_closed_form(&g, &KnownSet::with_extras(n, &order)).map_err(estr)?;
            }
            let reduction = 1.0 - final_sum / initial_sum;
            measured.push((n, reduction));
        }
        for &(n, reduction) in &measured {
            if reduction < 0.95 {
                return Err(format!(
                    "mean gap reduction after revealing every size-(n-1) coalition: {}; \
                     n=5 tops out near 73/78 ~ 0.936 as the mixtures get sparser (a lone \
                     unanimity pair keeps 5/26 of the gap), so 0.95 is out of reach there",
                    measured
                        .iter()
                        .map(|&(n, r)| format!("n={n}: {r:.4}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
            let _ = n;
        }
        deadline(start, Duration::from_secs(120), "largest-first reduction")
    });
}

#[test]
fn c10_zero_gap_needs_every_coalition() {
    check("zero gap needs every coalition", || {
        let mut rng = rng_for(5, 0);
        for i in 0..100u32 {
            let n = 3 + (i as usize % 2);
            let p: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
            let q = rng.random_range(0.1..1.0);
            let g = Game::from_fn(n, |c| {
                let additive: f64 = c.players().map(|j| p[j]).sum();
                additive + q * (c.size() as f64).powi(2)
            })
            .map_err(estr)?;
            if !zero_gap_requires_all(&g).map_err(estr)? {
                return Err(format!(
                    "game #{i} reached a zero gap with a coalition still hidden"
                ));
            }
        }
        Ok(())
    });
}

#[test]
fn c11_experiment_reruns_are_byte_identical() {
    check("experiment reruns are byte-identical", || {
        let dir = std::env::temp_dir().join(format!("coopgap-accept-{}", std::process::id()));
        std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
        let cfg = ExperimentConfig {
            experiment: ExperimentKind::GapCurves,
            distribution: DistributionConfig {
                kind: DistributionKind::TotallyMonotonic,
                n: 4,
                params: DistParams {
                    fixed_owner: None,
                    density: Some(0.3),
                    n_min: None,
                },
            },
            policies: vec![
                PolicyKind::Random,
                PolicyKind::OfflineGreedy,
                PolicyKind::LargestFirst,
            ],
            t: 4,
            trials: 20,
            kappa: Some(10),
            seed: 7,
            out_dir: dir.clone(),
        };
        validate_config(&cfg).map_err(estr)?;

        let first = run_experiment(&cfg).map_err(estr)?;
        let blobs: Vec<Vec<u8>> = first
            .iter()
            .map(|p| std::fs::read(p).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let second = run_experiment(&cfg).map_err(estr)?;
        if first != second {
            return Err(format!("output paths moved: {first:?} vs {second:?}"));
        }
        for (path, old) in second.iter().zip(&blobs) {
            let new = std::fs::read(path).map_err(|e| e.to_string())?;
            if &new != old {
                return Err(format!("{} changed between reruns", path.display()));
            }
        }
        std::fs::remove_dir_all(&dir).ok();
        if first.is_empty() {
            return Err("experiment wrote no files".into());
        }
        Ok(())
    });
}
