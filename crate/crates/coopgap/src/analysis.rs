//! Structural analysis of the gap as a set function of the known coalitions:
//! supermodularity audits over reveal pairs, and a cheap pair-excess
//! criterion that certifies non-supermodularity for six or more players.

use std::collections::HashMap;

use itertools::Itertools;
use rand::Rng;

use crate::bounds::bounds_pair;
use crate::game::{Coalition, Game, KnownSet, EPS};
use crate::gap::{gap_closed_form, gap_delta_quad, GapWeights};
use crate::generators::rng_for;
use crate::{Error, Result};

/// Exhaustive audits enumerate known sets, so they stop at five players.
pub const AUDIT_MAX_PLAYERS: usize = 5;

/// The pair-excess criterion needs at least six players.
pub const CRITERION_MIN_PLAYERS: usize = 6;

/// A reveal pair whose joint effect on the gap is smaller than the sum of
/// their separate effects: `gap(K+S+Z) - gap(K+S) - gap(K+Z) + gap(K) < 0`.
#[derive(Clone, Debug)]
pub struct QuadWitness {
    /// Extra known coalitions beyond the minimal information.
    pub extras: Vec<Coalition>,
    pub s: Coalition,
    pub z: Coalition,
    /// The quad value on the input scale.
    pub value: f64,
}

/// Outcome of a supermodularity audit.
#[derive(Clone, Debug)]
pub struct AuditReport {
    pub supermodular: bool,
    pub witness: Option<QuadWitness>,
    pub quads_checked: u64,
}

/// How to audit: exhaustively over known sets with at most `extras_cap`
/// extra coalitions (`None` lifts the cap), or by sampling `budget` random
/// reveal pairs.
#[derive(Clone, Debug)]
pub struct AuditOptions {
    pub exhaustive: bool,
    pub extras_cap: Option<usize>,
    pub budget: u64,
    pub seed: u64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            exhaustive: true,
            extras_cap: Some(4),
            budget: 20_000,
            seed: 0,
        }
    }
}

/// Memoizes normalized gaps keyed by the known-set bitset (only when the
/// coalition count fits one word; larger games recompute).
struct GapCache<'a> {
    gn: &'a Game,
    weights: GapWeights,
    memo: HashMap<u64, f64>,
    small: bool,
}

impl<'a> GapCache<'a> {
    fn new(gn: &'a Game) -> Self {
        GapCache {
            weights: GapWeights::new(gn.n()),
            small: gn.num_coalitions() <= 64,
            memo: HashMap::new(),
            gn,
        }
    }

    fn gap_extras(&mut self, extras: &[Coalition]) -> Result<f64> {
        let key = extras
            .iter()
            .fold(0u64, |acc, c| acc | (1u64 << c.index().min(63)));
        if self.small {
            if let Some(&v) = self.memo.get(&key) {
                return Ok(v);
            }
        }
        let k = KnownSet::with_extras(self.gn.n(), extras);
        let bp = bounds_pair(self.gn, &k)?;
        let mut total = 0.0;
        for s in 0..self.gn.num_coalitions() {
            let width = bp.upper()[s] - bp.lower()[s];
            total += self.weights.for_size((s as u32).count_ones() as usize) * width;
        }
        if self.small {
            self.memo.insert(key, total);
        }
        Ok(total)
    }
}

/// Searches for reveal pairs that violate supermodularity of the gap.
///
/// Exhaustive mode walks every known set (extras capped, ascending by size
/// then lexicographic) and every unordered pair of further reveals, and
/// returns the first violation in that deterministic order. Randomized mode
/// samples reveal pairs, after first probing the pair-excess criterion's
/// construction when it applies.
pub fn audit_gap_supermodularity(g: &Game, opts: &AuditOptions) -> Result<AuditReport> {
    let n = g.n();
    let norm = g.normalize()?;
    let factor = norm.raw_factor();
    let mut cache = GapCache::new(&norm.game);
    let unknowns = KnownSet::minimal(n).unknown();
    let mut quads_checked = 0u64;

    if opts.exhaustive {
        if n > AUDIT_MAX_PLAYERS {
            return Err(Error::SizeLimit {
                n,
                limit: AUDIT_MAX_PLAYERS,
            });
        }
        let cap = opts
            .extras_cap
            .unwrap_or(unknowns.len())
            .min(unknowns.len().saturating_sub(2));
        for size in 0..=cap {
            for extras in unknowns.iter().copied().combinations(size) {
                let base = cache.gap_extras(&extras)?;
                let remaining: Vec<Coalition> = unknowns
                    .iter()
                    .copied()
                    .filter(|c| !extras.contains(c))
                    .collect();
                let mut with_one = vec![0.0; remaining.len()];
                let mut scratch = extras.clone();
                for (i, &c) in remaining.iter().enumerate() {
                    scratch.push(c);
                    with_one[i] = cache.gap_extras(&scratch)?;
                    scratch.pop();
                }
                for i in 0..remaining.len() {
                    for j in (i + 1)..remaining.len() {
                        scratch.push(remaining[i]);
                        scratch.push(remaining[j]);
                        let both = cache.gap_extras(&scratch)?;
                        scratch.pop();
                        scratch.pop();
                        let quad = (both - with_one[i] - with_one[j] + base) * factor;
                        quads_checked += 1;
                        if quad < -EPS {
                            return Ok(AuditReport {
                                supermodular: false,
                                witness: Some(QuadWitness {
                                    extras,
                                    s: remaining[i],
                                    z: remaining[j],
                                    value: quad,
                                }),
                                quads_checked,
                            });
                        }
                    }
                }
            }
        }
        return Ok(AuditReport {
            supermodular: true,
            witness: None,
            quads_checked,
        });
    }

    // randomized mode: try the criterion's construction first, then sample
    if n >= CRITERION_MIN_PLAYERS {
        if let Some([i, j, k, l]) = check_criterion(g)? {
            let extras = vec![Coalition::from_players(&[j, k])];
            let s = Coalition::from_players(&[i, j]);
            let z = Coalition::from_players(&[k, l]);
            let known = KnownSet::with_extras(n, &extras);
            let quad = gap_delta_quad(g, &known, s, z)?;
            quads_checked += 1;
            if quad < -EPS {
                return Ok(AuditReport {
                    supermodular: false,
                    witness: Some(QuadWitness {
                        extras,
                        s,
                        z,
                        value: quad,
                    }),
                    quads_checked,
                });
            }
        }
    }
    let mut rng = rng_for(opts.seed, 0);
    let cap = opts
        .extras_cap
        .unwrap_or(4)
        .min(unknowns.len().saturating_sub(2));
    for _ in 0..opts.budget {
        let size = rng.random_range(0..=cap);
        let mut pool = unknowns.clone();
        // partial Fisher-Yates: the first `size + 2` entries become the
        // extras plus the reveal pair
        for i in 0..(size + 2) {
            let j = rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        let extras: Vec<Coalition> = pool[..size].to_vec();
        let s = pool[size];
        let z = pool[size + 1];
        let base = cache.gap_extras(&extras)?;
        let mut scratch = extras.clone();
        scratch.push(s);
        let with_s = cache.gap_extras(&scratch)?;
        scratch.pop();
        scratch.push(z);
        let with_z = cache.gap_extras(&scratch)?;
        scratch.push(s);
        let both = cache.gap_extras(&scratch)?;
        let quad = (both - with_s - with_z + base) * factor;
        quads_checked += 1;
        if quad < -EPS {
            let (s, z) = if s < z { (s, z) } else { (z, s) };
            return Ok(AuditReport {
                supermodular: false,
                witness: Some(QuadWitness {
                    extras,
                    s,
                    z,
                    value: quad,
                }),
                quads_checked,
            });
        }
    }
    Ok(AuditReport {
        supermodular: true,
        witness: None,
        quads_checked,
    })
}

fn binom(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num *= (n - i) as u64;
        den *= (i + 1) as u64;
    }
    num / den
}

/// The threshold `C(n)` of the pair-excess criterion:
/// `binom(n,2) / binom(n, n/2) * (2^(n-3) - n + 2) - 1`, computed as an
/// exact integer ratio before the final division.
pub fn criterion_coefficient(n: usize) -> Result<f64> {
    if n < 5 {
        return Err(Error::SizeLimit { n, limit: 5 });
    }
    let mid = binom(n, n / 2) as i64;
    let num = binom(n, 2) as i64 * ((1i64 << (n - 3)) - n as i64 + 2) - mid;
    Ok(num as f64 / mid as f64)
}

fn pair_excess(g: &Game, a: usize, b: usize) -> f64 {
    g.value(Coalition::from_players(&[a, b]))
        - g.value(Coalition::singleton(a))
        - g.value(Coalition::singleton(b))
}

/// Looks for four distinct players whose consecutive pair excesses are
/// ordered and close enough: `e(i,j) <= e(j,k) <= e(k,l) < C(n) e(i,j)`.
/// Any such quadruple certifies that the gap of the game is not supermodular.
/// Returns the lexicographically first quadruple, 0-based.
pub fn check_criterion(g: &Game) -> Result<Option<[usize; 4]>> {
    let n = g.n();
    if n < CRITERION_MIN_PLAYERS {
        return Err(Error::SizeLimit {
            n,
            limit: CRITERION_MIN_PLAYERS,
        });
    }
    let coeff = criterion_coefficient(n)?;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let eij = pair_excess(g, i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let ejk = pair_excess(g, j, k);
                if eij > ejk + EPS {
                    continue;
                }
                for l in 0..n {
                    if l == i || l == j || l == k {
                        continue;
                    }
                    let ekl = pair_excess(g, k, l);
                    if ejk <= ekl + EPS && ekl < coeff * eij - EPS {
                        return Ok(Some([i, j, k, l]));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Evaluates the quad at the criterion's construction: the middle pair
/// `{j,k}` revealed, then `S = {i,j}` against `Z = {k,l}`.
pub fn criterion_witness_quad(g: &Game, quad: [usize; 4]) -> Result<f64> {
    let [i, j, k, l] = quad;
    let known = KnownSet::with_extras(g.n(), &[Coalition::from_players(&[j, k])]);
    gap_delta_quad(
        g,
        &known,
        Coalition::from_players(&[i, j]),
        Coalition::from_players(&[k, l]),
    )
}

/// For strictly superadditive games, hiding any single coalition beyond the
/// minimal information leaves a positive gap: no proper subset of the
/// coalition values determines the game. Returns true when confirmed for
/// every candidate hidden coalition.
pub fn zero_gap_requires_all(g: &Game) -> Result<bool> {
    if !g.is_strictly_superadditive_with(EPS) {
        return Err(Error::NotStrictlySuperadditive);
    }
    let n = g.n();
    let minimal = KnownSet::minimal(n);
    for hidden in minimal.unknown() {
        let mut mask = vec![true; g.num_coalitions()];
        mask[hidden.index()] = false;
        let k = KnownSet::from_mask(n, mask)?;
        if gap_closed_form(g, &k)? <= EPS {
            return Ok(false);
        }
    }
    Ok(true)
}
