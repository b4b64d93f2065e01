//! Core representation: coalitions as bitmasks, characteristic functions as
//! dense tables indexed by bitmask, and the bookkeeping for which coalition
//! values are known.
//!
//! Player indices are 0-based everywhere in the library; only the CLI layer
//! translates to and from the 1-based labels used in files and terminals.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default tolerance for floating-point comparisons in predicates.
pub const EPS: f64 = 1e-9;

/// Largest supported player count; values are stored densely as `2^n` reals.
pub const MAX_PLAYERS: usize = 16;

/// A coalition of players encoded as a bitmask: player `i` is a member iff
/// bit `i` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(pub u16);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn grand(n: usize) -> Self {
        Coalition(((1u32 << n) - 1) as u16)
    }

    pub fn singleton(player: usize) -> Self {
        Coalition(1 << player)
    }

    /// Builds a coalition from 0-based player indices.
    pub fn from_players(players: &[usize]) -> Self {
        Coalition(players.iter().fold(0u16, |m, &p| m | (1 << p)))
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    /// Position of this coalition in a dense value table.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn size(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, player: usize) -> bool {
        self.0 & (1 << player) != 0
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersects(self, other: Coalition) -> bool {
        self.0 & other.0 != 0
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    pub fn minus(self, other: Coalition) -> Coalition {
        Coalition(self.0 & !other.0)
    }

    /// 0-based member indices, ascending.
    pub fn players(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_PLAYERS).filter(move |i| bits & (1 << i) != 0)
    }
}

#[derive(Serialize, Deserialize)]
struct GameJson {
    n: usize,
    values: Vec<f64>,
}

/// A cooperative game on `n` players: a dense table of coalition values with
/// `values[S.index()]` holding the worth of `S` and `values[0] == 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    n: usize,
    values: Vec<f64>,
}

impl Game {
    pub fn new(n: usize, mut values: Vec<f64>) -> Result<Self> {
        if !(2..=MAX_PLAYERS).contains(&n) {
            return Err(Error::InvalidGame(format!(
                "player count must be between 2 and {MAX_PLAYERS}, got {n}"
            )));
        }
        if values.len() != 1 << n {
            return Err(Error::InvalidGame(format!(
                "expected {} values for n={n}, got {}",
                1 << n,
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGame("values must be finite".into()));
        }
        if values[0].abs() > 1e-12 {
            return Err(Error::InvalidGame(format!(
                "empty coalition must be worth 0, got {}",
                values[0]
            )));
        }
        values[0] = 0.0;
        Ok(Game { n, values })
    }

    /// Builds the table by evaluating `f` on every coalition.
    pub fn from_fn(n: usize, f: impl Fn(Coalition) -> f64) -> Result<Self> {
        let values = (0..1u32 << n).map(|s| f(Coalition(s as u16))).collect();
        Game::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_coalitions(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, c: Coalition) -> f64 {
        self.values[c.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grand_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// All coalitions of this game, ascending by bitmask.
    pub fn coalitions(&self) -> impl Iterator<Item = Coalition> {
        (0..1u32 << self.n).map(|s| Coalition(s as u16))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GameJson {
            n: self.n,
            values: self.values.clone(),
        })
        .expect("game serialization cannot fail")
    }

    /// Accepts any JSON object carrying at least `n` and `values`; extra
    /// fields (sampler metadata and the like) are ignored.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let parsed: GameJson = serde_json::from_value(raw)?;
        Game::new(parsed.n, parsed.values)
    }

    /// Superadditivity: `v(S) + v(T) <= v(S u T)` for all disjoint `S`, `T`.
    pub fn is_superadditive(&self) -> bool {
        self.is_superadditive_with(EPS)
    }

    pub fn is_superadditive_with(&self, eps: f64) -> bool {
        let size = self.values.len();
        for s in 1..size {
            let complement = (size - 1) & !s;
            // enumerate non-empty submasks of the complement
            let mut t = complement;
            while t > 0 {
                if self.values[s] + self.values[t] > self.values[s | t] + eps {
                    return false;
                }
                t = (t - 1) & complement;
            }
        }
        true
    }

    /// Strict superadditivity with margin `eps` over all pairs of disjoint
    /// non-empty coalitions.
    pub fn is_strictly_superadditive_with(&self, eps: f64) -> bool {
        let size = self.values.len();
        for s in 1..size {
            let complement = (size - 1) & !s;
            let mut t = complement;
            while t > 0 {
                if self.values[s] + self.values[t] >= self.values[s | t] - eps {
                    return false;
                }
                t = (t - 1) & complement;
            }
        }
        true
    }

    /// Supermodularity (convexity): marginal contributions are non-decreasing,
    /// `v(S u {j}) - v(S) <= v(S u {i,j}) - v(S u {i})` for distinct `i`, `j`
    /// and `S` avoiding both.
    pub fn is_supermodular(&self) -> bool {
        self.is_supermodular_with(EPS)
    }

    pub fn is_supermodular_with(&self, eps: f64) -> bool {
        let full = self.values.len() - 1;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let bi = 1usize << i;
                let bj = 1usize << j;
                let rest = full & !bi & !bj;
                // the (i,j) and (j,i) inequalities coincide after rearranging,
                // so unordered pairs suffice
                let mut s = rest;
                loop {
                    let lhs = self.values[s | bj] - self.values[s];
                    let rhs = self.values[s | bi | bj] - self.values[s | bi];
                    if lhs > rhs + eps {
                        return false;
                    }
                    if s == 0 {
                        break;
                    }
                    s = (s - 1) & rest;
                }
            }
        }
        true
    }

    /// Additivity: every coalition is worth exactly the sum of its singletons.
    pub fn is_additive(&self) -> bool {
        self.is_additive_with(EPS)
    }

    pub fn is_additive_with(&self, eps: f64) -> bool {
        let size = self.values.len();
        let mut singleton_sum = vec![0.0; size];
        for s in 1..size {
            let low = s.trailing_zeros() as usize;
            singleton_sum[s] = singleton_sum[s & (s - 1)] + self.values[1 << low];
        }
        (0..size).all(|s| (self.values[s] - singleton_sum[s]).abs() <= eps)
    }

    /// Applies the strategic-equivalence transform `w(S) = alpha v(S) +
    /// sum_{i in S} beta[i]`.
    pub fn affine_transform(&self, alpha: f64, beta: &[f64]) -> Result<Game> {
        if beta.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "expected {} shift entries, got {}",
                self.n,
                beta.len()
            )));
        }
        let size = self.values.len();
        let mut shift = vec![0.0; size];
        for s in 1..size {
            let low = s.trailing_zeros() as usize;
            shift[s] = shift[s & (s - 1)] + beta[low];
        }
        let values = (0..size).map(|s| alpha * self.values[s] + shift[s]).collect();
        Game::new(self.n, values)
    }

    /// Rescales to the normalized representative of the strategic-equivalence
    /// class: singletons worth 0, grand coalition worth 1.
    pub fn normalize(&self) -> Result<Normalized> {
        let singleton_sum: f64 = (0..self.n).map(|i| self.values[1 << i]).sum();
        let denom = self.grand_value() - singleton_sum;
        if denom.abs() <= EPS {
            return Err(Error::DegenerateGame);
        }
        let scale = 1.0 / denom;
        let shift: Vec<f64> = (0..self.n).map(|i| -scale * self.values[1 << i]).collect();
        let game = self.affine_transform(scale, &shift)?;
        Ok(Normalized { game, scale, shift })
    }

    /// Whether singletons are (approximately) worth 0 and the grand coalition 1.
    pub fn is_normalized(&self) -> bool {
        (self.grand_value() - 1.0).abs() <= EPS
            && (0..self.n).all(|i| self.values[1 << i].abs() <= EPS)
    }
}

/// Result of [`Game::normalize`]: the normalized game together with the
/// applied transform `w = scale * v + shift`, kept so callers can map values
/// computed on the normalized scale back to the input scale.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub game: Game,
    pub scale: f64,
    pub shift: Vec<f64>,
}

impl Normalized {
    /// Gaps and bound widths computed on the normalized game scale by
    /// `1/scale` when reported on the input scale.
    pub fn raw_factor(&self) -> f64 {
        1.0 / self.scale
    }
}

#[derive(Serialize, Deserialize)]
struct KnownSetJson {
    n: usize,
    mask: Vec<bool>,
}

/// The set of coalitions whose values are known. Always contains the minimal
/// information: the empty set, all singletons, and the grand coalition.
/// Immutable; extension returns a new set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnownSet {
    n: usize,
    mask: Vec<bool>,
    members: Vec<Coalition>,
}

impl KnownSet {
    /// The minimal known set on `n` players.
    pub fn minimal(n: usize) -> Self {
        let size = 1usize << n;
        let mut mask = vec![false; size];
        mask[0] = true;
        mask[size - 1] = true;
        for i in 0..n {
            mask[1 << i] = true;
        }
        let members = Self::collect_members(&mask);
        KnownSet { n, mask, members }
    }

    /// Every coalition known.
    pub fn full(n: usize) -> Self {
        let size = 1usize << n;
        let mask = vec![true; size];
        let members = Self::collect_members(&mask);
        KnownSet { n, mask, members }
    }

    /// Minimal information plus the given extra coalitions.
    pub fn with_extras(n: usize, extras: &[Coalition]) -> Self {
        KnownSet::minimal(n).with_all(extras)
    }

    /// Validates an explicit membership mask; it must cover the minimal
    /// information.
    pub fn from_mask(n: usize, mask: Vec<bool>) -> Result<Self> {
        if !(2..=MAX_PLAYERS).contains(&n) || mask.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "mask length {} does not match n={n}",
                mask.len()
            )));
        }
        let minimal_ok =
            mask[0] && mask[mask.len() - 1] && (0..n).all(|i| mask[1usize << i]);
        if !minimal_ok {
            return Err(Error::MissingMinimalInfo);
        }
        let members = Self::collect_members(&mask);
        Ok(KnownSet { n, mask, members })
    }

    fn collect_members(mask: &[bool]) -> Vec<Coalition> {
        mask.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(s, _)| Coalition(s as u16))
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, c: Coalition) -> bool {
        self.mask[c.index()]
    }

    /// Known coalitions, ascending by bitmask.
    pub fn members(&self) -> &[Coalition] {
        &self.members
    }

    /// Known coalitions beyond the minimal information.
    pub fn extras(&self) -> Vec<Coalition> {
        let grand = Coalition::grand(self.n);
        self.members
            .iter()
            .copied()
            .filter(|c| !c.is_empty() && c.size() != 1 && *c != grand)
            .collect()
    }

    /// Unknown coalitions, ascending by bitmask.
    pub fn unknown(&self) -> Vec<Coalition> {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| !m)
            .map(|(s, _)| Coalition(s as u16))
            .collect()
    }

    pub fn known_count(&self) -> usize {
        self.members.len()
    }

    pub fn unknown_count(&self) -> usize {
        self.mask.len() - self.members.len()
    }

    /// A copy of this set with `c` revealed. Idempotent.
    pub fn with(&self, c: Coalition) -> Self {
        let mut next = self.clone();
        if !next.mask[c.index()] {
            next.mask[c.index()] = true;
            let pos = next.members.partition_point(|m| *m < c);
            next.members.insert(pos, c);
        }
        next
    }

    pub fn with_all(&self, cs: &[Coalition]) -> Self {
        let mut next = self.clone();
        for &c in cs {
            if !next.mask[c.index()] {
                next.mask[c.index()] = true;
                let pos = next.members.partition_point(|m| *m < c);
                next.members.insert(pos, c);
            }
        }
        next
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&KnownSetJson {
            n: self.n,
            mask: self.mask.clone(),
        })
        .expect("known-set serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: KnownSetJson = serde_json::from_str(text)?;
        KnownSet::from_mask(parsed.n, parsed.mask)
    }
}
