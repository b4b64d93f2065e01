//! Tightest superadditive bounds on the unknown coalition values of an
//! incomplete game.
//!
//! For a normalized game with known set `K`, the lower game takes the best
//! partition of each coalition into known parts, and the upper game takes the
//! stingiest known cover: the worth of a known superset minus what the
//! leftover players could guarantee on their own. Every coalition's true
//! value in any superadditive extension lies between the two.

use crate::game::{Coalition, Game, KnownSet};
use crate::{Error, Result};

/// Lower and upper bounding games, stored densely like [`Game`] values.
#[derive(Clone, Debug)]
pub struct BoundsPair {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoundsPair {
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lower_of(&self, c: Coalition) -> f64 {
        self.lower[c.index()]
    }

    pub fn upper_of(&self, c: Coalition) -> f64 {
        self.upper[c.index()]
    }

    /// Per-coalition ambiguity `upper - lower`.
    pub fn delta(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .collect()
    }
}

fn ensure_normalized(g: &Game) -> Result<()> {
    if g.is_normalized() {
        Ok(())
    } else {
        Err(Error::NotNormalized)
    }
}

fn ensure_compatible(g: &Game, k: &KnownSet) -> Result<()> {
    if g.n() != k.n() {
        return Err(Error::InvalidArgument(format!(
            "game has {} players but known set has {}",
            g.n(),
            k.n()
        )));
    }
    ensure_normalized(g)
}

/// Best-partition lower bound for every coalition.
///
/// Dynamic program over coalitions in ascending bitmask order (every proper
/// submask precedes its superset numerically):
/// `l(S) = max over known non-empty T inside S of v(T) + l(S minus T)`.
/// Requires a normalized game; the known set carries the minimal information
/// by construction.
pub fn lower_game(g: &Game, k: &KnownSet) -> Result<Vec<f64>> {
    ensure_compatible(g, k)?;
    let size = g.num_coalitions();
    let mut lower = vec![0.0; size];
    for s in 1..size {
        let mut best = f64::NEG_INFINITY;
        for &t in k.members() {
            let tb = t.index();
            if tb == 0 || tb & !s != 0 {
                continue;
            }
            let cand = g.values()[tb] + lower[s & !tb];
            if cand > best {
                best = cand;
            }
        }
        lower[s] = best;
    }
    Ok(lower)
}

/// Stingiest-cover upper bound for every coalition, given the lower game.
///
/// `u(S) = min over known T containing S of v(T) - l(T minus S)`; the grand
/// coalition is always known, so the minimum is never empty.
pub fn upper_game(g: &Game, k: &KnownSet, lower: &[f64]) -> Result<Vec<f64>> {
    ensure_compatible(g, k)?;
    let size = g.num_coalitions();
    if lower.len() != size {
        return Err(Error::InvalidArgument(
            "lower game has the wrong length".into(),
        ));
    }
    let mut upper = vec![0.0; size];
    for s in 0..size {
        let mut best = f64::INFINITY;
        for &t in k.members() {
            let tb = t.index();
            if s & !tb != 0 {
                continue;
            }
            let cand = g.values()[tb] - lower[tb & !s];
            if cand < best {
                best = cand;
            }
        }
        upper[s] = best;
    }
    Ok(upper)
}

/// Both bounds in one call.
pub fn bounds_pair(g: &Game, k: &KnownSet) -> Result<BoundsPair> {
    let lower = lower_game(g, k)?;
    let upper = upper_game(g, k, &lower)?;
    Ok(BoundsPair { lower, upper })
}

/// The superadditive extension that pins supersets of `s` at their upper
/// bound and everything else at the lower bound; agrees with `v` on known
/// coalitions. `s` must be nonempty (disjoint coalitions can then cover at
/// most one superset of `s`, which is what keeps the extension
/// superadditive).
pub fn optimistic_extension(g: &Game, k: &KnownSet, s: Coalition) -> Result<Game> {
    if s.is_empty() {
        return Err(Error::InvalidArgument(
            "the optimistic extension needs a nonempty coalition".into(),
        ));
    }
    let bp = bounds_pair(g, k)?;
    let values = (0..g.num_coalitions())
        .map(|t| {
            if s.index() & !t == 0 {
                bp.upper[t]
            } else {
                bp.lower[t]
            }
        })
        .collect();
    Game::new(g.n(), values)
}
