//! Shapley values, utopian games, and the cumulative utopian gap.
//!
//! Each player's utopian game resolves the ambiguity of an incomplete game in
//! that player's favor: coalitions containing the player sit at their upper
//! bound, everything else at the lower bound. The cumulative utopian gap is
//! the sum of the players' Shapley values in their own utopian games minus
//! the grand coalition's worth, and collapses to a weighted sum of the
//! per-coalition bound widths. A gap of zero means the known values pin down
//! every player's outlook exactly.

use crate::bounds::{bounds_pair, BoundsPair};
use crate::game::{Coalition, Game, KnownSet, Normalized};
use crate::{Error, Result};

fn factorial(k: usize) -> f64 {
    (1..=k as u64).product::<u64>() as f64
}

/// Per-size weights `|S|! (n - |S|)! / n!` that turn bound widths into the
/// cumulative utopian gap. Depends only on coalition size; built once per `n`.
#[derive(Clone, Debug)]
pub struct GapWeights {
    n: usize,
    by_size: Vec<f64>,
}

impl GapWeights {
    pub fn new(n: usize) -> Self {
        let by_size = (0..=n)
            .map(|k| factorial(k) * factorial(n - k) / factorial(n))
            .collect();
        GapWeights { n, by_size }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn for_size(&self, size: usize) -> f64 {
        self.by_size[size]
    }

    pub fn for_coalition(&self, c: Coalition) -> f64 {
        self.by_size[c.size()]
    }
}

/// Exact Shapley values in `O(n 2^n)`: each player's average marginal
/// contribution over all orderings, accumulated coalition by coalition.
pub fn shapley(g: &Game) -> Vec<f64> {
    let n = g.n();
    let size = g.num_coalitions();
    let values = g.values();
    // weight of a marginal step from a coalition of size s
    let w: Vec<f64> = (0..n)
        .map(|s| factorial(s) * factorial(n - 1 - s) / factorial(n))
        .collect();
    let mut phi = vec![0.0; n];
    for s in 0..size {
        let sz = (s as u32).count_ones() as usize;
        for (i, p) in phi.iter_mut().enumerate() {
            let bit = 1usize << i;
            if s & bit == 0 {
                *p += w[sz] * (values[s | bit] - values[s]);
            }
        }
    }
    phi
}

/// Player `i`'s utopian game for a normalized incomplete game: upper bounds
/// on coalitions containing `i`, lower bounds elsewhere.
pub fn utopian_game(g: &Game, k: &KnownSet, player: usize) -> Result<Game> {
    if player >= g.n() {
        return Err(Error::InvalidArgument(format!(
            "player {player} out of range for n={}",
            g.n()
        )));
    }
    let bp = bounds_pair(g, k)?;
    Ok(utopian_from_bounds(g.n(), &bp, player))
}

fn utopian_from_bounds(n: usize, bp: &BoundsPair, player: usize) -> Game {
    let bit = 1usize << player;
    let values = (0..1usize << n)
        .map(|s| {
            if s & bit != 0 {
                bp.upper()[s]
            } else {
                bp.lower()[s]
            }
        })
        .collect();
    Game::new(n, values).expect("bounds arrays form a valid game")
}

fn normalized_gap(gn: &Game, k: &KnownSet, weights: &GapWeights) -> Result<f64> {
    let bp = bounds_pair(gn, k)?;
    let mut total = 0.0;
    for s in 0..gn.num_coalitions() {
        let width = bp.upper()[s] - bp.lower()[s];
        total += weights.by_size[(s as u32).count_ones() as usize] * width;
    }
    Ok(total)
}

fn normalize_for_gap(g: &Game) -> Result<(Normalized, GapWeights)> {
    let norm = g.normalize()?;
    let weights = GapWeights::new(g.n());
    Ok((norm, weights))
}

/// Cumulative utopian gap via the closed form: the weighted sum of bound
/// widths, computed on the normalized game and reported on the input scale.
pub fn gap_closed_form(g: &Game, k: &KnownSet) -> Result<f64> {
    let (norm, weights) = normalize_for_gap(g)?;
    Ok(normalized_gap(&norm.game, k, &weights)? * norm.raw_factor())
}

/// Cumulative utopian gap from its definition: build every player's utopian
/// game, take their Shapley values, subtract the grand coalition's worth.
/// Slower than the closed form; kept as an independent cross-check.
pub fn gap_definitional(g: &Game, k: &KnownSet) -> Result<f64> {
    let (norm, _) = normalize_for_gap(g)?;
    let bp = bounds_pair(&norm.game, k)?;
    let mut total = -norm.game.grand_value();
    for i in 0..g.n() {
        let vi = utopian_from_bounds(g.n(), &bp, i);
        total += shapley(&vi)[i];
    }
    Ok(total * norm.raw_factor())
}

/// Second difference of the gap in two extra reveals:
/// `gap(K+S+Z) - gap(K+S) - gap(K+Z) + gap(K)`. Non-negative everywhere iff
/// the gap is supermodular in the known set; a negative value certifies that
/// revealing one coalition can make the other's marginal effect smaller.
pub fn gap_delta_quad(g: &Game, k: &KnownSet, s: Coalition, z: Coalition) -> Result<f64> {
    if s == z {
        return Err(Error::InvalidArgument(
            "the two reveals must be distinct".into(),
        ));
    }
    for c in [s, z] {
        if k.contains(c) {
            return Err(Error::InvalidArgument(format!(
                "coalition {:?} is already known",
                c
            )));
        }
    }
    let (norm, weights) = normalize_for_gap(g)?;
    let gn = &norm.game;
    let base = normalized_gap(gn, k, &weights)?;
    let with_s = normalized_gap(gn, &k.with(s), &weights)?;
    let with_z = normalized_gap(gn, &k.with(z), &weights)?;
    let with_both = normalized_gap(gn, &k.with(s).with(z), &weights)?;
    Ok((with_both - with_s - with_z + base) * norm.raw_factor())
}

/// Everything the `gap` CLI prints, on the input scale.
#[derive(Clone, Debug, serde::Serialize)]
pub struct GapReport {
    pub gap: f64,
    /// Per-coalition bound width, indexed by bitmask.
    pub delta: Vec<f64>,
    /// Each player's Shapley value in their own utopian game.
    pub utopian_shapley: Vec<f64>,
}

/// Gap, bound widths, and per-player utopian Shapley values in one pass.
pub fn gap_report(g: &Game, k: &KnownSet) -> Result<GapReport> {
    let (norm, weights) = normalize_for_gap(g)?;
    let bp = bounds_pair(&norm.game, k)?;
    let factor = norm.raw_factor();
    let mut gap = 0.0;
    let mut delta = Vec::with_capacity(g.num_coalitions());
    for s in 0..g.num_coalitions() {
        let width = bp.upper()[s] - bp.lower()[s];
        gap += weights.by_size[(s as u32).count_ones() as usize] * width;
        delta.push(width * factor);
    }
    let utopian_shapley = (0..g.n())
        .map(|i| {
            let vi = utopian_from_bounds(g.n(), &bp, i);
            (shapley(&vi)[i] - norm.shift[i]) * factor
        })
        .collect();
    Ok(GapReport {
        gap: gap * factor,
        delta,
        utopian_shapley,
    })
}
