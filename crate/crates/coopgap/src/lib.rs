//! Ambiguity analysis for incompletely specified cooperative games.
//!
//! A transferable-utility game assigns a worth to every coalition of players,
//! but in practice only some coalition values are observable. This crate
//! represents such incomplete games, computes the tightest superadditive
//! lower and upper bounds compatible with the known values, and condenses the
//! remaining ambiguity into a single number: the cumulative utopian gap, the
//! total amount by which players' most optimistic Shapley values overshoot
//! the grand coalition's worth.
//!
//! On top of that core the crate provides samplers for families of games,
//! revelation policies that choose which coalition values to acquire next,
//! structural analysis of the gap (supermodularity audits and a pair-excess
//! criterion that certifies non-supermodularity), and a small experiment
//! harness that writes CSV tables and SVG charts.

pub mod analysis;
pub mod bounds;
pub mod chart;
mod error;
pub mod experiment;
pub mod game;
pub mod gap;
pub mod generators;
pub mod policies;

pub use error::{Error, Result};
pub use game::{Coalition, Game, KnownSet, Normalized, EPS, MAX_PLAYERS};
