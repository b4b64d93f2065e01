//! Python bindings for coopgap. Coalitions cross the boundary as lists of
//! 0-based player indices; gaps and Shapley values are on the input scale
//! unless noted.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use coopgap::analysis;
use coopgap::game::{Coalition, Game as CoreGame, KnownSet as CoreKnownSet};
use coopgap::gap;
use coopgap::generators::Distribution;
use coopgap::policies;

fn err(e: coopgap::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn coalition(n: usize, players: &[usize]) -> PyResult<Coalition> {
    for &p in players {
        if p >= n {
            return Err(PyValueError::new_err(format!(
                "player {p} out of range 0..{n}"
            )));
        }
    }
    Ok(Coalition::from_players(players))
}

fn coalitions(n: usize, lists: &[Vec<usize>]) -> PyResult<Vec<Coalition>> {
    lists.iter().map(|l| coalition(n, l)).collect()
}

fn to_lists(cs: &[Coalition]) -> Vec<Vec<usize>> {
    cs.iter().map(|c| c.players().collect()).collect()
}

/// A cooperative game as a dense table of coalition values.
#[pyclass(frozen, name = "Game", skip_from_py_object)]
#[derive(Clone)]
struct Game {
    inner: CoreGame,
}

#[pymethods]
impl Game {
    /// `values[mask]` is the worth of the coalition whose bitmask is `mask`
    /// (bit i set means player i is a member); `values[0]` must be 0.
    #[new]
    fn new(n: usize, values: Vec<f64>) -> PyResult<Self> {
        Ok(Game {
            inner: CoreGame::new(n, values).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    /// Worth of the coalition given as a list of 0-based players.
    fn value(&self, players: Vec<usize>) -> PyResult<f64> {
        Ok(self.inner.value(coalition(self.inner.n(), &players)?))
    }

    fn is_superadditive(&self) -> bool {
        self.inner.is_superadditive()
    }

    fn is_supermodular(&self) -> bool {
        self.inner.is_supermodular()
    }

    fn is_additive(&self) -> bool {
        self.inner.is_additive()
    }

    fn is_normalized(&self) -> bool {
        self.inner.is_normalized()
    }

    /// Strategically equivalent game with grand worth 1 and singleton
    /// worths 0; returns `(game, scale, shift)` with
    /// `normalized = scale * v + shift`.
    fn normalize(&self) -> PyResult<(Game, f64, Vec<f64>)> {
        let norm = self.inner.normalize().map_err(err)?;
        Ok((Game { inner: norm.game.clone() }, norm.scale, norm.shift.clone()))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Game> {
        Ok(Game {
            inner: CoreGame::from_json(text).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Game(n={})", self.inner.n())
    }
}

/// The revealed coalitions: always contains the singletons and the grand
/// coalition, plus any extras.
#[pyclass(frozen, name = "KnownSet", skip_from_py_object)]
#[derive(Clone)]
struct KnownSet {
    inner: CoreKnownSet,
}

#[pymethods]
impl KnownSet {
    #[new]
    #[pyo3(signature = (n, extras=vec![]))]
    fn new(n: usize, extras: Vec<Vec<usize>>) -> PyResult<Self> {
        let extras = coalitions(n, &extras)?;
        Ok(KnownSet {
            inner: CoreKnownSet::with_extras(n, &extras),
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn contains(&self, players: Vec<usize>) -> PyResult<bool> {
        Ok(self.inner.contains(coalition(self.inner.n(), &players)?))
    }

    /// All known coalitions (including singletons and the grand coalition).
    fn members(&self) -> Vec<Vec<usize>> {
        to_lists(self.inner.members())
    }

    /// Known coalitions beyond the minimal information.
    fn extras(&self) -> Vec<Vec<usize>> {
        to_lists(&self.inner.extras())
    }

    fn unknown(&self) -> Vec<Vec<usize>> {
        to_lists(&self.inner.unknown())
    }

    fn with_coalition(&self, players: Vec<usize>) -> PyResult<KnownSet> {
        Ok(KnownSet {
            inner: self.inner.with(coalition(self.inner.n(), &players)?),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "KnownSet(n={}, extras={})",
            self.inner.n(),
            self.inner.extras().len()
        )
    }
}

fn known_set(n: usize, extras: &[Vec<usize>]) -> PyResult<CoreKnownSet> {
    Ok(CoreKnownSet::with_extras(n, &coalitions(n, extras)?))
}

/// Draws one game from a named family; see the library for the kinds.
#[pyfunction]
#[pyo3(signature = (kind, n, seed=0, index=0, fixed_owner=None, density=None))]
fn sample_game(
    kind: &str,
    n: usize,
    seed: u64,
    index: u64,
    fixed_owner: Option<usize>,
    density: Option<f64>,
) -> PyResult<Game> {
    let mut dist = Distribution::new(kind.parse().map_err(err)?, n);
    if let Some(owner) = fixed_owner {
        dist = dist.with_fixed_owner(owner);
    }
    if let Some(density) = density {
        dist = dist.with_density(density);
    }
    Ok(Game {
        inner: dist.sample(seed, index).map_err(err)?,
    })
}

/// Shapley value of every player.
#[pyfunction]
fn shapley(game: &Game) -> Vec<f64> {
    gap::shapley(&game.inner)
}

/// Lower and upper bound tables (indexed by coalition bitmask) induced by
/// the known values. The game must be normalized.
#[pyfunction]
#[pyo3(signature = (game, extras=vec![]))]
fn bounds(game: &Game, extras: Vec<Vec<usize>>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let k = known_set(game.inner.n(), &extras)?;
    let pair = coopgap::bounds::bounds_pair(&game.inner, &k).map_err(err)?;
    Ok((pair.lower().to_vec(), pair.upper().to_vec()))
}

/// Cumulative utopian gap under partial information, on the input scale.
#[pyfunction]
#[pyo3(signature = (game, extras=vec![]))]
fn game_gap(game: &Game, extras: Vec<Vec<usize>>) -> PyResult<f64> {
    let k = known_set(game.inner.n(), &extras)?;
    gap::gap_closed_form(&game.inner, &k).map_err(err)
}

/// Gap plus per-coalition ambiguity widths and utopian Shapley values.
#[pyfunction]
#[pyo3(signature = (game, extras=vec![]))]
fn gap_report<'py>(
    py: Python<'py>,
    game: &Game,
    extras: Vec<Vec<usize>>,
) -> PyResult<Bound<'py, PyDict>> {
    let k = known_set(game.inner.n(), &extras)?;
    let report = gap::gap_report(&game.inner, &k).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("gap", report.gap)?;
    dict.set_item("delta", report.delta)?;
    dict.set_item("utopian_shapley", report.utopian_shapley)?;
    Ok(dict)
}

/// Supermodularity quad of the gap for the reveal pair (s, z) on top of the
/// known set: negative values witness non-supermodularity.
#[pyfunction]
#[pyo3(signature = (game, s, z, extras=vec![]))]
fn gap_delta_quad(
    game: &Game,
    s: Vec<usize>,
    z: Vec<usize>,
    extras: Vec<Vec<usize>>,
) -> PyResult<f64> {
    let n = game.inner.n();
    let k = known_set(n, &extras)?;
    gap::gap_delta_quad(&game.inner, &k, coalition(n, &s)?, coalition(n, &z)?).map_err(err)
}

/// Greedy reveal order when the true game is known.
#[pyfunction]
fn oracle_greedy(game: &Game, t: usize) -> PyResult<Vec<Vec<usize>>> {
    Ok(to_lists(&policies::oracle_greedy(&game.inner, t).map_err(err)?))
}

/// Best reveal set of size `t` when the true game is known (n <= 5).
#[pyfunction]
fn oracle_optimal(game: &Game, t: usize) -> PyResult<Vec<Vec<usize>>> {
    Ok(to_lists(&policies::oracle_optimal(&game.inner, t).map_err(err)?))
}

/// Greedy reveal order against a distribution, estimated on kappa samples.
#[pyfunction]
#[pyo3(signature = (kind, n, t, kappa=None, seed=0, fixed_owner=None, density=None))]
#[allow(clippy::too_many_arguments)]
fn offline_greedy(
    kind: &str,
    n: usize,
    t: usize,
    kappa: Option<usize>,
    seed: u64,
    fixed_owner: Option<usize>,
    density: Option<f64>,
) -> PyResult<Vec<Vec<usize>>> {
    let mut dist = Distribution::new(kind.parse().map_err(err)?, n);
    if let Some(owner) = fixed_owner {
        dist = dist.with_fixed_owner(owner);
    }
    if let Some(density) = density {
        dist = dist.with_density(density);
    }
    let kappa = kappa.unwrap_or_else(|| policies::default_kappa(n));
    Ok(to_lists(
        &policies::offline_greedy(&dist, t, kappa, seed).map_err(err)?,
    ))
}

/// Unknown coalitions by decreasing size.
#[pyfunction]
fn largest_first(n: usize, t: usize) -> PyResult<Vec<Vec<usize>>> {
    Ok(to_lists(&policies::largest_first(n, t).map_err(err)?))
}

/// `t` unknown coalitions drawn uniformly without replacement.
#[pyfunction]
fn random_reveals(n: usize, t: usize, seed: u64) -> PyResult<Vec<Vec<usize>>> {
    Ok(to_lists(&policies::random_policy(n, t, seed).map_err(err)?))
}

/// Gap after each prefix of `reveals` (length `len(reveals) + 1`, starting
/// from the minimal information), on the input scale.
#[pyfunction]
fn trajectory(game: &Game, reveals: Vec<Vec<usize>>) -> PyResult<Vec<f64>> {
    let n = game.inner.n();
    let mut k = CoreKnownSet::minimal(n);
    let mut gaps = vec![gap::gap_closed_form(&game.inner, &k).map_err(err)?];
    for reveal in &reveals {
        k = k.with(coalition(n, reveal)?);
        gaps.push(gap::gap_closed_form(&game.inner, &k).map_err(err)?);
    }
    Ok(gaps)
}

/// Audits supermodularity of the game's gap; exhaustive by default for
/// n <= 5, randomized with `budget` sampled reveal pairs otherwise.
#[pyfunction]
#[pyo3(signature = (game, exhaustive=None, budget=None, full=false, seed=0))]
fn audit<'py>(
    py: Python<'py>,
    game: &Game,
    exhaustive: Option<bool>,
    budget: Option<u64>,
    full: bool,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = analysis::AuditOptions {
        exhaustive: exhaustive.unwrap_or(budget.is_none() && game.inner.n() <= 5),
        extras_cap: if full { None } else { Some(4) },
        budget: budget.unwrap_or(20_000),
        seed,
    };
    let report = analysis::audit_gap_supermodularity(&game.inner, &opts).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("supermodular", report.supermodular)?;
    dict.set_item("quads_checked", report.quads_checked)?;
    match report.witness {
        Some(w) => {
            let witness = PyDict::new(py);
            witness.set_item("known_extras", to_lists(&w.extras))?;
            witness.set_item("s", w.s.players().collect::<Vec<_>>())?;
            witness.set_item("z", w.z.players().collect::<Vec<_>>())?;
            witness.set_item("value", w.value)?;
            dict.set_item("witness", witness)?;
        }
        None => dict.set_item("witness", py.None())?,
    }
    Ok(dict)
}

/// Threshold of the pair-excess criterion (n >= 5).
#[pyfunction]
fn criterion_coefficient(n: usize) -> PyResult<f64> {
    analysis::criterion_coefficient(n).map_err(err)
}

/// Lexicographically first player quadruple certifying non-supermodularity,
/// or None (n >= 6).
#[pyfunction]
fn check_criterion(game: &Game) -> PyResult<Option<[usize; 4]>> {
    analysis::check_criterion(&game.inner).map_err(err)
}

/// Quad value at the criterion's construction for the given quadruple.
#[pyfunction]
fn criterion_witness_quad(game: &Game, quad: [usize; 4]) -> PyResult<f64> {
    analysis::criterion_witness_quad(&game.inner, quad).map_err(err)
}

/// For strictly superadditive games: does hiding any single coalition leave
/// a positive gap?
#[pyfunction]
fn zero_gap_requires_all(game: &Game) -> PyResult<bool> {
    analysis::zero_gap_requires_all(&game.inner).map_err(err)
}

#[pymodule]
fn coopgap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Game>()?;
    m.add_class::<KnownSet>()?;
    m.add_function(wrap_pyfunction!(sample_game, m)?)?;
    m.add_function(wrap_pyfunction!(shapley, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(game_gap, m)?)?;
    m.add_function(wrap_pyfunction!(gap_report, m)?)?;
    m.add_function(wrap_pyfunction!(gap_delta_quad, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(offline_greedy, m)?)?;
    m.add_function(wrap_pyfunction!(largest_first, m)?)?;
    m.add_function(wrap_pyfunction!(random_reveals, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(criterion_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(check_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(criterion_witness_quad, m)?)?;
    m.add_function(wrap_pyfunction!(zero_gap_requires_all, m)?)?;
    Ok(())
}
