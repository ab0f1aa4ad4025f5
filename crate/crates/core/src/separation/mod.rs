//! Separated and spanning sets for the dynamical distance.
//!
//! Every count starts from a [`Closeness`] table: row `i` holds the states `j`
//! with `d_n(i, j) < eps`. Separated sets are cliques of the complement
//! graph, spanning sets are covers by the rows.

mod clique;
mod cover;
mod estimate;

use fixedbitset::FixedBitSet;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::space::Ratio;
use crate::system::FiniteDynamics;

pub use estimate::{entropy_estimate, mdim_estimate, pol_entropy_estimate};

pub const DEFAULT_EXACT_CAP: usize = 64;
pub const DEFAULT_NODE_LIMIT: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Greedy,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKind {
    Separated,
    Spanning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest system on which exact mode runs (see [`FiniteDynamics::exact_size`]).
    pub exact_cap: usize,
    /// Branch-and-bound node budget for exact spanning counts.
    pub node_limit: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            exact_cap: DEFAULT_EXACT_CAP,
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSet {
    pub indices: Vec<usize>,
    pub n: usize,
    pub epsilon: Ratio,
    pub kind: CountKind,
}

impl WitnessSet {
    pub fn count(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSamples {
    pub epsilon: Ratio,
    pub samples: Vec<(usize, usize)>,
    pub kind: CountKind,
    pub mode: Mode,
}

impl GrowthSamples {
    pub fn ns(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.1).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1 as f64).collect()
    }

    pub fn points(&self) -> Vec<(usize, f64)> {
        self.samples.iter().map(|&(n, c)| (n, c as f64)).collect()
    }
}

/// Pairwise `d_n < eps` relation on the states of a system.
#[derive(Debug, Clone)]
pub struct Closeness {
    n: usize,
    rows: Vec<FixedBitSet>,
}

impl Closeness {
    /// Closeness at time 1: `rows[i] = { j : d(i, j) < eps }`.
    pub fn first<D: FiniteDynamics + ?Sized>(sys: &D, eps: Ratio) -> Self {
        Closeness {
            n: 1,
            rows: sys.near_rows(eps),
        }
    }

    /// Closeness at time `n + 1`, using `d_{n+1}(i, j) < eps` iff
    /// `d(i, j) < eps` and `d_n(Ti, Tj) < eps`.
    pub fn advance<D: FiniteDynamics + ?Sized>(&self, sys: &D, first: &Closeness) -> Self {
        let len = self.rows.len();
        let images: Vec<usize> = (0..len).map(|i| sys.image(i)).collect();
        let rows = (0..len)
            .map(|i| {
                let later = &self.rows[images[i]];
                let mut row = FixedBitSet::with_capacity(len);
                for j in first.rows[i].ones() {
                    if later.contains(images[j]) {
                        row.insert(j);
                    }
                }
                row
            })
            .collect();
        Closeness { n: self.n + 1, rows }
    }

    pub fn compute<D: FiniteDynamics + ?Sized>(sys: &D, n: usize, eps: Ratio) -> Self {
        let first = Self::first(sys, eps);
        let mut cur = first.clone();
        for _ in 1..n {
            cur = cur.advance(sys, &first);
        }
        cur
    }

    /// From an explicit symmetric predicate `close(i, j)`.
    pub fn from_fn(len: usize, n: usize, close: impl Fn(usize, usize) -> bool) -> Self {
        let mut rows = vec![FixedBitSet::with_capacity(len); len];
        for i in 0..len {
            rows[i].insert(i);
            for j in i + 1..len {
                if close(i, j) {
                    rows[i].insert(j);
                    rows[j].insert(i);
                }
            }
        }
        Closeness { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_close(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    pub fn row(&self, i: usize) -> &FixedBitSet {
        &self.rows[i]
    }

    fn separation_graph(&self) -> Vec<FixedBitSet> {
        let len = self.rows.len();
        self.rows
            .iter()
            .map(|row| {
                let mut adj = row.clone();
                adj.toggle_range(..);
                adj.grow(len);
                adj
            })
            .collect()
    }

    /// Every pair of `indices` is at distance `>= eps`.
    pub fn is_separated(&self, indices: &[usize]) -> bool {
        indices
            .iter()
            .enumerate()
            .all(|(k, &a)| indices[k + 1..].iter().all(|&b| !self.is_close(a, b)))
    }

    /// Every state is within `< eps` of some member of `indices`.
    pub fn is_spanning(&self, indices: &[usize]) -> bool {
        let mut covered = FixedBitSet::with_capacity(self.len());
        for &i in indices {
            covered.union_with(&self.rows[i]);
        }
        covered.count_ones(..) == self.len()
    }

    /// A separated subset of `candidates` (all states when `None`).
    pub fn separated(&self, mode: Mode, candidates: Option<&FixedBitSet>) -> Vec<usize> {
        let all;
        let candidates = match candidates {
            Some(c) => c,
            None => {
                let mut c = FixedBitSet::with_capacity(self.len());
                c.insert_range(..);
                all = c;
                &all
            }
        };
        let adj = self.separation_graph();
        match mode {
            Mode::Greedy => clique::greedy_clique(&adj, candidates),
            Mode::Exact => clique::max_clique(&adj, candidates),
        }
    }

    /// Up to `limit` maximum separated sets.
    pub fn maximum_separated_sets(&self, limit: usize) -> Vec<Vec<usize>> {
        let mut all = FixedBitSet::with_capacity(self.len());
        all.insert_range(..);
        clique::all_max_cliques(&self.separation_graph(), &all, limit)
    }

    pub fn spanning(&self, mode: Mode, node_limit: u64) -> Result<Vec<usize>> {
        let found = match mode {
            Mode::Greedy => cover::greedy_cover(&self.rows, self.len()),
            Mode::Exact => cover::min_cover(&self.rows, self.len(), node_limit).map_err(|e| Error::Capacity {
                what: "exact spanning search (nodes)",
                size: usize::try_from(e.nodes).unwrap_or(usize::MAX),
                cap: usize::try_from(node_limit).unwrap_or(usize::MAX),
            })?,
        };
        let mut found = found.ok_or_else(|| Error::Internal("closeness rows must contain their own state".into()))?;
        found.sort_unstable();
        Ok(found)
    }

    pub fn count(&self, kind: CountKind, mode: Mode, node_limit: u64) -> Result<Vec<usize>> {
        match kind {
            CountKind::Separated => Ok(self.separated(mode, None)),
            CountKind::Spanning => self.spanning(mode, node_limit),
        }
    }
}

fn validate<D: FiniteDynamics + ?Sized>(sys: &D, n: usize, eps: Ratio, mode: Mode, limits: &Limits) -> Result<()> {
    if n == 0 {
        return input("iterate count must be at least 1");
    }
    if eps <= Ratio::zero() {
        return input("epsilon must be positive");
    }
    if mode == Mode::Exact && sys.exact_size() > limits.exact_cap {
        return Err(Error::Capacity {
            what: "system for exact counting",
            size: sys.exact_size(),
            cap: limits.exact_cap,
        });
    }
    Ok(())
}

/// A maximal (greedy) or maximum (exact) `(n, eps)`-separated set.
pub fn max_separated<D: FiniteDynamics + ?Sized>(
    sys: &D,
    n: usize,
    eps: Ratio,
    mode: Mode,
    limits: &Limits,
) -> Result<WitnessSet> {
    validate(sys, n, eps, mode, limits)?;
    let close = Closeness::compute(sys, n, eps);
    Ok(WitnessSet {
        indices: close.separated(mode, None),
        n,
        epsilon: eps,
        kind: CountKind::Separated,
    })
}

/// A greedy or minimum `(n, eps)`-spanning set.
pub fn min_spanning<D: FiniteDynamics + ?Sized>(
    sys: &D,
    n: usize,
    eps: Ratio,
    mode: Mode,
    limits: &Limits,
) -> Result<WitnessSet> {
    validate(sys, n, eps, mode, limits)?;
    let close = Closeness::compute(sys, n, eps);
    Ok(WitnessSet {
        indices: close.spanning(mode, limits.node_limit)?,
        n,
        epsilon: eps,
        kind: CountKind::Spanning,
    })
}

/// Largest `A` inside `subset` whose members are pairwise `>= eps` apart in `d_n`
/// (equivalently, each member's `eps`-ball meets `A` only in itself).
pub fn sep_on_subset<D: FiniteDynamics + ?Sized>(
    sys: &D,
    n: usize,
    eps: Ratio,
    subset: &[usize],
    limits: &Limits,
) -> Result<WitnessSet> {
    if subset.is_empty() {
        return input("subset must be nonempty");
    }
    validate(sys, n, eps, Mode::Exact, limits)?;
    let len = sys.state_count();
    let mut candidates = FixedBitSet::with_capacity(len);
    for &i in subset {
        if i >= len {
            return input(format!("subset index {i} out of range"));
        }
        candidates.insert(i);
    }
    let close = Closeness::compute(sys, n, eps);
    Ok(WitnessSet {
        indices: close.separated(Mode::Exact, Some(&candidates)),
        n,
        epsilon: eps,
        kind: CountKind::Separated,
    })
}

/// Counts at one `eps` for every `n` in `ns` (strictly increasing), sharing the closeness recursion.
pub fn count_series<D: FiniteDynamics + ?Sized>(
    sys: &D,
    eps: Ratio,
    ns: &[usize],
    kind: CountKind,
    mode: Mode,
    limits: &Limits,
) -> Result<GrowthSamples> {
    if ns.is_empty() {
        return input("n-range is empty");
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return input("n-range must be strictly increasing");
    }
    validate(sys, ns[0], eps, mode, limits)?;
    let first = Closeness::first(sys, eps);
    let mut cur = first.clone();
    let mut samples = Vec::with_capacity(ns.len());
    for &n in ns {
        while cur.n() < n {
            cur = cur.advance(sys, &first);
        }
        samples.push((n, cur.count(kind, mode, limits.node_limit)?.len()));
    }
    Ok(GrowthSamples {
        epsilon: eps,
        samples,
        kind,
        mode,
    })
}
