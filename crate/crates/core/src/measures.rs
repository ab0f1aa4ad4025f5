//! Finite-support rational probability measures and the push-forward dynamics.
//!
//! Weights are exact rationals throughout. The Prohorov distance is computed
//! from max-flow deficiencies; a subset-enumeration variant is kept as an
//! independent check for small supports.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_integer::Integer;
use num_traits::{One, Zero};
use pathfinding::directed::edmonds_karp::edmonds_karp_sparse;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::hyperspace::{dyn_hausdorff, hausdorff_distance, induced_map, HyperPoint};
use crate::separation::{max_separated, sep_on_subset, Closeness, CountKind, GrowthSamples, Limits, Mode, WitnessSet};
use crate::space::{ratio_string, FiniteMetricSpace, Ratio};
use crate::system::System;
use crate::zoo::{ZooKind, ZooSpec};

/// Tolerance for separation decisions made on floating-point distances.
pub const FLOAT_TOLERANCE: f64 = 1e-12;
/// Largest support the subset-enumeration Prohorov oracle accepts.
pub const SUBSET_ORACLE_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalMeasure {
    /// `(point, weight)` sorted by point, weights positive and summing to 1.
    atoms: Vec<(usize, Ratio)>,
}

impl RationalMeasure {
    pub fn new(mut atoms: Vec<(usize, Ratio)>) -> Result<Self> {
        atoms.sort_by_key(|a| a.0);
        if atoms.is_empty() {
            return input("a measure needs at least one atom");
        }
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return input("measure support has a repeated point");
        }
        if atoms.iter().any(|a| a.1 <= Ratio::zero()) {
            return input("measure weights must be positive");
        }
        let total: Ratio = atoms.iter().map(|a| a.1).sum();
        if !total.is_one() {
            return input(format!("measure weights sum to {}, not 1", ratio_string(total)));
        }
        Ok(RationalMeasure { atoms })
    }

    pub fn dirac(x: usize) -> Self {
        RationalMeasure {
            atoms: vec![(x, Ratio::one())],
        }
    }

    /// `(1/N) sum chi(x) delta_x` from multiplicities `chi`.
    pub fn from_counts(counts: &[(usize, u64)]) -> Result<Self> {
        let total: u64 = counts.iter().map(|c| c.1).sum();
        if total == 0 {
            return input("multiplicities must not all be zero");
        }
        Ok(Self::collect(
            counts.iter().map(|&(x, c)| (x, Ratio::new(c as i64, total as i64))),
        ))
    }

    /// Sums weights of repeated points and drops zero weights; the input must have total mass 1.
    fn collect(atoms: impl IntoIterator<Item = (usize, Ratio)>) -> Self {
        let mut atoms: Vec<(usize, Ratio)> = atoms.into_iter().collect();
        atoms.sort_by_key(|a| a.0);
        let mut merged: Vec<(usize, Ratio)> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        merged.retain(|a| !a.1.is_zero());
        RationalMeasure { atoms: merged }
    }

    pub fn atoms(&self) -> &[(usize, Ratio)] {
        &self.atoms
    }

    pub fn support(&self) -> Vec<usize> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    pub fn weights(&self) -> Vec<Ratio> {
        self.atoms.iter().map(|a| a.1).collect()
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn weight_at(&self, x: usize) -> Ratio {
        self.atoms
            .binary_search_by_key(&x, |a| a.0)
            .map(|k| self.atoms[k].1)
            .unwrap_or_else(|_| Ratio::zero())
    }

    /// Least common denominator `N` of the weights.
    pub fn denominator(&self) -> i64 {
        self.atoms.iter().fold(1, |acc, a| acc.lcm(a.1.denom()))
    }

    /// Membership in `G_L`, the measures with weights in `(1/N) Z` for some `N <= L`.
    pub fn in_g(&self, l: usize) -> bool {
        self.denominator() <= l as i64
    }

    /// `(1 - b) self + b other`.
    pub fn mix(&self, other: &RationalMeasure, b: Ratio) -> Result<RationalMeasure> {
        if b < Ratio::zero() || b > Ratio::one() {
            return input(format!("mixing weight {} outside [0, 1]", ratio_string(b)));
        }
        let keep = Ratio::one() - b;
        Ok(Self::collect(
            self.atoms
                .iter()
                .map(|&(x, w)| (x, w * keep))
                .chain(other.atoms.iter().map(|&(x, w)| (x, w * b))),
        ))
    }

    pub fn check(&self, space: &FiniteMetricSpace) -> Result<()> {
        match self.atoms.last() {
            Some(&(x, _)) if x >= space.len() => input(format!(
                "measure atom {x} out of range for a space of {} points",
                space.len()
            )),
            _ => Ok(()),
        }
    }

    pub fn record(&self, space: &FiniteMetricSpace) -> MeasureRecord {
        MeasureRecord {
            support: self.atoms.iter().map(|a| space.label(a.0).to_string()).collect(),
            weights: {
                let n = self.denominator();
                self.atoms
                    .iter()
                    .map(|a| format!("{}/{n}", (a.1 * Ratio::from_integer(n)).to_integer()))
                    .collect()
            },
        }
    }
}

/// Report form of a measure: support labels and weights as `"c/N"` strings
/// over the common denominator `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub support: Vec<String>,
    pub weights: Vec<String>,
}

/// `mu -> mu o T^-1`; weights of colliding images are summed.
pub fn pushforward(sys: &System, mu: &RationalMeasure) -> RationalMeasure {
    RationalMeasure::collect(mu.atoms.iter().map(|&(x, w)| (sys.step(x), w)))
}

pub fn pushforward_orbit(sys: &System, mu: &RationalMeasure, n: usize) -> Vec<RationalMeasure> {
    let mut out = Vec::with_capacity(n);
    let mut cur = mu.clone();
    for _ in 0..n {
        let next = pushforward(sys, &cur);
        out.push(cur);
        cur = next;
    }
    out
}

fn common_scale(mu: &RationalMeasure, nu: &RationalMeasure) -> i64 {
    mu.denominator().lcm(&nu.denominator())
}

/// `max_A mu(A) - nu(N_r[A])` over subsets `A` of the support of `mu`, where
/// `N_r[A]` is the closed `r`-neighborhood; computed as `1 - maxflow`.
fn deficiency(space: &FiniteMetricSpace, mu: &RationalMeasure, nu: &RationalMeasure, r_num: u64) -> Ratio {
    let scale = common_scale(mu, nu);
    let a = mu.atoms.len();
    let b = nu.atoms.len();
    let source = 0;
    let sink = a + b + 1;
    let vertices: Vec<usize> = (0..=sink).collect();
    let mut caps = Vec::new();
    for (i, &(x, w)) in mu.atoms.iter().enumerate() {
        caps.push(((source, 1 + i), *(w * scale).numer()));
        for (j, &(y, _)) in nu.atoms.iter().enumerate() {
            if space.dist_num(x, y) <= r_num {
                caps.push(((1 + i, 1 + a + j), scale));
            }
        }
    }
    for (j, &(_, w)) in nu.atoms.iter().enumerate() {
        caps.push(((1 + a + j, sink), *(w * scale).numer()));
    }
    let (_, flow, _) = edmonds_karp_sparse(&vertices, &source, &sink, caps);
    Ratio::new(scale - flow, scale)
}

/// Distances that can change a closed neighborhood between the two supports, with 0.
fn critical_radii(space: &FiniteMetricSpace, mu: &RationalMeasure, nu: &RationalMeasure) -> Vec<u64> {
    let mut radii: BTreeSet<u64> = BTreeSet::from([0]);
    for &(x, _) in &mu.atoms {
        for &(y, _) in &nu.atoms {
            radii.insert(space.dist_num(x, y));
        }
    }
    radii.into_iter().collect()
}

fn one_sided_prohorov(space: &FiniteMetricSpace, mu: &RationalMeasure, nu: &RationalMeasure) -> Ratio {
    let scale = space.scale() as i64;
    let mut best = Ratio::one();
    for r in critical_radii(space, mu, nu) {
        let radius = Ratio::new(r as i64, scale);
        if radius >= best {
            break;
        }
        best = best.min(radius.max(deficiency(space, mu, nu, r)));
    }
    best
}

/// Least `delta` with `mu(A) <= nu(A^delta) + delta` for every `A`, and symmetrically.
///
/// Both one-sided values are computed; they agree for probability measures
/// and disagreement is reported as an internal error.
pub fn prohorov_distance(mu: &RationalMeasure, nu: &RationalMeasure, space: &FiniteMetricSpace) -> Result<Ratio> {
    mu.check(space)?;
    nu.check(space)?;
    let forward = one_sided_prohorov(space, mu, nu);
    let backward = one_sided_prohorov(space, nu, mu);
    if forward != backward {
        return Err(Error::Internal(format!(
            "one-sided Prohorov values differ: {} vs {}",
            ratio_string(forward),
            ratio_string(backward)
        )));
    }
    Ok(forward)
}

fn subset_masses(mu: &RationalMeasure) -> Vec<Ratio> {
    let k = mu.atoms.len();
    (0u32..1 << k)
        .map(|bits| (0..k).filter(|&i| bits >> i & 1 == 1).map(|i| mu.atoms[i].1).sum())
        .collect()
}

fn subset_feasible(space: &FiniteMetricSpace, mu: &RationalMeasure, nu: &RationalMeasure, delta: Ratio) -> bool {
    let scale = space.scale() as i64;
    let k = mu.atoms.len();
    let masses = subset_masses(mu);
    (1u32..1 << k).all(|bits| {
        let reach: Ratio = nu
            .atoms
            .iter()
            .filter(|&&(y, _)| {
                (0..k)
                    .any(|i| bits >> i & 1 == 1 && Ratio::new(space.dist_num(mu.atoms[i].0, y) as i64, scale) <= delta)
            })
            .map(|a| a.1)
            .sum();
        masses[bits as usize] <= reach + delta
    })
}

/// Prohorov distance by enumerating every subset of both supports against
/// every candidate value (pairwise distances and subset-mass differences).
pub fn prohorov_by_subsets(mu: &RationalMeasure, nu: &RationalMeasure, space: &FiniteMetricSpace) -> Result<Ratio> {
    mu.check(space)?;
    nu.check(space)?;
    let size = mu.support_len().max(nu.support_len());
    if size > SUBSET_ORACLE_CAP {
        return Err(Error::Capacity {
            what: "Prohorov subset enumeration support",
            size,
            cap: SUBSET_ORACLE_CAP,
        });
    }
    let scale = space.scale() as i64;
    let mut candidates: BTreeSet<Ratio> = BTreeSet::from([Ratio::zero(), Ratio::one()]);
    for &(x, _) in &mu.atoms {
        for &(y, _) in &nu.atoms {
            candidates.insert(Ratio::new(space.dist_num(x, y) as i64, scale));
        }
    }
    let (ma, mb) = (subset_masses(mu), subset_masses(nu));
    for &p in &ma {
        for &q in &mb {
            if p > q && p - q < Ratio::one() {
                candidates.insert(p - q);
            }
        }
    }
    let candidates: Vec<Ratio> = candidates.into_iter().collect();
    let feasible = |d: Ratio| subset_feasible(space, mu, nu, d) && subset_feasible(space, nu, mu, d);
    // feasibility is monotone in delta and holds at 1
    let k = candidates.partition_point(|&d| !feasible(d));
    Ok(candidates[k])
}

/// `max_{0 <= i < n} rho(T_*^i mu, T_*^i nu)`.
pub fn dyn_prohorov(sys: &System, mu: &RationalMeasure, nu: &RationalMeasure, n: usize) -> Result<Ratio> {
    if n == 0 {
        return input("iterate count must be at least 1");
    }
    let (mut a, mut b) = (mu.clone(), nu.clone());
    let mut best = Ratio::zero();
    for _ in 0..n {
        best = best.max(prohorov_distance(&a, &b, sys.space())?);
        a = pushforward(sys, &a);
        b = pushforward(sys, &b);
    }
    Ok(best)
}

/// Finite truncation of a dense sequence in the unit ball of `C^0(X)`.
///
/// Function `k` (from 0) has weight `2^-(k+1)`. The presets take values in
/// `[0, 1]`, so the induced distance is below 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionFamily {
    /// `values[k][x]`.
    values: Vec<Vec<f64>>,
}

impl TestFunctionFamily {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() < 4 {
            return input(format!(
                "a test-function family needs at least 4 functions, got {}",
                values.len()
            ));
        }
        let len = values[0].len();
        if values.iter().any(|f| f.len() != len) {
            return input("test functions must share one domain");
        }
        if values.iter().flatten().any(|v| v.is_nan() || v.abs() > 1.0) {
            return input("test functions must take values in [-1, 1]");
        }
        Ok(TestFunctionFamily { values })
    }

    /// `(1 + cos 2 pi m x)/2` and `(1 + sin 2 pi m x)/2` for `m = 1..=4` on the grid `{k/g}`.
    pub fn trigonometric(g: usize) -> Result<Self> {
        let mut values = Vec::new();
        for m in 1..=4 {
            let angle = |k: usize| 2.0 * PI * (m * k) as f64 / g as f64;
            values.push((0..g).map(|k| (1.0 + angle(k).cos()) / 2.0).collect());
            values.push((0..g).map(|k| (1.0 + angle(k).sin()) / 2.0).collect());
        }
        Self::new(values)
    }

    /// Indicators of the cylinders `[u_j = 1]` for the first (up to 8) positions of binary word labels.
    pub fn cylinders(space: &FiniteMetricSpace) -> Result<Self> {
        let width = space.labels().iter().map(String::len).min().unwrap_or(0);
        let values = (0..width.min(8))
            .map(|j| {
                space
                    .labels()
                    .iter()
                    .map(|w| if w.as_bytes()[j] == b'1' { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        Self::new(values)
    }

    /// `1 - min(1, d(x, a))` for up to 8 anchors `a` spread over the index range.
    pub fn anchors(space: &FiniteMetricSpace) -> Result<Self> {
        let n = space.len();
        let count = n.min(8);
        let values = (0..count)
            .map(|k| {
                let a = k * n / count;
                (0..n).map(|x| 1.0 - space.dist_f64(x, a).min(1.0)).collect()
            })
            .collect();
        Self::new(values)
    }

    /// The documented default family for a zoo system.
    pub fn for_zoo(spec: &ZooSpec, sys: &System) -> Result<Self> {
        match spec.kind {
            ZooKind::FullShift | ZooKind::SingleOne => Self::cylinders(sys.space()),
            _ => Self::trigonometric(sys.len()),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn weight(k: usize) -> f64 {
        0.5f64.powi(k as i32 + 1)
    }

    /// `(int f_k d mu)_k`.
    pub fn integrals(&self, mu: &RationalMeasure) -> Vec<f64> {
        self.values
            .iter()
            .map(|f| {
                mu.atoms
                    .iter()
                    .map(|&(x, w)| crate::space::ratio_to_f64(w) * f[x])
                    .sum()
            })
            .collect()
    }

    fn distance_of_integrals(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(k, (p, q))| Self::weight(k) * (p - q).abs())
            .sum()
    }
}

/// `sum_k 2^-(k+1) |int f_k d mu - int f_k d nu|`.
pub fn dual_norm_distance(mu: &RationalMeasure, nu: &RationalMeasure, fam: &TestFunctionFamily) -> f64 {
    TestFunctionFamily::distance_of_integrals(&fam.integrals(mu), &fam.integrals(nu))
}

/// Integral vectors along the first `n` push-forward iterates of each measure.
fn dual_trajectories(
    sys: &System,
    measures: &[RationalMeasure],
    n: usize,
    fam: &TestFunctionFamily,
) -> Vec<Vec<Vec<f64>>> {
    measures
        .iter()
        .map(|mu| pushforward_orbit(sys, mu, n).iter().map(|m| fam.integrals(m)).collect())
        .collect()
}

fn dyn_dual(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| TestFunctionFamily::distance_of_integrals(p, q))
        .fold(0.0, f64::max)
}

/// First pair (by index) that is not `(n, eps)`-separated under the dynamical dual-norm distance.
pub fn dual_separation_violation(
    sys: &System,
    measures: &[RationalMeasure],
    n: usize,
    eps: f64,
    fam: &TestFunctionFamily,
) -> Option<(usize, usize)> {
    let traj = dual_trajectories(sys, measures, n, fam);
    (0..traj.len()).find_map(|i| {
        (i + 1..traj.len())
            .find(|&j| dyn_dual(&traj[i], &traj[j]) < eps - FLOAT_TOLERANCE)
            .map(|j| (i, j))
    })
}

/// Separation counts for the base system and for the push-forward restricted to Dirac measures.
pub fn atomic_embedding_sep(sys: &System, n: usize, eps: Ratio, limits: &Limits) -> Result<(usize, usize)> {
    let base = max_separated(sys, n, eps, Mode::Exact, limits)?.count();
    let diracs: Vec<RationalMeasure> = (0..sys.len()).map(RationalMeasure::dirac).collect();
    let measure = measure_sep(sys, &diracs, n, eps, limits)?.count();
    Ok((base, measure))
}

/// The `D_n < eps` relation on a measure pool under the dynamical Prohorov distance.
pub fn measure_closeness(sys: &System, pool: &[RationalMeasure], n: usize, eps: Ratio) -> Result<Closeness> {
    let len = pool.len();
    let mut close = vec![false; len * len];
    for i in 0..len {
        close[i * len + i] = true;
        for j in i + 1..len {
            let c = dyn_prohorov(sys, &pool[i], &pool[j], n)? < eps;
            close[i * len + j] = c;
            close[j * len + i] = c;
        }
    }
    Ok(Closeness::from_fn(len, n, |i, j| close[i * len + j]))
}

fn check_pool(pool: &[RationalMeasure], limits: &Limits) -> Result<()> {
    if pool.is_empty() {
        return input("measure pool is empty");
    }
    if pool.len() > limits.exact_cap {
        return Err(Error::Capacity {
            what: "measure pool",
            size: pool.len(),
            cap: limits.exact_cap,
        });
    }
    Ok(())
}

/// Maximum `(n, eps)`-separated subset of `pool` under the dynamical Prohorov distance.
pub fn measure_sep(
    sys: &System,
    pool: &[RationalMeasure],
    n: usize,
    eps: Ratio,
    limits: &Limits,
) -> Result<WitnessSet> {
    check_pool(pool, limits)?;
    let close = measure_closeness(sys, pool, n, eps)?;
    Ok(WitnessSet {
        indices: close.separated(Mode::Exact, None),
        n,
        epsilon: eps,
        kind: CountKind::Separated,
    })
}

/// Counts on `pool` for every `n` in `ns` under the dynamical Prohorov distance.
pub fn measure_count_series(
    sys: &System,
    pool: &[RationalMeasure],
    eps: Ratio,
    ns: &[usize],
    kind: CountKind,
    mode: Mode,
    limits: &Limits,
) -> Result<GrowthSamples> {
    check_pool(pool, limits)?;
    let samples = ns
        .iter()
        .map(|&n| {
            let close = measure_closeness(sys, pool, n, eps)?;
            Ok((n, close.count(kind, mode, limits.node_limit)?.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GrowthSamples {
        epsilon: eps,
        samples,
        kind,
        mode,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquaredSet {
    pub measures: Vec<RationalMeasure>,
    pub b: Ratio,
    pub eps0: Ratio,
    pub certified: bool,
    /// Indices into `measures` of a pair closer than `eps0`, when not certified.
    pub violation: Option<(usize, usize)>,
}

/// `E_b = {(1 - b) mu_1 + b mu_2 : mu_1, mu_2 in E}` with `b = eps/(2 + eps)`,
/// certified `(n, eps0)`-separated for `eps0 = b eps / 2`.
pub fn square_separated(
    sys: &System,
    set: &[RationalMeasure],
    n: usize,
    eps: Ratio,
    fam: &TestFunctionFamily,
) -> Result<SquaredSet> {
    if eps <= Ratio::zero() {
        return input("eps must be positive");
    }
    let eps_f = crate::space::ratio_to_f64(eps);
    if let Some((i, j)) = dual_separation_violation(sys, set, n, eps_f, fam) {
        return Err(Error::Precondition(format!(
            "input set is not ({n}, {})-separated: members {i} and {j}",
            ratio_string(eps)
        )));
    }
    let b = eps / (Ratio::from_integer(2) + eps);
    let eps0 = b * eps / 2;
    let mut measures = Vec::with_capacity(set.len() * set.len());
    for mu1 in set {
        for mu2 in set {
            measures.push(mu1.mix(mu2, b)?);
        }
    }
    let violation = dual_separation_violation(sys, &measures, n, crate::space::ratio_to_f64(eps0), fam);
    Ok(SquaredSet {
        measures,
        b,
        eps0,
        certified: violation.is_none(),
        violation,
    })
}

/// A uniformly drawn `N <= l` followed by `N` atoms drawn from `points`.
pub fn random_measure(points: &[usize], l: usize, rng: &mut impl Rng) -> RationalMeasure {
    let n = rng.random_range(1..=l);
    let counts: Vec<(usize, u64)> = (0..n).map(|_| (points[rng.random_range(0..points.len())], 1)).collect();
    RationalMeasure::from_counts(&counts).expect("at least one atom")
}

/// Every measure of `G_l` supported in `points`, in a canonical order.
pub fn enumerate_g(points: &[usize], l: usize) -> Vec<RationalMeasure> {
    fn multisets(
        points: &[usize],
        size: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut BTreeSet<RationalMeasure>,
    ) {
        if cur.len() == size {
            let counts: Vec<(usize, u64)> = cur.iter().map(|&x| (x, 1)).collect();
            out.insert(RationalMeasure::from_counts(&counts).unwrap());
            return;
        }
        for k in start..points.len() {
            cur.push(points[k]);
            multisets(points, size, k, cur, out);
            cur.pop();
        }
    }
    let mut out = BTreeSet::new();
    for size in 1..=l {
        multisets(points, size, 0, &mut Vec::new(), &mut out);
    }
    out.into_iter().collect()
}

/// `G_l` over `points`, shuffled by `seed` and truncated to `cap` when larger.
pub fn seeded_pool(points: &[usize], l: usize, cap: usize, seed: u64) -> Vec<RationalMeasure> {
    let mut all = enumerate_g(points, l);
    if all.len() > cap {
        all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        all.truncate(cap);
    }
    all
}

/// Draws measures of `G_l` with a seeded generator and keeps those
/// `(n, eps)`-separated from all kept so far, until `size` are found.
pub fn seeded_separated_set(
    sys: &System,
    fam: &TestFunctionFamily,
    n: usize,
    eps: Ratio,
    size: usize,
    l: usize,
    seed: u64,
) -> Result<Vec<RationalMeasure>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<usize> = (0..sys.len()).collect();
    let eps_f = crate::space::ratio_to_f64(eps);
    let mut kept: Vec<RationalMeasure> = Vec::new();
    let mut traj: Vec<Vec<Vec<f64>>> = Vec::new();
    for _ in 0..20_000 {
        if kept.len() == size {
            return Ok(kept);
        }
        let mu = random_measure(&points, l, &mut rng);
        let t = dual_trajectories(sys, std::slice::from_ref(&mu), n, fam).remove(0);
        if traj.iter().all(|u| dyn_dual(u, &t) >= eps_f - FLOAT_TOLERANCE) {
            kept.push(mu);
            traj.push(t);
        }
    }
    if kept.len() == size {
        return Ok(kept);
    }
    Err(Error::Degenerate(format!(
        "found only {} of {size} ({n}, {})-separated measures",
        kept.len(),
        ratio_string(eps)
    )))
}

/// `X / Fix(H)`: the fixed set collapsed to one class.
#[derive(Debug, Clone)]
pub struct QuotientSpace {
    pub fixed: Vec<usize>,
    /// Class of each base point.
    pub projection: Vec<usize>,
    /// Index of the collapsed class.
    pub collapsed: usize,
    pub space: FiniteMetricSpace,
}

/// The quotient system `H_0` on `X / Fix(H)` with the metric
/// `d_0(x, y) = min(d(x, y), d(x, Fix) + d(y, Fix))`.
pub fn quotient_system(sys: &System) -> Result<(QuotientSpace, System)> {
    let fixed = sys.fixed_points();
    if fixed.is_empty() {
        return Err(Error::Precondition("the system has no fixed points".into()));
    }
    if fixed.len() == sys.len() {
        return Err(Error::Degenerate(
            "every point is fixed; the quotient is a single point".into(),
        ));
    }
    let space = sys.space();
    let to_fix: Vec<u64> = (0..sys.len())
        .map(|x| fixed.iter().map(|&p| space.dist_num(x, p)).min().unwrap())
        .collect();
    let mut projection = vec![0; sys.len()];
    let mut reps = Vec::new();
    let mut collapsed = usize::MAX;
    for x in 0..sys.len() {
        if to_fix[x] == 0 {
            if collapsed == usize::MAX {
                collapsed = reps.len();
                reps.push(x);
            }
            projection[x] = collapsed;
        } else {
            projection[x] = reps.len();
            reps.push(x);
        }
    }
    let fixed_label = format!(
        "[{}]",
        fixed.iter().map(|&p| space.label(p)).collect::<Vec<_>>().join(",")
    );
    let labels = reps
        .iter()
        .enumerate()
        .map(|(c, &x)| {
            if c == collapsed {
                fixed_label.clone()
            } else {
                space.label(x).to_string()
            }
        })
        .collect();
    let quotient = FiniteMetricSpace::from_fn(labels, space.scale(), |u, v| {
        if u == v {
            0
        } else if u == collapsed {
            to_fix[reps[v]]
        } else if v == collapsed {
            to_fix[reps[u]]
        } else {
            let (x, y) = (reps[u], reps[v]);
            space.dist_num(x, y).min(to_fix[x] + to_fix[y])
        }
    })?;
    let map = reps.iter().map(|&x| projection[sys.step(x)]).collect();
    let h0 = System::new(quotient.clone(), map)?;
    Ok((
        QuotientSpace {
            fixed,
            projection,
            collapsed,
            space: quotient,
        },
        h0,
    ))
}

/// `(Sep(H_0, n, eps, K_0), Sep(H, n, eps, K))` for `K` the non-fixed points.
pub fn quotient_sep_pair(sys: &System, n: usize, eps: Ratio, limits: &Limits) -> Result<(WitnessSet, WitnessSet)> {
    let (q, h0) = quotient_system(sys)?;
    let k: Vec<usize> = (0..sys.len()).filter(|&x| sys.step(x) != x).collect();
    let k0: Vec<usize> = k.iter().map(|&x| q.projection[x]).collect();
    let rhs = sep_on_subset(sys, n, eps, &k, limits)?;
    let lhs = sep_on_subset(&h0, n, eps, &k0, limits)?;
    Ok((lhs, rhs))
}

/// The fixed point each orbit reaches within `|X|` steps, or `Unsupported`
/// when some orbit is periodic without being fixed.
fn limit_map(sys: &System) -> Result<Vec<usize>> {
    (0..sys.len())
        .map(|x| {
            let y = sys.iterate(x, sys.len());
            if sys.step(y) == y {
                Ok(y)
            } else {
                Err(Error::Unsupported(format!(
                    "point {} reaches a periodic orbit that is not fixed; not a Morse-Smale grid system",
                    sys.space().label(x)
                )))
            }
        })
        .collect()
}

/// Whether `mu`, a convex combination of Diracs at fixed points, is fixed by the push-forward.
pub fn gamma_simplex_check(sys: &System, mu: &RationalMeasure) -> Result<bool> {
    limit_map(sys)?;
    if let Some(&(x, _)) = mu.atoms.iter().find(|a| sys.step(a.0) != a.0) {
        return Err(Error::Precondition(format!(
            "measure has an atom at {}, which is not fixed",
            sys.space().label(x)
        )));
    }
    Ok(pushforward(sys, mu) == *mu)
}

/// Upper bounds on the Prohorov distance from `F_*^i nu` to the simplex of
/// fixed-point measures, for `i = 0..=iterates`: each bound is the distance to
/// the measure obtained by moving every atom to the fixed point its orbit reaches.
pub fn gamma_convergence(sys: &System, nu: &RationalMeasure, iterates: usize) -> Result<Vec<Ratio>> {
    let limit = limit_map(sys)?;
    nu.check(sys.space())?;
    let mut out = Vec::with_capacity(iterates + 1);
    let mut cur = nu.clone();
    for _ in 0..=iterates {
        let target = RationalMeasure::collect(cur.atoms.iter().map(|&(x, w)| (limit[x], w)));
        out.push(prohorov_distance(&cur, &target, sys.space())?);
        cur = pushforward(sys, &cur);
    }
    Ok(out)
}

/// `lcm(1, ..., l)`: the interval grid on which every weight of `G_l` lies.
pub fn psi_grid(l: usize) -> usize {
    (1..=l).fold(1, |acc, k| acc.lcm(&k))
}

/// The embedding `Psi_L` of `G_L` into the hyperspace of `X x [0, 1]`.
#[derive(Debug, Clone)]
pub struct PsiEmbedding {
    pub l: usize,
    pub grid: usize,
    base: System,
    product: System,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distortion {
    pub prohorov: Ratio,
    pub hausdorff: Ratio,
    pub pass: bool,
}

impl PsiEmbedding {
    pub fn new(base: &System, l: usize) -> Result<Self> {
        if l == 0 {
            return input("L must be at least 1");
        }
        let grid = psi_grid(l);
        Ok(PsiEmbedding {
            l,
            grid,
            base: base.clone(),
            product: base.product_with_identity(grid)?,
        })
    }

    pub fn product(&self) -> &System {
        &self.product
    }

    /// `{(x, mu({x})) : x in supp mu}` as product-space indices.
    pub fn embed(&self, mu: &RationalMeasure) -> Result<HyperPoint> {
        mu.check(self.base.space())?;
        if !mu.in_g(self.l) {
            return Err(Error::Precondition(format!(
                "measure with denominator {} is not in G_{}",
                mu.denominator(),
                self.l
            )));
        }
        let width = self.grid + 1;
        let g = Ratio::from_integer(self.grid as i64);
        HyperPoint::new(
            mu.atoms
                .iter()
                .map(|&(x, w)| x * width + (w * g).to_integer() as usize)
                .collect(),
        )
    }

    /// `Psi(T_* mu)` and `(T x Id)_K(Psi(mu))`; equal for injective base maps.
    pub fn equivariance_sides(&self, mu: &RationalMeasure) -> Result<(HyperPoint, HyperPoint)> {
        if !self.base.is_injective() {
            return Err(Error::Unsupported("Psi_L equivariance needs an injective map".into()));
        }
        let lhs = self.embed(&pushforward(&self.base, mu))?;
        let rhs = induced_map(&self.product, &self.embed(mu)?);
        Ok((lhs, rhs))
    }

    /// Whether `d_H(Psi mu, Psi lambda) < eps` implies equal support sizes; needs `eps < 1/L^2`.
    pub fn check_support_cardinality(
        &self,
        mu: &RationalMeasure,
        lambda: &RationalMeasure,
        eps: Ratio,
    ) -> Result<bool> {
        let limit = Ratio::new(1, (self.l * self.l) as i64);
        if eps >= limit || eps <= Ratio::zero() {
            return Err(Error::Precondition(format!(
                "eps = {} must lie in (0, 1/L^2) = (0, {})",
                ratio_string(eps),
                ratio_string(limit)
            )));
        }
        let d = hausdorff_distance(&self.embed(mu)?, &self.embed(lambda)?, self.product.space())?;
        Ok(d >= eps || mu.support_len() == lambda.support_len())
    }

    /// `rho(mu, lambda)`, `d_H(Psi mu, Psi lambda)` and whether `d_H >= rho / L`.
    pub fn check_distance_distortion(&self, mu: &RationalMeasure, lambda: &RationalMeasure) -> Result<Distortion> {
        let prohorov = prohorov_distance(mu, lambda, self.base.space())?;
        let hausdorff = hausdorff_distance(&self.embed(mu)?, &self.embed(lambda)?, self.product.space())?;
        Ok(Distortion {
            prohorov,
            hausdorff,
            pass: hausdorff * Ratio::from_integer(self.l as i64) >= prohorov,
        })
    }

    /// First pair of `set` whose images are closer than `eps / L` under the
    /// dynamical Hausdorff distance of `(T x Id)_K`.
    pub fn image_separation_violation(
        &self,
        set: &[RationalMeasure],
        n: usize,
        eps: Ratio,
    ) -> Result<Option<(usize, usize)>> {
        let images = set.iter().map(|mu| self.embed(mu)).collect::<Result<Vec<_>>>()?;
        let scale = eps / Ratio::from_integer(self.l as i64);
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                if dyn_hausdorff(&self.product, &images[i], &images[j], n)? < scale {
                    return Ok(Some((i, j)));
                }
            }
        }
        Ok(None)
    }
}

/// `Psi_L(mu)`; unsupported for non-injective systems.
pub fn psi_embed(sys: &System, mu: &RationalMeasure, l: usize) -> Result<HyperPoint> {
    if !sys.is_injective() {
        return Err(Error::Unsupported(
            "Psi_L is only defined here for injective maps".into(),
        ));
    }
    PsiEmbedding::new(sys, l)?.embed(mu)
}
