//! Orders of growth: fitting count sequences to families, comparing sequences,
//! and taking suprema in the family lattice.
//!
//! All fits run on the excess series `e(n) = count(n) - min count + s`
//! (`s` the first positive increment)
//! against `m = n - n_first + 1`. The order class of a sequence is unchanged
//! by this affine change, and it removes the additive constants that
//! otherwise dominate short finite ranges.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::hyperspace::{HyperSystem, DEFAULT_HYPER_CAP};
use crate::measures::{measure_count_series, seeded_pool};
use crate::separation::{count_series, CountKind, GrowthSamples, Limits, Mode};
use crate::space::Ratio;
use crate::system::System;

pub const DEFAULT_THETA: f64 = 0.01;
pub const DEFAULT_RESIDUAL_RATIO: f64 = 0.8;

/// Number of trailing samples in the tail window: `window`, or the last `ceil(total/2)`.
pub fn tail_len(total: usize, window: Option<usize>) -> usize {
    window.unwrap_or(total.div_ceil(2)).clamp(1, total.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Mean squared residual.
    pub residual: f64,
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let k = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        / k;
    Some(LineFit {
        slope,
        intercept,
        residual,
    })
}

/// `(m, e)` with `m = n - n_first + 1` and `e = value - min + s`, where `s` is
/// the first positive increment per unit step (1 if there is none). Affine and
/// geometric series keep their exact slopes under this shift.
pub(crate) fn excess_series(ns: &[usize], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n0 = ns.first().copied().unwrap_or(1) as f64;
    let floor = values.iter().copied().fold(f64::INFINITY, f64::min);
    let step = ns
        .windows(2)
        .zip(values.windows(2))
        .map(|(n, v)| (v[1] - v[0]) / (n[1] - n[0]) as f64)
        .find(|&d| d > 0.0)
        .unwrap_or(1.0);
    let m = ns.iter().map(|&n| n as f64 - n0 + 1.0).collect();
    let e = values.iter().map(|&v| v - floor + step).collect();
    (m, e)
}

/// Tail slope of `ln e` against `m` (exponential rate) or `ln m` (polynomial degree).
pub(crate) fn tail_slope(ns: &[usize], values: &[f64], window: Option<usize>, log_x: bool) -> f64 {
    let (m, e) = excess_series(ns, values);
    let w = tail_len(ns.len(), window);
    let start = ns.len() - w;
    let xs: Vec<f64> = m[start..].iter().map(|&x| if log_x { x.ln() } else { x }).collect();
    let ys: Vec<f64> = e[start..].iter().map(|v| v.ln()).collect();
    least_squares(&xs, &ys).map_or(0.0, |f| f.slope.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseFamily {
    Bounded,
    Log,
    Poly,
    Exp,
}

impl BaseFamily {
    fn rank(self) -> u8 {
        match self {
            BaseFamily::Bounded => 0,
            BaseFamily::Log => 1,
            BaseFamily::Poly => 2,
            BaseFamily::Exp => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "param")]
pub enum Family {
    Bounded,
    Log,
    Poly(f64),
    Exp(f64),
    /// Symbolic supremum of a whole family, such as sup over all polynomial orders.
    SupOfFamily(BaseFamily),
    Unclassified,
}

impl Family {
    fn key(&self) -> Option<(u8, f64)> {
        match *self {
            Family::Bounded => Some((0, 0.0)),
            Family::Log => Some((1, 0.0)),
            Family::Poly(t) => Some((2, t)),
            Family::Exp(t) => Some((3, t)),
            Family::SupOfFamily(b) => Some((b.rank(), f64::INFINITY)),
            Family::Unclassified => None,
        }
    }

    /// Position in the lattice Bounded < Log < Poly(t) < Exp(t); `None` if either side is unclassified.
    pub fn lattice_cmp(&self, other: &Family) -> Option<Ordering> {
        let (a, b) = (self.key()?, other.key()?);
        Some(a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Bounded => "Bounded",
            Family::Log => "Log",
            Family::Poly(_) => "Poly",
            Family::Exp(_) => "Exp",
            Family::SupOfFamily(_) => "SupOfFamily",
            Family::Unclassified => "Unclassified",
        }
    }

    pub fn param(&self) -> Option<f64> {
        match *self {
            Family::Poly(t) | Family::Exp(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Poly(t) => write!(f, "Poly({t:.4})"),
            Family::Exp(t) => write!(f, "Exp({t:.4})"),
            Family::SupOfFamily(b) => write!(f, "SupOfFamily({b:?})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub residual: f64,
    /// First and last `n` of the tail window the fit used.
    pub window: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthClass {
    pub family: Family,
    pub fit: Option<Fit>,
}

impl GrowthClass {
    pub fn symbolic(family: Family) -> Self {
        GrowthClass { family, fit: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub window: Option<usize>,
    pub residual_ratio: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            window: None,
            residual_ratio: DEFAULT_RESIDUAL_RATIO,
        }
    }
}

fn check_series(ns: &[usize], values: &[f64], min_len: usize) -> Result<()> {
    if ns.len() != values.len() {
        return input("n-values and counts differ in length");
    }
    if ns.len() < min_len {
        return input(format!("need at least {min_len} n-values, got {}", ns.len()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return input("n-values must be strictly increasing");
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return input("counts must be positive and finite");
    }
    Ok(())
}

/// Fits `values` (indexed by `ns`) against the Bounded, Log, Poly and Exp families.
pub fn classify_values(ns: &[usize], values: &[f64], opts: &ClassifyOptions) -> Result<GrowthClass> {
    check_series(ns, values, 6)?;
    let (m, e) = excess_series(ns, values);
    let w = tail_len(ns.len(), opts.window).max(3).min(ns.len());
    let start = ns.len() - w;
    let window = (ns[start], ns[ns.len() - 1]);
    let (m, e) = (&m[start..], &e[start..]);
    let ln_e: Vec<f64> = e.iter().map(|v| v.ln()).collect();

    if e.iter().all(|&v| v == e[0]) {
        return Ok(GrowthClass {
            family: Family::Bounded,
            fit: Some(Fit {
                slope: 0.0,
                residual: 0.0,
                window,
            }),
        });
    }

    let mean = ln_e.iter().sum::<f64>() / w as f64;
    let bounded_res = ln_e.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / w as f64;
    let mut candidates = vec![(Family::Bounded, 0.0, bounded_res)];

    let ln_m: Vec<f64> = m.iter().map(|x| x.ln()).collect();
    if let Some(f) = least_squares(m, &ln_e) {
        if f.slope > 0.0 {
            candidates.push((Family::Exp(f.slope), f.slope, f.residual));
        }
    }
    if let Some(f) = least_squares(&ln_m, &ln_e) {
        if f.slope > 0.0 {
            candidates.push((Family::Poly(f.slope), f.slope, f.residual));
        }
    }
    if let Some(f) = least_squares(&ln_m, e) {
        if f.slope > 0.0 {
            let floor = 0.5;
            let residual = ln_m
                .iter()
                .zip(&ln_e)
                .map(|(x, y)| {
                    let r = y - (f.intercept + f.slope * x).max(floor).ln();
                    r * r
                })
                .sum::<f64>()
                / w as f64;
            candidates.push((Family::Log, f.slope, residual));
        }
    }

    candidates.sort_by(|a, b| a.2.total_cmp(&b.2));
    let (family, slope, residual) = candidates[0];
    let decisive = candidates
        .get(1)
        .is_none_or(|second| residual <= opts.residual_ratio * second.2);
    let fit = Some(Fit {
        slope,
        residual,
        window,
    });
    Ok(GrowthClass {
        family: if decisive { family } else { Family::Unclassified },
        fit,
    })
}

pub fn classify(ns: &[usize], counts: &[usize], opts: &ClassifyOptions) -> Result<GrowthClass> {
    let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    classify_values(ns, &values, opts)
}

/// Least upper bound of classified families; unclassified entries are skipped.
pub fn sup_class<'a>(classes: impl IntoIterator<Item = &'a GrowthClass>) -> GrowthClass {
    let mut best: Option<GrowthClass> = None;
    for c in classes {
        if c.family == Family::Unclassified {
            continue;
        }
        best = match best {
            None => Some(*c),
            Some(b) => match c.family.lattice_cmp(&b.family) {
                Some(Ordering::Greater) => Some(*c),
                _ => Some(b),
            },
        };
    }
    best.unwrap_or(GrowthClass::symbolic(Family::Unclassified))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    LessEq,
    GreaterEq,
    Equivalent,
    Incomparable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderRelation {
    pub verdict: Verdict,
    /// Tail minimum of the normalized ratio `b/a` (certifies `[a] <= [b]` when `>= theta`).
    pub tail_min_b_over_a: f64,
    /// Tail minimum of the normalized ratio `a/b`.
    pub tail_min_a_over_b: f64,
}

/// `r(n) / max_{m <= n} r(m)`: scale-free, and small exactly when `r` has fallen from its peak.
fn normalized_tail_min(ratio: &[f64], start: usize) -> f64 {
    let mut peak = f64::MIN;
    let mut out = f64::INFINITY;
    for (i, &r) in ratio.iter().enumerate() {
        peak = peak.max(r);
        if i >= start {
            out = out.min(r / peak);
        }
    }
    out
}

/// Compares the orders of growth of two positive sequences on a common n-range.
pub fn compare_sequences(
    a: &[(usize, f64)],
    b: &[(usize, f64)],
    window: Option<usize>,
    theta: f64,
) -> Result<OrderRelation> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.0 != y.0) {
        return input("sequences must share the same n-range");
    }
    if a.is_empty() {
        return input("sequences are empty");
    }
    if a.iter().chain(b).any(|&(_, v)| !(v.is_finite() && v > 0.0)) {
        return input("sequences must be positive on the window");
    }
    let start = a.len() - tail_len(a.len(), window);
    let b_over_a: Vec<f64> = a.iter().zip(b).map(|(x, y)| y.1 / x.1).collect();
    let a_over_b: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.1 / y.1).collect();
    let tail_min_b_over_a = normalized_tail_min(&b_over_a, start);
    let tail_min_a_over_b = normalized_tail_min(&a_over_b, start);
    let le = tail_min_b_over_a >= theta;
    let ge = tail_min_a_over_b >= theta;
    let verdict = match (le, ge) {
        (true, true) => Verdict::Equivalent,
        (true, false) => Verdict::LessEq,
        (false, true) => Verdict::GreaterEq,
        (false, false) => Verdict::Inconclusive,
    };
    Ok(OrderRelation {
        verdict,
        tail_min_b_over_a,
        tail_min_a_over_b,
    })
}

/// Which induced system the counts are taken on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Base,
    Hyper,
    Measure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyOptions {
    pub level: Level,
    pub kind: CountKind,
    pub mode: Mode,
    pub limits: Limits,
    pub classify: ClassifyOptions,
    pub hyper_cap: usize,
    /// Measures of `G_L` form the measure-level pool.
    pub measure_l: usize,
    pub pool_cap: usize,
    pub seed: u64,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        EntropyOptions {
            level: Level::Base,
            kind: CountKind::Spanning,
            mode: Mode::Exact,
            limits: Limits::default(),
            classify: ClassifyOptions::default(),
            hyper_cap: DEFAULT_HYPER_CAP,
            measure_l: 2,
            pool_cap: 48,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    pub level: Level,
    pub class: GrowthClass,
    pub levels: Vec<GrowthSamples>,
    pub per_level: Vec<GrowthClass>,
}

/// Counts at every `eps` of the schedule, classified per level, with the supremum class.
pub fn generalized_entropy(
    sys: &System,
    schedule: &[Ratio],
    ns: &[usize],
    opts: &EntropyOptions,
) -> Result<EntropyResult> {
    if schedule.is_empty() || ns.is_empty() {
        return input("epsilon schedule and n-range must be nonempty");
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return input("epsilon schedule must be strictly decreasing");
    }
    let hyper = match opts.level {
        Level::Hyper => Some(HyperSystem::new(sys.clone(), opts.hyper_cap)?),
        _ => None,
    };
    let pool = match opts.level {
        Level::Measure => {
            let points: Vec<usize> = (0..sys.len()).collect();
            seeded_pool(&points, opts.measure_l, opts.pool_cap, opts.seed)
        }
        _ => Vec::new(),
    };
    let levels = schedule
        .iter()
        .map(|&eps| {
            sys.space().warn_if_coarse(eps);
            match (&hyper, opts.level) {
                (Some(h), _) => count_series(h, eps, ns, opts.kind, opts.mode, &opts.limits),
                (None, Level::Measure) => measure_count_series(sys, &pool, eps, ns, opts.kind, opts.mode, &opts.limits),
                _ => count_series(sys, eps, ns, opts.kind, opts.mode, &opts.limits),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let per_level = levels
        .iter()
        .map(|l| classify(&l.ns(), &l.counts(), &opts.classify))
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyResult {
        level: opts.level,
        class: sup_class(&per_level),
        levels,
        per_level,
    })
}
