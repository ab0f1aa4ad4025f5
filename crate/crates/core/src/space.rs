//! Finite metric spaces with exact distances.
//!
//! Every distance is stored as an integer numerator over a per-space common
//! denominator (`scale`), so separation decisions against a rational scale
//! are exact comparisons of integers.

use std::fmt;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

pub type Ratio = num_rational::Ratio<i64>;

/// Parses `"3/8"`, `"0.375"` or `"2"` into an exact rational.
pub fn parse_ratio(text: &str) -> Result<Ratio> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad numerator in {text:?}")))?;
        let den: i64 = den
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad denominator in {text:?}")))?;
        if den == 0 {
            return input(format!("zero denominator in {text:?}"));
        }
        return Ok(Ratio::new(num, den));
    }
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if frac_part.len() > 15 || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return input(format!("bad decimal {text:?}"));
    }
    let negative = int_part.starts_with('-');
    let int_val: i64 = if int_part.is_empty() || int_part == "-" {
        0
    } else {
        int_part
            .parse()
            .map_err(|_| Error::Input(format!("bad number {text:?}")))?
    };
    let den = 10i64.pow(frac_part.len() as u32);
    let frac_val: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().unwrap()
    };
    let frac = Ratio::new(if negative { -frac_val } else { frac_val }, den);
    Ok(Ratio::from_integer(int_val) + frac)
}

pub fn ratio_to_f64(r: Ratio) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Formats as `p/q`, or `p` when integral.
pub fn ratio_string(r: Ratio) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    scale: u64,
    dist: Vec<u64>,
    /// Spacing of the underlying continuous grid, when the space discretizes one.
    spacing: Option<Ratio>,
}

impl fmt::Debug for FiniteMetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteMetricSpace")
            .field("points", &self.labels.len())
            .field("scale", &self.scale)
            .finish()
    }
}

fn flatten(n: usize, f: impl Fn(usize, usize) -> u64) -> Vec<u64> {
    (0..n * n).map(|k| f(k / n, k % n)).collect()
}

impl FiniteMetricSpace {
    /// Builds a space from distance numerators over `scale`, checking the metric axioms exactly.
    pub fn new(labels: Vec<String>, scale: u64, dist: Vec<Vec<u64>>) -> Result<Self> {
        let n = labels.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return input(format!("distance matrix must be {n}x{n}"));
        }
        let flat = dist.into_iter().flatten().collect();
        Self::from_flat(labels, scale, flat, true)
    }

    pub fn from_fn(labels: Vec<String>, scale: u64, f: impl Fn(usize, usize) -> u64) -> Result<Self> {
        let flat = flatten(labels.len(), f);
        Self::from_flat(labels, scale, flat, true)
    }

    /// Like [`Self::from_fn`] for generators whose triangle inequality holds by
    /// construction (grid, word and max-product metrics); the cubic check is skipped.
    pub(crate) fn from_metric_fn(labels: Vec<String>, scale: u64, f: impl Fn(usize, usize) -> u64) -> Result<Self> {
        let flat = flatten(labels.len(), f);
        Self::from_flat(labels, scale, flat, false)
    }

    fn from_flat(labels: Vec<String>, scale: u64, dist: Vec<u64>, triangle: bool) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return input("a metric space needs at least one point");
        }
        if scale == 0 {
            return input("scale must be positive");
        }
        let space = FiniteMetricSpace {
            labels,
            scale,
            dist,
            spacing: None,
        };
        space.check_axioms(triangle)?;
        Ok(space)
    }

    /// Re-checks every metric axiom, including the triangle inequality, exactly.
    pub fn verify_axioms(&self) -> Result<()> {
        self.check_axioms(true)
    }

    fn check_axioms(&self, triangle: bool) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            if self.dist_num(i, i) != 0 {
                return input(format!("dist[{i}][{i}] must be zero"));
            }
            for j in 0..n {
                if self.dist_num(i, j) != self.dist_num(j, i) {
                    return input(format!("distance not symmetric at ({i}, {j})"));
                }
                if i != j && self.dist_num(i, j) == 0 {
                    return input(format!("distinct points {i} and {j} at distance zero"));
                }
            }
        }
        if !triangle {
            return Ok(());
        }
        for i in 0..n {
            for j in 0..n {
                let dij = self.dist_num(i, j);
                for k in 0..n {
                    if self.dist_num(i, k) > dij + self.dist_num(j, k) {
                        return input(format!("triangle inequality fails for ({i}, {j}, {k})"));
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn with_spacing(mut self, spacing: Ratio) -> Self {
        self.spacing = Some(spacing);
        self
    }

    /// Uniform grid `{k/g}` on the circle `[0,1)` with the arc metric.
    pub fn circle_grid(g: usize) -> Result<Self> {
        if g == 0 {
            return input("circle grid needs at least one point");
        }
        let labels = (0..g).map(|k| grid_label(k, g)).collect();
        let gg = g as u64;
        let space = Self::from_metric_fn(labels, gg, |i, j| {
            let d = (i as i64 - j as i64).unsigned_abs();
            d.min(gg - d)
        })?;
        Ok(space.with_spacing(Ratio::new(1, g as i64)))
    }

    /// Uniform grid `{0, 1/g, ..., 1}` on the unit interval.
    pub fn interval_grid(g: usize) -> Result<Self> {
        if g == 0 {
            return input("interval grid resolution must be at least 1");
        }
        let labels = (0..=g).map(|k| grid_label(k, g)).collect();
        let space = Self::from_metric_fn(labels, g as u64, |i, j| (i as i64 - j as i64).unsigned_abs())?;
        Ok(space.with_spacing(Ratio::new(1, g as i64)))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn spacing(&self) -> Option<Ratio> {
        self.spacing
    }

    #[inline]
    pub fn dist_num(&self, i: usize, j: usize) -> u64 {
        self.dist[i * self.labels.len() + j]
    }

    pub fn dist(&self, i: usize, j: usize) -> Ratio {
        Ratio::new(self.dist_num(i, j) as i64, self.scale as i64)
    }

    pub fn dist_f64(&self, i: usize, j: usize) -> f64 {
        self.dist_num(i, j) as f64 / self.scale as f64
    }

    pub fn diameter(&self) -> Ratio {
        let max = self.dist.iter().copied().max().unwrap_or(0);
        Ratio::new(max as i64, self.scale as i64)
    }

    /// Least numerator `t` with `t/scale >= eps`, so `d < eps` iff `num < t`.
    pub fn threshold(&self, eps: Ratio) -> u64 {
        threshold_for_scale(self.scale, eps)
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return input(format!(
                "point index {i} out of range for a space of {} points",
                self.len()
            ));
        }
        Ok(())
    }

    /// Logs a warning when the grid is too coarse for separation at `eps`.
    pub(crate) fn warn_if_coarse(&self, eps: Ratio) {
        if let Some(spacing) = self.spacing {
            if spacing * 10 > eps {
                log::warn!(
                    "grid spacing {} exceeds eps/10 for eps = {}; separation counts reflect the grid",
                    ratio_string(spacing),
                    ratio_string(eps)
                );
            }
        }
    }
}

pub(crate) fn threshold_for_scale(scale: u64, eps: Ratio) -> u64 {
    if eps <= Ratio::zero() {
        return 0;
    }
    let p = *eps.numer() as u128;
    let q = *eps.denom() as u128;
    let t = (p * scale as u128).div_ceil(q);
    u64::try_from(t).unwrap_or(u64::MAX)
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub(crate) fn grid_label(k: usize, g: usize) -> String {
    ratio_string(Ratio::new(k as i64, g as i64))
}
