//! Deterministic constructors for the example systems.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::space::{parse_ratio, ratio_string, FiniteMetricSpace, Ratio};
use crate::system::System;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ZooKind {
    Identity,
    /// `x -> x + alpha` on the circle grid; `alpha` is a rational such as `"1/4"`.
    Rotation {
        alpha: String,
    },
    Doubling,
    /// `x -> x + lambda/(2 pi k) sin(2 pi k x)` with `k` pairs of fixed points.
    MorseSmale {
        pairs: usize,
        lambda: f64,
    },
    FullShift,
    SingleOne,
}

/// A zoo system at a given resolution: circle grid size, or word length for shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZooSpec {
    #[serde(flatten)]
    pub kind: ZooKind,
    pub resolution: usize,
}

impl fmt::Display for ZooSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.resolution;
        match &self.kind {
            ZooKind::Identity => write!(f, "identity-{r}"),
            ZooKind::Rotation { alpha } => write!(f, "rotation({alpha})-{r}"),
            ZooKind::Doubling => write!(f, "doubling-{r}"),
            ZooKind::MorseSmale { pairs, lambda } => write!(f, "morse-smale(k={pairs},lambda={lambda})-{r}"),
            ZooKind::FullShift => write!(f, "full-shift-{r}"),
            ZooKind::SingleOne => write!(f, "single-one-{r}"),
        }
    }
}

/// Short descriptions of every zoo kind, for listings.
pub const CATALOG: &[(&str, &str)] = &[
    ("identity", "identity map on the circle grid {k/r}"),
    (
        "rotation",
        "rotation by a rational alpha on the circle grid {k/r}; alpha*r must be an integer",
    ),
    ("doubling", "x -> 2x mod 1 on the circle grid {k/r}"),
    (
        "morse-smale",
        "grid restriction of x + lambda/(2 pi k) sin(2 pi k x), 2k alternating fixed points",
    ),
    ("full-shift", "one-sided full 2-shift on words of length r"),
    ("single-one", "shift on words of length r with at most one symbol 1"),
];

impl ZooSpec {
    pub fn new(kind: ZooKind, resolution: usize) -> Self {
        ZooSpec { kind, resolution }
    }

    pub fn build(&self) -> Result<System> {
        let r = self.resolution;
        if r < 4 {
            return input(format!("resolution must be at least 4, got {r}"));
        }
        match &self.kind {
            ZooKind::Identity => System::identity(FiniteMetricSpace::circle_grid(r)?),
            ZooKind::Rotation { alpha } => rotation(r, parse_ratio(alpha)?),
            ZooKind::Doubling => {
                let map = (0..r).map(|k| 2 * k % r).collect();
                System::new(FiniteMetricSpace::circle_grid(r)?, map)
            }
            ZooKind::MorseSmale { pairs, lambda } => morse_smale(r, *pairs, *lambda),
            ZooKind::FullShift => {
                if r > 16 {
                    return input(format!("full-shift window {r} exceeds 16"));
                }
                shift_system(r, (0..1usize << r).collect())
            }
            ZooKind::SingleOne => {
                let words = std::iter::once(0).chain((0..r).map(|j| 1 << (r - 1 - j))).collect();
                shift_system(r, words)
            }
        }
    }

    pub fn is_shift(&self) -> bool {
        matches!(self.kind, ZooKind::FullShift | ZooKind::SingleOne)
    }
}

fn rotation(g: usize, alpha: Ratio) -> Result<System> {
    let steps = alpha * Ratio::from_integer(g as i64);
    if !steps.is_integer() {
        return input(format!(
            "rotation by {} does not preserve the grid of {g} points",
            ratio_string(alpha)
        ));
    }
    let s = steps.to_integer().rem_euclid(g as i64) as usize;
    let map = (0..g).map(|k| (k + s) % g).collect();
    System::new(FiniteMetricSpace::circle_grid(g)?, map)
}

/// Morse-Smale circle map on the grid `{j/g}`.
///
/// Grid points are snapped to the nearest grid image. Points that would snap
/// onto themselves without being fixed by the smooth map are pushed one step
/// in the direction of motion, so the grid map has exactly the `2k` smooth
/// fixed points and every other orbit moves monotonically toward an attractor.
fn morse_smale(g: usize, pairs: usize, lambda: f64) -> Result<System> {
    if pairs == 0 {
        return input("morse-smale needs at least one pair of fixed points");
    }
    if !(lambda.is_finite() && lambda != 0.0 && lambda.abs() < 1.0) {
        return Err(Error::Construction(format!(
            "lambda = {lambda} does not give a monotone circle diffeomorphism (need 0 < |lambda| < 1)"
        )));
    }
    if !g.is_multiple_of(2 * pairs) {
        return input(format!(
            "grid size {g} must be a multiple of {} so the fixed points lie on the grid",
            2 * pairs
        ));
    }
    let period = g / (2 * pairs);
    let k = pairs as f64;
    let gi = g as i64;
    let mut map = Vec::with_capacity(g);
    for j in 0..g {
        if j % period == 0 {
            map.push(j);
            continue;
        }
        let x = j as f64 / g as f64;
        let push = lambda / (2.0 * PI * k) * (2.0 * PI * k * x).sin();
        let mut target = (g as f64 * (x + push)).round() as i64;
        if target == j as i64 {
            target += if push > 0.0 { 1 } else { -1 };
        }
        map.push(target.rem_euclid(gi) as usize);
    }
    let space = FiniteMetricSpace::circle_grid(g)?;
    System::new(space, map)
}

/// `d(u, v) = 2^(-ceil(i/2))` with `i` the first index where the words differ.
///
/// Two words are closer than `2^-k` exactly when they share their first
/// `2k + 1` letters, the one-sided counterpart of agreeing on `[-k, k]`.
fn shift_system(w: usize, words: Vec<usize>) -> Result<System> {
    let top = (w - 1).div_ceil(2);
    let scale = 1u64 << top;
    let labels = words.iter().map(|&u| format!("{u:0w$b}")).collect();
    let space = FiniteMetricSpace::from_metric_fn(labels, scale, |a, b| {
        let diff = words[a] ^ words[b];
        if diff == 0 {
            return 0;
        }
        let first = w - 1 - (usize::BITS - 1 - diff.leading_zeros()) as usize;
        scale >> first.div_ceil(2)
    })?;
    let mask = (1usize << w) - 1;
    let index: std::collections::HashMap<usize, usize> = words.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let map = words
        .iter()
        .map(|&u| {
            index
                .get(&((u << 1) & mask))
                .copied()
                .ok_or_else(|| Error::Construction("word set is not shift-invariant".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    System::new(space, map)
}

/// Attracting fixed points of a Morse-Smale zoo system (sign analysis of the smooth map).
pub fn morse_smale_attractors(sys: &System, pairs: usize, lambda: f64) -> Vec<usize> {
    let g = sys.len();
    let period = g / (2 * pairs);
    // derivative 1 + lambda cos(pi j) at the j-th fixed point
    (0..2 * pairs)
        .filter(|j| lambda * if j % 2 == 0 { 1.0 } else { -1.0 } < 0.0)
        .map(|j| j * period)
        .collect()
}

/// `eps = 2^-k` as an exact rational.
pub fn dyadic(k: u32) -> Ratio {
    Ratio::new(1, 1i64 << k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(kind: ZooKind, r: usize) -> System {
        ZooSpec::new(kind, r).build().unwrap()
    }

    #[test]
    fn single_one_has_window_plus_one_points() {
        let s = build(ZooKind::SingleOne, 6);
        assert_eq!(s.len(), 7);
        assert_eq!(s.space().label(0), "000000");
        assert_eq!(s.space().label(1), "100000");
        // 010000 -> 100000 -> 000000
        assert_eq!(s.step(2), 1);
        assert_eq!(s.step(1), 0);
        assert_eq!(s.step(0), 0);
    }

    #[test]
    fn shift_metric() {
        let s = build(ZooKind::FullShift, 5);
        // 10000 vs 00000 differ at 0
        assert_eq!(s.space().dist(0b10000, 0), Ratio::from_integer(1));
        // differ first at 1 and 2 -> 1/2
        assert_eq!(s.space().dist(0b01000, 0), Ratio::new(1, 2));
        assert_eq!(s.space().dist(0b00100, 0), Ratio::new(1, 2));
        assert_eq!(s.space().dist(0b00010, 0), Ratio::new(1, 4));
        assert_eq!(s.step(0b10110), 0b01100);
    }

    #[test]
    fn rotation_quarter_has_period_four() {
        let s = build(ZooKind::Rotation { alpha: "1/4".into() }, 8);
        assert!(s.is_isometry() && s.is_injective());
        assert_eq!(s.iterate(0, 4), 0);
        assert!((1..4).all(|t| s.iterate(0, t) != 0));
        assert!(ZooSpec::new(ZooKind::Rotation { alpha: "1/3".into() }, 8)
            .build()
            .is_err());
    }

    #[test]
    fn morse_smale_single_pair() {
        let s = build(ZooKind::MorseSmale { pairs: 1, lambda: 0.5 }, 16);
        assert_eq!(s.fixed_points(), vec![0, 8]);
        assert_eq!(morse_smale_attractors(&s, 1, 0.5), vec![8]);
        for x in 0..16 {
            assert_eq!(s.iterate(x, 16), if x == 0 { 0 } else { 8 });
        }
    }

    #[test]
    fn morse_smale_rejects_bad_parameters() {
        let bad = ZooSpec::new(ZooKind::MorseSmale { pairs: 1, lambda: 1.5 }, 16).build();
        assert!(matches!(bad, Err(Error::Construction(_))));
        assert!(ZooSpec::new(ZooKind::MorseSmale { pairs: 3, lambda: 0.5 }, 16)
            .build()
            .is_err());
    }

    #[test]
    fn small_resolution_rejected() {
        assert!(ZooSpec::new(ZooKind::Doubling, 3).build().is_err());
    }

    #[test]
    fn spec_round_trips_through_serde() {
        let spec = ZooSpec::new(ZooKind::MorseSmale { pairs: 2, lambda: 0.6 }, 24);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ZooSpec>(&text).unwrap(), spec);
        assert_eq!(spec.to_string(), "morse-smale(k=2,lambda=0.6)-24");
    }
}
