//! Entropy-type estimates from finite count tables.

use crate::error::{input, Result};
use crate::growth::tail_slope;
use crate::space::{ratio_to_f64, Ratio};

use super::GrowthSamples;

fn check_levels(levels: &[GrowthSamples], min_levels: usize, min_ns: usize) -> Result<()> {
    if levels.len() < min_levels {
        return input(format!(
            "need at least {min_levels} epsilon levels, got {}",
            levels.len()
        ));
    }
    for level in levels {
        if level.samples.len() < min_ns {
            return input(format!(
                "need at least {min_ns} n-values per level, got {}",
                level.samples.len()
            ));
        }
        if level.samples.iter().any(|s| s.1 == 0) {
            return input("counts must be positive");
        }
    }
    Ok(())
}

fn rate(level: &GrowthSamples, window: Option<usize>, log_x: bool) -> f64 {
    tail_slope(&level.ns(), &level.values(), window, log_x)
}

/// Exponential growth rate: the largest tail slope of `ln count` against `n` over the levels.
pub fn entropy_estimate(levels: &[GrowthSamples], window: Option<usize>) -> Result<f64> {
    check_levels(levels, 2, 4)?;
    Ok(levels.iter().map(|l| rate(l, window, false)).fold(0.0, f64::max))
}

/// Polynomial degree: the largest tail slope of `ln count` against `ln n` over the levels.
pub fn pol_entropy_estimate(levels: &[GrowthSamples], window: Option<usize>) -> Result<f64> {
    check_levels(levels, 2, 4)?;
    Ok(levels.iter().map(|l| rate(l, window, true)).fold(0.0, f64::max))
}

/// `(eps, h_eps / |ln eps|)` per level, where `h_eps` is the tail exponential rate.
pub fn mdim_estimate(levels: &[GrowthSamples], window: Option<usize>) -> Result<Vec<(Ratio, f64)>> {
    check_levels(levels, 3, 2)?;
    Ok(levels
        .iter()
        .map(|l| {
            let denom = ratio_to_f64(l.epsilon).ln().abs();
            let h = rate(l, window, false);
            let ratio = if denom > 0.0 { h / denom } else { 0.0 };
            (l.epsilon, ratio)
        })
        .collect())
}
