//! Word counts of the window subshifts and the worked spanning-count example.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::growth::{ClassifyOptions, Family, GrowthClass};
use crate::hyperspace::hyper_generalized_entropy_formula;
use crate::separation::{min_spanning, CountKind, GrowthSamples, Limits, Mode};
use crate::zoo::{dyadic, ZooSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCount {
    pub n: usize,
    pub count: usize,
}

fn shift_words(spec: &ZooSpec) -> Result<Vec<String>> {
    if !spec.is_shift() {
        return input(format!("{spec} is not a shift system"));
    }
    Ok(spec.build()?.space().labels().to_vec())
}

/// Number of distinct length-`n` factors of the window words.
pub fn count_words(spec: &ZooSpec, n: usize) -> Result<WordCount> {
    let words = shift_words(spec)?;
    if n == 0 || n > spec.resolution {
        return input(format!("word length {n} outside 1..={}", spec.resolution));
    }
    let factors: HashSet<&str> = words
        .iter()
        .flat_map(|w| (0..=w.len() - n).map(move |i| &w[i..i + n]))
        .collect();
    Ok(WordCount {
        n,
        count: factors.len(),
    })
}

/// `|B_{n+2k}|`, the spanning count at scale `2^-k`.
pub fn span_formula(spec: &ZooSpec, n: usize, k: usize) -> Result<usize> {
    if n + 2 * k > spec.resolution {
        return input(format!("n + 2k = {} exceeds the window {}", n + 2 * k, spec.resolution));
    }
    Ok(count_words(spec, n + 2 * k)?.count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubshiftRow {
    pub n: usize,
    pub k: usize,
    /// `|B_{n+2k}|`; absent for systems that are not shifts.
    pub formula: Option<usize>,
    pub exact: usize,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamplePipeline {
    pub system: String,
    pub rows: Vec<SubshiftRow>,
    /// Supremum over `k` of the classes of `n -> 2^Span(n, 2^-k)`.
    pub hyper_class: GrowthClass,
    pub per_level: Vec<GrowthClass>,
    /// Exp rate of `hyper_class`, the estimate of the hyperspace entropy.
    pub hyper_entropy: Option<f64>,
}

impl ExamplePipeline {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|r| r.matches)
    }
}

/// Exact spanning counts at `eps = 2^-k` for every `n` with `n + 2k <= window`
/// (levels keeping at least 6 values of `n`), each compared with `|B_{n+2k}|`
/// for shifts, then fed to the hyperspace formula.
pub fn example_pipeline(spec: &ZooSpec, limits: &Limits, opts: &ClassifyOptions) -> Result<ExamplePipeline> {
    let w = spec.resolution;
    if w < 8 {
        return input(format!("the example needs a window of at least 8, got {w}"));
    }
    let sys = spec.build()?;
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for k in 0..=(w - 6) / 2 {
        let mut samples = Vec::new();
        for n in 1..=w - 2 * k {
            let exact = min_spanning(&sys, n, dyadic(k as u32), Mode::Exact, limits)?.count();
            let formula = if spec.is_shift() {
                Some(span_formula(spec, n, k)?)
            } else {
                None
            };
            rows.push(SubshiftRow {
                n,
                k,
                formula,
                exact,
                matches: formula.is_none_or(|f| f == exact),
            });
            samples.push((n, formula.unwrap_or(exact)));
        }
        levels.push(GrowthSamples {
            epsilon: dyadic(k as u32),
            samples,
            kind: CountKind::Spanning,
            mode: Mode::Exact,
        });
    }
    let (hyper_class, per_level) = hyper_generalized_entropy_formula(&levels, opts)?;
    let hyper_entropy = match hyper_class.family {
        Family::Exp(t) => Some(t),
        _ => None,
    };
    Ok(ExamplePipeline {
        system: spec.to_string(),
        rows,
        hyper_class,
        per_level,
        hyper_entropy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::ZooKind;

    fn single_one(w: usize) -> ZooSpec {
        ZooSpec::new(ZooKind::SingleOne, w)
    }

    #[test]
    fn word_counts() {
        assert_eq!(count_words(&single_one(8), 1).unwrap().count, 2);
        assert_eq!(count_words(&single_one(8), 5).unwrap().count, 6);
        assert_eq!(count_words(&ZooSpec::new(ZooKind::FullShift, 6), 3).unwrap().count, 8);
        assert!(count_words(&single_one(8), 9).is_err());
        assert!(count_words(&ZooSpec::new(ZooKind::Doubling, 8), 2).is_err());
    }

    #[test]
    fn formula_values() {
        assert_eq!(span_formula(&single_one(8), 4, 1).unwrap(), 7);
        assert_eq!(span_formula(&single_one(8), 1, 0).unwrap(), 2);
        assert_eq!(span_formula(&ZooSpec::new(ZooKind::FullShift, 6), 2, 1).unwrap(), 16);
        assert!(span_formula(&single_one(8), 5, 2).is_err());
    }

    #[test]
    fn pipeline_on_single_one_window() {
        let p = example_pipeline(&single_one(10), &Limits::default(), &ClassifyOptions::default()).unwrap();
        assert!(p.all_match());
        assert!(p.rows.iter().all(|r| r.exact == r.n + 2 * r.k + 1));
        let h = p.hyper_entropy.unwrap();
        assert!((h - 2f64.ln()).abs() < 0.05, "{h}");
    }

    #[test]
    fn pipeline_on_identity_is_bounded() {
        let spec = ZooSpec::new(ZooKind::Identity, 8);
        let p = example_pipeline(&spec, &Limits::default(), &ClassifyOptions::default()).unwrap();
        assert_eq!(p.hyper_class.family, Family::Bounded);
        assert!(p.rows.iter().all(|r| r.formula.is_none()));
    }
}
