//! The hyperspace of nonempty subsets with the Hausdorff metric and the induced map.
//!
//! General hyperpoints are sorted index lists. The materialized system
//! [`HyperSystem`] enumerates every nonempty subset of a small base as a
//! bitmask, state `i` being the subset with mask `i + 1`.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::growth::{classify_values, sup_class, ClassifyOptions, GrowthClass};
use crate::separation::{max_separated, min_spanning, Closeness, GrowthSamples, Limits, Mode};
use crate::space::{FiniteMetricSpace, Ratio};
use crate::system::{FiniteDynamics, System};

pub const DEFAULT_HYPER_CAP: usize = 14;
/// Largest base a bitmask hyperpoint can address.
const MASK_BITS: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperPoint(Vec<usize>);

impl HyperPoint {
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return input("a hyperpoint must be nonempty");
        }
        members.sort_unstable();
        members.dedup();
        Ok(HyperPoint(members))
    }

    pub fn singleton(x: usize) -> Self {
        HyperPoint(vec![x])
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_mask(mask: u64) -> Self {
        HyperPoint((0..64).filter(|&i| mask >> i & 1 == 1).collect())
    }

    pub fn mask(&self) -> Option<u64> {
        self.0.iter().try_fold(0u64, |m, &i| (i < 64).then(|| m | 1 << i))
    }

    fn check(&self, space: &FiniteMetricSpace) -> Result<()> {
        self.0.iter().try_for_each(|&i| space.check_index(i))
    }
}

/// Numerator (over the space scale) of the Hausdorff distance.
pub fn hausdorff_num(a: &HyperPoint, b: &HyperPoint, space: &FiniteMetricSpace) -> u64 {
    let directed = |from: &HyperPoint, to: &HyperPoint| {
        from.0
            .iter()
            .map(|&x| to.0.iter().map(|&y| space.dist_num(x, y)).min().unwrap_or(0))
            .max()
            .unwrap_or(0)
    };
    directed(a, b).max(directed(b, a))
}

pub fn hausdorff_distance(a: &HyperPoint, b: &HyperPoint, space: &FiniteMetricSpace) -> Result<Ratio> {
    a.check(space)?;
    b.check(space)?;
    Ok(Ratio::new(hausdorff_num(a, b, space) as i64, space.scale() as i64))
}

/// `T(A)`, deduplicated.
pub fn induced_map(sys: &System, a: &HyperPoint) -> HyperPoint {
    let mut image: Vec<usize> = a.0.iter().map(|&x| sys.step(x)).collect();
    image.sort_unstable();
    image.dedup();
    HyperPoint(image)
}

pub(crate) fn dyn_hausdorff_num(sys: &System, a: &HyperPoint, b: &HyperPoint, n: usize) -> u64 {
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut best = 0;
    for i in 0..n {
        best = best.max(hausdorff_num(&a, &b, sys.space()));
        if i + 1 < n {
            a = induced_map(sys, &a);
            b = induced_map(sys, &b);
        }
    }
    best
}

/// `max_{0 <= i < n} d_H(T^i A, T^i B)`.
pub fn dyn_hausdorff(sys: &System, a: &HyperPoint, b: &HyperPoint, n: usize) -> Result<Ratio> {
    if n == 0 {
        return input("iterate count must be at least 1");
    }
    a.check(sys.space())?;
    b.check(sys.space())?;
    Ok(Ratio::new(
        dyn_hausdorff_num(sys, a, b, n) as i64,
        sys.space().scale() as i64,
    ))
}

/// Bitmask view of a base system: images of subsets and `eps`-neighborhoods.
struct MaskOps<'a> {
    map: &'a [usize],
    balls: Vec<u64>,
}

impl<'a> MaskOps<'a> {
    fn new(sys: &'a System, eps: Ratio) -> Self {
        let space = sys.space();
        let t = space.threshold(eps);
        let balls = (0..sys.len())
            .map(|x| {
                (0..sys.len())
                    .filter(|&y| space.dist_num(x, y) < t)
                    .fold(0u64, |m, y| m | 1 << y)
            })
            .collect();
        MaskOps { map: sys.map(), balls }
    }

    fn image(&self, mut m: u64) -> u64 {
        let mut out = 0;
        while m != 0 {
            let x = m.trailing_zeros() as usize;
            out |= 1 << self.map[x];
            m &= m - 1;
        }
        out
    }

    fn nbhd(&self, mut m: u64) -> u64 {
        let mut out = 0;
        while m != 0 {
            out |= self.balls[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        out
    }

    /// `D_n(A, B) < eps`.
    fn close(&self, mut a: u64, mut b: u64, n: usize) -> bool {
        for _ in 0..n {
            if a & !self.nbhd(b) != 0 || b & !self.nbhd(a) != 0 {
                return false;
            }
            a = self.image(a);
            b = self.image(b);
        }
        true
    }
}

/// The induced system on all nonempty subsets of a small base.
#[derive(Debug, Clone)]
pub struct HyperSystem {
    base: System,
    images: Vec<usize>,
}

impl HyperSystem {
    pub fn new(base: System, cap: usize) -> Result<Self> {
        let size = base.len();
        let cap = cap.min(20);
        if size > cap {
            return Err(Error::Capacity {
                what: "hyperspace base for full enumeration",
                size,
                cap,
            });
        }
        let total = 1usize << size;
        let mut mask_images = vec![0u64; total];
        for m in 1..total {
            let low = m.trailing_zeros() as usize;
            mask_images[m] = mask_images[m & (m - 1)] | 1 << base.step(low);
        }
        let images = (1..total).map(|m| mask_images[m] as usize - 1).collect();
        Ok(HyperSystem { base, images })
    }

    pub fn base(&self) -> &System {
        &self.base
    }

    pub fn state(&self, i: usize) -> HyperPoint {
        HyperPoint::from_mask(i as u64 + 1)
    }

    pub fn index_of(&self, a: &HyperPoint) -> Option<usize> {
        let m = a.mask()?;
        (m < 1 << self.base.len()).then(|| m as usize - 1)
    }

    /// States of the singletons `{x}`, in base order.
    pub fn singleton_states(&self) -> Vec<usize> {
        (0..self.base.len()).map(|x| (1usize << x) - 1).collect()
    }
}

impl FiniteDynamics for HyperSystem {
    fn state_count(&self) -> usize {
        self.images.len()
    }

    fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    fn near_rows(&self, eps: Ratio) -> Vec<FixedBitSet> {
        let ops = MaskOps::new(&self.base, eps);
        let count = self.images.len();
        let mut nb = vec![0u64; count + 1];
        for m in 1..=count {
            nb[m] = nb[m & (m - 1)] | ops.balls[m.trailing_zeros() as usize];
        }
        (1..=count)
            .map(|a| {
                let mut row = FixedBitSet::with_capacity(count);
                let sup = nb[a] as usize;
                let mut b = sup;
                while b != 0 {
                    if a & !(nb[b] as usize) == 0 {
                        row.insert(b - 1);
                    }
                    b = (b - 1) & sup;
                }
                row
            })
            .collect()
    }

    fn exact_size(&self) -> usize {
        self.base.len()
    }
}

/// A family of hyperpoints built from a base witness, with its certification outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperFamily {
    pub base_set: Vec<usize>,
    pub family: Vec<HyperPoint>,
    pub certified: bool,
    /// A pair of hyperpoints witnessing failure, when not certified.
    pub violation: Option<(HyperPoint, HyperPoint)>,
}

fn subsets_of(set: &[usize]) -> Result<Vec<HyperPoint>> {
    if set.len() > 20 {
        return Err(Error::Capacity {
            what: "witness family base set",
            size: set.len(),
            cap: 20,
        });
    }
    Ok((1u64..1 << set.len())
        .map(|bits| HyperPoint((0..set.len()).filter(|&k| bits >> k & 1 == 1).map(|k| set[k]).collect()))
        .collect())
}

fn mask_of(points: &[usize]) -> u64 {
    points.iter().fold(0, |m, &i| m | 1 << i)
}

fn check_mask_base(sys: &System) -> Result<()> {
    if sys.len() > MASK_BITS {
        return Err(Error::Capacity {
            what: "hyperspace base",
            size: sys.len(),
            cap: MASK_BITS,
        });
    }
    Ok(())
}

/// All nonempty subsets of a minimum `(n, eps)`-spanning set `E`, certified to
/// `(n, eps)`-span the whole hyperspace.
///
/// For each subset `A`, the spanning member is `{e in E : B_n(e, eps) meets A}`.
pub fn hyper_span_upper_witness(
    sys: &System,
    n: usize,
    eps: Ratio,
    limits: &Limits,
    hyper_cap: usize,
) -> Result<HyperFamily> {
    let base = min_spanning(sys, n, eps, Mode::Exact, limits)?;
    if sys.len() > hyper_cap.min(20) {
        return Err(Error::Capacity {
            what: "hyperspace base for full enumeration",
            size: sys.len(),
            cap: hyper_cap.min(20),
        });
    }
    let close = Closeness::compute(sys, n, eps);
    let ops = MaskOps::new(sys, eps);
    let ball_masks: Vec<u64> = base
        .indices
        .iter()
        .map(|&e| close.row(e).ones().fold(0, |m, j| m | 1 << j))
        .collect();
    let mut violation = None;
    for a in 1u64..1 << sys.len() {
        let f = base
            .indices
            .iter()
            .zip(&ball_masks)
            .filter(|(_, &ball)| ball & a != 0)
            .fold(0u64, |m, (&e, _)| m | 1 << e);
        if f == 0 || !ops.close(a, f, n) {
            violation = Some((HyperPoint::from_mask(a), HyperPoint::from_mask(f.max(1))));
            break;
        }
    }
    Ok(HyperFamily {
        family: subsets_of(&base.indices)?,
        base_set: base.indices,
        certified: violation.is_none(),
        violation,
    })
}

/// Maximum separated sets examined when looking for a certifiable lower witness.
pub const LOWER_WITNESS_ALTERNATIVES: usize = 256;

/// All nonempty subsets of a maximum `(n, eps)`-separated set, certified to be
/// pairwise `(n, eps/2)`-separated in the hyperspace.
///
/// Maximum separated sets are tried in turn (up to [`LOWER_WITNESS_ALTERNATIVES`]);
/// the first one whose family certifies is returned, otherwise the first
/// candidate with a violating pair.
pub fn hyper_sep_lower_witness(sys: &System, n: usize, eps: Ratio, limits: &Limits) -> Result<HyperFamily> {
    let size = max_separated(sys, n, eps, Mode::Exact, limits)?.count();
    check_mask_base(sys)?;
    if size > 20 {
        return Err(Error::Capacity {
            what: "witness family base set",
            size,
            cap: 20,
        });
    }
    let close = Closeness::compute(sys, n, eps);
    let ops = MaskOps::new(sys, eps / 2);
    let candidates = close.maximum_separated_sets(LOWER_WITNESS_ALTERNATIVES);
    let mut first_failure = None;
    for set in &candidates {
        let subsets: Vec<u64> = (1u64..1 << set.len())
            .map(|bits| {
                (0..set.len())
                    .filter(|&k| bits >> k & 1 == 1)
                    .fold(0, |m, k| m | 1 << set[k])
            })
            .collect();
        let violation = subsets.iter().enumerate().find_map(|(i, &a)| {
            subsets[i + 1..]
                .iter()
                .find(|&&b| ops.close(a, b, n))
                .map(|&b| (HyperPoint::from_mask(a), HyperPoint::from_mask(b)))
        });
        match violation {
            None => {
                return Ok(HyperFamily {
                    base_set: set.clone(),
                    family: subsets_of(set)?,
                    certified: true,
                    violation: None,
                })
            }
            Some(v) if first_failure.is_none() => first_failure = Some((set.clone(), v)),
            Some(_) => {}
        }
    }
    let (set, v) = first_failure.ok_or_else(|| Error::Internal("no maximum separated set found".into()))?;
    Ok(HyperFamily {
        family: subsets_of(&set)?,
        base_set: set,
        certified: false,
        violation: Some(v),
    })
}

/// Checks that `family` is pairwise `(n, eps)`-separated under `D_n`.
pub fn family_is_separated(sys: &System, family: &[HyperPoint], n: usize, eps: Ratio) -> Result<bool> {
    check_mask_base(sys)?;
    let ops = MaskOps::new(sys, eps);
    let masks: Vec<u64> = family.iter().map(|a| mask_of(&a.0)).collect();
    Ok(masks
        .iter()
        .enumerate()
        .all(|(i, &a)| masks[i + 1..].iter().all(|&b| !ops.close(a, b, n))))
}

/// Classes of `n -> 2^count` per level and their supremum.
pub fn hyper_generalized_entropy_formula(
    base_levels: &[GrowthSamples],
    opts: &ClassifyOptions,
) -> Result<(GrowthClass, Vec<GrowthClass>)> {
    if base_levels.len() < 2 {
        return input("need base samples at two or more epsilon levels");
    }
    let per_level = base_levels
        .iter()
        .map(|level| {
            let values: Vec<f64> = level.samples.iter().map(|s| 2f64.powi(s.1 as i32)).collect();
            classify_values(&level.ns(), &values, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sup_class(&per_level), per_level))
}
