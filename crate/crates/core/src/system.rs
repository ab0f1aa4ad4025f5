//! Self-maps of finite metric spaces, orbits and the dynamical (Bowen) distance.

use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::{input, Result};
use crate::space::{grid_label, lcm, FiniteMetricSpace, Ratio};

/// Anything that iterates a self-map on `0..state_count()` and can answer
/// "which states lie within distance `< eps` of each other".
pub trait FiniteDynamics {
    fn state_count(&self) -> usize;

    fn image(&self, i: usize) -> usize;

    /// Row `i` has bit `j` set iff `d(i, j) < eps`.
    fn near_rows(&self, eps: Ratio) -> Vec<FixedBitSet>;

    /// Size compared against the exact-mode cap.
    fn exact_size(&self) -> usize {
        self.state_count()
    }
}

#[derive(Debug, Clone)]
pub struct System {
    space: Arc<FiniteMetricSpace>,
    map: Vec<usize>,
    injective: bool,
    isometry: bool,
}

impl System {
    /// Wraps `map` as a self-map of `space`; the injective and isometry flags are derived.
    pub fn new(space: impl Into<Arc<FiniteMetricSpace>>, map: Vec<usize>) -> Result<Self> {
        let space = space.into();
        let n = space.len();
        if map.len() != n {
            return input(format!("map has {} entries for {n} points", map.len()));
        }
        if let Some((i, &j)) = map.iter().enumerate().find(|(_, &j)| j >= n) {
            return input(format!("map sends {i} to {j}, outside 0..{n}"));
        }
        let mut seen = vec![false; n];
        let mut injective = true;
        for &j in &map {
            if seen[j] {
                injective = false;
                break;
            }
            seen[j] = true;
        }
        let isometry = (0..n).all(|i| (i + 1..n).all(|j| space.dist_num(map[i], map[j]) == space.dist_num(i, j)));
        Ok(System {
            space,
            map,
            injective,
            isometry,
        })
    }

    pub fn identity(space: impl Into<Arc<FiniteMetricSpace>>) -> Result<Self> {
        let space = space.into();
        let map = (0..space.len()).collect();
        Self::new(space, map)
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn shared_space(&self) -> Arc<FiniteMetricSpace> {
        Arc::clone(&self.space)
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_injective(&self) -> bool {
        self.injective
    }

    pub fn is_isometry(&self) -> bool {
        self.isometry
    }

    #[inline]
    pub fn step(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn iterate(&self, mut x: usize, times: usize) -> usize {
        for _ in 0..times {
            x = self.map[x];
        }
        x
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.map[i] == i).collect()
    }

    /// `[x, Tx, ..., T^(n-1)x]`.
    pub fn orbit(&self, x: usize, n: usize) -> Result<Vec<usize>> {
        self.space.check_index(x)?;
        if n == 0 {
            return input("orbit length must be at least 1");
        }
        let mut out = Vec::with_capacity(n);
        let mut cur = x;
        for _ in 0..n {
            out.push(cur);
            cur = self.map[cur];
        }
        Ok(out)
    }

    /// Numerator of `d_n(x, y)` over the space scale.
    pub fn dyn_distance_num(&self, x: usize, y: usize, n: usize) -> u64 {
        let (mut a, mut b) = (x, y);
        let mut best = 0;
        for _ in 0..n {
            best = best.max(self.space.dist_num(a, b));
            a = self.map[a];
            b = self.map[b];
        }
        best
    }

    /// `max_{0 <= i < n} d(T^i x, T^i y)`.
    pub fn dyn_distance(&self, x: usize, y: usize, n: usize) -> Result<Ratio> {
        self.space.check_index(x)?;
        self.space.check_index(y)?;
        if n == 0 {
            return input("iterate count must be at least 1");
        }
        Ok(Ratio::new(
            self.dyn_distance_num(x, y, n) as i64,
            self.space.scale() as i64,
        ))
    }

    /// `T x Id` on `X x {0, 1/g, ..., 1}` with the max metric.
    ///
    /// The product point `(x, s/g)` has index `x * (g + 1) + s`.
    pub fn product_with_identity(&self, g: usize) -> Result<System> {
        if g == 0 {
            return input("interval grid resolution must be at least 1");
        }
        let base = &self.space;
        let width = g + 1;
        let scale = lcm(base.scale(), g as u64);
        let base_mul = scale / base.scale();
        let interval_mul = scale / g as u64;
        let mut labels = Vec::with_capacity(base.len() * width);
        for x in 0..base.len() {
            for s in 0..width {
                labels.push(format!("({},{})", base.label(x), grid_label(s, g)));
            }
        }
        let space = FiniteMetricSpace::from_metric_fn(labels, scale, |i, j| {
            let (xi, si) = (i / width, i % width);
            let (xj, sj) = (j / width, j % width);
            let dx = base.dist_num(xi, xj) * base_mul;
            let ds = (si as i64 - sj as i64).unsigned_abs() * interval_mul;
            dx.max(ds)
        })?;
        let map = (0..base.len() * width)
            .map(|i| self.map[i / width] * width + i % width)
            .collect();
        System::new(space, map)
    }
}

impl FiniteDynamics for System {
    fn state_count(&self) -> usize {
        self.len()
    }

    fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    fn near_rows(&self, eps: Ratio) -> Vec<FixedBitSet> {
        let t = self.space.threshold(eps);
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut row = FixedBitSet::with_capacity(n);
                row.extend((0..n).filter(|&j| self.space.dist_num(i, j) < t));
                row
            })
            .collect()
    }
}
