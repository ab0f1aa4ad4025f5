//! Minimum set cover by branch-and-bound.
//!
//! The root problem is shrunk with the classical reductions (forced sets,
//! dominated sets, dominated elements) before branching on the element with
//! the fewest covering sets. Lower bounds are the better of a disjoint-cover
//! packing and a Lagrangian relaxation tuned by subgradient steps; the
//! multipliers also seed a primal heuristic for upper bounds.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;

fn full(n: usize) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    s.insert_range(..);
    s
}

/// Deterministic largest-first greedy cover; ties go to the lowest set index.
pub(crate) fn greedy_cover(sets: &[FixedBitSet], universe: usize) -> Option<Vec<usize>> {
    greedy_complete(sets, &full(universe), Vec::new())
}

fn greedy_complete(sets: &[FixedBitSet], uncovered: &FixedBitSet, mut chosen: Vec<usize>) -> Option<Vec<usize>> {
    let mut uncovered = uncovered.clone();
    while !uncovered.is_clear() {
        let (best, gain) = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.intersection_count(&uncovered)))
            .fold((usize::MAX, 0), |acc, (i, g)| if g > acc.1 { (i, g) } else { acc });
        if gain == 0 {
            return None;
        }
        chosen.push(best);
        uncovered.difference_with(&sets[best]);
    }
    Some(chosen)
}

/// Drops chosen sets, latest first, whose elements the others already cover.
fn remove_redundant(sets: &[FixedBitSet], universe: usize, chosen: &mut Vec<usize>) {
    let mut counts = vec![0u32; universe];
    for &s in chosen.iter() {
        for e in sets[s].ones() {
            counts[e] += 1;
        }
    }
    let mut k = chosen.len();
    while k > 0 {
        k -= 1;
        let s = chosen[k];
        if sets[s].ones().all(|e| counts[e] > 1) {
            for e in sets[s].ones() {
                counts[e] -= 1;
            }
            chosen.remove(k);
        }
    }
}

/// Outcome of an exact search that ran out of its node budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Exhausted {
    pub nodes: u64,
}

struct Reduced {
    forced: Vec<usize>,
    /// Original index of each remaining set.
    set_ids: Vec<usize>,
    /// Remaining sets over the remaining (renumbered) elements.
    sets: Vec<FixedBitSet>,
    elements: usize,
}

fn transpose(
    sets: &[FixedBitSet],
    active_sets: &FixedBitSet,
    elems: &FixedBitSet,
    universe: usize,
) -> Vec<FixedBitSet> {
    let mut covers = vec![FixedBitSet::with_capacity(sets.len()); universe];
    for s in active_sets.ones() {
        for e in sets[s].intersection(elems) {
            covers[e].insert(s);
        }
    }
    covers
}

fn reduce(sets: &[FixedBitSet], universe: usize) -> Option<Reduced> {
    let mut forced = Vec::new();
    let mut elems = full(universe);
    let mut active = FixedBitSet::with_capacity(sets.len());
    let mut seen = HashSet::new();
    for (i, s) in sets.iter().enumerate() {
        if !s.is_clear() && seen.insert(s.clone()) {
            active.insert(i);
        }
    }

    for _round in 0..16 {
        let mut changed = false;

        // forced sets: elements with a single covering set
        loop {
            let covers = transpose(sets, &active, &elems, universe);
            let mut hit = Vec::new();
            for e in elems.ones() {
                match covers[e].count_ones(..) {
                    0 => return None,
                    1 => hit.push(covers[e].minimum().unwrap()),
                    _ => {}
                }
            }
            if hit.is_empty() {
                break;
            }
            hit.sort_unstable();
            hit.dedup();
            for s in hit {
                forced.push(s);
                active.remove(s);
                elems.difference_with(&sets[s]);
            }
            changed = true;
        }
        if elems.is_clear() {
            break;
        }

        // dominated sets: drop s when its remaining part lies inside a kept set
        let restricted: Vec<(usize, FixedBitSet)> = active
            .ones()
            .map(|s| {
                let mut r = sets[s].clone();
                r.intersect_with(&elems);
                (s, r)
            })
            .collect();
        let mut order: Vec<usize> = (0..restricted.len()).collect();
        order.sort_by_key(|&k| (std::cmp::Reverse(restricted[k].1.count_ones(..)), restricted[k].0));
        let mut kept: Vec<usize> = Vec::new();
        for k in order {
            let r = &restricted[k].1;
            let dominated = r.is_clear() || kept.iter().any(|&t| r.is_subset(&restricted[t].1));
            if dominated {
                active.remove(restricted[k].0);
                changed = true;
            } else {
                kept.push(k);
            }
        }

        // dominated elements: drop e when covering some kept e' already covers e
        let covers = transpose(sets, &active, &elems, universe);
        let mut order: Vec<usize> = elems.ones().collect();
        order.sort_by_key(|&e| (covers[e].count_ones(..), e));
        let mut kept: Vec<usize> = Vec::new();
        for e in order {
            if kept.iter().any(|&f| covers[f].is_subset(&covers[e])) {
                elems.remove(e);
                changed = true;
            } else {
                kept.push(e);
            }
        }

        if !changed {
            break;
        }
    }

    let elem_ids: Vec<usize> = elems.ones().collect();
    let mut new_index = vec![usize::MAX; universe];
    for (k, &e) in elem_ids.iter().enumerate() {
        new_index[e] = k;
    }
    let mut set_ids = Vec::new();
    let mut reduced_sets = Vec::new();
    for s in active.ones() {
        let mut r = FixedBitSet::with_capacity(elem_ids.len());
        for e in sets[s].intersection(&elems) {
            r.insert(new_index[e]);
        }
        if !r.is_clear() {
            set_ids.push(s);
            reduced_sets.push(r);
        }
    }
    Some(Reduced {
        forced,
        set_ids,
        sets: reduced_sets,
        elements: elem_ids.len(),
    })
}

/// Slack absorbing floating-point error before a Lagrangian bound is rounded up.
const BOUND_SLACK: f64 = 1e-6;
const ROOT_ITERATIONS: usize = 400;
const NODE_ITERATIONS: usize = 25;

struct Search<'a> {
    sets: &'a [FixedBitSet],
    covers: Vec<FixedBitSet>,
    elements: usize,
    chosen: Vec<usize>,
    /// Size of the best cover known, possibly found outside this search.
    ub: usize,
    best: Option<Vec<usize>>,
    nodes: u64,
    node_limit: u64,
}

impl Search<'_> {
    fn offer(&mut self, mut cover: Vec<usize>) {
        remove_redundant(self.sets, self.elements, &mut cover);
        if cover.len() < self.ub {
            self.ub = cover.len();
            self.best = Some(cover);
        }
    }

    /// Best Lagrangian bound for covering `uncovered` from `avail`; improves `u` in place
    /// and stops once the bound reaches `target`.
    fn lagrangian(
        &mut self,
        uncovered: &FixedBitSet,
        avail: &FixedBitSet,
        u: &mut [f64],
        iterations: usize,
        target: f64,
    ) -> f64 {
        let elems: Vec<usize> = uncovered.ones().collect();
        let sets: Vec<usize> = avail.ones().collect();
        let mut best = 0.0f64;
        let mut lambda = 2.0;
        let mut stale = 0;
        let mut x = Vec::new();
        let mut hits = vec![0i32; self.elements];
        for it in 0..iterations {
            let mut value: f64 = elems.iter().map(|&e| u[e]).sum();
            x.clear();
            for &s in &sets {
                let rc = 1.0 - self.sets[s].intersection(uncovered).map(|e| u[e]).sum::<f64>();
                if rc < 0.0 {
                    value += rc;
                    x.push(s);
                }
            }
            if value > best + 1e-9 {
                best = value;
                stale = 0;
            } else {
                stale += 1;
                if stale >= 5 {
                    lambda /= 2.0;
                    stale = 0;
                }
            }
            if best >= target || lambda < 1e-4 {
                break;
            }
            if it % 10 == 0 && self.chosen.len() + x.len() < self.ub {
                let mut rest = uncovered.clone();
                for &s in &x {
                    rest.difference_with(&self.sets[s]);
                }
                let mut start = self.chosen.clone();
                start.extend_from_slice(&x);
                if let Some(cover) = greedy_complete(self.sets, &rest, start) {
                    self.offer(cover);
                }
            }
            for &e in &elems {
                hits[e] = 1;
            }
            for &s in &x {
                for e in self.sets[s].intersection(uncovered) {
                    hits[e] -= 1;
                }
            }
            let norm: f64 = elems.iter().map(|&e| (hits[e] as f64).powi(2)).sum();
            if norm == 0.0 {
                break;
            }
            let step = lambda * (target - value).max(0.05) / norm;
            for &e in &elems {
                u[e] = (u[e] + step * hits[e] as f64).max(0.0);
            }
        }
        best
    }

    fn run(&mut self, uncovered: &FixedBitSet, avail: &FixedBitSet, u: &[f64]) -> Result<(), Exhausted> {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Err(Exhausted { nodes: self.nodes });
        }
        if uncovered.is_clear() {
            let cover = self.chosen.clone();
            self.offer(cover);
            return Ok(());
        }
        if self.chosen.len() + 1 >= self.ub {
            return Ok(());
        }

        let mut counted: Vec<(usize, usize)> = uncovered
            .ones()
            .map(|e| (self.covers[e].intersection_count(avail), e))
            .collect();
        counted.sort_unstable();
        if counted[0].0 == 0 {
            return Ok(());
        }

        // packing bound: elements with pairwise disjoint available covers
        let mut used = FixedBitSet::with_capacity(self.sets.len());
        let mut packing = 0;
        for &(_, e) in &counted {
            let mut c = self.covers[e].clone();
            c.intersect_with(avail);
            if c.is_disjoint(&used) {
                packing += 1;
                used.union_with(&c);
            }
        }
        let room = self.ub - self.chosen.len();
        if packing >= room {
            return Ok(());
        }
        let mut u = u.to_vec();
        let target = (room - 1) as f64 + 1e-3;
        let bound = self.lagrangian(uncovered, avail, &mut u, NODE_ITERATIONS, target);
        if (bound - BOUND_SLACK).ceil() as usize >= self.ub - self.chosen.len() {
            return Ok(());
        }

        let pivot = counted[0].1;
        let mut options: Vec<(f64, usize, usize)> = self.covers[pivot]
            .intersection(avail)
            .map(|s| {
                let rc = 1.0 - self.sets[s].intersection(uncovered).map(|e| u[e]).sum::<f64>();
                (rc, self.sets[s].intersection_count(uncovered), s)
            })
            .collect();
        options.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));

        let mut avail = avail.clone();
        for (_, _, s) in options {
            avail.remove(s);
            let mut rest = uncovered.clone();
            rest.difference_with(&self.sets[s]);
            self.chosen.push(s);
            let r = self.run(&rest, &avail, &u);
            self.chosen.pop();
            r?;
        }
        Ok(())
    }
}

/// A minimum cover of `0..universe` by `sets` (indices into `sets`, ascending).
///
/// `None` when some element is uncoverable; `Err` when the search exceeds `node_limit`.
pub(crate) fn min_cover(
    sets: &[FixedBitSet],
    universe: usize,
    node_limit: u64,
) -> Result<Option<Vec<usize>>, Exhausted> {
    let Some(mut fallback) = greedy_cover(sets, universe) else {
        return Ok(None);
    };
    remove_redundant(sets, universe, &mut fallback);
    let reduced = reduce(sets, universe).expect("a greedy cover exists, so every element is coverable");
    let mut result = reduced.forced.clone();
    if reduced.elements > 0 {
        let mut covers = vec![FixedBitSet::with_capacity(reduced.sets.len()); reduced.elements];
        for (s, set) in reduced.sets.iter().enumerate() {
            for e in set.ones() {
                covers[e].insert(s);
            }
        }
        let mut search = Search {
            sets: &reduced.sets,
            covers,
            elements: reduced.elements,
            chosen: Vec::new(),
            ub: fallback.len().saturating_sub(reduced.forced.len()),
            best: None,
            nodes: 0,
            node_limit,
        };
        if let Some(g) = greedy_cover(&reduced.sets, reduced.elements) {
            search.offer(g);
        }
        // dual-feasible start: no set's multipliers sum past its unit cost
        let mut u = vec![f64::INFINITY; reduced.elements];
        for set in &reduced.sets {
            let share = 1.0 / set.count_ones(..) as f64;
            for e in set.ones() {
                u[e] = u[e].min(share);
            }
        }
        let uncovered = full(reduced.elements);
        let avail = full(reduced.sets.len());
        let target = search.ub as f64 - 1.0 + 1e-3;
        search.lagrangian(&uncovered, &avail, &mut u, ROOT_ITERATIONS, target);
        search.run(&uncovered, &avail, &u)?;
        match search.best {
            Some(best) => result.extend(best.iter().map(|&s| reduced.set_ids[s])),
            None => result = fallback,
        }
    }
    result.sort_unstable();
    Ok(Some(result))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(n: usize, items: &[usize]) -> FixedBitSet {
        let mut s = FixedBitSet::with_capacity(n);
        for &i in items {
            s.insert(i);
        }
        s
    }

    fn brute_force(sets: &[FixedBitSet], universe: usize) -> Option<usize> {
        let k = sets.len();
        (0u32..1 << k)
            .filter(|mask| {
                let mut u = FixedBitSet::with_capacity(universe);
                for (i, s) in sets.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        u.union_with(s);
                    }
                }
                u.count_ones(..) == universe
            })
            .map(|m| m.count_ones() as usize)
            .min()
    }

    #[test]
    fn simple_instance() {
        let sets = vec![
            bits(6, &[0, 1, 2]),
            bits(6, &[3, 4, 5]),
            bits(6, &[0, 3]),
            bits(6, &[1, 4]),
            bits(6, &[2, 5]),
        ];
        let cover = min_cover(&sets, 6, 1_000_000).unwrap().unwrap();
        assert_eq!(cover, vec![0, 1]);
    }

    #[test]
    fn uncoverable_is_none() {
        let sets = vec![bits(3, &[0, 1])];
        assert_eq!(min_cover(&sets, 3, 1000).unwrap(), None);
    }

    #[test]
    fn matches_brute_force_on_pseudorandom_instances() {
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for round in 0..150 {
            let universe = 10 + round % 7;
            let k = 14;
            let density = [12, 25, 40][round % 3];
            let mut sets = Vec::new();
            for i in 0..k {
                let mut s = FixedBitSet::with_capacity(universe);
                if round % 5 != 0 {
                    s.insert(i % universe);
                }
                for e in 0..universe {
                    if next() % 100 < density {
                        s.insert(e);
                    }
                }
                sets.push(s);
            }
            let Some(opt) = brute_force(&sets, universe) else {
                assert_eq!(min_cover(&sets, universe, 1000).unwrap(), None);
                continue;
            };
            let cover = min_cover(&sets, universe, 10_000_000).unwrap().unwrap();
            let mut u = FixedBitSet::with_capacity(universe);
            for &s in &cover {
                u.union_with(&sets[s]);
            }
            assert_eq!(u.count_ones(..), universe);
            assert_eq!(cover.len(), opt);
            assert!(greedy_cover(&sets, universe).unwrap().len() >= cover.len());
        }
    }
}
