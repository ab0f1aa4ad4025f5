//! Maximum clique by branch-and-bound with greedy-coloring bounds.

use fixedbitset::FixedBitSet;

struct Search<'a> {
    adj: &'a [FixedBitSet],
    current: Vec<usize>,
    best: Vec<usize>,
}

impl Search<'_> {
    /// Greedy sequential coloring of `p`; returns vertices in color order with their color.
    fn color(&self, p: &FixedBitSet) -> (Vec<usize>, Vec<usize>) {
        let mut order = Vec::with_capacity(p.count_ones(..));
        let mut colors = Vec::with_capacity(order.capacity());
        let mut uncolored = p.clone();
        let mut color = 0;
        while !uncolored.is_clear() {
            color += 1;
            let mut q = uncolored.clone();
            while let Some(v) = q.minimum() {
                q.remove(v);
                q.difference_with(&self.adj[v]);
                uncolored.remove(v);
                order.push(v);
                colors.push(color);
            }
        }
        (order, colors)
    }

    fn expand(&mut self, mut p: FixedBitSet) {
        let (order, colors) = self.color(&p);
        for idx in (0..order.len()).rev() {
            if self.current.len() + colors[idx] <= self.best.len() {
                return;
            }
            let v = order[idx];
            self.current.push(v);
            let mut next = p.clone();
            next.intersect_with(&self.adj[v]);
            if next.is_clear() {
                if self.current.len() > self.best.len() {
                    self.best = self.current.clone();
                }
            } else {
                self.expand(next);
            }
            self.current.pop();
            p.remove(v);
        }
    }
}

/// A maximum clique of the graph `adj` restricted to `candidates`, sorted ascending.
///
/// `adj[v]` must not contain `v`; the relation must be symmetric.
pub(crate) fn max_clique(adj: &[FixedBitSet], candidates: &FixedBitSet) -> Vec<usize> {
    let mut search = Search {
        adj,
        current: Vec::new(),
        best: greedy_clique(adj, candidates),
    };
    search.expand(candidates.clone());
    let mut best = search.best;
    best.sort_unstable();
    best
}

/// Up to `limit` distinct maximum cliques, each sorted, in lexicographic order of discovery.
pub(crate) fn all_max_cliques(adj: &[FixedBitSet], candidates: &FixedBitSet, limit: usize) -> Vec<Vec<usize>> {
    let target = max_clique(adj, candidates).len();
    let mut out = Vec::new();
    let mut current = Vec::new();
    enumerate(adj, candidates.clone(), target, &mut current, &mut out, limit);
    out
}

fn enumerate(
    adj: &[FixedBitSet],
    mut p: FixedBitSet,
    target: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
) {
    if current.len() == target {
        out.push(current.clone());
        return;
    }
    while let Some(v) = p.minimum() {
        if out.len() >= limit || current.len() + p.count_ones(..) < target {
            return;
        }
        p.remove(v);
        let mut next = p.clone();
        next.intersect_with(&adj[v]);
        current.push(v);
        enumerate(adj, next, target, current, out, limit);
        current.pop();
    }
}

/// Scans candidates in index order, keeping a vertex iff it is adjacent to all kept ones.
pub(crate) fn greedy_clique(adj: &[FixedBitSet], candidates: &FixedBitSet) -> Vec<usize> {
    let mut kept = Vec::new();
    let mut allowed = candidates.clone();
    while let Some(v) = allowed.minimum() {
        kept.push(v);
        allowed.remove(v);
        allowed.intersect_with(&adj[v]);
    }
    kept
}
