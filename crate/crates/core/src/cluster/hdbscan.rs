//! HDBSCAN over a precomputed distance function.
//!
//! Follows the reference formulation: core distances from the
//! `min_samples`-th neighbor, a minimum spanning tree of the mutual
//! reachability graph, a condensed tree pruned at `min_cluster_size`, and
//! excess-of-mass selection that never returns the root as a single cluster.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    pub min_samples: usize,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        Self { min_cluster_size: 5, min_samples: 5 }
    }
}

// distances below this are treated as equal to it, keeping lambdas finite
const MIN_DISTANCE: f64 = 1e-12;

fn core_distances<F: Fn(usize, usize) -> f64>(n: usize, dist: &F, min_samples: usize) -> Vec<f64> {
    let rank = min_samples.min(n - 1).max(1);
    let mut row = Vec::with_capacity(n - 1);
    (0..n)
        .map(|i| {
            row.clear();
            row.extend((0..n).filter(|&j| j != i).map(|j| dist(i, j)));
            let (_, kth, _) = row.select_nth_unstable_by(rank - 1, |a, b| a.total_cmp(b));
            *kth
        })
        .collect()
}

/// Prim's algorithm on the dense mutual reachability graph.
fn mst<F: Fn(usize, usize) -> f64>(n: usize, dist: &F, core: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_w = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let w = dist(current, j).max(core[current]).max(core[j]);
            if w < best[j] {
                best[j] = w;
                from[j] = current;
            }
            if best[j] < next_w || next == usize::MAX {
                next_w = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((from[next], next, next_w));
        current = next;
    }
    edges
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Single-linkage merge `(left, right, distance, size)`; node `n + i` is
/// created by merge `i`.
struct Merge {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

fn single_linkage(n: usize, mut edges: Vec<(usize, usize, f64)>) -> Vec<Merge> {
    edges.sort_by(|a, b| a.2.total_cmp(&b.2));
    let mut uf = UnionFind::new(2 * n - 1);
    let mut size = vec![1usize; 2 * n - 1];
    let mut merges = Vec::with_capacity(n - 1);
    for (i, (a, b, w)) in edges.into_iter().enumerate() {
        let (ra, rb) = (uf.find(a), uf.find(b));
        let node = n + i;
        size[node] = size[ra] + size[rb];
        uf.parent[ra] = node;
        uf.parent[rb] = node;
        merges.push(Merge { left: ra, right: rb, distance: w, size: size[node] });
    }
    merges
}

/// Row of the condensed tree: `child` is a cluster id when `size > 1`
/// (`is_point == false`) and a point id otherwise.
struct CondensedRow {
    parent: usize,
    child: usize,
    lambda: f64,
    size: usize,
    is_point: bool,
}

fn condense(n: usize, merges: &[Merge], min_cluster_size: usize) -> (Vec<CondensedRow>, usize) {
    let node_size = |node: usize| if node < n { 1 } else { merges[node - n].size };
    let root = 2 * n - 2;
    let mut relabel = vec![0usize; 2 * n - 1];
    let mut ignore = vec![false; 2 * n - 1];
    let mut next_label = 1;
    let mut rows = Vec::new();

    let leaves_of = |start: usize, ignore: &mut [bool], out: &mut Vec<usize>| {
        let mut q = VecDeque::from([start]);
        while let Some(x) = q.pop_front() {
            ignore[x] = true;
            if x < n {
                out.push(x);
            } else {
                let m = &merges[x - n];
                q.push_back(m.left);
                q.push_back(m.right);
            }
        }
    };

    let mut queue = VecDeque::from([root]);
    let mut fallen = Vec::new();
    while let Some(node) = queue.pop_front() {
        if node < n {
            continue;
        }
        if ignore[node] {
            continue;
        }
        let m = &merges[node - n];
        queue.push_back(m.left);
        queue.push_back(m.right);
        let lambda = 1.0 / m.distance.max(MIN_DISTANCE);
        let (left_count, right_count) = (node_size(m.left), node_size(m.right));
        let parent = relabel[node];
        let big_left = left_count >= min_cluster_size;
        let big_right = right_count >= min_cluster_size;
        if big_left && big_right {
            for (child, count) in [(m.left, left_count), (m.right, right_count)] {
                relabel[child] = next_label;
                rows.push(CondensedRow { parent, child: next_label, lambda, size: count, is_point: false });
                next_label += 1;
            }
        } else {
            for (child, big) in [(m.left, big_left), (m.right, big_right)] {
                if big {
                    relabel[child] = parent;
                } else {
                    fallen.clear();
                    leaves_of(child, &mut ignore, &mut fallen);
                    for &p in &fallen {
                        rows.push(CondensedRow { parent, child: p, lambda, size: 1, is_point: true });
                    }
                }
            }
        }
    }
    (rows, next_label)
}

fn select_clusters(rows: &[CondensedRow], n_clusters: usize) -> Vec<bool> {
    let mut birth = vec![0.0; n_clusters];
    for r in rows.iter().filter(|r| !r.is_point) {
        birth[r.child] = r.lambda;
    }
    let mut stability = vec![0.0; n_clusters];
    for r in rows {
        stability[r.parent] += (r.lambda - birth[r.parent]) * r.size as f64;
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    for r in rows.iter().filter(|r| !r.is_point) {
        children[r.parent].push(r.child);
    }
    let mut selected = vec![false; n_clusters];
    // children always carry larger labels than their parent; the root (0)
    // is never eligible
    for node in (1..n_clusters).rev() {
        let subtree: f64 = children[node].iter().map(|&c| stability[c]).sum();
        if subtree > stability[node] {
            stability[node] = subtree;
        } else {
            selected[node] = true;
            let mut q: VecDeque<usize> = children[node].iter().copied().collect();
            while let Some(c) = q.pop_front() {
                selected[c] = false;
                q.extend(children[c].iter().copied());
            }
        }
    }
    selected
}

/// Clusters `n` items given a symmetric distance function. Returns one label
/// per item, `None` for noise; labels are dense from zero.
pub fn hdbscan<F: Fn(usize, usize) -> f64>(n: usize, dist: F, params: &HdbscanParams) -> Vec<Option<usize>> {
    if n < 2 {
        return vec![None; n];
    }
    let core = core_distances(n, &dist, params.min_samples);
    let edges = mst(n, &dist, &core);
    let merges = single_linkage(n, edges);
    let (rows, n_clusters) = condense(n, &merges, params.min_cluster_size.max(2));
    let selected = select_clusters(&rows, n_clusters);

    let mut cluster_parent = vec![0usize; n_clusters];
    for r in rows.iter().filter(|r| !r.is_point) {
        cluster_parent[r.child] = r.parent;
    }
    let mut dense = vec![None; n_clusters];
    let mut next = 0;
    for (c, &s) in selected.iter().enumerate() {
        if s {
            dense[c] = Some(next);
            next += 1;
        }
    }
    let mut labels = vec![None; n];
    for r in rows.iter().filter(|r| r.is_point) {
        let mut c = r.parent;
        loop {
            if selected[c] {
                labels[r.child] = dense[c];
                break;
            }
            if c == 0 {
                break;
            }
            c = cluster_parent[c];
        }
    }
    labels
}
