//! Depth-first branch-and-bound for Hamiltonian paths.
//!
//! Each start node roots an independent subtree explored on the rayon pool;
//! subtrees share only the incumbent value. A partial path ending at `v` with
//! unvisited set `R` is bounded below by the larger of
//!
//! * the minimum spanning tree of `R ∪ {v}`, and
//! * `Σ_{r ∈ R}` of the cheapest edge into `r` from `R ∪ {v}`,
//!
//! both valid for arbitrary (also negative) weights, so maximization runs on
//! negated weights. Only paths whose first node is smaller than their last
//! are enumerated.
//!
//! Every leaf whose value ties the subtree optimum survives pruning, and
//! ties are resolved lexicographically, so a run to optimality returns the
//! same order for any number of threads.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Result, SeriationError};
use crate::measures::Sense;
use crate::weights::PathGraph;

use super::SolveLimits;

/// Result of [`branch_and_bound_path`]; `value` and `bound` are in the
/// graph's own sense.
#[derive(Debug, Clone, PartialEq)]
pub struct BnbOutcome {
    pub order: Vec<usize>,
    pub value: f64,
    pub bound: f64,
    /// `false` when a limit stopped the search.
    pub optimal: bool,
    pub nodes: u64,
}

#[inline]
fn slack(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

struct Shared<'a> {
    w: &'a PathGraph,
    n: usize,
    /// Neighbors of each node sorted by (weight, index).
    by_weight: Vec<Vec<usize>>,
    incumbent: AtomicU64,
    nodes: AtomicU64,
    stop: AtomicBool,
    node_limit: Option<u64>,
    deadline: Option<Instant>,
}

impl Shared<'_> {
    fn incumbent(&self) -> f64 {
        f64::from_bits(self.incumbent.load(Ordering::Acquire))
    }

    fn offer(&self, value: f64) {
        let mut cur = self.incumbent.load(Ordering::Acquire);
        while value < f64::from_bits(cur) {
            match self.incumbent.compare_exchange_weak(
                cur,
                value.to_bits(),
                Ordering::AcqRel,
                Ordering::Acquire,
            ) {
                Ok(_) => break,
                Err(seen) => cur = seen,
            }
        }
    }

    /// `max(MST(R ∪ {v}), Σ_{r∈R} min incoming)`; `scratch` has length `n`.
    fn bound(&self, v: usize, remaining: &[usize], scratch: &mut [f64]) -> f64 {
        if remaining.is_empty() {
            return 0.0;
        }
        let w = self.w;
        // Prim from v over remaining.
        for &r in remaining {
            scratch[r] = w.weight(v, r);
        }
        let mut in_tree = vec![false; remaining.len()];
        let mut mst = 0.0;
        for _ in 0..remaining.len() {
            let mut pick = usize::MAX;
            let mut best = f64::INFINITY;
            for (t, &r) in remaining.iter().enumerate() {
                if !in_tree[t] && scratch[r] < best {
                    best = scratch[r];
                    pick = t;
                }
            }
            in_tree[pick] = true;
            mst += best;
            let u = remaining[pick];
            let row = w.row(u);
            for (t, &r) in remaining.iter().enumerate() {
                if !in_tree[t] && row[r] < scratch[r] {
                    scratch[r] = row[r];
                }
            }
        }
        let mut incoming = 0.0;
        for &r in remaining {
            let row = w.row(r);
            let mut best = row[v];
            for &u in remaining {
                if u != r && row[u] < best {
                    best = row[u];
                }
            }
            incoming += best;
        }
        mst.max(incoming)
    }
}

struct Subtree {
    path: Vec<usize>,
    visited: Vec<bool>,
    remaining: Vec<usize>,
    scratch: Vec<f64>,
    best: Option<(f64, Vec<usize>)>,
    local_nodes: u64,
}

impl Subtree {
    fn record(&mut self, value: f64) {
        let better = match &self.best {
            None => true,
            Some((b, o)) => value < *b || (value == *b && self.path < *o),
        };
        if better {
            self.best = Some((value, self.path.clone()));
        }
    }
}

fn dfs(sh: &Shared<'_>, st: &mut Subtree, v: usize, cost: f64) {
    if sh.stop.load(Ordering::Relaxed) {
        return;
    }
    let count = sh.nodes.fetch_add(1, Ordering::Relaxed) + 1;
    st.local_nodes += 1;
    if sh.node_limit.is_some_and(|limit| count > limit)
        || (st.local_nodes % 1024 == 0 && sh.deadline.is_some_and(|d| Instant::now() >= d))
    {
        sh.stop.store(true, Ordering::Relaxed);
        return;
    }
    let start = st.path[0];
    if st.path.len() == sh.n {
        if v > start {
            st.record(cost);
            sh.offer(cost);
        }
        return;
    }
    st.remaining.clear();
    st.remaining.extend((0..sh.n).filter(|&u| !st.visited[u]));
    if st.remaining.iter().all(|&u| u < start) {
        return;
    }
    let remaining = std::mem::take(&mut st.remaining);
    let lb = cost + sh.bound(v, &remaining, &mut st.scratch);
    st.remaining = remaining;
    let inc = sh.incumbent();
    if lb > inc + slack(inc) {
        return;
    }
    for t in 0..sh.by_weight[v].len() {
        let u = sh.by_weight[v][t];
        if st.visited[u] {
            continue;
        }
        st.visited[u] = true;
        st.path.push(u);
        dfs(sh, st, u, cost + sh.w.weight(v, u));
        st.path.pop();
        st.visited[u] = false;
        if sh.stop.load(Ordering::Relaxed) {
            return;
        }
    }
}

fn better(a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Exact Hamiltonian path by branch-and-bound, optionally warm started.
///
/// On a limit the incumbent is returned with `optimal = false` and the
/// root bound, which is valid but usually loose.
pub fn branch_and_bound_path(
    g: &PathGraph,
    warm: Option<&[usize]>,
    limits: &SolveLimits,
) -> Result<BnbOutcome> {
    let n = g.size();
    if let Some(w) = warm {
        let mut seen = vec![false; n];
        if w.len() != n || w.iter().any(|&u| u >= n || std::mem::replace(&mut seen[u], true)) {
            return Err(crate::error::invalid("warm start is not a permutation of the graph nodes"));
        }
    }
    if n == 1 {
        return Ok(BnbOutcome { order: vec![0], value: 0.0, bound: 0.0, optimal: true, nodes: 1 });
    }
    let w = g.minimizing();
    let flip = |x: f64| if g.sense() == Sense::Maximize { -x } else { x };

    let mut by_weight: Vec<Vec<usize>> = Vec::with_capacity(n);
    for v in 0..n {
        let mut nb: Vec<usize> = (0..n).filter(|&u| u != v).collect();
        nb.sort_by(|&x, &y| w.weight(v, x).total_cmp(&w.weight(v, y)).then(x.cmp(&y)));
        by_weight.push(nb);
    }
    let warm = warm.map(|o| {
        let mut o = o.to_vec();
        if o[0] > o[n - 1] {
            o.reverse();
        }
        (w.path_value(&o), o)
    });
    let started = Instant::now();
    let shared = Shared {
        w: &w,
        n,
        by_weight,
        incumbent: AtomicU64::new(warm.as_ref().map_or(f64::INFINITY, |x| x.0).to_bits()),
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        node_limit: limits.node_limit,
        deadline: limits.deadline(started),
    };

    let root_bound = {
        let mut scratch = vec![0.0; n];
        (0..n)
            .map(|s| {
                let rest: Vec<usize> = (0..n).filter(|&u| u != s).collect();
                shared.bound(s, &rest, &mut scratch)
            })
            .fold(f64::INFINITY, f64::min)
    };

    let explore = || -> Vec<Option<(f64, Vec<usize>)>> {
        (0..n - 1)
            .into_par_iter()
            .map(|s| {
                let mut visited = vec![false; n];
                visited[s] = true;
                let mut st = Subtree {
                    path: vec![s],
                    visited,
                    remaining: Vec::with_capacity(n),
                    scratch: vec![0.0; n],
                    best: None,
                    local_nodes: 0,
                };
                dfs(&shared, &mut st, s, 0.0);
                st.best
            })
            .collect()
    };
    let results = match limits.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| SeriationError::InvalidArgument(format!("thread pool: {e}")))?
            .install(explore),
        None => explore(),
    };

    let mut best: Option<(f64, Vec<usize>)> = None;
    for cand in results.into_iter().flatten().chain(warm) {
        if best.as_ref().is_none_or(|b| better(&cand, b)) {
            best = Some(cand);
        }
    }
    let complete = !shared.stop.load(Ordering::Relaxed);
    let (value, order) = best.unwrap_or_else(|| {
        let o: Vec<usize> = (0..n).collect();
        (w.path_value(&o), o)
    });
    let bound = if complete { value } else { root_bound.min(value) };
    Ok(BnbOutcome {
        value: g.path_value(&order),
        bound: flip(bound),
        order,
        optimal: complete,
        nodes: shared.nodes.load(Ordering::Relaxed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::solver::held_karp::held_karp_path;
    use proptest::prelude::*;

    fn random_graph(n: usize, sense: Sense) -> impl Strategy<Value = PathGraph> {
        proptest::collection::vec(0u16..200, n * n).prop_map(move |raw| {
            let mut data = vec![0.0; n * n];
            for i in 0..n {
                for k in i + 1..n {
                    data[i * n + k] = raw[i * n + k] as f64 / 8.0;
                    data[k * n + i] = data[i * n + k];
                }
            }
            PathGraph::new(&DenseMatrix::new(n, n, data).unwrap(), sense).unwrap()
        })
    }

    fn any_graph() -> impl Strategy<Value = PathGraph> {
        (2usize..=10, any::<bool>()).prop_flat_map(|(n, max)| {
            random_graph(n, if max { Sense::Maximize } else { Sense::Minimize })
        })
    }

    #[test]
    fn zero_graph() {
        let g = PathGraph::new(&DenseMatrix::zeros(5, 5).unwrap(), Sense::Minimize).unwrap();
        let out = branch_and_bound_path(&g, None, &SolveLimits::none()).unwrap();
        assert_eq!(out.value, 0.0);
        assert!(out.optimal);
        assert_eq!(out.order, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn node_limit_keeps_valid_bound() {
        let data: Vec<f64> = (0..64)
            .map(|t| {
                let (i, k) = (t / 8, t % 8);
                if i == k { 0.0 } else { ((i * 7 + k * 7) % 11) as f64 + (i as f64 - k as f64).abs() }
            })
            .collect();
        let g = PathGraph::new(&DenseMatrix::new(8, 8, data).unwrap(), Sense::Minimize).unwrap();
        let limits = SolveLimits::none().with_node_limit(1).unwrap();
        let out = branch_and_bound_path(&g, Some(&[7, 6, 5, 4, 3, 2, 1, 0]), &limits).unwrap();
        assert!(!out.optimal);
        assert!(out.bound <= out.value);
        assert_eq!(out.value, g.path_value(&out.order));
        let (_, opt) = held_karp_path(&g).unwrap();
        assert!(out.bound <= opt + 1e-12);
    }

    #[test]
    fn rejects_bad_warm_start() {
        let g = PathGraph::new(&DenseMatrix::zeros(3, 3).unwrap(), Sense::Minimize).unwrap();
        assert!(branch_and_bound_path(&g, Some(&[0, 0, 1]), &SolveLimits::none()).is_err());
        assert!(branch_and_bound_path(&g, Some(&[0, 1]), &SolveLimits::none()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn agrees_with_held_karp(g in any_graph()) {
            let (hk_order, hk) = held_karp_path(&g).unwrap();
            let out = branch_and_bound_path(&g, None, &SolveLimits::none()).unwrap();
            prop_assert!(out.optimal);
            prop_assert_eq!(out.value, hk);
            prop_assert_eq!(out.bound, out.value);
            prop_assert_eq!(&out.order, &hk_order);
        }

        #[test]
        fn deterministic_across_threads(g in any_graph()) {
            let one = branch_and_bound_path(&g, None, &SolveLimits::none().with_threads(1).unwrap()).unwrap();
            let four = branch_and_bound_path(&g, None, &SolveLimits::none().with_threads(4).unwrap()).unwrap();
            prop_assert_eq!(one.order, four.order);
            prop_assert_eq!(one.value, four.value);
        }

        #[test]
        fn limited_bound_is_valid(g in any_graph(), limit in 1u64..50) {
            let (_, hk) = held_karp_path(&g).unwrap();
            let limits = SolveLimits::none().with_node_limit(limit).unwrap();
            let out = branch_and_bound_path(&g, None, &limits).unwrap();
            match g.sense() {
                Sense::Minimize => prop_assert!(out.bound <= hk + 1e-9 && hk <= out.value + 1e-9),
                Sense::Maximize => prop_assert!(out.bound >= hk - 1e-9 && hk >= out.value - 1e-9),
            }
        }
    }
}
