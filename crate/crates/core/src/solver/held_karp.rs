//! Dynamic programming over node subsets for optimal Hamiltonian paths.
//!
//! `f[S][v]` is the cheapest path that starts at `v` and visits exactly `S`.
//! Because the table is indexed by the *first* node, the optimal order can be
//! rebuilt front to back, always taking the smallest node that still reaches
//! the optimum; this yields the lexicographically smallest optimal order,
//! whose first node is smaller than its last.

use crate::error::{Result, SeriationError};
use crate::weights::PathGraph;

/// Largest graph accepted by [`held_karp_path`]; the table holds `2^n · n` values.
pub const HELD_KARP_MAX: usize = 20;

/// Largest graph accepted by [`held_karp_two_step`]; the table holds `2^n · n²` values.
pub const TWO_STEP_MAX: usize = 16;

#[inline]
fn tol(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

fn guard(engine: &'static str, size: usize, max: usize) -> Result<()> {
    if size > max {
        return Err(SeriationError::SizeGuard {
            engine,
            detail: format!("{size} nodes, at most {max} supported"),
        });
    }
    Ok(())
}

fn canonical(mut order: Vec<usize>) -> Vec<usize> {
    if order.len() > 1 && order[0] > order[order.len() - 1] {
        order.reverse();
    }
    order
}

/// Optimal Hamiltonian path of `g` in its own sense, and its value.
pub fn held_karp_path(g: &PathGraph) -> Result<(Vec<usize>, f64)> {
    let n = g.size();
    guard("heldkarp", n, HELD_KARP_MAX)?;
    if n == 1 {
        return Ok((vec![0], 0.0));
    }
    let w = g.minimizing();
    let full = (1usize << n) - 1;
    let mut f = vec![f64::INFINITY; (full + 1) * n];
    for v in 0..n {
        f[(1 << v) * n + v] = 0.0;
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut bits = mask;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = mask ^ (1 << v);
            let wv = w.row(v);
            let tail = &f[rest * n..rest * n + n];
            let mut best = f64::INFINITY;
            let mut others = rest;
            while others != 0 {
                let u = others.trailing_zeros() as usize;
                others &= others - 1;
                let c = wv[u] + tail[u];
                if c < best {
                    best = c;
                }
            }
            f[mask * n + v] = best;
        }
    }

    let opt = f[full * n..full * n + n].iter().copied().fold(f64::INFINITY, f64::min);
    let t = tol(opt);
    let start = (0..n).find(|&s| f[full * n + s] <= opt + t).expect("some start attains the optimum");
    let mut order = Vec::with_capacity(n);
    order.push(start);
    let (mut mask, mut cur) = (full, start);
    while mask.count_ones() > 1 {
        let rest = mask ^ (1 << cur);
        let target = f[mask * n + cur];
        let next = (0..n)
            .filter(|&u| rest & (1 << u) != 0)
            .find(|&u| w.weight(cur, u) + f[rest * n + u] <= target + tol(target))
            .expect("some successor attains the subproblem optimum");
        order.push(next);
        mask = rest;
        cur = next;
    }
    let order = canonical(order);
    let value = g.path_value(&order);
    Ok((order, value))
}

/// Optimal order for the objective `Σ near(o_t, o_{t+1}) + Σ far(o_t, o_{t+2})`,
/// used by the two-step cross neighborhood.
///
/// `g[S][a][b]` is the cheapest completion of a path that starts `a, b` and
/// covers `S`.
pub fn held_karp_two_step(near: &PathGraph, far: &PathGraph) -> Result<(Vec<usize>, f64)> {
    let n = near.size();
    if far.size() != n || far.sense() != near.sense() {
        return Err(crate::error::invalid("near and far graphs must share size and sense"));
    }
    guard("heldkarp", n, TWO_STEP_MAX)?;
    let value_of = |o: &[usize]| near.path_value(o) + far.stride_value(o, 2);
    if n <= 2 {
        let order: Vec<usize> = (0..n).collect();
        let v = value_of(&order);
        return Ok((order, v));
    }
    let (wn, wf) = (near.minimizing(), far.minimizing());
    let full = (1usize << n) - 1;
    let nn = n * n;
    let idx = |mask: usize, a: usize, b: usize| mask * nn + a * n + b;
    let mut g = vec![f64::INFINITY; (full + 1) * nn];
    for mask in 1..=full {
        let count = mask.count_ones();
        if count < 2 {
            continue;
        }
        for a in (0..n).filter(|&a| mask & (1 << a) != 0) {
            let rest = mask ^ (1 << a);
            for b in (0..n).filter(|&b| rest & (1 << b) != 0) {
                let head = wn.weight(a, b);
                if count == 2 {
                    g[idx(mask, a, b)] = head;
                    continue;
                }
                let mut best = f64::INFINITY;
                let mut others = rest ^ (1 << b);
                while others != 0 {
                    let c = others.trailing_zeros() as usize;
                    others &= others - 1;
                    let v = wf.weight(a, c) + g[idx(rest, b, c)];
                    if v < best {
                        best = v;
                    }
                }
                g[idx(mask, a, b)] = head + best;
            }
        }
    }

    let mut opt = f64::INFINITY;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                opt = opt.min(g[idx(full, a, b)]);
            }
        }
    }
    let t = tol(opt);
    let (mut a, mut b) = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .find(|&(a, b)| a != b && g[idx(full, a, b)] <= opt + t)
        .expect("some pair attains the optimum");
    let mut order = vec![a, b];
    let mut mask = full;
    while mask.count_ones() > 2 {
        let rest = mask ^ (1 << a);
        let target = g[idx(mask, a, b)] - wn.weight(a, b);
        let c = (0..n)
            .filter(|&c| rest & (1 << c) != 0 && c != b)
            .find(|&c| wf.weight(a, c) + g[idx(rest, b, c)] <= target + tol(target))
            .expect("some successor attains the subproblem optimum");
        order.push(c);
        mask = rest;
        a = b;
        b = c;
    }
    let order = canonical(order);
    let value = value_of(&order);
    Ok((order, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::measures::Sense;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn graph(w: &[&[f64]], sense: Sense) -> PathGraph {
        PathGraph::new(&DenseMatrix::from_rows(w).unwrap(), sense).unwrap()
    }

    fn three() -> [&'static [f64]; 3] {
        [&[0.0, 1.0, 5.0], &[1.0, 0.0, 2.0], &[5.0, 2.0, 0.0]]
    }

    /// Best value and lexicographically smallest optimal order by enumeration.
    fn enumerate(n: usize, value: impl Fn(&[usize]) -> f64, sense: Sense) -> (Vec<usize>, f64) {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for o in (0..n).permutations(n) {
            let v = value(&o);
            if best.as_ref().is_none_or(|(_, b)| sense.improves(v, *b)) {
                best = Some((o, v));
            }
        }
        best.unwrap()
    }

    #[test]
    fn three_node_examples() {
        let g = graph(&three(), Sense::Minimize);
        assert_eq!(held_karp_path(&g).unwrap(), (vec![0, 1, 2], 3.0));
        let g = graph(&three(), Sense::Maximize);
        assert_eq!(held_karp_path(&g).unwrap(), (vec![0, 2, 1], 7.0));
    }

    #[test]
    fn tiny_graphs() {
        let g = graph(&[&[0.0, 4.5], &[4.5, 0.0]], Sense::Minimize);
        assert_eq!(held_karp_path(&g).unwrap(), (vec![0, 1], 4.5));
        let g = graph(&[&[0.0]], Sense::Minimize);
        assert_eq!(held_karp_path(&g).unwrap(), (vec![0], 0.0));
    }

    #[test]
    fn size_guard() {
        let big = DenseMatrix::zeros(HELD_KARP_MAX + 1, HELD_KARP_MAX + 1).unwrap();
        let g = PathGraph::new(&big, Sense::Minimize).unwrap();
        assert!(matches!(held_karp_path(&g), Err(SeriationError::SizeGuard { .. })));
    }

    #[test]
    fn zero_weights_give_identity() {
        let g = PathGraph::new(&DenseMatrix::zeros(6, 6).unwrap(), Sense::Minimize).unwrap();
        assert_eq!(held_karp_path(&g).unwrap(), ((0..6).collect(), 0.0));
    }

    fn sym_weights(n: usize) -> impl Strategy<Value = DenseMatrix> {
        proptest::collection::vec(0u8..10, n * n).prop_map(move |raw| {
            let mut data = vec![0.0; n * n];
            for i in 0..n {
                for k in i + 1..n {
                    data[i * n + k] = raw[i * n + k] as f64;
                    data[k * n + i] = raw[i * n + k] as f64;
                }
            }
            DenseMatrix::new(n, n, data).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_enumeration(w in (2usize..=7).prop_flat_map(sym_weights), maximize in any::<bool>()) {
            let sense = if maximize { Sense::Maximize } else { Sense::Minimize };
            let g = PathGraph::new(&w, sense).unwrap();
            let (order, value) = held_karp_path(&g).unwrap();
            let (oracle_order, oracle) = enumerate(g.size(), |o| g.path_value(o), sense);
            prop_assert_eq!(value, oracle);
            prop_assert_eq!(order, oracle_order);
        }

        #[test]
        fn two_step_matches_enumeration(w in (2usize..=7).prop_flat_map(sym_weights), maximize in any::<bool>()) {
            let sense = if maximize { Sense::Maximize } else { Sense::Minimize };
            let g = PathGraph::new(&w, sense).unwrap();
            let (order, value) = held_karp_two_step(&g, &g).unwrap();
            let f = |o: &[usize]| g.path_value(o) + g.stride_value(o, 2);
            let (oracle_order, oracle) = enumerate(g.size(), f, sense);
            prop_assert_eq!(value, oracle);
            prop_assert_eq!(order, oracle_order);
        }
    }
}
