//! Bond Energy Algorithm, 2-opt path improvement and a generic order local search.

use crate::error::{invalid, Result};
use crate::matrix::{apply_permutations, DenseMatrix, Permutation};
use crate::measures::Sense;
use crate::weights::{me_weights, PathGraph};

/// Alternations of row and column passes before [`bea`] gives up on convergence.
pub const BEA_MAX_ALTERNATIONS: usize = 50;

/// `Σ_i Σ_k b_{ik} b_{i+1,k}` plus the column analogue on the reordered matrix `b`.
pub fn bond_energy(a: &DenseMatrix, row_perm: &Permutation, col_perm: &Permutation) -> Result<f64> {
    let b = apply_permutations(a, row_perm, col_perm)?;
    let (n, m) = (b.rows(), b.cols());
    let mut rows = 0.0;
    for i in 0..n.saturating_sub(1) {
        rows += b.row(i).iter().zip(b.row(i + 1)).map(|(x, y)| x * y).sum::<f64>();
    }
    let mut cols = 0.0;
    for j in 0..m.saturating_sub(1) {
        cols += (0..n).map(|i| b.get(i, j) * b.get(i, j + 1)).sum::<f64>();
    }
    Ok(rows + cols)
}

/// Partial order built by greedy insertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeaState {
    pub placed: Vec<usize>,
    pub remaining: Vec<usize>,
}

impl BeaState {
    fn new(size: usize, seed: usize) -> Self {
        Self {
            placed: vec![seed],
            remaining: (0..size).filter(|&i| i != seed).collect(),
        }
    }

    /// Inserts the `(index, gap)` pair with the largest bond gain; ties go to
    /// the smallest index, then the smallest gap.
    fn step(&mut self, bonds: &PathGraph) {
        let bond = |x: Option<&usize>, y: Option<&usize>| match (x, y) {
            (Some(&x), Some(&y)) => bonds.weight(x, y),
            _ => 0.0,
        };
        let mut best: Option<(f64, usize, usize)> = None;
        for (slot, &r) in self.remaining.iter().enumerate() {
            for gap in 0..=self.placed.len() {
                let left = gap.checked_sub(1).and_then(|g| self.placed.get(g));
                let right = self.placed.get(gap);
                let gain = bond(left, Some(&r)) + bond(Some(&r), right) - bond(left, right);
                if best.is_none_or(|(b, _, _)| gain > b) {
                    best = Some((gain, slot, gap));
                }
            }
        }
        let (_, slot, gap) = best.expect("remaining is non-empty");
        let r = self.remaining.remove(slot);
        self.placed.insert(gap, r);
    }

    fn run(mut self, bonds: &PathGraph) -> Vec<usize> {
        while !self.remaining.is_empty() {
            self.step(bonds);
        }
        self.placed
    }
}

/// Bond Energy Algorithm: greedy insertion of rows, then columns, repeated
/// until a full alternation changes nothing.
///
/// `seed` is the index placed first on both axes (default 0). Row bonds
/// depend only on row contents, so the second alternation always confirms
/// the first.
pub fn bea(a: &DenseMatrix, seed: Option<usize>) -> Result<(Permutation, Permutation)> {
    let seed = seed.unwrap_or(0);
    if seed >= a.rows() || seed >= a.cols() {
        return Err(invalid(format!(
            "seed index {} outside a {}x{} matrix",
            seed + 1,
            a.rows(),
            a.cols()
        )));
    }
    let (row_bonds, col_bonds) = me_weights(a);
    let mut rows: Vec<usize> = (0..a.rows()).collect();
    let mut cols: Vec<usize> = (0..a.cols()).collect();
    for pass in 0..BEA_MAX_ALTERNATIONS {
        let new_rows = BeaState::new(a.rows(), seed).run(&row_bonds);
        let new_cols = BeaState::new(a.cols(), seed).run(&col_bonds);
        let changed = new_rows != rows || new_cols != cols;
        rows = new_rows;
        cols = new_cols;
        if !changed && pass > 0 {
            break;
        }
    }
    Ok((Permutation::from_order(&rows)?, Permutation::from_order(&cols)?))
}

#[inline]
fn tol(v: f64) -> f64 {
    1e-12 * v.abs().max(1.0)
}

/// First-improvement 2-opt on an open path: reverses `order[i..=j]` while
/// that strictly improves the path value in the graph's sense.
pub fn two_opt_path(g: &PathGraph, order: &[usize]) -> Vec<usize> {
    let w = g.minimizing();
    let mut o = order.to_vec();
    let n = o.len();
    let edge = |o: &[usize], x: usize, y: usize| -> f64 {
        if x < n && y < n {
            w.weight(o[x], o[y])
        } else {
            0.0
        }
    };
    loop {
        let mut improved = false;
        for i in 0..n {
            for j in i + 1..n {
                let before = edge(&o, i.wrapping_sub(1), i) + edge(&o, j, j + 1);
                let after = edge(&o, i.wrapping_sub(1), j) + edge(&o, i, j + 1);
                if after < before - tol(before) {
                    o[i..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            return o;
        }
    }
}

/// Strict-descent local search over orders with segment reversals and
/// single-element relocations, minimizing `objective`.
pub fn local_search(mut order: Vec<usize>, objective: impl Fn(&[usize]) -> f64) -> Vec<usize> {
    let n = order.len();
    let mut value = objective(&order);
    let mut cand = order.clone();
    loop {
        let mut improved = false;
        for i in 0..n {
            for j in i + 1..n {
                cand.copy_from_slice(&order);
                cand[i..=j].reverse();
                let v = objective(&cand);
                if v < value - tol(value) {
                    order.copy_from_slice(&cand);
                    value = v;
                    improved = true;
                }
            }
        }
        for from in 0..n {
            for to in 0..n {
                if from == to {
                    continue;
                }
                cand.copy_from_slice(&order);
                let x = cand.remove(from);
                cand.insert(to, x);
                let v = objective(&cand);
                if v < value - tol(value) {
                    order.copy_from_slice(&cand);
                    value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            return order;
        }
    }
}

/// Objective-sense-aware wrapper around [`local_search`].
pub fn local_search_with_sense(order: Vec<usize>, sense: Sense, objective: impl Fn(&[usize]) -> f64) -> Vec<usize> {
    match sense {
        Sense::Minimize => local_search(order, objective),
        Sense::Maximize => local_search(order, |o| -objective(o)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::effectiveness;
    use crate::solver::held_karp_path;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn bond_energy_examples() {
        let id = Permutation::identity;
        assert_eq!(bond_energy(&DenseMatrix::zeros(3, 3).unwrap(), &id(3), &id(3)).unwrap(), 0.0);
        assert_eq!(bond_energy(&DenseMatrix::filled(2, 2, 1.0).unwrap(), &id(2), &id(2)).unwrap(), 4.0);
    }

    #[test]
    fn bea_trivial() {
        let (r, c) = bea(&m(&[&[3.0]]), None).unwrap();
        assert!(r.is_identity() && c.is_identity());
        assert!(bea(&m(&[&[1.0, 2.0]]), Some(1)).is_err());
    }

    #[test]
    fn bea_groups_blocks() {
        // Rows {0, 2} share columns {0, 2}; rows {1, 3} share columns {1, 3}.
        let a = m(&[
            &[1.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 1.0],
            &[1.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 1.0],
        ]);
        let (r, c) = bea(&a, None).unwrap();
        let pos = |p: &Permutation, i: usize| p.position(i) as isize;
        assert_eq!((pos(&r, 0) - pos(&r, 2)).abs(), 1);
        assert_eq!((pos(&r, 1) - pos(&r, 3)).abs(), 1);
        assert_eq!((pos(&c, 0) - pos(&c, 2)).abs(), 1);
        let b = apply_permutations(&a, &r, &c).unwrap();
        assert_eq!(effectiveness(&b), 8.0);
    }

    #[test]
    fn two_opt_examples() {
        let g = PathGraph::new(&m(&[&[0.0, 1.0, 5.0], &[1.0, 0.0, 2.0], &[5.0, 2.0, 0.0]]), Sense::Minimize)
            .unwrap();
        assert_eq!(two_opt_path(&g, &[0, 1, 2]), vec![0, 1, 2]);
        // Points on a line at 0, 1, 2, 3 visited in a crossing order.
        let pts = [0.0f64, 1.0, 2.0, 3.0];
        let d: Vec<Vec<f64>> = pts.iter().map(|x| pts.iter().map(|y| (x - y).abs()).collect()).collect();
        let g = PathGraph::new(&DenseMatrix::from_rows(&d).unwrap(), Sense::Minimize).unwrap();
        let out = two_opt_path(&g, &[0, 2, 1, 3]);
        assert_eq!(g.path_value(&out), 3.0);
    }

    fn binary(n: usize, m: usize) -> impl Strategy<Value = DenseMatrix> {
        proptest::collection::vec(prop_oneof![Just(0.0), Just(1.0)], n * m)
            .prop_map(move |d| DenseMatrix::new(n, m, d).unwrap())
    }

    proptest! {
        #[test]
        fn bond_energy_is_effectiveness(a in binary(5, 5), rs in Just((0..5).collect::<Vec<_>>()).prop_shuffle(),
                                        cs in Just((0..5).collect::<Vec<_>>()).prop_shuffle()) {
            let r = Permutation::new(rs).unwrap();
            let c = Permutation::new(cs).unwrap();
            let b = apply_permutations(&a, &r, &c).unwrap();
            prop_assert!((bond_energy(&a, &r, &c).unwrap() - effectiveness(&b)).abs() < 1e-12);
        }

        #[test]
        fn bea_is_deterministic(a in binary(6, 5)) {
            prop_assert_eq!(bea(&a, None).unwrap(), bea(&a, None).unwrap());
        }

        #[test]
        fn two_opt_never_worsens(raw in proptest::collection::vec(0u8..20, 49),
                                 start in Just((0..7).collect::<Vec<_>>()).prop_shuffle()) {
            let mut d = vec![0.0; 49];
            for i in 0..7 { for k in i + 1..7 { d[i * 7 + k] = raw[i * 7 + k] as f64; d[k * 7 + i] = d[i * 7 + k]; } }
            let g = PathGraph::new(&DenseMatrix::new(7, 7, d).unwrap(), Sense::Minimize).unwrap();
            let out = two_opt_path(&g, &start);
            prop_assert!(g.path_value(&out) <= g.path_value(&start));
            prop_assert!(g.path_value(&out) >= held_karp_path(&g).unwrap().1);
            let mut sorted = out.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..7).collect::<Vec<_>>());
        }
    }
}
