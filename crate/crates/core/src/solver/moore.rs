//! Moore-neighborhood stress by alternating exact path solves.
//!
//! With the column order fixed, Moore stress is a Hamiltonian path problem on
//! the rows with weights `ω_ik + 2 Σ_{col edges (j,l)} c[i][k][j][l]`, and
//! symmetrically for columns. Alternating exact solves of the two gives a
//! monotone descent that stops at a coordinate-wise optimum. Moore stress is
//! never below von Neumann stress, so the von Neumann optimum bounds it from
//! below.

use std::time::Instant;

use crate::error::Result;
use crate::heuristics::{bea, local_search};
use crate::matrix::{DenseMatrix, Permutation};
use crate::measures::Measure;
use crate::weights::{coordinated_merge, vn_weights, MooreCoupling, PathGraph};

use super::{path_engine, solve_path, SeriationResult, SolveLimits, Status};

/// Upper limit on row+column passes.
pub const MAX_PASSES: usize = 100;

#[inline]
fn strictly_better(candidate: f64, incumbent: f64) -> bool {
    candidate < incumbent - 1e-12 * incumbent.abs().max(1.0)
}

struct MooreObjective<'a> {
    rows: &'a PathGraph,
    cols: &'a PathGraph,
    coupling: &'a MooreCoupling,
}

impl MooreObjective<'_> {
    fn value(&self, ro: &[usize], co: &[usize]) -> f64 {
        self.rows.path_value(ro) + self.cols.path_value(co) + 2.0 * self.coupling.coupling_sum(ro, co)
    }
}

/// Alternating (or, when coordinated, local-search) Moore seriation.
///
/// Starts from the best of the identity, the von Neumann optimum and the BEA
/// orders.
pub fn solve_moore_alternating(
    a: &DenseMatrix,
    p: u32,
    coordinated: bool,
    limits: &SolveLimits,
    started: Instant,
) -> Result<SeriationResult> {
    let measure = Measure::moore(p)?;
    let (rows, cols) = vn_weights(a, p)?;
    let coupling = MooreCoupling::new(a, p)?;
    let obj = MooreObjective { rows: &rows, cols: &cols, coupling: &coupling };
    let (bea_r, bea_c) = bea(a, None)?;
    let identity_r: Vec<usize> = (0..a.rows()).collect();
    let identity_c: Vec<usize> = (0..a.cols()).collect();

    let (row_order, col_order, bound) = if coordinated {
        let merged = coordinated_merge(&rows, &cols)?;
        let vn = solve_path(&merged, path_engine(merged.size()), &bea_r.order(), limits)?;
        let starts = [identity_r.clone(), vn.order.clone(), bea_r.order()];
        let start = pick_start(starts.iter().map(|o| (o.clone(), o.clone())), &obj);
        let order = local_search(start.0, |o| obj.value(o, o));
        (order.clone(), order, vn.bound)
    } else {
        let vn_r = solve_path(&rows, path_engine(rows.size()), &bea_r.order(), limits)?;
        let vn_c = solve_path(&cols, path_engine(cols.size()), &bea_c.order(), limits)?;
        let starts = [
            (identity_r, identity_c),
            (vn_r.order.clone(), vn_c.order.clone()),
            (bea_r.order(), bea_c.order()),
        ];
        let (mut ro, mut co) = pick_start(starts.into_iter(), &obj);
        let mut value = obj.value(&ro, &co);
        for pass in 0..MAX_PASSES {
            let mut improved = false;
            let gr = rows.with_added(&coupling.row_increments(&co));
            let cand = solve_path(&gr, path_engine(gr.size()), &ro, limits)?.order;
            let v = obj.value(&cand, &co);
            if strictly_better(v, value) {
                ro = cand;
                value = v;
                improved = true;
            }
            let gc = cols.with_added(&coupling.col_increments(&ro));
            let cand = solve_path(&gc, path_engine(gc.size()), &co, limits)?.order;
            let v = obj.value(&ro, &cand);
            if strictly_better(v, value) {
                co = cand;
                value = v;
                improved = true;
            }
            log::debug!("moore alternating pass {pass}: {value}");
            if !improved {
                break;
            }
        }
        (ro, co, vn_r.bound + vn_c.bound)
    };
    let claimed = obj.value(&row_order, &col_order);
    SeriationResult::assemble(
        a,
        &measure,
        Permutation::from_order(&row_order)?,
        Permutation::from_order(&col_order)?,
        Some(claimed),
        Some(bound),
        Status::FeasibleWithGap(f64::NAN),
        "alternating",
        started,
    )
}

fn pick_start(
    candidates: impl Iterator<Item = (Vec<usize>, Vec<usize>)>,
    obj: &MooreObjective<'_>,
) -> (Vec<usize>, Vec<usize>) {
    let mut best: Option<(f64, (Vec<usize>, Vec<usize>))> = None;
    for (ro, co) in candidates {
        let v = obj.value(&ro, &co);
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, (ro, co)));
        }
    }
    best.expect("at least one start").1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::apply_permutations;
    use crate::measures::{total_stress, StressParams};
    use crate::solver::brute_force;
    use proptest::prelude::*;

    fn matrix(n: usize, m: usize) -> impl Strategy<Value = DenseMatrix> {
        proptest::collection::vec(0u8..=10, n * m)
            .prop_map(move |d| DenseMatrix::new(n, m, d.into_iter().map(|x| x as f64 / 10.0).collect()).unwrap())
    }

    #[test]
    fn constant_matrix_is_zero() {
        let a = DenseMatrix::filled(5, 4, 0.3).unwrap();
        let r = solve_moore_alternating(&a, 1, false, &SolveLimits::none(), Instant::now()).unwrap();
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.status, Status::Optimal);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bounded_by_exact_and_starts(a in matrix(4, 4), p in 1u32..=2, coordinated in any::<bool>()) {
            let measure = Measure::moore(p).unwrap();
            let (_, _, exact) = brute_force(&a, &measure, coordinated).unwrap();
            let r = solve_moore_alternating(&a, p, coordinated, &SolveLimits::none(), Instant::now()).unwrap();
            prop_assert!(r.objective >= exact - 1e-9);
            prop_assert!(r.bound <= exact + 1e-9);
            let identity = total_stress(&a, &StressParams::moore(p).unwrap());
            prop_assert!(r.objective <= identity + 1e-9);
            let b = apply_permutations(&a, &r.row_perm, &r.col_perm).unwrap();
            prop_assert!((measure.evaluate(&b) - r.objective).abs() < 1e-12);
        }
    }
}
