//! Exhaustive enumeration of every row and column order.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{invalid, Result, SeriationError};
use crate::matrix::{reorder_into, DenseMatrix, Permutation};
use crate::measures::Measure;

/// Largest number of `(row order, column order)` pairs enumerated.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Number of candidate reorderings: `n!·m!`, or `n!` when coordinated.
pub fn brute_force_space(n: usize, m: usize, coordinated: bool) -> f64 {
    if coordinated {
        factorial(n)
    } else {
        factorial(n) * factorial(m)
    }
}

/// Global optimum by enumerating all permutations.
///
/// Permutations are visited in lexicographic order of their position maps
/// and only strict improvements replace the incumbent, so ties resolve to the
/// lexicographically smallest `(row_perm, col_perm)`.
pub fn brute_force(
    a: &DenseMatrix,
    measure: &Measure,
    coordinated: bool,
) -> Result<(Permutation, Permutation, f64)> {
    let (n, m) = (a.rows(), a.cols());
    if coordinated && n != m {
        return Err(invalid(format!("coordinated seriation needs a square matrix, got {n}x{m}")));
    }
    let space = brute_force_space(n, m, coordinated);
    if space > BRUTE_FORCE_LIMIT {
        return Err(SeriationError::SizeGuard {
            engine: "brute",
            detail: format!("{space:.3e} reorderings exceed the limit of {BRUTE_FORCE_LIMIT:.0e}"),
        });
    }
    let sense = measure.sense();
    let row_maps: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let col_maps: Vec<Vec<usize>> = if coordinated {
        Vec::new()
    } else {
        (0..m).permutations(m).collect()
    };

    let per_row: Vec<(f64, usize)> = row_maps
        .par_iter()
        .map_init(
            || a.clone(),
            |buf, rmap| {
                if coordinated {
                    reorder_into(a, rmap, rmap, buf);
                    return (measure.evaluate(buf), 0);
                }
                let mut best = (f64::NAN, 0);
                for (ci, cmap) in col_maps.iter().enumerate() {
                    reorder_into(a, rmap, cmap, buf);
                    let v = measure.evaluate(buf);
                    if ci == 0 || sense.improves(v, best.0) {
                        best = (v, ci);
                    }
                }
                best
            },
        )
        .collect();

    let mut best = 0;
    for (ri, entry) in per_row.iter().enumerate().skip(1) {
        if sense.improves(entry.0, per_row[best].0) {
            best = ri;
        }
    }
    let (value, ci) = per_row[best];
    let rows = Permutation::new(row_maps[best].clone())?;
    let cols = if coordinated {
        rows.clone()
    } else {
        Permutation::new(col_maps[ci].clone())?
    };
    Ok((rows, cols, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::apply_permutations;

    #[test]
    fn one_by_one() {
        let a = DenseMatrix::from_rows(&[[0.7]]).unwrap();
        let (r, c, v) = brute_force(&a, &Measure::von_neumann(1).unwrap(), false).unwrap();
        assert!(r.is_identity() && c.is_identity());
        assert_eq!(v, 0.0);
    }

    #[test]
    fn two_by_two_chessboard() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let (r, c, v) = brute_force(&a, &Measure::von_neumann(1).unwrap(), false).unwrap();
        // Any reordering of a 2x2 chessboard is again a chessboard.
        assert_eq!(v, 8.0);
        assert!(r.is_identity() && c.is_identity());
    }

    #[test]
    fn reversal_is_also_optimal() {
        let a = DenseMatrix::from_rows(&[[0.1, 0.9, 0.4], [0.5, 0.2, 0.8], [0.3, 0.6, 0.0]]).unwrap();
        let measure = Measure::moore(2).unwrap();
        let (r, c, v) = brute_force(&a, &measure, false).unwrap();
        let flipped = apply_permutations(&a, &r.reversed(), &c.reversed()).unwrap();
        assert!((measure.evaluate(&flipped) - v).abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let a = DenseMatrix::zeros(7, 7).unwrap();
        let vn = Measure::von_neumann(1).unwrap();
        assert!(matches!(brute_force(&a, &vn, false), Err(SeriationError::SizeGuard { .. })));
        assert!(brute_force(&a, &vn, true).is_ok());
        let b = DenseMatrix::zeros(3, 4).unwrap();
        assert!(brute_force(&b, &vn, true).is_err());
        assert_eq!(brute_force_space(5, 5, false), 14_400.0);
    }

    #[test]
    fn maximizes_effectiveness() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]]).unwrap();
        let (r, c, v) = brute_force(&a, &Measure::Effectiveness, false).unwrap();
        assert_eq!(v, 4.0);
        let b = apply_permutations(&a, &r, &c).unwrap();
        assert_eq!(crate::measures::effectiveness(&b), 4.0);
    }
}
