//! Neighborhood shapes over matrix cells.
//!
//! Every shape is described by a set of `(row, col)` offsets; a cell's
//! neighbors are the offsets that stay inside the grid. The cell itself is
//! never its own neighbor.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, Result};

/// A neighborhood family.
#[derive(Clone, PartialEq)]
pub enum Neighborhood {
    /// All cells at Euclidean distance at most `ε`.
    Epsilon(f64),
    /// Up, down, left and right (`ε = 1`).
    VonNeumann,
    /// The eight surrounding cells (`ε = 1.5`).
    Moore,
    /// Cells at most two steps away along the same row or column.
    Cross2,
    /// Arbitrary offsets, sorted and deduplicated, never `(0, 0)`.
    Custom(Vec<(isize, isize)>),
}

impl Neighborhood {
    pub fn epsilon(eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(invalid(format!("epsilon must be positive and finite, got {eps}")));
        }
        Ok(Neighborhood::Epsilon(eps))
    }

    pub fn custom(offsets: impl IntoIterator<Item = (isize, isize)>) -> Result<Self> {
        let set: BTreeSet<_> = offsets.into_iter().collect();
        if set.contains(&(0, 0)) {
            return Err(invalid("custom neighborhood may not contain the offset (0,0)"));
        }
        if set.is_empty() {
            return Err(invalid("custom neighborhood needs at least one offset"));
        }
        Ok(Neighborhood::Custom(set.into_iter().collect()))
    }

    /// Parses `"dr,dc"` pairs separated by `;` or whitespace, e.g. `"1,0;-1,0"`.
    pub fn parse_offsets(text: &str) -> Result<Self> {
        let mut offsets = Vec::new();
        for pair in text.split(|c: char| c == ';' || c.is_whitespace()).filter(|s| !s.is_empty()) {
            let (dr, dc) = pair
                .split_once(',')
                .ok_or_else(|| invalid(format!("offset {pair:?} is not of the form dr,dc")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<isize>()
                    .map_err(|_| invalid(format!("offset component {s:?} is not an integer")))
            };
            offsets.push((parse(dr)?, parse(dc)?));
        }
        Self::custom(offsets)
    }

    /// Offsets that can land inside an `n × m` grid, sorted lexicographically.
    pub fn offsets(&self, n: usize, m: usize) -> Vec<(isize, isize)> {
        match self {
            Neighborhood::Epsilon(eps) => {
                let grid_reach = n.max(m).saturating_sub(1) as f64;
                let reach = eps.floor().min(grid_reach) as isize;
                let mut out = Vec::new();
                for dr in -reach..=reach {
                    for dc in -reach..=reach {
                        let d2 = (dr * dr + dc * dc) as u128;
                        if d2 != 0 && within_squared(d2, *eps) {
                            out.push((dr, dc));
                        }
                    }
                }
                out
            }
            Neighborhood::VonNeumann => vec![(-1, 0), (0, -1), (0, 1), (1, 0)],
            Neighborhood::Moore => vec![
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ],
            Neighborhood::Cross2 => vec![
                (-2, 0),
                (-1, 0),
                (0, -2),
                (0, -1),
                (0, 1),
                (0, 2),
                (1, 0),
                (2, 0),
            ],
            Neighborhood::Custom(o) => o.clone(),
        }
    }

    /// Neighbors of `cell` inside an `n × m` grid, sorted.
    pub fn neighbors(&self, cell: (usize, usize), n: usize, m: usize) -> Result<Vec<(usize, usize)>> {
        if cell.0 >= n || cell.1 >= m {
            return Err(invalid(format!(
                "cell ({}, {}) outside a {n}x{m} grid",
                cell.0 + 1,
                cell.1 + 1
            )));
        }
        Ok(OffsetTable::new(self, n, m).neighbors_of(cell.0, cell.1, n, m).collect())
    }

    /// True for any description of the 4-cell shape (`ε ∈ [1, √2)` included).
    pub fn is_von_neumann(&self) -> bool {
        match self {
            Neighborhood::VonNeumann => true,
            Neighborhood::Epsilon(e) => within_squared(1, *e) && !within_squared(2, *e),
            Neighborhood::Custom(o) => *o == Neighborhood::VonNeumann.offsets(1, 1),
            _ => false,
        }
    }

    /// True for any description of the 8-cell shape (`ε ∈ [√2, 2)` included).
    pub fn is_moore(&self) -> bool {
        match self {
            Neighborhood::Moore => true,
            Neighborhood::Epsilon(e) => within_squared(2, *e) && !within_squared(4, *e),
            Neighborhood::Custom(o) => *o == Neighborhood::Moore.offsets(1, 1),
            _ => false,
        }
    }

    pub fn is_cross2(&self) -> bool {
        match self {
            Neighborhood::Cross2 => true,
            Neighborhood::Custom(o) => *o == Neighborhood::Cross2.offsets(1, 1),
            _ => false,
        }
    }

    /// Short name used in reports and file metadata.
    pub fn label(&self) -> &'static str {
        match self {
            Neighborhood::Epsilon(_) => "eps",
            Neighborhood::VonNeumann => "vn",
            Neighborhood::Moore => "moore",
            Neighborhood::Cross2 => "cross2",
            Neighborhood::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for Neighborhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Neighborhood::Epsilon(e) => write!(f, "Epsilon({e})"),
            Neighborhood::Custom(o) => write!(f, "Custom({o:?})"),
            other => f.write_str(other.label()),
        }
    }
}

/// Exact test of `d2 ≤ eps²` for an integer `d2`.
///
/// `eps = mantissa · 2^exp` exactly, so `eps² = mantissa² · 2^(2·exp)` with
/// `mantissa² < 2^106`, which fits in a `u128`.
fn within_squared(d2: u128, eps: f64) -> bool {
    let bits = eps.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    };
    let m2 = (mantissa as u128) * (mantissa as u128);
    let shift = 2 * exp;
    if shift >= 0 {
        // eps is an integer here, at least 1.
        match m2.checked_shl(shift as u32) {
            Some(e2) if (m2 << shift as u32) >> shift as u32 == m2 => d2 <= e2,
            _ => true,
        }
    } else {
        let k = (-shift) as u32;
        // d2 · 2^k ≤ m2
        if k >= 128 || d2.leading_zeros() < k {
            d2 == 0
        } else {
            (d2 << k) <= m2
        }
    }
}

/// Precomputed offsets of a neighborhood for repeated cell queries.
#[derive(Debug, Clone)]
pub struct OffsetTable {
    offsets: Vec<(isize, isize)>,
}

impl OffsetTable {
    /// Offsets of `spec` that can matter on an `n × m` grid.
    pub fn new(spec: &Neighborhood, n: usize, m: usize) -> Self {
        Self { offsets: spec.offsets(n, m) }
    }

    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }

    #[inline]
    pub fn neighbors_of(
        &self,
        i: usize,
        j: usize,
        n: usize,
        m: usize,
    ) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.offsets.iter().filter_map(move |&(dr, dc)| {
            let k = i as isize + dr;
            let l = j as isize + dc;
            (k >= 0 && l >= 0 && (k as usize) < n && (l as usize) < m).then_some((k as usize, l as usize))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(spec: &Neighborhood, cell: (usize, usize), n: usize, m: usize) -> usize {
        spec.neighbors(cell, n, m).unwrap().len()
    }

    #[test]
    fn figure_counts() {
        assert_eq!(count(&Neighborhood::VonNeumann, (3, 3), 7, 7), 4);
        assert_eq!(count(&Neighborhood::Moore, (0, 0), 7, 7), 3);
        assert_eq!(count(&Neighborhood::epsilon(2.0).unwrap(), (3, 3), 7, 7), 12);
        assert_eq!(count(&Neighborhood::epsilon(2.0).unwrap(), (0, 0), 7, 7), 5);
        assert_eq!(count(&Neighborhood::Cross2, (3, 3), 7, 7), 8);
        assert_eq!(count(&Neighborhood::Cross2, (0, 0), 7, 7), 4);
    }

    #[test]
    fn cross2_offsets() {
        let got: BTreeSet<_> = Neighborhood::Cross2.offsets(9, 9).into_iter().collect();
        let want: BTreeSet<_> = [(1, 0), (-1, 0), (2, 0), (-2, 0), (0, 1), (0, -1), (0, 2), (0, -2)]
            .into_iter()
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn single_cell_has_no_neighbors() {
        for spec in [
            Neighborhood::VonNeumann,
            Neighborhood::Moore,
            Neighborhood::Cross2,
            Neighborhood::epsilon(3.0).unwrap(),
            Neighborhood::custom([(1, 1)]).unwrap(),
        ] {
            assert!(spec.neighbors((0, 0), 1, 1).unwrap().is_empty());
        }
    }

    #[test]
    fn out_of_range_cell() {
        assert!(Neighborhood::VonNeumann.neighbors((2, 0), 2, 2).is_err());
    }

    #[test]
    fn epsilon_boundaries_are_exact() {
        assert!(within_squared(1, 1.0));
        assert!(!within_squared(2, 1.0));
        assert!(within_squared(2, 1.5));
        assert!(within_squared(2, std::f64::consts::SQRT_2));
        assert!(within_squared(4, 2.0));
        assert!(!within_squared(5, 2.0));
        assert!(!within_squared(1, 0.999_999_999_999_999_9));
        assert!(within_squared(25, 5.0));
        assert!(within_squared(1 << 100, 1e300));
        assert!(!within_squared(1, 1e-300));
        assert!(!within_squared(1, f64::MIN_POSITIVE / 4.0));
    }

    #[test]
    fn epsilon_matches_named_shapes_exhaustively() {
        let e1 = Neighborhood::epsilon(1.0).unwrap();
        let e15 = Neighborhood::epsilon(1.5).unwrap();
        for n in 1..=10 {
            for m in 1..=10 {
                for i in 0..n {
                    for j in 0..m {
                        assert_eq!(
                            e1.neighbors((i, j), n, m).unwrap(),
                            Neighborhood::VonNeumann.neighbors((i, j), n, m).unwrap()
                        );
                        assert_eq!(
                            e15.neighbors((i, j), n, m).unwrap(),
                            Neighborhood::Moore.neighbors((i, j), n, m).unwrap()
                        );
                    }
                }
            }
        }
        assert!(e1.is_von_neumann() && e15.is_moore());
        assert!(!Neighborhood::epsilon(2.0).unwrap().is_moore());
        assert!(Neighborhood::epsilon(1e12).unwrap().neighbors((0, 0), 2, 3).unwrap().len() == 5);
    }

    #[test]
    fn built_in_shapes_are_symmetric_and_truncated() {
        let shapes = [
            (Neighborhood::VonNeumann, 4),
            (Neighborhood::Moore, 8),
            (Neighborhood::Cross2, 8),
            (Neighborhood::epsilon(2.0).unwrap(), 12),
        ];
        let (n, m) = (7, 8);
        for (spec, interior) in shapes {
            for i in 0..n {
                for j in 0..m {
                    let nb = spec.neighbors((i, j), n, m).unwrap();
                    assert!(!nb.contains(&(i, j)));
                    for &(k, l) in &nb {
                        assert!(spec.neighbors((k, l), n, m).unwrap().contains(&(i, j)));
                    }
                    let is_interior = i >= 2 && j >= 2 && i + 2 < n && j + 2 < m;
                    let on_border = i == 0 || j == 0 || i + 1 == n || j + 1 == m;
                    if is_interior {
                        assert_eq!(nb.len(), interior, "{spec:?} at ({i},{j})");
                    }
                    if on_border {
                        assert!(nb.len() < interior, "{spec:?} at ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn custom_parsing() {
        let spec = Neighborhood::parse_offsets("1,0; -1,0 0,2").unwrap();
        assert_eq!(spec.offsets(3, 3), vec![(-1, 0), (0, 2), (1, 0)]);
        assert!(Neighborhood::parse_offsets("0,0").is_err());
        assert!(Neighborhood::parse_offsets("1").is_err());
        assert!(Neighborhood::parse_offsets("a,b").is_err());
        assert!(Neighborhood::epsilon(0.0).is_err());
        assert!(Neighborhood::epsilon(f64::NAN).is_err());
    }
}
