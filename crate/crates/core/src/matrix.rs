//! Dense matrices, permutations and min–max normalization.
//!
//! A [`Permutation`] maps an *original* index to the *position* it occupies
//! after reordering, so `apply_permutations(a, r, c)` places row `i` of `a` at
//! row `r.position(i)` of the result.

use std::fmt;

use crate::error::{invalid, Result, SeriationError};

/// Real `rows × cols` matrix stored row-major. All entries are finite.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid(format!("matrix must be at least 1x1, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(SeriationError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "entry ({}, {}) is not finite",
                pos / cols + 1,
                pos % cols + 1
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n * m);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != m {
                return Err(SeriationError::DimensionMismatch(format!(
                    "row {} has {} entries, expected {m}",
                    i + 1,
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::new(n, m, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Row-major entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when every entry lies in `[0, 1]`.
    pub fn is_unit_range(&self) -> bool {
        self.data.iter().all(|&v| (0.0..=1.0).contains(&v))
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        DenseMatrix { rows: self.cols, cols: self.rows, data }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(SeriationError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        DenseMatrix::new(self.rows, other.cols, data)
    }

    /// Returns a copy with every entry passed through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<DenseMatrix> {
        DenseMatrix::new(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Bijection on `0..len`; `position(i)` is where original index `i` ends up.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from its index → position mapping.
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &p in &mapping {
            if p >= n || seen[p] {
                return Err(invalid(format!("{mapping:?} is not a permutation of 0..{n}")));
            }
            seen[p] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self { mapping: (0..n).collect() }
    }

    /// Builds the permutation that lists `order[k]` at position `k`.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        Ok(Self::new(order.to_vec())?.inverse())
    }

    /// Parses 1-based positions, as stored in result files.
    pub fn from_one_based(positions: &[usize]) -> Result<Self> {
        if positions.contains(&0) {
            return Err(invalid("1-based permutation contains 0"));
        }
        Self::new(positions.iter().map(|p| p - 1).collect())
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    #[inline]
    pub fn position(&self, index: usize) -> usize {
        self.mapping[index]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.mapping.iter().map(|p| p + 1).collect()
    }

    /// Original indices listed by position.
    pub fn order(&self) -> Vec<usize> {
        self.inverse().mapping
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.mapping.len()];
        for (i, &p) in self.mapping.iter().enumerate() {
            inv[p] = i;
        }
        Self { mapping: inv }
    }

    /// `i ↦ next(self(i))`: first apply `self`, then `next`.
    pub fn then(&self, next: &Permutation) -> Result<Self> {
        if self.len() != next.len() {
            return Err(SeriationError::DimensionMismatch(format!(
                "cannot compose permutations of size {} and {}",
                self.len(),
                next.len()
            )));
        }
        Ok(Self {
            mapping: self.mapping.iter().map(|&p| next.mapping[p]).collect(),
        })
    }

    /// The same ordering read back to front.
    pub fn reversed(&self) -> Self {
        let n = self.mapping.len();
        Self {
            mapping: self.mapping.iter().map(|&p| n - 1 - p).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &p)| i == p)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.mapping)
    }
}

/// Reorders rows and columns: `out[r(i)][c(j)] = a[i][j]`.
pub fn apply_permutations(
    a: &DenseMatrix,
    row_perm: &Permutation,
    col_perm: &Permutation,
) -> Result<DenseMatrix> {
    if row_perm.len() != a.rows() || col_perm.len() != a.cols() {
        return Err(SeriationError::DimensionMismatch(format!(
            "permutations of size ({}, {}) do not fit a {}x{} matrix",
            row_perm.len(),
            col_perm.len(),
            a.rows(),
            a.cols()
        )));
    }
    let m = a.cols();
    let mut data = vec![0.0; a.rows() * m];
    for i in 0..a.rows() {
        let ri = row_perm.position(i) * m;
        for (j, &v) in a.row(i).iter().enumerate() {
            data[ri + col_perm.position(j)] = v;
        }
    }
    DenseMatrix::new(a.rows(), m, data)
}

/// Writes `a` reordered by raw position maps into `out`, which must have the
/// same shape.
pub(crate) fn reorder_into(a: &DenseMatrix, row_pos: &[usize], col_pos: &[usize], out: &mut DenseMatrix) {
    let m = a.cols;
    for i in 0..a.rows {
        let ri = row_pos[i] * m;
        for (j, &v) in a.row(i).iter().enumerate() {
            out.data[ri + col_pos[j]] = v;
        }
    }
}

/// Left-multiplication matrix `P` of a row permutation: `P[σ(i)][i] = 1`.
///
/// `P · A · Q` reproduces [`apply_permutations`] with
/// `P = permutation_matrix(σ_r)` and `Q = permutation_matrix(σ_c)ᵀ`.
pub fn permutation_matrix(sigma: &Permutation) -> DenseMatrix {
    let n = sigma.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[sigma.position(i) * n + i] = 1.0;
    }
    DenseMatrix::new(n, n, data).expect("permutation matrix of a non-empty permutation")
}

/// Offset and range of the min–max transform applied by [`normalize`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormalizationInfo {
    pub a_min: f64,
    pub a_max: f64,
    /// `a_max - a_min`; zero for constant matrices.
    pub scale: f64,
}

/// Maps every entry to `(a - a_min) / (a_max - a_min)`.
///
/// Constant matrices map to all zeros with `scale = 0`. The divisor is the
/// range rather than `a_max` so the image is always `[0, 1]`.
pub fn normalize(a: &DenseMatrix) -> (DenseMatrix, NormalizationInfo) {
    let a_min = a.min();
    let a_max = a.max();
    let scale = a_max - a_min;
    let out = if scale > 0.0 {
        a.map(|v| ((v - a_min) / scale).clamp(0.0, 1.0))
    } else {
        a.map(|_| 0.0)
    }
    .expect("normalization preserves shape and finiteness");
    (out, NormalizationInfo { a_min, a_max, scale })
}

/// Stress of the original matrix from the stress `rho_tilde` of its
/// normalized copy: `scale^p · rho_tilde`.
pub fn denormalize_objective(rho_tilde: f64, info: &NormalizationInfo, p: u32) -> f64 {
    if rho_tilde == 0.0 {
        return 0.0;
    }
    info.scale.powi(p as i32) * rho_tilde
}
