//! Edge-weighted complete graphs whose Hamiltonian paths encode row and
//! column orders, and the four-index coupling costs of the Moore neighborhood.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::matrix::DenseMatrix;
use crate::measures::{pow_abs, Sense};

/// Complete undirected graph with a symmetric weight matrix and zero diagonal.
#[derive(Clone, PartialEq)]
pub struct PathGraph {
    size: usize,
    weights: Vec<f64>,
    sense: Sense,
}

impl PathGraph {
    /// Builds a graph from a full weight matrix, checking symmetry and finiteness.
    pub fn new(weights: &DenseMatrix, sense: Sense) -> Result<Self> {
        if !weights.is_square() {
            return Err(invalid("path graph weights must be square"));
        }
        let n = weights.rows();
        for i in 0..n {
            if weights.get(i, i) != 0.0 {
                return Err(invalid(format!("nonzero diagonal weight at node {}", i + 1)));
            }
            for k in i + 1..n {
                if weights.get(i, k) != weights.get(k, i) {
                    return Err(invalid(format!("asymmetric weight between {} and {}", i + 1, k + 1)));
                }
            }
        }
        Ok(Self { size: n, weights: weights.data().to_vec(), sense })
    }

    pub(crate) fn from_fn(size: usize, sense: Sense, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let upper: Vec<Vec<f64>> = (0..size)
            .into_par_iter()
            .map(|i| (i + 1..size).map(|k| f(i, k)).collect())
            .collect();
        let mut weights = vec![0.0; size * size];
        for (i, row) in upper.iter().enumerate() {
            for (off, &w) in row.iter().enumerate() {
                let k = i + 1 + off;
                weights[i * size + k] = w;
                weights[k * size + i] = w;
            }
        }
        Self { size, weights, sense }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn sense(&self) -> Sense {
        self.sense
    }

    #[inline]
    pub fn weight(&self, i: usize, k: usize) -> f64 {
        self.weights[i * self.size + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.size..(i + 1) * self.size]
    }

    pub fn to_matrix(&self) -> DenseMatrix {
        DenseMatrix::new(self.size, self.size, self.weights.clone()).expect("finite square weights")
    }

    /// Sum of the weights of consecutive nodes along `order`.
    pub fn path_value(&self, order: &[usize]) -> f64 {
        self.stride_value(order, 1)
    }

    /// Sum of `w(order[t], order[t + step])` over all valid `t`.
    pub fn stride_value(&self, order: &[usize], step: usize) -> f64 {
        if order.len() <= step {
            return 0.0;
        }
        order.windows(step + 1).map(|w| self.weight(w[0], w[step])).sum()
    }

    /// Same edges with every weight negated and the sense flipped.
    pub fn negated(&self) -> Self {
        let sense = match self.sense {
            Sense::Minimize => Sense::Maximize,
            Sense::Maximize => Sense::Minimize,
        };
        Self {
            size: self.size,
            weights: self.weights.iter().map(|w| -w).collect(),
            sense,
        }
    }

    /// Weights oriented so that smaller is always better.
    pub(crate) fn minimizing(&self) -> Self {
        match self.sense {
            Sense::Minimize => self.clone(),
            Sense::Maximize => self.negated(),
        }
    }

    pub(crate) fn with_added(&self, extra: &[f64]) -> Self {
        debug_assert_eq!(extra.len(), self.weights.len());
        Self {
            size: self.size,
            weights: self.weights.iter().zip(extra).map(|(a, b)| a + b).collect(),
            sense: self.sense,
        }
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

impl std::fmt::Debug for PathGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PathGraph")
            .field("size", &self.size)
            .field("sense", &self.sense)
            .finish_non_exhaustive()
    }
}

fn row_distance(a: &DenseMatrix, i: usize, k: usize, p: u32) -> f64 {
    a.row(i).iter().zip(a.row(k)).map(|(x, y)| pow_abs(x - y, p)).sum()
}

fn col_distance(a: &DenseMatrix, j: usize, l: usize, p: u32) -> f64 {
    (0..a.rows()).map(|i| pow_abs(a.get(i, j) - a.get(i, l), p)).sum()
}

/// Row and column graphs whose path weights sum to the von Neumann stress.
///
/// `ω_ik = 2 Σ_j |a_ij − a_kj|^p` and `τ_jl = 2 Σ_i |a_ij − a_il|^p`.
pub fn vn_weights(a: &DenseMatrix, p: u32) -> Result<(PathGraph, PathGraph)> {
    if p == 0 {
        return Err(invalid("stress exponent p must be at least 1"));
    }
    let rows = PathGraph::from_fn(a.rows(), Sense::Minimize, |i, k| 2.0 * row_distance(a, i, k, p));
    let cols = PathGraph::from_fn(a.cols(), Sense::Minimize, |j, l| 2.0 * col_distance(a, j, l, p));
    Ok((rows, cols))
}

/// Row and column graphs whose path weights sum to the measure of effectiveness.
pub fn me_weights(a: &DenseMatrix) -> (PathGraph, PathGraph) {
    let rows = PathGraph::from_fn(a.rows(), Sense::Maximize, |i, k| {
        a.row(i).iter().zip(a.row(k)).map(|(x, y)| x * y).sum()
    });
    let cols = PathGraph::from_fn(a.cols(), Sense::Maximize, |j, l| {
        (0..a.rows()).map(|i| a.get(i, j) * a.get(i, l)).sum()
    });
    (rows, cols)
}

/// Single graph for coordinated seriation: the edge weights of both graphs added.
pub fn coordinated_merge(g1: &PathGraph, g2: &PathGraph) -> Result<PathGraph> {
    if g1.size != g2.size {
        return Err(invalid(format!("cannot merge graphs of sizes {} and {}", g1.size, g2.size)));
    }
    if g1.sense != g2.sense {
        return Err(invalid("cannot merge graphs with different senses"));
    }
    Ok(g1.with_added(&g2.weights))
}

/// Diagonal-pair costs of the Moore neighborhood:
/// `c[i][k][j][l] = |a_ij − a_kl|^p + |a_il − a_kj|^p`.
///
/// Placing rows `i, k` next to each other and columns `j, l` next to each
/// other adds `2·c[i][k][j][l]` to the total Moore stress, on top of the von
/// Neumann path weights.
#[derive(Clone)]
pub struct MooreCoupling {
    n: usize,
    m: usize,
    cost: Vec<f64>,
}

impl MooreCoupling {
    pub fn new(a: &DenseMatrix, p: u32) -> Result<Self> {
        if p == 0 {
            return Err(invalid("stress exponent p must be at least 1"));
        }
        let (n, m) = (a.rows(), a.cols());
        let cost: Vec<f64> = (0..n * n)
            .into_par_iter()
            .flat_map_iter(|ik| {
                let (i, k) = (ik / n, ik % n);
                (0..m * m).map(move |jl| {
                    let (j, l) = (jl / m, jl % m);
                    if i == k || j == l {
                        0.0
                    } else {
                        pow_abs(a.get(i, j) - a.get(k, l), p) + pow_abs(a.get(i, l) - a.get(k, j), p)
                    }
                })
            })
            .collect();
        Ok(Self { n, m, cost })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize, j: usize, l: usize) -> f64 {
        self.cost[((i * self.n + k) * self.m + j) * self.m + l]
    }

    /// `Σ_{row edges} Σ_{col edges} c`, each consecutive pair taken once.
    pub fn coupling_sum(&self, row_order: &[usize], col_order: &[usize]) -> f64 {
        let mut total = 0.0;
        for r in row_order.windows(2) {
            for c in col_order.windows(2) {
                total += self.get(r[0], r[1], c[0], c[1]);
            }
        }
        total
    }

    /// Row-graph weight increments `2 Σ_{col edges} c[i][k][·][·]` for a fixed column order.
    pub fn row_increments(&self, col_order: &[usize]) -> Vec<f64> {
        let n = self.n;
        let mut extra = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    extra[i * n + k] =
                        2.0 * col_order.windows(2).map(|c| self.get(i, k, c[0], c[1])).sum::<f64>();
                }
            }
        }
        extra
    }

    /// Column-graph weight increments `2 Σ_{row edges} c[·][·][j][l]` for a fixed row order.
    pub fn col_increments(&self, row_order: &[usize]) -> Vec<f64> {
        let m = self.m;
        let mut extra = vec![0.0; m * m];
        for j in 0..m {
            for l in 0..m {
                if j != l {
                    extra[j * m + l] =
                        2.0 * row_order.windows(2).map(|r| self.get(r[0], r[1], j, l)).sum::<f64>();
                }
            }
        }
        extra
    }
}

impl std::fmt::Debug for MooreCoupling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MooreCoupling({}x{})", self.n, self.m)
    }
}

/// Convenience wrapper around [`MooreCoupling::new`].
pub fn moore_coupling(a: &DenseMatrix, p: u32) -> Result<MooreCoupling> {
    MooreCoupling::new(a, p)
}
