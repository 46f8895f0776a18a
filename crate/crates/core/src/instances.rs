//! Seeded synthetic instances: distance matrices of random points and
//! random binary matrices.
//!
//! Random numbers come from xoshiro256++ seeded through splitmix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). A uniform draw in `[0, 1)` is
//! `(next_u64 >> 11) · 2⁻⁵³`, so matrices are bit-reproducible from the
//! seed on every platform.

use std::fmt;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SeriationError};
use crate::matrix::DenseMatrix;

/// Coordinates are drawn from `[0, COORD_RANGE)`.
pub const COORD_RANGE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Absolute differences of points on a line.
    Easy,
    /// Euclidean distances among points in the square.
    Sqr,
    /// Euclidean distances from `n` points to `m` other points, `n < m`.
    Nsq,
    BinSquare,
    BinNonsquare,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Easy, Family::Sqr, Family::Nsq, Family::BinSquare, Family::BinNonsquare];

    pub fn label(self) -> &'static str {
        match self {
            Family::Easy => "easy",
            Family::Sqr => "sqr",
            Family::Nsq => "nsq",
            Family::BinSquare => "bin_square",
            Family::BinNonsquare => "bin_nonsquare",
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, Family::BinSquare | Family::BinNonsquare)
    }

    pub fn is_square(self) -> bool {
        matches!(self, Family::Easy | Family::Sqr | Family::BinSquare)
    }
}

impl FromStr for Family {
    type Err = SeriationError;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.label() == s)
            .ok_or_else(|| invalid(format!("unknown instance family '{s}'")))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// What to generate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    /// Probability of a one; binary families only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub density: Option<f64>,
    pub seed: u64,
}

impl GenSpec {
    /// Square instance of a non-binary family.
    pub fn square(family: Family, n: usize, seed: u64) -> Self {
        Self { family, n, m: n, density: None, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(invalid("instance dimensions must be positive"));
        }
        if self.family.is_square() && self.n != self.m {
            return Err(invalid(format!("{} instances are square, got {}x{}", self.family, self.n, self.m)));
        }
        if !self.family.is_square() && self.n >= self.m {
            return Err(invalid(format!("{} instances need n < m, got {}x{}", self.family, self.n, self.m)));
        }
        match (self.family.is_binary(), self.density) {
            (true, Some(d)) if (0.0..=1.0).contains(&d) => Ok(()),
            (true, Some(d)) => Err(invalid(format!("density must lie in [0, 1], got {d}"))),
            (true, None) => Err(invalid(format!("{} instances need a density", self.family))),
            (false, Some(_)) => Err(invalid(format!("{} instances take no density", self.family))),
            (false, None) => Ok(()),
        }
    }

    /// Short file-name stem such as `sqr_10x10_s3` or `bin_square_10x10_d0.5_s3`.
    pub fn stem(&self) -> String {
        match self.density {
            Some(d) => format!("{}_{}x{}_d{d}_s{}", self.family, self.n, self.m, self.seed),
            None => format!("{}_{}x{}_s{}", self.family, self.n, self.m, self.seed),
        }
    }
}

/// A generated matrix with the points it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub spec: GenSpec,
    pub matrix: DenseMatrix,
    /// Points behind the rows (one coordinate for `easy`, two otherwise);
    /// empty for binary families.
    pub row_points: Vec<Vec<f64>>,
    /// Points behind the columns; equal to `row_points` for square families.
    pub col_points: Vec<Vec<f64>>,
}

/// Uniform `[0, 1)` draws.
struct Uniform(Xoshiro256PlusPlus);

impl Uniform {
    fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn points(&mut self, count: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..count).map(|_| (0..dim).map(|_| COORD_RANGE * self.next()).collect()).collect()
    }
}

fn distance(p: &[f64], q: &[f64]) -> f64 {
    match (p, q) {
        ([x], [y]) => (x - y).abs(),
        _ => p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
    }
}

/// Distance matrix between two point sets.
pub fn distance_matrix(rows: &[Vec<f64>], cols: &[Vec<f64>]) -> Result<DenseMatrix> {
    let data = rows.iter().flat_map(|p| cols.iter().map(move |q| distance(p, q))).collect();
    DenseMatrix::new(rows.len(), cols.len(), data)
}

/// Generates the instance described by `spec`.
pub fn generate(spec: &GenSpec) -> Result<GeneratedInstance> {
    spec.validate()?;
    let mut rng = Uniform::new(spec.seed);
    let (matrix, row_points, col_points) = match spec.family {
        Family::Easy | Family::Sqr => {
            let dim = if spec.family == Family::Easy { 1 } else { 2 };
            let pts = rng.points(spec.n, dim);
            (distance_matrix(&pts, &pts)?, pts.clone(), pts)
        }
        Family::Nsq => {
            let rows = rng.points(spec.n, 2);
            let cols = rng.points(spec.m, 2);
            (distance_matrix(&rows, &cols)?, rows, cols)
        }
        Family::BinSquare | Family::BinNonsquare => {
            let d = spec.density.expect("validated");
            let data = (0..spec.n * spec.m).map(|_| if rng.next() < d { 1.0 } else { 0.0 }).collect();
            (DenseMatrix::new(spec.n, spec.m, data)?, Vec::new(), Vec::new())
        }
    };
    Ok(GeneratedInstance { spec: spec.clone(), matrix, row_points, col_points })
}

/// Generator constants written next to every instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorInfo {
    pub generator: String,
    pub seeding: String,
    pub uniform: String,
    pub coord_range: f64,
}

impl Default for GeneratorInfo {
    fn default() -> Self {
        Self {
            generator: "xoshiro256++".into(),
            seeding: "splitmix64(seed)".into(),
            uniform: "(next_u64 >> 11) * 2^-53".into(),
            coord_range: COORD_RANGE,
        }
    }
}

/// Contents of an instance's JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSidecar {
    pub spec: GenSpec,
    pub generator: GeneratorInfo,
    pub row_points: Vec<Vec<f64>>,
    pub col_points: Vec<Vec<f64>>,
}

impl From<&GeneratedInstance> for InstanceSidecar {
    fn from(inst: &GeneratedInstance) -> Self {
        Self {
            spec: inst.spec.clone(),
            generator: GeneratorInfo::default(),
            row_points: inst.row_points.clone(),
            col_points: inst.col_points.clone(),
        }
    }
}

/// Order of `points` (one coordinate each) from smallest to largest, ties
/// by index.
pub fn sorted_order(points: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));
    order
}

/// True when entries never decrease moving away from the diagonal along any
/// row or column.
pub fn is_robinson(a: &DenseMatrix) -> bool {
    let n = a.rows();
    if !a.is_square() {
        return false;
    }
    for i in 0..n {
        for j in i + 1..n {
            if j + 1 < n && a.get(i, j) > a.get(i, j + 1) {
                return false;
            }
            if i > 0 && a.get(i, j) > a.get(i - 1, j) {
                return false;
            }
        }
    }
    (0..n).all(|i| (0..n).all(|j| a.get(i, j) == a.get(j, i)))
}
