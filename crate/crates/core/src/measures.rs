//! Seriation criteria evaluated on a concrete, already reordered matrix.
//!
//! These functions are the ground truth every solver is checked against.
//! Summation always runs in row-major cell order so results are reproducible
//! bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::matrix::{normalize, DenseMatrix};
use crate::neighborhoods::{Neighborhood, OffsetTable};

/// Exponent and neighborhood of a stress measure.
#[derive(Debug, Clone, PartialEq)]
pub struct StressParams {
    pub p: u32,
    pub neighborhood: Neighborhood,
}

impl StressParams {
    pub fn new(neighborhood: Neighborhood, p: u32) -> Result<Self> {
        if p == 0 {
            return Err(invalid("stress exponent p must be at least 1"));
        }
        Ok(Self { p, neighborhood })
    }

    pub fn von_neumann(p: u32) -> Result<Self> {
        Self::new(Neighborhood::VonNeumann, p)
    }

    pub fn moore(p: u32) -> Result<Self> {
        Self::new(Neighborhood::Moore, p)
    }
}

/// Whether a criterion is minimized or maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// True when `candidate` is strictly better than `incumbent`.
    #[inline]
    pub fn improves(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Sense::Minimize => candidate < incumbent,
            Sense::Maximize => candidate > incumbent,
        }
    }
}

/// A seriation criterion: neighborhood stress or the measure of effectiveness.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Stress(StressParams),
    Effectiveness,
}

impl Measure {
    pub fn von_neumann(p: u32) -> Result<Self> {
        Ok(Measure::Stress(StressParams::von_neumann(p)?))
    }

    pub fn moore(p: u32) -> Result<Self> {
        Ok(Measure::Stress(StressParams::moore(p)?))
    }

    pub fn cross2(p: u32) -> Result<Self> {
        Ok(Measure::Stress(StressParams::new(Neighborhood::Cross2, p)?))
    }

    pub fn epsilon(eps: f64, p: u32) -> Result<Self> {
        Ok(Measure::Stress(StressParams::new(Neighborhood::epsilon(eps)?, p)?))
    }

    pub fn evaluate(&self, a: &DenseMatrix) -> f64 {
        match self {
            Measure::Stress(params) => total_stress(a, params),
            Measure::Effectiveness => effectiveness(a),
        }
    }

    pub fn sense(&self) -> Sense {
        match self {
            Measure::Stress(_) => Sense::Minimize,
            Measure::Effectiveness => Sense::Maximize,
        }
    }

    pub fn stress_params(&self) -> Option<&StressParams> {
        match self {
            Measure::Stress(p) => Some(p),
            Measure::Effectiveness => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Measure::Stress(p) => p.neighborhood.label(),
            Measure::Effectiveness => "me",
        }
    }
}

#[inline]
pub(crate) fn pow_abs(d: f64, p: u32) -> f64 {
    match p {
        1 => d.abs(),
        2 => d * d,
        _ => d.abs().powi(p as i32),
    }
}

/// Stress of one cell: `Σ_{neighbors} |a_cell − a_nb|^p`.
pub fn cell_stress(a: &DenseMatrix, params: &StressParams, cell: (usize, usize)) -> Result<f64> {
    let (n, m) = (a.rows(), a.cols());
    if cell.0 >= n || cell.1 >= m {
        return Err(invalid(format!(
            "cell ({}, {}) outside a {n}x{m} matrix",
            cell.0 + 1,
            cell.1 + 1
        )));
    }
    let table = OffsetTable::new(&params.neighborhood, n, m);
    Ok(cell_stress_with(a, params.p, &table, cell.0, cell.1))
}

#[inline]
fn cell_stress_with(a: &DenseMatrix, p: u32, table: &OffsetTable, i: usize, j: usize) -> f64 {
    let v = a.get(i, j);
    table
        .neighbors_of(i, j, a.rows(), a.cols())
        .map(|(k, l)| pow_abs(v - a.get(k, l), p))
        .sum()
}

/// Sum of all cell stresses; each neighboring pair is counted from both ends.
pub fn total_stress(a: &DenseMatrix, params: &StressParams) -> f64 {
    let table = OffsetTable::new(&params.neighborhood, a.rows(), a.cols());
    let mut total = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            total += cell_stress_with(a, params.p, &table, i, j);
        }
    }
    total
}

/// Neighborhood-size-normalized mean stress, in `[0, 1]` for entries in `[0, 1]`.
///
/// Cells with no neighbors (a 1×1 matrix) contribute 0.
pub fn homogeneity(a: &DenseMatrix, params: &StressParams) -> f64 {
    if !a.is_unit_range() {
        log::warn!("homogeneity evaluated on a matrix with entries outside [0, 1]");
    }
    let (n, m) = (a.rows(), a.cols());
    let table = OffsetTable::new(&params.neighborhood, n, m);
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..m {
            let v = a.get(i, j);
            let (mut sum, mut count) = (0.0, 0usize);
            for (k, l) in table.neighbors_of(i, j, n, m) {
                sum += pow_abs(v - a.get(k, l), params.p);
                count += 1;
            }
            if count > 0 {
                total += sum / count as f64;
            }
        }
    }
    total / (n * m) as f64
}

/// Measure of effectiveness: products of horizontally and vertically adjacent
/// entries, each unordered adjacency counted once; cells outside the matrix
/// count as 0.
pub fn effectiveness(a: &DenseMatrix) -> f64 {
    let (n, m) = (a.rows(), a.cols());
    let mut total = 0.0;
    for i in 0..n {
        let row = a.row(i);
        for j in 0..m {
            if j + 1 < m {
                total += row[j] * row[j + 1];
            }
            if i + 1 < n {
                total += row[j] * a.get(i + 1, j);
            }
        }
    }
    total
}

/// The measures reported for every seriation result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub vn_p1: f64,
    pub vn_p2: f64,
    pub moore_p1: f64,
    pub moore_p2: f64,
    pub me: f64,
    /// Von Neumann, `p = 1`, on the min–max normalized matrix.
    pub homogeneity: f64,
}

impl MeasureRecord {
    pub fn evaluate(a: &DenseMatrix) -> Self {
        let vn = |p| StressParams::von_neumann(p).expect("p >= 1");
        let mo = |p| StressParams::moore(p).expect("p >= 1");
        let (unit, _) = normalize(a);
        Self {
            vn_p1: total_stress(a, &vn(1)),
            vn_p2: total_stress(a, &vn(2)),
            moore_p1: total_stress(a, &mo(1)),
            moore_p2: total_stress(a, &mo(2)),
            me: effectiveness(a),
            homogeneity: homogeneity(&unit, &vn(1)),
        }
    }
}

/// Relative improvements of a reordering over the original matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub dev_n: f64,
    pub dev_mo: f64,
    pub dev_me: f64,
    pub dev_hom: f64,
}

fn relative(gain: f64, base: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        gain / base
    }
}

/// Stress and homogeneity: `(orig − new)/orig`; ME: `(new − orig)/orig`.
/// Zero denominators give 0. Stress uses exponent `p`; homogeneity is computed
/// on min–max normalized copies, which leaves the ratio unchanged.
pub fn deviation_report(original: &DenseMatrix, reordered: &DenseMatrix, p: u32) -> Result<DeviationReport> {
    if original.rows() != reordered.rows() || original.cols() != reordered.cols() {
        return Err(crate::SeriationError::DimensionMismatch(format!(
            "original is {}x{}, reordered is {}x{}",
            original.rows(),
            original.cols(),
            reordered.rows(),
            reordered.cols()
        )));
    }
    let vn = StressParams::von_neumann(p)?;
    let mo = StressParams::moore(p)?;
    let (uo, _) = normalize(original);
    let (ur, _) = normalize(reordered);
    let (vo, vr) = (total_stress(original, &vn), total_stress(reordered, &vn));
    let (mo_o, mo_r) = (total_stress(original, &mo), total_stress(reordered, &mo));
    let (eo, er) = (effectiveness(original), effectiveness(reordered));
    let (ho, hr) = (homogeneity(&uo, &vn), homogeneity(&ur, &vn));
    Ok(DeviationReport {
        dev_n: relative(vo - vr, vo),
        dev_mo: relative(mo_o - mo_r, mo_o),
        dev_me: relative(er - eo, eo),
        dev_hom: relative(ho - hr, ho),
    })
}
