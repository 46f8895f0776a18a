//! Position assignment models: binary `x`/`y` assignment of rows and columns
//! to positions, with the cell entries linearized either through products
//! `z = x·y` or through entry variables `s` with big-M constraints.

use std::collections::BTreeMap;

use crate::error::{Result, SeriationError};
use crate::matrix::{DenseMatrix, Permutation};
use crate::measures::{Measure, Sense, StressParams};
use crate::neighborhoods::OffsetTable;

use super::model::{MilpModel, ModelContext, ModelFamily, Relation, VarId};
use super::Formulation;

/// How the bilinear cell entries are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linearization {
    /// Product variables `z_ijkl = x_ik · y_jl`.
    L1,
    /// Entry variables `s_kl` with big-M constraints and valid inequalities.
    L2,
}

/// Largest row count for which symmetry breaking uses powers of two.
pub const POWER_SYMMETRY_MAX: usize = 30;

type Cell = (usize, usize);

/// Unordered neighbor pairs `(c, d)` with `c < d` in row-major order, and
/// for each cell the pairs it is charged for.
pub(crate) struct PairIndex {
    pub pairs: Vec<(Cell, Cell)>,
    pub charged: Vec<Vec<usize>>,
}

impl PairIndex {
    pub(crate) fn new(params: &StressParams, n: usize, m: usize) -> Self {
        let table = OffsetTable::new(&params.neighborhood, n, m);
        let mut slot: BTreeMap<(Cell, Cell), usize> = BTreeMap::new();
        for k in 0..n {
            for l in 0..m {
                for d in table.neighbors_of(k, l, n, m) {
                    let key = if (k, l) < d { ((k, l), d) } else { (d, (k, l)) };
                    let next = slot.len();
                    slot.entry(key).or_insert(next);
                }
            }
        }
        // Renumber in sorted pair order so variable order is canonical.
        let pairs: Vec<(Cell, Cell)> = slot.keys().copied().collect();
        let pos: BTreeMap<(Cell, Cell), usize> = pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut charged = vec![Vec::new(); n * m];
        for k in 0..n {
            for l in 0..m {
                for d in table.neighbors_of(k, l, n, m) {
                    let key = if (k, l) < d { ((k, l), d) } else { (d, (k, l)) };
                    charged[k * m + l].push(pos[&key]);
                }
            }
        }
        Self { pairs, charged }
    }
}

fn pair_name(prefix: &str, (c, d): (Cell, Cell)) -> String {
    format!("{prefix}_{}_{}_{}_{}", c.0 + 1, c.1 + 1, d.0 + 1, d.1 + 1)
}

/// True when reversing the row order alone leaves total stress unchanged
/// for every matrix, i.e. the ordered offsets are symmetric under
/// `(dr, dc) ↦ (−dr, dc)` up to orientation.
fn row_reversal_invariant(params: &StressParams, n: usize, m: usize) -> bool {
    let offsets = params.neighborhood.offsets(n, m);
    let set: std::collections::BTreeSet<(isize, isize)> = offsets.iter().copied().collect();
    let mult = |d: (isize, isize)| set.contains(&d) as u8 + set.contains(&(-d.0, -d.1)) as u8;
    offsets.iter().all(|&(dr, dc)| mult((dr, dc)) == mult((-dr, dc)))
}

/// Builds the position assignment model of stress seriation on a matrix with
/// entries in `[0, 1]`.
///
/// Any neighborhood is supported. `p = 1` gives a pure MILP; `p = 2` adds
/// quadratic constraints `w ≥ v²` (resp. `ρ ≥ Σ ν²`).
pub fn build_pam(
    a: &DenseMatrix,
    params: &StressParams,
    linearization: Linearization,
    coordinated: bool,
    symmetry_breaking: bool,
) -> Result<MilpModel> {
    if !a.is_unit_range() {
        return Err(SeriationError::Precondition(
            "position assignment models need entries in [0, 1]; normalize first".into(),
        ));
    }
    if params.p > 2 {
        return Err(SeriationError::Unsupported(format!("models support p in {{1, 2}}, got {}", params.p)));
    }
    let (n, m) = (a.rows(), a.cols());
    if coordinated && n != m {
        return Err(crate::error::invalid(format!("coordinated seriation needs a square matrix, got {n}x{m}")));
    }
    let formulation = match linearization {
        Linearization::L1 => Formulation::PamL1,
        Linearization::L2 => Formulation::PamL2,
    };
    let mut model = MilpModel::new(format!("{}_{}", formulation.label().replace('-', "_"), params.neighborhood.label()), Sense::Minimize);

    let mut x = vec![VarId(0); n * n];
    for i in 0..n {
        for k in 0..n {
            x[i * n + k] = model.binary(format!("x_{}_{}", i + 1, k + 1))?;
        }
    }
    let y: Vec<VarId> = if coordinated {
        x.clone()
    } else {
        let mut y = vec![VarId(0); m * m];
        for j in 0..m {
            for l in 0..m {
                y[j * m + l] = model.binary(format!("y_{}_{}", j + 1, l + 1))?;
            }
        }
        y
    };
    assignment(&mut model, &x, n, "r")?;
    if !coordinated {
        assignment(&mut model, &y, m, "c")?;
    }

    // Each cell entry as a linear expression.
    let mut entry: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); n * m];
    match linearization {
        Linearization::L1 => {
            for i in 0..n {
                for j in 0..m {
                    for k in 0..n {
                        for l in 0..m {
                            let tag = format!("{}_{}_{}_{}", i + 1, j + 1, k + 1, l + 1);
                            let z = model.continuous(format!("z_{tag}"), 0.0, 1.0)?;
                            let (xi, yj) = (x[i * n + k], y[j * m + l]);
                            model.add_constraint(format!("zl_{tag}"), [(z, 1.0), (xi, -1.0), (yj, -1.0)], Relation::Ge, -1.0)?;
                            model.add_constraint(format!("zx_{tag}"), [(z, 1.0), (xi, -1.0)], Relation::Le, 0.0)?;
                            model.add_constraint(format!("zy_{tag}"), [(z, 1.0), (yj, -1.0)], Relation::Le, 0.0)?;
                            entry[k * m + l].push((z, a.get(i, j)));
                        }
                    }
                }
            }
        }
        Linearization::L2 => {
            let mut s = vec![VarId(0); n * m];
            for k in 0..n {
                for l in 0..m {
                    s[k * m + l] = model.continuous(format!("s_{}_{}", k + 1, l + 1), 0.0, 1.0)?;
                    entry[k * m + l] = vec![(s[k * m + l], 1.0)];
                }
            }
            for i in 0..n {
                for k in 0..n {
                    for l in 0..m {
                        let tag = format!("{}_{}_{}", i + 1, k + 1, l + 1);
                        let row_at_l = (0..m).map(|j| (y[j * m + l], -a.get(i, j)));
                        let base = [(s[k * m + l], 1.0), (x[i * n + k], -1.0)];
                        model.add_constraint(format!("sl_{tag}"), base.into_iter().chain(row_at_l.clone()), Relation::Ge, -1.0)?;
                        let base = [(s[k * m + l], 1.0), (x[i * n + k], 1.0)];
                        model.add_constraint(format!("su_{tag}"), base.into_iter().chain(row_at_l), Relation::Le, 1.0)?;
                    }
                }
            }
            for k in 0..n {
                let sums = (0..n).map(|i| (x[i * n + k], -a.row(i).iter().sum::<f64>()));
                let cells = (0..m).map(|l| (s[k * m + l], 1.0));
                model.add_constraint(format!("vr_{}", k + 1), cells.chain(sums), Relation::Eq, 0.0)?;
            }
            for l in 0..m {
                let sums = (0..m).map(|j| (y[j * m + l], -(0..n).map(|i| a.get(i, j)).sum::<f64>()));
                let cells = (0..n).map(|k| (s[k * m + l], 1.0));
                model.add_constraint(format!("vc_{}", l + 1), cells.chain(sums), Relation::Eq, 0.0)?;
            }
            for j in 0..m {
                for k in 0..n {
                    for l in 0..m {
                        let tag = format!("{}_{}_{}", j + 1, k + 1, l + 1);
                        let col_at_k = (0..n).map(|i| (x[i * n + k], -a.get(i, j)));
                        let base = [(s[k * m + l], 1.0), (y[j * m + l], -1.0)];
                        model.add_constraint(format!("sly_{tag}"), base.into_iter().chain(col_at_k.clone()), Relation::Ge, -1.0)?;
                        let base = [(s[k * m + l], 1.0), (y[j * m + l], 1.0)];
                        model.add_constraint(format!("suy_{tag}"), base.into_iter().chain(col_at_k), Relation::Le, 1.0)?;
                    }
                }
            }
        }
    }

    let (dprefix, pprefix, cprefix) = match linearization {
        Linearization::L1 => ("v", "w", "theta"),
        Linearization::L2 => ("nu", "w", "rho"),
    };
    let index = PairIndex::new(params, n, m);
    let mut charge_var = Vec::with_capacity(index.pairs.len());
    for &pair in &index.pairs {
        let (c, d) = pair;
        let diff = model.continuous(pair_name(dprefix, pair), 0.0, 1.0)?;
        let ec = &entry[c.0 * m + c.1];
        let ed = &entry[d.0 * m + d.1];
        let pos = ec.iter().copied().chain(ed.iter().map(|&(v, k)| (v, -k)));
        let neg = ed.iter().copied().chain(ec.iter().map(|&(v, k)| (v, -k)));
        model.add_constraint(pair_name(&format!("{dprefix}a"), pair), [(diff, 1.0)].into_iter().chain(pos.map(|(v, k)| (v, -k))), Relation::Ge, 0.0)?;
        model.add_constraint(pair_name(&format!("{dprefix}b"), pair), [(diff, 1.0)].into_iter().chain(neg.map(|(v, k)| (v, -k))), Relation::Ge, 0.0)?;
        let charged = if params.p == 2 && linearization == Linearization::L1 {
            let w = model.continuous(pair_name(pprefix, pair), 0.0, 1.0)?;
            model.add_quadratic_constraint(pair_name("wq", pair), [(w, 1.0)], vec![(diff, diff, -1.0)], Relation::Ge, 0.0)?;
            w
        } else {
            diff
        };
        charge_var.push(charged);
    }
    let mut objective = Vec::with_capacity(n * m);
    for k in 0..n {
        for l in 0..m {
            let cell = k * m + l;
            let tag = format!("{}_{}", k + 1, l + 1);
            let ub = index.charged[cell].len() as f64;
            let theta = model.continuous(format!("{cprefix}_{tag}"), 0.0, ub.max(0.0))?;
            let terms = index.charged[cell].iter().map(|&p| (charge_var[p], -1.0));
            if params.p == 2 && linearization == Linearization::L2 {
                let quad = index.charged[cell].iter().map(|&p| (charge_var[p], charge_var[p], -1.0)).collect();
                model.add_quadratic_constraint(format!("rq_{tag}"), [(theta, 1.0)], quad, Relation::Ge, 0.0)?;
            } else {
                model.add_constraint(format!("{cprefix}c_{tag}"), [(theta, 1.0)].into_iter().chain(terms), Relation::Ge, 0.0)?;
            }
            objective.push((theta, 1.0));
        }
    }
    model.set_objective(objective)?;

    if symmetry_breaking && n >= 2 {
        if coordinated || row_reversal_invariant(params, n, m) {
            add_symmetry_breaking(&mut model, &x, n)?;
        } else {
            log::warn!("symmetry breaking skipped: the neighborhood is not invariant under row reversal");
        }
    }

    model.family = ModelFamily::Pam { n, m, coordinated };
    model.context = Some(ModelContext {
        matrix: a.clone(),
        measure: Measure::Stress(params.clone()),
        normalization: None,
        formulation,
    });
    Ok(model)
}

fn assignment(model: &mut MilpModel, v: &[VarId], size: usize, axis: &str) -> Result<()> {
    for k in 0..size {
        let terms = (0..size).map(|i| (v[i * size + k], 1.0));
        model.add_constraint(format!("{axis}pos_{}", k + 1), terms, Relation::Eq, 1.0)?;
    }
    for i in 0..size {
        let terms = (0..size).map(|k| (v[i * size + k], 1.0));
        model.add_constraint(format!("{axis}asg_{}", i + 1), terms, Relation::Eq, 1.0)?;
    }
    Ok(())
}

/// Row 1 goes to a smaller position than row 2.
fn add_symmetry_breaking(model: &mut MilpModel, x: &[VarId], n: usize) -> Result<()> {
    if n <= POWER_SYMMETRY_MAX {
        let terms = (0..n).flat_map(|k| {
            let c = 2f64.powi(k as i32 + 1);
            [(x[k], c), (x[n + k], -c)]
        });
        model.add_constraint("sym", terms, Relation::Le, 0.0)
    } else {
        for t in 0..n - 1 {
            let terms = (0..=t).flat_map(|k| [(x[n + k], 1.0), (x[k], -1.0)]);
            model.add_constraint(format!("sym_{}", t + 1), terms, Relation::Le, 0.0)?;
        }
        Ok(())
    }
}

/// Feasible assignment of every PAM variable that realizes the given
/// permutations, with auxiliary variables at their smallest feasible values.
pub(crate) fn witness(model: &MilpModel, rows: &Permutation, cols: &Permutation) -> Result<Vec<f64>> {
    let ModelFamily::Pam { n, m, coordinated } = model.family else {
        return Err(SeriationError::Unsupported("not a position assignment model".into()));
    };
    let ctx = model.context.as_ref().expect("PAM models carry their context");
    let params = ctx.measure.stress_params().expect("PAM models are stress models");
    let a = &ctx.matrix;
    let mut values = vec![0.0; model.num_vars()];
    let mut set = |name: String, v: f64| {
        if let Some(id) = model.var(&name) {
            values[id.0] = v;
        }
    };
    for i in 0..n {
        set(format!("x_{}_{}", i + 1, rows.position(i) + 1), 1.0);
    }
    if !coordinated {
        for j in 0..m {
            set(format!("y_{}_{}", j + 1, cols.position(j) + 1), 1.0);
        }
    }
    let b = crate::matrix::apply_permutations(a, rows, cols)?;
    for i in 0..n {
        for j in 0..m {
            let (k, l) = (rows.position(i), cols.position(j));
            set(format!("z_{}_{}_{}_{}", i + 1, j + 1, k + 1, l + 1), 1.0);
        }
    }
    for k in 0..n {
        for l in 0..m {
            set(format!("s_{}_{}", k + 1, l + 1), b.get(k, l));
        }
    }
    let index = PairIndex::new(params, n, m);
    let mut charge = Vec::with_capacity(index.pairs.len());
    for &pair in &index.pairs {
        let (c, d) = pair;
        let diff = (b.get(c.0, c.1) - b.get(d.0, d.1)).abs();
        set(pair_name("v", pair), diff);
        set(pair_name("nu", pair), diff);
        set(pair_name("w", pair), diff * diff);
        charge.push(if params.p == 2 { diff * diff } else { diff });
    }
    for k in 0..n {
        for l in 0..m {
            let total: f64 = index.charged[k * m + l].iter().map(|&p| charge[p]).sum();
            set(format!("theta_{}_{}", k + 1, l + 1), total);
            set(format!("rho_{}_{}", k + 1, l + 1), total);
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::VarKind;
    use crate::neighborhoods::Neighborhood;

    fn unit(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn l1_counts_on_2x2() {
        let a = unit(&[&[0.0, 1.0], &[0.5, 0.25]]);
        let model = build_pam(&a, &StressParams::von_neumann(1).unwrap(), Linearization::L1, false, false).unwrap();
        assert_eq!(model.count_kind(VarKind::Binary), 8);
        assert_eq!(model.count_prefix("z"), 16);
        assert_eq!(model.count_prefix("x"), 4);
        assert_eq!(model.count_prefix("y"), 4);
        assert!(!model.has_constraint("sym"));
    }

    #[test]
    fn coordinated_has_no_y() {
        let a = unit(&[&[0.0, 1.0, 0.2], &[1.0, 0.0, 0.3], &[0.2, 0.3, 0.0]]);
        let model = build_pam(&a, &StressParams::von_neumann(1).unwrap(), Linearization::L2, true, true).unwrap();
        assert_eq!(model.count_prefix("x"), 9);
        assert_eq!(model.count_prefix("y"), 0);
        assert_eq!(model.count_kind(VarKind::Binary), 9);
        assert!(model.has_constraint("sym"));
    }

    #[test]
    fn rejects_unnormalized_and_large_p() {
        let a = unit(&[&[0.0, 2.0]]);
        let vn = StressParams::von_neumann(1).unwrap();
        assert!(matches!(build_pam(&a, &vn, Linearization::L1, false, false), Err(SeriationError::Precondition(_))));
        let b = unit(&[&[0.0, 1.0]]);
        let p3 = StressParams::von_neumann(3).unwrap();
        assert!(matches!(build_pam(&b, &p3, Linearization::L1, false, false), Err(SeriationError::Unsupported(_))));
    }

    #[test]
    fn symmetry_breaking_forms() {
        let a = DenseMatrix::zeros(3, 2).unwrap();
        let model = build_pam(&a, &StressParams::von_neumann(1).unwrap(), Linearization::L2, false, true).unwrap();
        let sym = model.linear.iter().find(|c| c.name == "sym").unwrap();
        let coefs: Vec<f64> = sym.terms.iter().map(|t| t.1).collect();
        assert_eq!(coefs, vec![2.0, -2.0, 4.0, -4.0, 8.0, -8.0]);
        let mut model = MilpModel::new("t", Sense::Minimize);
        let x: Vec<VarId> = (0..40 * 40).map(|t| model.binary(format!("x{t}")).unwrap()).collect();
        add_symmetry_breaking(&mut model, &x, 40).unwrap();
        assert_eq!(model.linear.len(), 39);
    }

    #[test]
    fn reflection_check() {
        let diag = StressParams::new(Neighborhood::custom([(1, 1)]).unwrap(), 1).unwrap();
        assert!(!row_reversal_invariant(&diag, 4, 4));
        let both = StressParams::new(Neighborhood::custom([(1, 1), (1, -1)]).unwrap(), 1).unwrap();
        assert!(row_reversal_invariant(&both, 4, 4));
        assert!(row_reversal_invariant(&StressParams::moore(1).unwrap(), 4, 4));
        assert!(row_reversal_invariant(&StressParams::new(Neighborhood::Cross2, 2).unwrap(), 5, 5));
    }
}
