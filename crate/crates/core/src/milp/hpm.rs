//! Hamiltonian path models: one open path per axis, encoded by arc
//! variables `z`, a last-node indicator `t` and single-commodity flows `g`
//! that rule out detached cycles.

use crate::error::{invalid, Result, SeriationError};
use crate::matrix::{DenseMatrix, Permutation};
use crate::measures::Measure;
use crate::weights::{coordinated_merge, me_weights, vn_weights, MooreCoupling, PathGraph};

use super::model::{MilpModel, ModelContext, ModelFamily, Relation, VarId, VarKind};
use super::Formulation;

/// The path variables of one axis.
#[derive(Debug, Clone)]
pub(crate) struct AxisVars {
    pub size: usize,
    pub suffix: &'static str,
    /// `z[i * size + k]`, absent on the diagonal.
    pub z: Vec<Option<VarId>>,
    pub t: Vec<VarId>,
    pub g: Vec<Option<VarId>>,
}

impl AxisVars {
    pub fn arc(&self, i: usize, k: usize) -> Option<VarId> {
        self.z[i * self.size + k]
    }

    fn arcs(&self) -> impl Iterator<Item = (usize, usize, VarId)> + '_ {
        (0..self.size * self.size).filter_map(move |x| self.z[x].map(|v| (x / self.size, x % self.size, v)))
    }
}

fn add_axis(model: &mut MilpModel, r: usize, suffix: &'static str) -> Result<AxisVars> {
    let mut z = vec![None; r * r];
    let mut g = vec![None; r * r];
    for i in 0..r {
        for k in 0..r {
            if i != k {
                z[i * r + k] = Some(model.binary(format!("z{suffix}_{}_{}", i + 1, k + 1))?);
            }
        }
    }
    let t: Vec<VarId> = (0..r).map(|i| model.binary(format!("t{suffix}_{}", i + 1))).collect::<Result<_>>()?;
    for i in 0..r {
        for k in 0..r {
            if i != k {
                let name = format!("g{suffix}_{}_{}", i + 1, k + 1);
                g[i * r + k] = Some(model.add_var(name, 0.0, (r - 1) as f64, VarKind::Integer)?);
            }
        }
    }
    let axis = AxisVars { size: r, suffix, z, t, g };
    for i in 0..r {
        let terms = (0..r).filter_map(|k| axis.arc(i, k)).map(|v| (v, 1.0)).chain([(axis.t[i], 1.0)]);
        model.add_constraint(format!("out{suffix}_{}", i + 1), terms, Relation::Eq, 1.0)?;
    }
    model.add_constraint(format!("last{suffix}"), axis.t.iter().map(|&v| (v, 1.0)), Relation::Eq, 1.0)?;
    for k in 0..r {
        let terms = (0..r).filter_map(|i| axis.arc(i, k)).map(|v| (v, 1.0));
        model.add_constraint(format!("in{suffix}_{}", k + 1), terms, Relation::Le, 1.0)?;
    }
    // Flow leaves every node with one unit more than it receives; the last
    // node is credited r units.
    for v in 0..r {
        let out = (0..r).filter_map(|s| axis.g[v * r + s]).map(|x| (x, 1.0));
        let inc = (0..r).filter_map(|s| axis.g[s * r + v]).map(|x| (x, -1.0));
        let terms = out.chain(inc).chain([(axis.t[v], r as f64)]);
        model.add_constraint(format!("flow{suffix}_{}", v + 1), terms, Relation::Ge, 1.0)?;
    }
    for (i, k, zv) in axis.arcs().collect::<Vec<_>>() {
        let gv = axis.g[i * r + k].expect("flow variable for every arc");
        let tag = format!("{}_{}", i + 1, k + 1);
        model.add_constraint(format!("gu{suffix}_{tag}"), [(gv, 1.0), (zv, -((r - 1) as f64))], Relation::Le, 0.0)?;
        model.add_constraint(format!("gl{suffix}_{tag}"), [(gv, 1.0), (zv, -1.0)], Relation::Ge, 0.0)?;
    }
    Ok(axis)
}

fn arc_objective(axis: &AxisVars, w: &PathGraph) -> Vec<(VarId, f64)> {
    axis.arcs().map(|(i, k, v)| (v, w.weight(i, k))).collect()
}

struct Skeleton {
    model: MilpModel,
    axes: Vec<AxisVars>,
    graphs: Vec<PathGraph>,
}

fn skeleton(a: &DenseMatrix, rows: PathGraph, cols: PathGraph, coordinated: bool, name: &str) -> Result<Skeleton> {
    let sense = rows.sense();
    let mut model = MilpModel::new(name, sense);
    if coordinated {
        if !a.is_square() {
            return Err(invalid(format!("coordinated seriation needs a square matrix, got {}x{}", a.rows(), a.cols())));
        }
        let merged = coordinated_merge(&rows, &cols)?;
        let axis = add_axis(&mut model, a.rows(), "")?;
        Ok(Skeleton { model, axes: vec![axis], graphs: vec![merged] })
    } else {
        let r = add_axis(&mut model, a.rows(), "N")?;
        let c = add_axis(&mut model, a.cols(), "M")?;
        Ok(Skeleton { model, axes: vec![r, c], graphs: vec![rows, cols] })
    }
}

fn finish(mut s: Skeleton, extra: Vec<(VarId, f64)>, a: &DenseMatrix, measure: Measure, formulation: Formulation) -> Result<MilpModel> {
    let mut obj: Vec<(VarId, f64)> = s.axes.iter().zip(&s.graphs).flat_map(|(ax, g)| arc_objective(ax, g)).collect();
    obj.extend(extra);
    s.model.set_objective(obj)?;
    let coordinated = s.axes.len() == 1;
    s.model.family = ModelFamily::Hpm { n: a.rows(), m: a.cols(), coordinated };
    s.model.context = Some(ModelContext { matrix: a.clone(), measure, normalization: None, formulation });
    Ok(s.model)
}

/// Hamiltonian path model of von Neumann stress (minimized) or measure of
/// effectiveness (maximized).
pub fn build_hpm(a: &DenseMatrix, measure: &Measure, coordinated: bool) -> Result<MilpModel> {
    let (rows, cols, name) = match measure {
        Measure::Effectiveness => {
            let (r, c) = me_weights(a);
            (r, c, "hpm_me")
        }
        Measure::Stress(s) if s.neighborhood.is_von_neumann() => {
            let (r, c) = vn_weights(a, s.p)?;
            (r, c, "hpm_vn")
        }
        Measure::Stress(_) => {
            return Err(SeriationError::Unsupported(
                "the plain path model covers von Neumann stress and ME; use hpm-moore or hpm-cross2".into(),
            ))
        }
    };
    let s = skeleton(a, rows, cols, coordinated, name)?;
    finish(s, Vec::new(), a, measure.clone(), Formulation::Hpm)
}

/// Path model of Moore stress: the von Neumann model plus one product
/// variable `h` per pair of row arc and column arc, charged twice the
/// diagonal coupling of the two edges.
pub fn build_hpm_moore(a: &DenseMatrix, p: u32, coordinated: bool) -> Result<MilpModel> {
    let (rows, cols) = vn_weights(a, p)?;
    let coupling = MooreCoupling::new(a, p)?;
    let mut s = skeleton(a, rows, cols, coordinated, "hpm_moore")?;
    let (ra, ca) = if coordinated { (0, 0) } else { (0, 1) };
    let row_arcs: Vec<_> = s.axes[ra].arcs().collect();
    let col_arcs: Vec<_> = s.axes[ca].arcs().collect();
    let mut extra = Vec::with_capacity(row_arcs.len() * col_arcs.len());
    for &(i, k, zr) in &row_arcs {
        for &(j, l, zc) in &col_arcs {
            let tag = format!("{}_{}_{}_{}", i + 1, k + 1, j + 1, l + 1);
            let h = s.model.binary(format!("h_{tag}"))?;
            s.model.add_constraint(format!("hl_{tag}"), [(h, 1.0), (zr, -1.0), (zc, -1.0)], Relation::Ge, -1.0)?;
            s.model.add_constraint(format!("hn_{tag}"), [(h, 1.0), (zr, -1.0)], Relation::Le, 0.0)?;
            s.model.add_constraint(format!("hm_{tag}"), [(h, 1.0), (zc, -1.0)], Relation::Le, 0.0)?;
            extra.push((h, 2.0 * coupling.get(i, k, j, l)));
        }
    }
    finish(s, extra, a, Measure::moore(p)?, Formulation::HpmMoore)
}

/// Path model of cross2 stress: the von Neumann model plus, per node `r`, a
/// variable `u_r` that pays the weight from `r` to its successor's successor.
pub fn build_hpm_cross2(a: &DenseMatrix, p: u32, coordinated: bool) -> Result<MilpModel> {
    let (rows, cols) = vn_weights(a, p)?;
    let mut s = skeleton(a, rows, cols, coordinated, "hpm_cross2")?;
    let mut extra = Vec::new();
    for (axis, graph) in s.axes.clone().iter().zip(s.graphs.clone()) {
        let size = axis.size;
        for r in 0..size {
            let delta = graph.row(r).iter().copied().fold(0.0, f64::max);
            let u = s.model.continuous(format!("u{}_{}", axis.suffix, r + 1), 0.0, delta)?;
            extra.push((u, 1.0));
            for sv in 0..size {
                let Some(zrs) = axis.arc(r, sv) else { continue };
                let two_step = (0..size).filter_map(|t| axis.arc(sv, t).map(|z| (z, -graph.weight(r, t))));
                let terms = [(u, 1.0), (zrs, -delta)].into_iter().chain(two_step);
                let name = format!("uc{}_{}_{}", axis.suffix, r + 1, sv + 1);
                s.model.add_constraint(name, terms, Relation::Ge, -delta)?;
            }
        }
    }
    finish(s, extra, a, Measure::cross2(p)?, Formulation::HpmCross2)
}

/// Consecutive arcs of an order.
fn arcs_of(order: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    order.windows(2).map(|w| (w[0], w[1]))
}

/// Feasible assignment realizing the given permutations, with auxiliary
/// variables at their smallest feasible values.
pub(crate) fn witness(model: &MilpModel, rows: &Permutation, cols: &Permutation) -> Result<Vec<f64>> {
    let ModelFamily::Hpm { coordinated, .. } = model.family else {
        return Err(SeriationError::Unsupported("not a Hamiltonian path model".into()));
    };
    let ctx = model.context.as_ref().expect("path models carry their context");
    let mut values = vec![0.0; model.num_vars()];
    let mut set = |name: String, v: f64| {
        if let Some(id) = model.var(&name) {
            values[id.0] = v;
        }
    };
    let orders: Vec<(&str, Vec<usize>)> = if coordinated {
        vec![("", rows.order())]
    } else {
        vec![("N", rows.order()), ("M", cols.order())]
    };
    for (suffix, order) in &orders {
        for (pos, (i, k)) in arcs_of(order).enumerate() {
            set(format!("z{suffix}_{}_{}", i + 1, k + 1), 1.0);
            set(format!("g{suffix}_{}_{}", i + 1, k + 1), (pos + 1) as f64);
        }
        set(format!("t{suffix}_{}", order[order.len() - 1] + 1), 1.0);
    }
    let (ro, co) = (&orders[0].1, &orders[orders.len() - 1].1);
    for (i, k) in arcs_of(ro) {
        for (j, l) in arcs_of(co) {
            set(format!("h_{}_{}_{}_{}", i + 1, k + 1, j + 1, l + 1), 1.0);
        }
    }
    if ctx.formulation == Formulation::HpmCross2 {
        let p = ctx.measure.stress_params().expect("cross2 is a stress measure").p;
        let (gr, gc) = vn_weights(&ctx.matrix, p)?;
        let graphs = if coordinated { vec![coordinated_merge(&gr, &gc)?] } else { vec![gr, gc] };
        for ((suffix, order), g) in orders.iter().zip(&graphs) {
            for w in order.windows(3) {
                set(format!("u{suffix}_{}", w[0] + 1), g.weight(w[0], w[2]));
            }
        }
    }
    Ok(values)
}

/// Orders encoded by the arc variables of a solved path model.
pub(crate) fn orders_from_values(model: &MilpModel, values: &[f64]) -> Result<(Vec<usize>, Vec<usize>)> {
    let ModelFamily::Hpm { n, m, coordinated } = model.family else {
        return Err(SeriationError::Unsupported("not a Hamiltonian path model".into()));
    };
    let follow = |suffix: &str, r: usize| -> Result<Vec<usize>> {
        let mut next = vec![None; r];
        let mut has_pred = vec![false; r];
        for i in 0..r {
            for k in 0..r {
                if i == k {
                    continue;
                }
                let id = model.var(&format!("z{suffix}_{}_{}", i + 1, k + 1)).expect("arc variable");
                if values[id.0] > 0.5 {
                    if next[i].is_some() || has_pred[k] {
                        return Err(SeriationError::Integrity(format!("arcs of axis '{suffix}' do not form a path")));
                    }
                    next[i] = Some(k);
                    has_pred[k] = true;
                }
            }
        }
        let start = (0..r)
            .find(|&i| !has_pred[i])
            .ok_or_else(|| SeriationError::Integrity(format!("arcs of axis '{suffix}' contain a cycle")))?;
        let mut order = vec![start];
        while let Some(k) = next[*order.last().expect("non-empty")] {
            if order.len() >= r {
                break;
            }
            order.push(k);
        }
        if order.len() != r {
            return Err(SeriationError::Integrity(format!(
                "arcs of axis '{suffix}' visit {} of {r} nodes",
                order.len()
            )));
        }
        Ok(order)
    };
    if coordinated {
        let o = follow("", n)?;
        Ok((o.clone(), o))
    } else {
        Ok((follow("N", n)?, follow("M", m)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Sense;

    fn m3() -> DenseMatrix {
        DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]]).unwrap()
    }

    #[test]
    fn counts_3x3() {
        let model = build_hpm(&m3(), &Measure::von_neumann(1).unwrap(), false).unwrap();
        assert_eq!(model.count_prefix("zN"), 6);
        assert_eq!(model.count_prefix("tN"), 3);
        assert_eq!(model.count_prefix("gN"), 6);
        assert_eq!(model.count_kind(VarKind::Binary), 18);
        assert_eq!(model.count_kind(VarKind::Integer), 12);
        let moore = build_hpm_moore(&m3(), 1, false).unwrap();
        assert_eq!(moore.count_prefix("h"), 36);
        let coord = build_hpm(&m3(), &Measure::Effectiveness, true).unwrap();
        assert_eq!(coord.count_kind(VarKind::Binary), 9);
        assert_eq!(coord.sense(), Sense::Maximize);
    }

    #[test]
    fn rejects_other_neighborhoods() {
        assert!(build_hpm(&m3(), &Measure::moore(1).unwrap(), false).is_err());
        let rect = DenseMatrix::zeros(2, 3).unwrap();
        assert!(build_hpm(&rect, &Measure::von_neumann(1).unwrap(), true).is_err());
    }

    #[test]
    fn witness_decodes_to_same_orders() {
        let model = build_hpm_cross2(&m3(), 2, false).unwrap();
        let r = Permutation::from_order(&[2, 0, 1]).unwrap();
        let c = Permutation::from_order(&[1, 2, 0]).unwrap();
        let w = witness(&model, &r, &c).unwrap();
        model.check_feasible(&w, 1e-9).unwrap();
        let (ro, co) = orders_from_values(&model, &w).unwrap();
        assert_eq!((ro, co), (r.order(), c.order()));
    }

    #[test]
    fn subtours_are_infeasible() {
        // A 2-cycle on {0, 1} plus node 2 as a path of its own.
        let model = build_hpm(&m3(), &Measure::von_neumann(1).unwrap(), true).unwrap();
        let mut w = vec![0.0; model.num_vars()];
        for name in ["z_1_2", "z_2_1", "t_3", "g_1_2", "g_2_1"] {
            w[model.var(name).unwrap().0] = 1.0;
        }
        assert!(model.check_feasible(&w, 1e-9).is_err());
    }
}
