//! Side constraints that tailor a seriation to prior knowledge: keep a group
//! of rows (or columns) close together, or confine some of them to a set of
//! positions.

use crate::error::{invalid, Result, SeriationError};

use super::model::{MilpModel, ModelFamily, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Cols,
}

impl Axis {
    fn size(self, n: usize, m: usize) -> usize {
        match self {
            Axis::Rows => n,
            Axis::Cols => m,
        }
    }
}

fn check_indices(what: &str, idx: &[usize], size: usize) -> Result<()> {
    let mut seen = vec![false; size];
    for &i in idx {
        if i >= size {
            return Err(invalid(format!("{what} index {} outside 1..={size}", i + 1)));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(invalid(format!("{what} index {} repeated", i + 1)));
        }
    }
    Ok(())
}

/// Requires every two members of `cluster` (0-based) to lie at most `kappa`
/// positions apart in the path of `axis`.
///
/// The rank of node `i` is `Σ_k g_ik + |R|·t_i`, which is its 1-based
/// position in the path.
pub fn add_cluster_constraint(model: &mut MilpModel, axis: Axis, cluster: &[usize], kappa: usize) -> Result<()> {
    let ModelFamily::Hpm { n, m, coordinated } = model.family else {
        return Err(SeriationError::Unsupported(
            "cluster constraints need a Hamiltonian path model".into(),
        ));
    };
    let size = axis.size(n, m);
    check_indices("cluster", cluster, size)?;
    if kappa == 0 || kappa >= size {
        return Err(invalid(format!("kappa must lie in 1..{size}, got {kappa}")));
    }
    if cluster.len() < 2 {
        return Ok(());
    }
    if kappa + 1 < cluster.len() {
        log::warn!("a cluster of {} members cannot fit within {kappa} positions", cluster.len());
    }
    let suffix = match (coordinated, axis) {
        (true, _) => "",
        (false, Axis::Rows) => "N",
        (false, Axis::Cols) => "M",
    };
    let mut pairs = Vec::new();
    for (x, &i) in cluster.iter().enumerate() {
        for &j in &cluster[x + 1..] {
            pairs.push((i.min(j), i.max(j)));
        }
    }
    let name = |q: usize, i: usize, j: usize, side: &str| format!("cl{suffix}_{q}_{}_{}_{side}", i + 1, j + 1);
    let q = (1..)
        .find(|&q| pairs.iter().all(|&(i, j)| !model.has_constraint(&name(q, i, j, "up"))))
        .expect("an unused cluster id exists");
    let rank = |model: &MilpModel, i: usize, sign: f64| -> Vec<_> {
        let mut terms: Vec<_> = (0..size)
            .filter(|&k| k != i)
            .map(|k| (model.var(&format!("g{suffix}_{}_{}", i + 1, k + 1)).expect("flow variable"), sign))
            .collect();
        terms.push((model.var(&format!("t{suffix}_{}", i + 1)).expect("last-node variable"), sign * size as f64));
        terms
    };
    for (i, j) in pairs {
        let diff: Vec<_> = rank(model, i, 1.0).into_iter().chain(rank(model, j, -1.0)).collect();
        model.add_constraint(name(q, i, j, "up"), diff.clone(), Relation::Le, kappa as f64)?;
        model.add_constraint(name(q, i, j, "lo"), diff, Relation::Ge, -(kappa as f64))?;
    }
    Ok(())
}

/// Restricts each of `observations` (0-based) on `axis` to one of
/// `positions` (0-based) through `Σ_{k ∈ positions} x_ik = 1`.
///
/// A symmetry-breaking constraint on the same assignment variables is
/// dropped unless `positions` is mirror-symmetric.
pub fn add_position_constraint(
    model: &mut MilpModel,
    axis: Axis,
    observations: &[usize],
    positions: &[usize],
) -> Result<()> {
    let ModelFamily::Pam { n, m, coordinated } = model.family else {
        return Err(SeriationError::Unsupported(
            "position constraints need a position assignment model".into(),
        ));
    };
    let size = axis.size(n, m);
    check_indices("observation", observations, size)?;
    check_indices("position", positions, size)?;
    if positions.len() < observations.len() {
        return Err(invalid(format!(
            "{} observations cannot occupy {} positions",
            observations.len(),
            positions.len()
        )));
    }
    let var = if coordinated || axis == Axis::Rows { "x" } else { "y" };
    let mirrored = positions.iter().all(|&k| positions.contains(&(size - 1 - k)));
    if var == "x" && !mirrored {
        let dropped = model.remove_constraints(|c| c == "sym" || c.starts_with("sym_"));
        if dropped > 0 {
            log::info!("dropped symmetry breaking in favor of position constraints");
        }
    }
    for &i in observations {
        let terms: Vec<_> = positions
            .iter()
            .map(|&k| (model.var(&format!("{var}_{}_{}", i + 1, k + 1)).expect("assignment variable"), 1.0))
            .collect();
        let mut q = 1;
        while model.has_constraint(&format!("pos{var}_{}_{q}", i + 1)) {
            q += 1;
        }
        model.add_constraint(format!("pos{var}_{}_{q}", i + 1), terms, Relation::Eq, 1.0)?;
    }
    Ok(())
}
