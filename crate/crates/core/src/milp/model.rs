//! Solver-independent representation of a mixed-integer (quadratically
//! constrained) program.

use std::collections::HashMap;

use crate::error::{invalid, Result, SeriationError};
use crate::matrix::{DenseMatrix, NormalizationInfo};
use crate::measures::{Measure, Sense};

/// Index of a variable in its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
            Relation::Ge => lhs >= rhs - tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `linear + Σ coef·x·y  (relation)  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticConstraint {
    pub name: String,
    pub linear: Vec<(VarId, f64)>,
    pub quadratic: Vec<(VarId, VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: Sense,
    pub linear: Vec<(VarId, f64)>,
    pub quadratic: Vec<(VarId, VarId, f64)>,
}

/// Which formulation a model came from; decides how a solution maps back to
/// permutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    Generic,
    Pam { n: usize, m: usize, coordinated: bool },
    Hpm { n: usize, m: usize, coordinated: bool },
}

/// The instance a seriation model was built for.
#[derive(Debug, Clone)]
pub struct ModelContext {
    /// Matrix whose entries appear in the model (normalized for PAM).
    pub matrix: DenseMatrix,
    pub measure: Measure,
    /// Present when `matrix` is a normalized copy of the input.
    pub normalization: Option<NormalizationInfo>,
    pub formulation: super::Formulation,
}

/// Variables, linear and quadratic constraints, and an objective.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub name: String,
    variables: Vec<Variable>,
    index: HashMap<String, VarId>,
    constraint_names: HashMap<String, usize>,
    pub linear: Vec<LinearConstraint>,
    pub quadratic: Vec<QuadraticConstraint>,
    pub objective: Objective,
    pub family: ModelFamily,
    pub context: Option<ModelContext>,
}

/// Longest identifier accepted in models.
pub const MAX_NAME_LEN: usize = 255;

pub(crate) fn validate_name(name: &str) -> Result<()> {
    let mut chars = name.chars();
    let ok_first = chars.next().is_some_and(|c| c.is_ascii_alphabetic());
    let ok_rest = chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok_first || !ok_rest || name.len() > MAX_NAME_LEN {
        return Err(invalid(format!("'{name}' is not a valid model identifier")));
    }
    Ok(())
}

impl MilpModel {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        Self {
            name: name.into(),
            variables: Vec::new(),
            index: HashMap::new(),
            constraint_names: HashMap::new(),
            linear: Vec::new(),
            quadratic: Vec::new(),
            objective: Objective { sense, linear: Vec::new(), quadratic: Vec::new() },
            family: ModelFamily::Generic,
            context: None,
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lb: f64, ub: f64, kind: VarKind) -> Result<VarId> {
        let name = name.into();
        validate_name(&name)?;
        if self.index.contains_key(&name) {
            return Err(invalid(format!("duplicate variable '{name}'")));
        }
        if lb.is_nan() || ub.is_nan() || lb > ub {
            return Err(invalid(format!("variable '{name}' has bounds [{lb}, {ub}]")));
        }
        let (lb, ub) = match kind {
            VarKind::Binary => (0.0, 1.0),
            _ => (lb, ub),
        };
        let id = VarId(self.variables.len());
        self.index.insert(name.clone(), id);
        self.variables.push(Variable { name, lb, ub, kind });
        Ok(id)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> Result<VarId> {
        self.add_var(name, 0.0, 1.0, VarKind::Binary)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lb: f64, ub: f64) -> Result<VarId> {
        self.add_var(name, lb, ub, VarKind::Continuous)
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn count_kind(&self, kind: VarKind) -> usize {
        self.variables.iter().filter(|v| v.kind == kind).count()
    }

    pub fn count_prefix(&self, prefix: &str) -> usize {
        self.variables
            .iter()
            .filter(|v| v.name.strip_prefix(prefix).is_some_and(|rest| rest.starts_with('_')))
            .count()
    }

    fn claim_constraint_name(&mut self, name: &str) -> Result<()> {
        validate_name(name)?;
        if self.constraint_names.contains_key(name) {
            return Err(invalid(format!("duplicate constraint '{name}'")));
        }
        self.constraint_names.insert(name.to_string(), self.constraint_names.len());
        Ok(())
    }

    fn check_ids(&self, ids: impl IntoIterator<Item = VarId>) -> Result<()> {
        for id in ids {
            if id.0 >= self.variables.len() {
                return Err(invalid(format!("undeclared variable id {}", id.0)));
            }
        }
        Ok(())
    }

    /// Adds a linear constraint; repeated variables are merged and zero
    /// coefficients dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> Result<()> {
        let name = name.into();
        let terms = merge_terms(terms);
        self.check_ids(terms.iter().map(|t| t.0))?;
        if !rhs.is_finite() || terms.iter().any(|t| !t.1.is_finite()) {
            return Err(invalid(format!("constraint '{name}' has a non-finite coefficient")));
        }
        self.claim_constraint_name(&name)?;
        self.linear.push(LinearConstraint { name, terms, relation, rhs });
        Ok(())
    }

    pub fn add_quadratic_constraint(
        &mut self,
        name: impl Into<String>,
        linear: impl IntoIterator<Item = (VarId, f64)>,
        quadratic: Vec<(VarId, VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> Result<()> {
        let name = name.into();
        let linear = merge_terms(linear);
        self.check_ids(linear.iter().map(|t| t.0))?;
        self.check_ids(quadratic.iter().flat_map(|q| [q.0, q.1]))?;
        self.claim_constraint_name(&name)?;
        self.quadratic.push(QuadraticConstraint { name, linear, quadratic, relation, rhs });
        Ok(())
    }

    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (VarId, f64)>) -> Result<()> {
        let terms = merge_terms(terms);
        self.check_ids(terms.iter().map(|t| t.0))?;
        self.objective.linear = terms;
        Ok(())
    }

    /// Drops every linear constraint whose name satisfies `pred`; returns
    /// how many were removed.
    pub fn remove_constraints(&mut self, pred: impl Fn(&str) -> bool) -> usize {
        let before = self.linear.len();
        let names = &mut self.constraint_names;
        self.linear.retain(|c| {
            let drop = pred(&c.name);
            if drop {
                names.remove(&c.name);
            }
            !drop
        });
        before - self.linear.len()
    }

    pub fn sense(&self) -> Sense {
        self.objective.sense
    }

    pub fn num_constraints(&self) -> usize {
        self.linear.len() + self.quadratic.len()
    }

    pub fn has_constraint(&self, name: &str) -> bool {
        self.constraint_names.contains_key(name)
    }

    /// Objective value at `values` (indexed by [`VarId`]).
    pub fn evaluate_objective(&self, values: &[f64]) -> f64 {
        let lin: f64 = self.objective.linear.iter().map(|&(v, c)| c * values[v.0]).sum();
        let quad: f64 = self
            .objective
            .quadratic
            .iter()
            .map(|&(x, y, c)| c * values[x.0] * values[y.0])
            .sum();
        lin + quad
    }

    /// First violated bound, integrality requirement or constraint, if any.
    pub fn check_feasible(&self, values: &[f64], tol: f64) -> std::result::Result<(), String> {
        if values.len() != self.variables.len() {
            return Err(format!("{} values for {} variables", values.len(), self.variables.len()));
        }
        for (var, &x) in self.variables.iter().zip(values) {
            if x < var.lb - tol || x > var.ub + tol {
                return Err(format!("{} = {x} outside [{}, {}]", var.name, var.lb, var.ub));
            }
            if var.kind != VarKind::Continuous && (x - x.round()).abs() > tol {
                return Err(format!("{} = {x} is not integral", var.name));
            }
        }
        for c in &self.linear {
            let lhs: f64 = c.terms.iter().map(|&(v, k)| k * values[v.0]).sum();
            if !c.relation.holds(lhs, c.rhs, tol) {
                return Err(format!("{}: {lhs} {} {}", c.name, c.relation.symbol(), c.rhs));
            }
        }
        for c in &self.quadratic {
            let lhs: f64 = c.linear.iter().map(|&(v, k)| k * values[v.0]).sum::<f64>()
                + c.quadratic.iter().map(|&(x, y, k)| k * values[x.0] * values[y.0]).sum::<f64>();
            if !c.relation.holds(lhs, c.rhs, tol) {
                return Err(format!("{}: {lhs} {} {}", c.name, c.relation.symbol(), c.rhs));
            }
        }
        Ok(())
    }

    /// Dense value vector from a name → value map; absent names are 0.
    pub fn values_from_map(&self, solution: &HashMap<String, f64>) -> Result<Vec<f64>> {
        let mut values = vec![0.0; self.variables.len()];
        for (name, &v) in solution {
            let id = self.var(name).ok_or_else(|| {
                SeriationError::Integrity(format!("solution names unknown variable '{name}'"))
            })?;
            values[id.0] = v;
        }
        Ok(values)
    }
}

fn merge_terms(terms: impl IntoIterator<Item = (VarId, f64)>) -> Vec<(VarId, f64)> {
    let mut out: Vec<(VarId, f64)> = Vec::new();
    let mut slot: HashMap<VarId, usize> = HashMap::new();
    for (v, c) in terms {
        match slot.get(&v) {
            Some(&i) => out[i].1 += c,
            None => {
                slot.insert(v, out.len());
                out.push((v, c));
            }
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_validated() {
        let mut m = MilpModel::new("t", Sense::Minimize);
        assert!(m.binary("x_1_2").is_ok());
        assert!(m.binary("x_1_2").is_err());
        assert!(m.binary("1x").is_err());
        assert!(m.binary("a-b").is_err());
        assert!(m.binary("").is_err());
        assert!(m.binary("a".repeat(256)).is_err());
        assert!(m.binary("a".repeat(255)).is_ok());
    }

    #[test]
    fn constraints_merge_and_check() {
        let mut m = MilpModel::new("t", Sense::Minimize);
        let x = m.binary("x").unwrap();
        let y = m.continuous("y", 0.0, 10.0).unwrap();
        m.add_constraint("c", [(x, 1.0), (y, 2.0), (x, 1.0)], Relation::Ge, 3.0).unwrap();
        assert_eq!(m.linear[0].terms, vec![(x, 2.0), (y, 2.0)]);
        assert!(m.add_constraint("c", [(x, 1.0)], Relation::Le, 1.0).is_err());
        assert!(m.add_constraint("d", [(VarId(9), 1.0)], Relation::Le, 1.0).is_err());
        m.set_objective([(y, 1.0)]).unwrap();
        assert!(m.check_feasible(&[1.0, 0.5], 1e-9).is_ok());
        assert!(m.check_feasible(&[0.0, 1.0], 1e-9).is_err());
        assert!(m.check_feasible(&[0.5, 1.0], 1e-9).is_err());
        assert!(m.check_feasible(&[1.0, 11.0], 1e-9).is_err());
        assert_eq!(m.evaluate_objective(&[1.0, 0.5]), 0.5);
    }
}
