//! CPLEX LP text format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::measures::Sense;

use super::format_number;
use super::model::{MilpModel, VarId, VarKind};

/// Lines are wrapped before they exceed this many characters.
const WRAP: usize = 200;

struct LineWriter<'a> {
    out: &'a mut String,
    len: usize,
}

impl<'a> LineWriter<'a> {
    fn start(out: &'a mut String, head: &str) -> Self {
        out.push_str(head);
        Self { len: head.len(), out }
    }

    fn token(&mut self, tok: &str) {
        if self.len + tok.len() + 1 > WRAP {
            self.out.push_str("\n   ");
            self.len = 3;
        }
        self.out.push(' ');
        self.out.push_str(tok);
        self.len += tok.len() + 1;
    }

    fn finish(self) {
        self.out.push('\n');
    }
}

fn coef_tokens(c: f64, first: bool) -> (Option<&'static str>, Option<String>) {
    let sign = if c < 0.0 {
        Some("-")
    } else if first {
        None
    } else {
        Some("+")
    };
    let mag = c.abs();
    let num = (mag != 1.0).then(|| format_number(mag));
    (sign, num)
}

fn write_linear(w: &mut LineWriter<'_>, model: &MilpModel, terms: &[(VarId, f64)]) -> bool {
    for (idx, &(v, c)) in terms.iter().enumerate() {
        let (sign, num) = coef_tokens(c, idx == 0);
        if let Some(s) = sign {
            w.token(s);
        }
        if let Some(n) = num {
            w.token(&n);
        }
        w.token(&model.variable(v).name);
    }
    !terms.is_empty()
}

fn write_quadratic(w: &mut LineWriter<'_>, model: &MilpModel, terms: &[(VarId, VarId, f64)], first: bool) {
    if terms.is_empty() {
        return;
    }
    if !first {
        w.token("+");
    }
    w.token("[");
    for (idx, &(x, y, c)) in terms.iter().enumerate() {
        let (sign, num) = coef_tokens(c, idx == 0);
        if let Some(s) = sign {
            w.token(s);
        }
        if let Some(n) = num {
            w.token(&n);
        }
        if x == y {
            w.token(&model.variable(x).name);
            w.token("^2");
        } else {
            w.token(&model.variable(x).name);
            w.token("*");
            w.token(&model.variable(y).name);
        }
    }
    w.token("]");
}

/// Serializes `model` in CPLEX LP format.
pub fn emit_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name);
    out.push_str(match model.objective.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    {
        let mut w = LineWriter::start(&mut out, " obj:");
        let any = write_linear(&mut w, model, &model.objective.linear);
        if !model.objective.quadratic.is_empty() {
            let doubled: Vec<_> = model.objective.quadratic.iter().map(|&(x, y, c)| (x, y, 2.0 * c)).collect();
            write_quadratic(&mut w, model, &doubled, !any);
            w.token("/");
            w.token("2");
        } else if !any {
            w.token("0");
        }
        w.finish();
    }
    out.push_str("Subject To\n");
    let placeholder = VarId(0);
    for c in &model.linear {
        let mut w = LineWriter::start(&mut out, &format!(" {}:", c.name));
        if !write_linear(&mut w, model, &c.terms) {
            w.token("0");
            w.token(&model.variable(placeholder).name);
        }
        w.token(c.relation.symbol());
        w.token(&format_number(c.rhs));
        w.finish();
    }
    for c in &model.quadratic {
        let mut w = LineWriter::start(&mut out, &format!(" {}:", c.name));
        let any = write_linear(&mut w, model, &c.linear);
        write_quadratic(&mut w, model, &c.quadratic, !any);
        w.token(c.relation.symbol());
        w.token(&format_number(c.rhs));
        w.finish();
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        if v.kind == VarKind::Binary {
            continue;
        }
        let lb = if v.lb == f64::NEG_INFINITY { "-inf".to_string() } else { format_number(v.lb) };
        if v.lb == f64::NEG_INFINITY && v.ub == f64::INFINITY {
            let _ = writeln!(out, " {} free", v.name);
        } else if v.ub == f64::INFINITY {
            if v.lb != 0.0 {
                let _ = writeln!(out, " {} >= {lb}", v.name);
            }
        } else {
            let _ = writeln!(out, " {lb} <= {} <= {}", v.name, format_number(v.ub));
        }
    }
    for (section, kind) in [("Generals", VarKind::Integer), ("Binaries", VarKind::Binary)] {
        let names: Vec<&str> = model.variables().iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{section}");
        let mut w = LineWriter::start(&mut out, "");
        for n in names {
            w.token(n);
        }
        w.finish();
    }
    out.push_str("End\n");
    out
}

/// Writes [`emit_lp`] output to `path`.
pub fn write_lp(model: &MilpModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, emit_lp(model))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::Relation;

    #[test]
    fn small_model_text() {
        let mut m = MilpModel::new("toy", Sense::Maximize);
        let x = m.binary("x").unwrap();
        let g = m.add_var("g", 0.0, 4.0, VarKind::Integer).unwrap();
        let v = m.continuous("v", 0.0, f64::INFINITY).unwrap();
        let w = m.continuous("w", -1.0, 0.5).unwrap();
        m.add_constraint("c1", [(x, 1.0), (g, -2.0), (v, 0.25)], Relation::Le, 3.0).unwrap();
        m.add_quadratic_constraint("q1", [(w, 1.0)], vec![(v, v, -1.0)], Relation::Ge, 0.0).unwrap();
        m.set_objective([(x, 3.0), (w, -1.0)]).unwrap();
        let text = emit_lp(&m);
        let expected = "\\ toy\nMaximize\n obj: 3 x - w\nSubject To\n c1: x - 2 g + 2.5e-1 v <= 3\n q1: w + [ - v ^2 ] >= 0\nBounds\n 0 <= g <= 4\n -1 <= w <= 5e-1\nGenerals\n g\nBinaries\n x\nEnd\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn empty_objective_and_wrapping() {
        let mut m = MilpModel::new("wide", Sense::Minimize);
        let vars: Vec<VarId> = (0..100).map(|i| m.binary(format!("x_{i}")).unwrap()).collect();
        m.add_constraint("sum", vars.iter().map(|&v| (v, 1.0)), Relation::Eq, 1.0).unwrap();
        let text = emit_lp(&m);
        assert!(text.contains(" obj: 0\n"));
        assert!(text.lines().all(|l| l.len() <= WRAP));
        let sections: Vec<&str> = text.lines().filter(|l| !l.starts_with(' ')).collect();
        assert_eq!(sections, ["\\ wide", "Minimize", "Subject To", "Bounds", "Binaries", "End"]);
    }
}
