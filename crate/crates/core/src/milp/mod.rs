//! Mixed-integer models of seriation, their LP-format serialization and a
//! subprocess bridge to an external solver.
//!
//! Variable names encode 1-based indices:
//!
//! | name | meaning |
//! |---|---|
//! | `x_i_k`, `y_j_l` | row `i` at position `k`, column `j` at position `l` |
//! | `z_i_j_k_l` | product `x_i_k · y_j_l` (PAM, first linearization) |
//! | `s_k_l` | entry at position `(k, l)` (PAM, second linearization) |
//! | `v_*`, `w_*`, `theta_k_l` | absolute differences, their powers, per-cell stress (first linearization) |
//! | `nu_*`, `rho_k_l` | the same for the second linearization |
//! | `zN_i_k`, `tN_i`, `gN_i_k` | row arc `i → k`, last row, arc position (`M` for columns) |
//! | `z_i_k`, `t_i`, `g_i_k` | the same when rows and columns share one order |
//! | `h_i_k_j_l` | product of row arc `i → k` and column arc `j → l` (Moore) |
//! | `uN_r`, `uM_r` | two-step successor cost of row / column `r` (cross2) |

pub mod external;
pub mod hpm;
pub mod lp;
pub mod model;
pub mod pam;
pub mod tailoring;

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Result, SeriationError};
use crate::measures::Measure;

pub use external::{extract_permutations, invoke_solver, run_external_solver, solve_model, ExternalSolverConfig, SolverOutput};
pub use hpm::{build_hpm, build_hpm_cross2, build_hpm_moore};
pub use lp::{emit_lp, write_lp};
pub use model::{MilpModel, ModelContext, ModelFamily, Relation, VarId, VarKind};
pub use pam::{build_pam, Linearization};
pub use tailoring::{add_cluster_constraint, add_position_constraint, Axis};

/// The model families that can be emitted or solved externally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    PamL1,
    PamL2,
    Hpm,
    HpmMoore,
    HpmCross2,
}

impl Formulation {
    /// HPM variants for von Neumann, ME, Moore and cross2; PAM-L2 otherwise.
    pub fn default_for(measure: &Measure) -> Result<Self> {
        Ok(match measure {
            Measure::Effectiveness => Formulation::Hpm,
            Measure::Stress(s) if s.neighborhood.is_von_neumann() => Formulation::Hpm,
            Measure::Stress(s) if s.neighborhood.is_moore() => Formulation::HpmMoore,
            Measure::Stress(s) if s.neighborhood.is_cross2() => Formulation::HpmCross2,
            Measure::Stress(_) => Formulation::PamL2,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Formulation::PamL1 => "pam-l1",
            Formulation::PamL2 => "pam-l2",
            Formulation::Hpm => "hpm",
            Formulation::HpmMoore => "hpm-moore",
            Formulation::HpmCross2 => "hpm-cross2",
        }
    }

    pub fn is_pam(self) -> bool {
        matches!(self, Formulation::PamL1 | Formulation::PamL2)
    }
}

impl FromStr for Formulation {
    type Err = SeriationError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pam-l1" => Formulation::PamL1,
            "pam-l2" => Formulation::PamL2,
            "hpm" => Formulation::Hpm,
            "hpm-moore" => Formulation::HpmMoore,
            "hpm-cross2" => Formulation::HpmCross2,
            other => return Err(invalid(format!("unknown formulation '{other}'"))),
        })
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Options for [`build_model`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub coordinated: bool,
    pub symmetry_breaking: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { coordinated: false, symmetry_breaking: true }
    }
}

/// Builds `formulation` for `measure` on `a`. PAM models are built on the
/// min–max normalized copy of `a`; HPM models on `a` itself.
pub fn build_model(
    a: &crate::matrix::DenseMatrix,
    measure: &Measure,
    formulation: Formulation,
    options: BuildOptions,
) -> Result<MilpModel> {
    let need_stress = |what: &str| {
        measure.stress_params().cloned().ok_or_else(|| {
            SeriationError::Unsupported(format!("{what} models only represent stress measures"))
        })
    };
    match formulation {
        Formulation::PamL1 | Formulation::PamL2 => {
            let params = need_stress("PAM")?;
            let (normalized, info) = crate::matrix::normalize(a);
            let lin = if formulation == Formulation::PamL1 { Linearization::L1 } else { Linearization::L2 };
            let mut model = build_pam(&normalized, &params, lin, options.coordinated, options.symmetry_breaking)?;
            if let Some(ctx) = model.context.as_mut() {
                ctx.normalization = Some(info);
            }
            Ok(model)
        }
        Formulation::Hpm => build_hpm(a, measure, options.coordinated),
        Formulation::HpmMoore => {
            let params = need_stress("HPM-Moore")?;
            if !params.neighborhood.is_moore() {
                return Err(SeriationError::Unsupported("hpm-moore models Moore stress only".into()));
            }
            build_hpm_moore(a, params.p, options.coordinated)
        }
        Formulation::HpmCross2 => {
            let params = need_stress("HPM-cross2")?;
            if !params.neighborhood.is_cross2() {
                return Err(SeriationError::Unsupported("hpm-cross2 models cross2 stress only".into()));
            }
            build_hpm_cross2(a, params.p, options.coordinated)
        }
    }
}

impl MilpModel {
    /// A feasible assignment of every variable that encodes the given
    /// permutations, with auxiliary variables at their smallest feasible
    /// values, so its objective is the measure of the induced reordering.
    pub fn witness(
        &self,
        rows: &crate::matrix::Permutation,
        cols: &crate::matrix::Permutation,
    ) -> Result<Vec<f64>> {
        match self.family {
            ModelFamily::Pam { .. } => pam::witness(self, rows, cols),
            ModelFamily::Hpm { .. } => hpm::witness(self, rows, cols),
            ModelFamily::Generic => Err(SeriationError::Unsupported("model does not encode a seriation".into())),
        }
    }
}

/// Formats a coefficient exactly: integers up to `1e15` without a fraction,
/// everything else in shortest round-trip scientific notation.
pub(crate) fn format_number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(3.0), "3");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(0.5), "5e-1");
        assert_eq!(format_number(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(format_number(2f64.powi(60)).parse::<f64>().unwrap(), 2f64.powi(60));
    }

    #[test]
    fn formulation_labels_round_trip() {
        for f in [
            Formulation::PamL1,
            Formulation::PamL2,
            Formulation::Hpm,
            Formulation::HpmMoore,
            Formulation::HpmCross2,
        ] {
            assert_eq!(f.label().parse::<Formulation>().unwrap(), f);
        }
        assert!("tsp".parse::<Formulation>().is_err());
    }
}
