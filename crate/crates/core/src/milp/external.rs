//! Solving emitted models with an external MILP solver run as a subprocess.
//!
//! The solver is a shell command template containing `{model}` and
//! `{solution}`. It reads the LP file and writes a solution file with one
//! `name value` pair per line. Lines starting with `#` are ignored, and
//! three keys are reserved:
//!
//! ```text
//! objective 12.5
//! bound 11.0
//! status optimal      # optimal | feasible | limit | infeasible
//! x_1_2 1
//! ```
//!
//! Variables missing from the file are zero. Exit code 127 means the command
//! was not found, exit code 3 that the solver cannot handle the model (for
//! example quadratic constraints).

use std::collections::HashMap;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::error::{Result, SeriationError};
use crate::matrix::{denormalize_objective, DenseMatrix, Permutation};
use crate::measures::Measure;
use crate::solver::{SeriationResult, Status};

use super::lp::write_lp;
use super::model::{MilpModel, ModelFamily, VarKind};
use super::{build_model, BuildOptions, Formulation};

/// Environment variable naming the solver configuration file.
pub const CONFIG_ENV: &str = "SERIATION_SOLVER_CONFIG";

/// Entries of a binary or integer variable may be this far from an integer.
pub const INTEGRALITY_TOL: f64 = 1e-4;

const DEFAULT_TIMEOUT_SECONDS: f64 = 3600.0;

/// How to invoke the external solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSolverConfig {
    pub command: String,
    pub timeout: Duration,
    /// Where model and solution files go; the system temp dir when unset.
    pub work_dir: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    solver_command: String,
    timeout_seconds: Option<f64>,
    work_dir: Option<PathBuf>,
}

impl ExternalSolverConfig {
    pub fn new(command: impl Into<String>, timeout: Duration) -> Result<Self> {
        let command = command.into();
        for placeholder in ["{model}", "{solution}"] {
            if !command.contains(placeholder) {
                return Err(SeriationError::Config(format!("solver command lacks the {placeholder} placeholder")));
            }
        }
        if timeout.is_zero() {
            return Err(SeriationError::Config("solver timeout must be positive".into()));
        }
        Ok(Self { command, timeout, work_dir: None })
    }

    pub fn with_work_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.work_dir = Some(dir.into());
        self
    }

    /// Parses TOML with keys `solver_command`, `timeout_seconds` and
    /// optionally `work_dir`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| SeriationError::Config(e.to_string()))?;
        let secs = raw.timeout_seconds.unwrap_or(DEFAULT_TIMEOUT_SECONDS);
        if !(secs.is_finite() && secs > 0.0) {
            return Err(SeriationError::Config(format!("timeout_seconds must be positive, got {secs}")));
        }
        let mut cfg = Self::new(raw.solver_command, Duration::from_secs_f64(secs))?;
        cfg.work_dir = raw.work_dir;
        Ok(cfg)
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| SeriationError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Configuration named by `SERIATION_SOLVER_CONFIG`, if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) if !path.is_empty() => Self::from_toml_file(PathBuf::from(path)).map(Some),
            _ => Ok(None),
        }
    }
}

/// Parsed contents of a solution file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverOutput {
    pub values: HashMap<String, f64>,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub status: Option<String>,
}

impl SolverOutput {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut out = SolverOutput::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SeriationError::Parse { path: path.to_path_buf(), line: idx as u64 + 1, message };
            let mut tokens = line.split_whitespace();
            let (Some(key), Some(value), None) = (tokens.next(), tokens.next(), tokens.next()) else {
                return Err(err(format!("expected 'name value', got '{line}'")));
            };
            if key == "status" {
                out.status = Some(value.to_ascii_lowercase());
                continue;
            }
            let v: f64 = value.parse().map_err(|_| err(format!("'{value}' is not a number")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite value for '{key}'")));
            }
            let slot = match key {
                "objective" => &mut out.objective,
                "bound" => &mut out.bound,
                _ => {
                    if out.values.insert(key.to_string(), v).is_some() {
                        return Err(err(format!("'{key}' assigned twice")));
                    }
                    continue;
                }
            };
            *slot = Some(v);
        }
        Ok(out)
    }
}

/// Row and column permutations encoded by a solution of a seriation model.
pub fn extract_permutations(solution: &HashMap<String, f64>, model: &MilpModel) -> Result<(Permutation, Permutation)> {
    let values = model.values_from_map(solution)?;
    permutations_from_values(model, &values)
}

fn permutations_from_values(model: &MilpModel, values: &[f64]) -> Result<(Permutation, Permutation)> {
    for (var, &v) in model.variables().iter().zip(values) {
        if var.kind != VarKind::Continuous && (v - v.round()).abs() > INTEGRALITY_TOL {
            return Err(SeriationError::Integrity(format!("{} = {v} is not integral", var.name)));
        }
    }
    let broken = |what: String| SeriationError::Integrity(what);
    match model.family {
        ModelFamily::Pam { n, m, coordinated } => {
            let assign = |prefix: &str, size: usize| -> Result<Permutation> {
                let mut mapping = vec![usize::MAX; size];
                for (i, slot) in mapping.iter_mut().enumerate() {
                    for k in 0..size {
                        let id = model.var(&format!("{prefix}_{}_{}", i + 1, k + 1)).expect("assignment variable");
                        if values[id.0] > 0.5 {
                            if *slot != usize::MAX {
                                return Err(broken(format!("{prefix}: index {} has two positions", i + 1)));
                            }
                            *slot = k;
                        }
                    }
                    if *slot == usize::MAX {
                        return Err(broken(format!("{prefix}: index {} has no position", i + 1)));
                    }
                }
                Permutation::new(mapping).map_err(|e| broken(format!("{prefix}: {e}")))
            };
            let rows = assign("x", n)?;
            let cols = if coordinated { rows.clone() } else { assign("y", m)? };
            Ok((rows, cols))
        }
        ModelFamily::Hpm { .. } => {
            let (ro, co) = super::hpm::orders_from_values(model, values)?;
            Ok((Permutation::from_order(&ro)?, Permutation::from_order(&co)?))
        }
        ModelFamily::Generic => Err(SeriationError::Unsupported("model does not encode a seriation".into())),
    }
}

static FILE_COUNTER: AtomicU64 = AtomicU64::new(0);

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

/// Writes `model`, runs the solver and parses its solution file.
///
/// Returns the path of the model file alongside the output; the solution
/// file is removed.
pub fn invoke_solver(model: &MilpModel, config: &ExternalSolverConfig) -> Result<(PathBuf, SolverOutput)> {
    let dir = config.work_dir.clone().unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;
    let stem = format!(
        "{}-{}-{}",
        model.name,
        std::process::id(),
        FILE_COUNTER.fetch_add(1, Ordering::Relaxed)
    );
    let model_path = dir.join(format!("{stem}.lp"));
    let solution_path = dir.join(format!("{stem}.sol"));
    write_lp(model, &model_path)?;
    let command = config
        .command
        .replace("{model}", &shell_quote(&model_path))
        .replace("{solution}", &shell_quote(&solution_path));
    log::debug!("running solver: {command}");
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SeriationError::Config(format!("cannot start sh: {e}")))?;
    let mut stderr = child.stderr.take().expect("piped stderr");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let deadline = Instant::now() + config.timeout;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            let _ = std::fs::remove_file(&solution_path);
            return Err(SeriationError::Solver(format!(
                "solver exceeded {:.0} s timeout",
                config.timeout.as_secs_f64()
            )));
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let err_text = reader.join().unwrap_or_default();
    let tail: String = err_text.lines().rev().take(5).collect::<Vec<_>>().into_iter().rev().collect::<Vec<_>>().join("\n");
    if !status.success() {
        let _ = std::fs::remove_file(&solution_path);
        return Err(match status.code() {
            Some(127) => SeriationError::Config(format!("solver command not found: {tail}")),
            Some(3) => SeriationError::Unsupported(format!("solver cannot handle this model: {tail}")),
            code => SeriationError::Solver(format!("solver exited with {code:?}: {tail}")),
        });
    }
    let text = std::fs::read_to_string(&solution_path)
        .map_err(|e| SeriationError::Solver(format!("no solution file at {}: {e}", solution_path.display())))?;
    let _ = std::fs::remove_file(&solution_path);
    let output = SolverOutput::parse(&text, &solution_path)?;
    Ok((model_path, output))
}

/// Solves a built seriation model externally and checks the answer against
/// the native measure on `original`, the matrix the model was built from
/// (before normalization).
pub fn solve_model(model: &MilpModel, original: &DenseMatrix, config: &ExternalSolverConfig) -> Result<SeriationResult> {
    let started = Instant::now();
    let ctx = model
        .context
        .as_ref()
        .ok_or_else(|| SeriationError::Unsupported("model does not encode a seriation".into()))?;
    if (original.rows(), original.cols()) != (ctx.matrix.rows(), ctx.matrix.cols()) {
        return Err(SeriationError::DimensionMismatch("matrix does not match the model".into()));
    }
    let (_, output) = invoke_solver(model, config)?;
    let status = match output.status.as_deref() {
        None | Some("optimal") => Status::Optimal,
        Some("feasible" | "limit") => Status::FeasibleWithGap(f64::NAN),
        Some("infeasible") => return Err(SeriationError::Infeasible),
        Some(other) => return Err(SeriationError::Solver(format!("solver reported status '{other}'"))),
    };
    if matches!(status, Status::FeasibleWithGap(_)) && output.values.is_empty() && output.objective.is_none() {
        return Err(SeriationError::NoIncumbent(format!("{} stopped early", ctx.formulation)));
    }
    let values = model.values_from_map(&output.values)?;
    let (rows, cols) = permutations_from_values(model, &values)?;
    let p = ctx.measure.stress_params().map_or(1, |s| s.p);
    let scale = |v: f64| match &ctx.normalization {
        Some(info) => denormalize_objective(v, info, p),
        None => v,
    };
    let claimed = scale(output.objective.unwrap_or_else(|| model.evaluate_objective(&values)));
    let bound = output.bound.map(scale);
    let name = format!("milp:{}", ctx.formulation.label());
    SeriationResult::assemble(original, &ctx.measure, rows, cols, Some(claimed), bound, status, name, started)
}

/// Builds the default (or given) formulation of `measure` on `a` and solves
/// it externally.
pub fn run_external_solver(
    a: &DenseMatrix,
    measure: &Measure,
    coordinated: bool,
    formulation: Formulation,
    config: &ExternalSolverConfig,
) -> Result<SeriationResult> {
    let options = BuildOptions { coordinated, ..BuildOptions::default() };
    let model = build_model(a, measure, formulation, options)?;
    solve_model(&model, a, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::build_hpm;

    #[test]
    fn config_requires_placeholders() {
        assert!(ExternalSolverConfig::new("solve {model}", Duration::from_secs(1)).is_err());
        let cfg = ExternalSolverConfig::from_toml_str("solver_command = \"s {model} {solution}\"\ntimeout_seconds = 2.5\n").unwrap();
        assert_eq!(cfg.timeout, Duration::from_millis(2500));
        assert!(ExternalSolverConfig::from_toml_str("solver_command = \"s {model} {solution}\"\ntimeout_seconds = 0\n").is_err());
        assert!(ExternalSolverConfig::from_toml_str("command = \"x\"").is_err());
    }

    #[test]
    fn solution_dialect() {
        let text = "# header\nobjective 4.5\nstatus Optimal\nx_1_1 1\n\nbound 4 # trailing\n";
        let out = SolverOutput::parse(text, Path::new("s.sol")).unwrap();
        assert_eq!(out.objective, Some(4.5));
        assert_eq!(out.bound, Some(4.0));
        assert_eq!(out.status.as_deref(), Some("optimal"));
        assert_eq!(out.values["x_1_1"], 1.0);
        let bad = SolverOutput::parse("x_1_1 one\n", Path::new("s.sol")).unwrap_err();
        assert!(matches!(bad, SeriationError::Parse { line: 1, .. }));
        assert!(SolverOutput::parse("x 1 2\n", Path::new("s.sol")).is_err());
    }

    #[test]
    fn path_extraction_hand_trace() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]).unwrap();
        let model = build_hpm(&a, &Measure::von_neumann(1).unwrap(), true).unwrap();
        let sol: HashMap<String, f64> = [("z_3_1", 1.0), ("z_1_2", 1.0), ("t_2", 1.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let (r, _) = extract_permutations(&sol, &model).unwrap();
        assert_eq!(r.mapping(), &[1, 2, 0]);
        let mut frac = sol.clone();
        frac.insert("z_3_1".into(), 0.5);
        assert!(matches!(extract_permutations(&frac, &model), Err(SeriationError::Integrity(_))));
        let mut cyc = sol.clone();
        cyc.insert("z_2_3".into(), 1.0);
        assert!(matches!(extract_permutations(&cyc, &model), Err(SeriationError::Integrity(_))));
        let mut unknown = sol;
        unknown.insert("bogus".into(), 1.0);
        assert!(matches!(extract_permutations(&unknown, &model), Err(SeriationError::Integrity(_))));
    }

    #[test]
    fn missing_solver_is_a_config_error() {
        let dir = std::env::temp_dir().join(format!("seriation-missing-{}", std::process::id()));
        let cfg = ExternalSolverConfig::new("definitely-not-a-solver-xyz {model} {solution}", Duration::from_secs(5))
            .unwrap()
            .with_work_dir(&dir);
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let err = run_external_solver(&a, &Measure::von_neumann(1).unwrap(), false, Formulation::Hpm, &cfg).unwrap_err();
        assert!(matches!(err, SeriationError::Config(_)), "{err}");
        let left: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
        assert_eq!(left.len(), 1);
        assert_eq!(left[0].extension().unwrap(), "lp");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn scripted_solver_round_trip() {
        // A "solver" that prints a fixed optimal path through `sh`.
        let dir = std::env::temp_dir().join(format!("seriation-script-{}", std::process::id()));
        let cfg = ExternalSolverConfig::new(
            "printf 'objective 8\\nzN_1_2 1\\ntN_2 1\\nzM_1_2 1\\ntM_2 1\\n' > {solution} # {model}",
            Duration::from_secs(5),
        )
        .unwrap()
        .with_work_dir(&dir);
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let r = run_external_solver(&a, &Measure::von_neumann(1).unwrap(), false, Formulation::Hpm, &cfg).unwrap();
        assert_eq!(r.objective, 8.0);
        assert_eq!(r.status, Status::Optimal);
        let lying = ExternalSolverConfig { command: cfg.command.replace("objective 8", "objective 3"), ..cfg.clone() };
        let err = run_external_solver(&a, &Measure::von_neumann(1).unwrap(), false, Formulation::Hpm, &lying).unwrap_err();
        assert!(matches!(err, SeriationError::Integrity(_)));
        let infeasible = ExternalSolverConfig { command: "echo 'status infeasible' > {solution} # {model}".into(), ..cfg.clone() };
        let err = run_external_solver(&a, &Measure::von_neumann(1).unwrap(), false, Formulation::Hpm, &infeasible).unwrap_err();
        assert!(matches!(err, SeriationError::Infeasible));
        let gap = ExternalSolverConfig {
            command: cfg.command.replace("objective 8", "objective 8\\nbound 6\\nstatus feasible"),
            ..cfg.clone()
        };
        let r = run_external_solver(&a, &Measure::von_neumann(1).unwrap(), false, Formulation::Hpm, &gap).unwrap();
        assert_eq!(r.status, Status::FeasibleWithGap(0.25));
        let cap = ExternalSolverConfig { command: "exit 3 # {model} {solution}".into(), ..cfg };
        let err = run_external_solver(&a, &Measure::von_neumann(1).unwrap(), false, Formulation::Hpm, &cap).unwrap_err();
        assert!(matches!(err, SeriationError::Unsupported(_)));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
