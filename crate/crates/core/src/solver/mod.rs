//! Exact seriation engines and the driver that picks one per measure.
//!
//! | measure | engines |
//! |---|---|
//! | von Neumann, ME | brute, Held–Karp, branch-and-bound, MILP |
//! | cross2 | brute, second-order Held–Karp, local search, MILP |
//! | Moore | brute, alternating, MILP |
//! | ε ball, custom | brute, MILP |

pub mod bnb;
pub mod brute;
pub mod held_karp;
pub mod moore;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SeriationError};
use crate::heuristics::{bea, local_search, two_opt_path};
use crate::matrix::{apply_permutations, DenseMatrix, Permutation};
use crate::measures::{deviation_report, DeviationReport, Measure, MeasureRecord};
use crate::milp::{ExternalSolverConfig, Formulation};
use crate::weights::{coordinated_merge, me_weights, vn_weights, PathGraph};

pub use bnb::{branch_and_bound_path, BnbOutcome};
pub use brute::{brute_force, brute_force_space, BRUTE_FORCE_LIMIT};
pub use held_karp::{held_karp_path, held_karp_two_step, HELD_KARP_MAX, TWO_STEP_MAX};

/// Search-space size up to which `auto` uses exhaustive enumeration.
pub const AUTO_BRUTE_SPACE: f64 = 14_400.0;

/// Optional time, node and thread limits of a solve.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveLimits {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    pub threads: Option<usize>,
}

impl SolveLimits {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_time_limit(mut self, seconds: f64) -> Result<Self> {
        if !(seconds.is_finite() && seconds > 0.0) {
            return Err(invalid(format!("time limit must be positive, got {seconds}")));
        }
        self.time_limit = Some(Duration::from_secs_f64(seconds));
        Ok(self)
    }

    pub fn with_node_limit(mut self, nodes: u64) -> Result<Self> {
        if nodes == 0 {
            return Err(invalid("node limit must be positive"));
        }
        self.node_limit = Some(nodes);
        Ok(self)
    }

    pub fn with_threads(mut self, threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(invalid("thread count must be positive"));
        }
        self.threads = Some(threads);
        Ok(self)
    }

    pub(crate) fn deadline(&self, start: Instant) -> Option<Instant> {
        self.time_limit.map(|d| start + d)
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    Optimal,
    /// Feasible with the relative gap to the best known bound.
    FeasibleWithGap(f64),
    Infeasible,
    /// A limit stopped the search; the result holds the incumbent.
    LimitReached,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::FeasibleWithGap(_) => "feasible",
            Status::Infeasible => "infeasible",
            Status::LimitReached => "limit",
        }
    }

    pub fn parse(label: &str, gap: f64) -> Result<Self> {
        Ok(match label {
            "optimal" => Status::Optimal,
            "feasible" => Status::FeasibleWithGap(gap),
            "infeasible" => Status::Infeasible,
            "limit" => Status::LimitReached,
            other => return Err(invalid(format!("unknown status '{other}'"))),
        })
    }
}

/// Relative gap `|objective − bound| / max(1e-10, |objective|)`.
pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    (objective - bound).abs() / objective.abs().max(1e-10)
}

/// Which engine [`seriate`] should run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Brute,
    HeldKarp,
    Bnb,
    Milp,
    Alternating,
    Auto,
}

impl FromStr for Engine {
    type Err = SeriationError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "brute" => Engine::Brute,
            "heldkarp" => Engine::HeldKarp,
            "bnb" => Engine::Bnb,
            "milp" => Engine::Milp,
            "alternating" => Engine::Alternating,
            "auto" => Engine::Auto,
            other => return Err(invalid(format!("unknown engine '{other}'"))),
        })
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Brute => "brute",
            Engine::HeldKarp => "heldkarp",
            Engine::Bnb => "bnb",
            Engine::Milp => "milp",
            Engine::Alternating => "alternating",
            Engine::Auto => "auto",
        })
    }
}

/// Everything [`seriate`] needs besides the matrix.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub measure: Measure,
    pub coordinated: bool,
    pub engine: Engine,
    pub limits: SolveLimits,
    pub external: Option<ExternalSolverConfig>,
    /// MILP formulation for `Engine::Milp`; picked from the measure when unset.
    pub formulation: Option<Formulation>,
}

impl SolveOptions {
    pub fn new(measure: Measure) -> Self {
        Self {
            measure,
            coordinated: false,
            engine: Engine::Auto,
            limits: SolveLimits::none(),
            external: None,
            formulation: None,
        }
    }

    pub fn coordinated(mut self, yes: bool) -> Self {
        self.coordinated = yes;
        self
    }

    pub fn engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn limits(mut self, limits: SolveLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn external(mut self, config: ExternalSolverConfig) -> Self {
        self.external = Some(config);
        self
    }

    pub fn formulation(mut self, formulation: Formulation) -> Self {
        self.formulation = Some(formulation);
        self
    }
}

/// A solved seriation with its natively re-evaluated objective.
#[derive(Debug, Clone)]
pub struct SeriationResult {
    pub row_perm: Permutation,
    pub col_perm: Permutation,
    pub objective: f64,
    /// Lower bound when minimizing, upper bound when maximizing.
    pub bound: f64,
    pub status: Status,
    pub measures: MeasureRecord,
    pub deviations: DeviationReport,
    pub solver_name: String,
    pub runtime: Duration,
}

impl SeriationResult {
    /// Evaluates the measure on the reordered matrix and fills in the
    /// reported measures. A `claimed` objective that disagrees with the native
    /// value beyond `1e-6·max(1, |value|)` is an integrity error.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        a: &DenseMatrix,
        measure: &Measure,
        row_perm: Permutation,
        col_perm: Permutation,
        claimed: Option<f64>,
        bound: Option<f64>,
        status: Status,
        solver_name: impl Into<String>,
        started: Instant,
    ) -> Result<Self> {
        let reordered = apply_permutations(a, &row_perm, &col_perm)?;
        let objective = measure.evaluate(&reordered);
        if let Some(c) = claimed {
            if (c - objective).abs() > 1e-6 * objective.abs().max(1.0) {
                return Err(SeriationError::Integrity(format!(
                    "reported objective {c} differs from evaluated {objective}"
                )));
            }
        }
        let p = measure.stress_params().map_or(1, |s| s.p);
        let (bound, status) = match status {
            Status::Optimal => (objective, Status::Optimal),
            Status::FeasibleWithGap(_) => {
                let b = bound.unwrap_or(objective);
                let gap = relative_gap(objective, b);
                if gap == 0.0 {
                    (objective, Status::Optimal)
                } else {
                    (b, Status::FeasibleWithGap(gap))
                }
            }
            other => (bound.unwrap_or(objective), other),
        };
        Ok(Self {
            measures: MeasureRecord::evaluate(&reordered),
            deviations: deviation_report(a, &reordered, p)?,
            row_perm,
            col_perm,
            objective,
            bound,
            status,
            solver_name: solver_name.into(),
            runtime: started.elapsed(),
        })
    }

    pub fn gap(&self) -> f64 {
        match self.status {
            Status::Optimal => 0.0,
            _ => relative_gap(self.objective, self.bound),
        }
    }
}

/// Runs the engine selected in `options` on `a`.
pub fn seriate(a: &DenseMatrix, options: &SolveOptions) -> Result<SeriationResult> {
    let started = Instant::now();
    let measure = &options.measure;
    if options.coordinated && !a.is_square() {
        return Err(invalid(format!(
            "coordinated seriation needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let engine = resolve_engine(a, options)?;
    log::debug!("seriate: {} on {}x{} with engine {engine}", measure.label(), a.rows(), a.cols());
    match engine {
        Engine::Brute => {
            let (r, c, value) = brute_force(a, measure, options.coordinated)?;
            SeriationResult::assemble(a, measure, r, c, Some(value), None, Status::Optimal, "brute", started)
        }
        Engine::Milp => {
            let config = options.external.as_ref().ok_or_else(|| {
                SeriationError::Config("the milp engine needs an external solver configuration".into())
            })?;
            let formulation = match options.formulation {
                Some(f) => f,
                None => Formulation::default_for(measure)?,
            };
            crate::milp::run_external_solver(a, measure, options.coordinated, formulation, config)
        }
        Engine::HeldKarp | Engine::Bnb => match measure {
            Measure::Effectiveness => solve_separable(a, measure, options, engine, started),
            Measure::Stress(s) if s.neighborhood.is_von_neumann() => {
                solve_separable(a, measure, options, engine, started)
            }
            Measure::Stress(s) if s.neighborhood.is_cross2() && engine == Engine::HeldKarp => {
                solve_cross2(a, s.p, options, started)
            }
            _ => Err(SeriationError::Unsupported(format!(
                "engine {engine} does not handle the {} measure",
                measure.label()
            ))),
        },
        Engine::Alternating => match measure {
            Measure::Stress(s) if s.neighborhood.is_moore() => {
                moore::solve_moore_alternating(a, s.p, options.coordinated, &options.limits, started)
            }
            Measure::Stress(s) if s.neighborhood.is_cross2() => {
                cross2_local_search(a, s.p, options, started)
            }
            _ => Err(SeriationError::Unsupported(format!(
                "the alternating engine applies to Moore and cross2 stress, not {}",
                measure.label()
            ))),
        },
        Engine::Auto => unreachable!("resolved above"),
    }
}

/// Concrete engine for `Engine::Auto`; other engines pass through.
///
/// Exhaustive search when the search space is at most `5!·5!`, then
/// Held–Karp up to 20 nodes per axis (16 for cross2), then
/// branch-and-bound or the Moore/cross2 alternating heuristics.
pub fn resolve_engine(a: &DenseMatrix, options: &SolveOptions) -> Result<Engine> {
    if options.engine != Engine::Auto {
        return Ok(options.engine);
    }
    if brute_force_space(a.rows(), a.cols(), options.coordinated) <= AUTO_BRUTE_SPACE {
        return Ok(Engine::Brute);
    }
    let largest = a.rows().max(a.cols());
    Ok(match &options.measure {
        Measure::Effectiveness => path_engine(largest),
        Measure::Stress(s) if s.neighborhood.is_von_neumann() => path_engine(largest),
        Measure::Stress(s) if s.neighborhood.is_cross2() => {
            if largest <= TWO_STEP_MAX {
                Engine::HeldKarp
            } else {
                Engine::Alternating
            }
        }
        Measure::Stress(s) if s.neighborhood.is_moore() => Engine::Alternating,
        Measure::Stress(_) => {
            if options.external.is_some() {
                Engine::Milp
            } else {
                return Err(SeriationError::Unsupported(format!(
                    "no native exact engine for the {} measure beyond brute force; configure an external solver",
                    options.measure.label()
                )));
            }
        }
    })
}

fn path_engine(size: usize) -> Engine {
    if size <= HELD_KARP_MAX {
        Engine::HeldKarp
    } else {
        Engine::Bnb
    }
}

/// Warm start for a path problem: the better 2-opt improvement of the
/// identity order and of `seed`.
pub(crate) fn warm_order(g: &PathGraph, seed: &[usize]) -> Vec<usize> {
    let a = two_opt_path(g, &(0..g.size()).collect::<Vec<_>>());
    let b = two_opt_path(g, seed);
    let (va, vb) = (g.path_value(&a), g.path_value(&b));
    if g.sense().improves(vb, va) {
        b
    } else {
        a
    }
}

/// Optimal path of `g` with its bound and whether the search was complete.
pub(crate) struct PathSolution {
    pub order: Vec<usize>,
    pub bound: f64,
    pub complete: bool,
}

pub(crate) fn solve_path(
    g: &PathGraph,
    engine: Engine,
    seed: &[usize],
    limits: &SolveLimits,
) -> Result<PathSolution> {
    match engine {
        Engine::HeldKarp => {
            let (order, value) = held_karp_path(g)?;
            Ok(PathSolution { order, bound: value, complete: true })
        }
        _ => {
            let warm = warm_order(g, seed);
            let out = branch_and_bound_path(g, Some(&warm), limits)?;
            Ok(PathSolution { order: out.order, bound: out.bound, complete: out.optimal })
        }
    }
}

fn separable_graphs(a: &DenseMatrix, measure: &Measure) -> Result<(PathGraph, PathGraph)> {
    match measure {
        Measure::Effectiveness => Ok(me_weights(a)),
        Measure::Stress(s) => vn_weights(a, s.p),
    }
}

/// Von Neumann stress or ME as one or two independent Hamiltonian path problems.
pub fn solve_separable(
    a: &DenseMatrix,
    measure: &Measure,
    options: &SolveOptions,
    engine: Engine,
    started: Instant,
) -> Result<SeriationResult> {
    let (rows, cols) = separable_graphs(a, measure)?;
    let limits = &options.limits;
    let (bea_r, bea_c) = bea(a, None)?;
    let (row_order, col_order, bound, complete) = if options.coordinated {
        let g = coordinated_merge(&rows, &cols)?;
        let sol = solve_path(&g, engine, &bea_r.order(), limits)?;
        (sol.order.clone(), sol.order, sol.bound, sol.complete)
    } else {
        let r = solve_path(&rows, engine, &bea_r.order(), limits)?;
        let c = solve_path(&cols, engine, &bea_c.order(), limits)?;
        (r.order, c.order, r.bound + c.bound, r.complete && c.complete)
    };
    let claimed = if options.coordinated {
        let g = coordinated_merge(&rows, &cols)?;
        g.path_value(&row_order)
    } else {
        rows.path_value(&row_order) + cols.path_value(&col_order)
    };
    let status = if complete { Status::Optimal } else { Status::FeasibleWithGap(f64::NAN) };
    SeriationResult::assemble(
        a,
        measure,
        Permutation::from_order(&row_order)?,
        Permutation::from_order(&col_order)?,
        Some(claimed),
        Some(bound),
        status,
        engine.to_string(),
        started,
    )
}

fn solve_cross2(a: &DenseMatrix, p: u32, options: &SolveOptions, started: Instant) -> Result<SeriationResult> {
    let (rows, cols) = vn_weights(a, p)?;
    let measure = Measure::cross2(p)?;
    let (row_order, col_order, claimed) = if options.coordinated {
        let g = coordinated_merge(&rows, &cols)?;
        let (order, value) = held_karp_two_step(&g, &g)?;
        (order.clone(), order, value)
    } else {
        let (ro, vr) = held_karp_two_step(&rows, &rows)?;
        let (co, vc) = held_karp_two_step(&cols, &cols)?;
        (ro, co, vr + vc)
    };
    SeriationResult::assemble(
        a,
        &measure,
        Permutation::from_order(&row_order)?,
        Permutation::from_order(&col_order)?,
        Some(claimed),
        None,
        Status::Optimal,
        "heldkarp",
        started,
    )
}

/// Cross2 stress by local search from the von Neumann optimum; the von
/// Neumann optimum is the reported lower bound.
fn cross2_local_search(
    a: &DenseMatrix,
    p: u32,
    options: &SolveOptions,
    started: Instant,
) -> Result<SeriationResult> {
    let (rows, cols) = vn_weights(a, p)?;
    let measure = Measure::cross2(p)?;
    let (bea_r, bea_c) = bea(a, None)?;
    let limits = &options.limits;
    let engine_for = |g: &PathGraph| path_engine(g.size());
    let two_step = |g: &PathGraph, order: Vec<usize>| {
        let f = |o: &[usize]| g.path_value(o) + g.stride_value(o, 2);
        local_search(order, f)
    };
    let (row_order, col_order, bound) = if options.coordinated {
        let g = coordinated_merge(&rows, &cols)?;
        let sol = solve_path(&g, engine_for(&g), &bea_r.order(), limits)?;
        let order = two_step(&g, sol.order);
        (order.clone(), order, sol.bound)
    } else {
        let r = solve_path(&rows, engine_for(&rows), &bea_r.order(), limits)?;
        let c = solve_path(&cols, engine_for(&cols), &bea_c.order(), limits)?;
        (two_step(&rows, r.order), two_step(&cols, c.order), r.bound + c.bound)
    };
    SeriationResult::assemble(
        a,
        &measure,
        Permutation::from_order(&row_order)?,
        Permutation::from_order(&col_order)?,
        None,
        Some(bound),
        Status::FeasibleWithGap(f64::NAN),
        "alternating",
        started,
    )
}
