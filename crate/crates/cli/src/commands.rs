use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use seriation::instances::{generate, Family, GenSpec, InstanceSidecar};
use seriation::io::{
    parse_permutation_text, read_matrix_csv, read_result_json, write_matrix_csv, LabeledMatrix, ResultDocument,
};
use seriation::measures::{deviation_report, DeviationReport, MeasureRecord};
use seriation::milp::{
    add_cluster_constraint, add_position_constraint, build_model, emit_lp, solve_model, Axis, BuildOptions,
    ExternalSolverConfig, Formulation,
};
use seriation::render::{render_heatmap, ImageFormat};
use seriation::{apply_permutations, normalize, seriate, Permutation, Result, SeriationError, SolveLimits, SolveOptions};

use crate::args::{EmitModelArgs, EvaluateArgs, GenerateArgs, LimitArgs, RenderArgs, SeriateArgs};

fn usage(msg: impl Into<String>) -> SeriationError {
    SeriationError::InvalidArgument(msg.into())
}

pub fn limits(args: &LimitArgs) -> Result<SolveLimits> {
    let mut limits = SolveLimits::none();
    if let Some(t) = args.time_limit {
        limits = limits.with_time_limit(t)?;
    }
    if let Some(n) = args.node_limit {
        limits = limits.with_node_limit(n)?;
    }
    if let Some(t) = args.threads {
        limits = limits.with_threads(t)?;
    }
    Ok(limits)
}

fn solver_config(path: Option<&Path>) -> Result<Option<ExternalSolverConfig>> {
    match path {
        Some(p) => ExternalSolverConfig::from_toml_file(p).map(Some),
        None => ExternalSolverConfig::from_env(),
    }
}

/// Writes `text` to `path`, or to standard output.
fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn permute_labels(labels: &Option<Vec<String>>, perm: &Permutation) -> Option<Vec<String>> {
    labels.as_ref().map(|l| perm.order().into_iter().map(|i| l[i].clone()).collect())
}

/// The matrix reordered by `(rows, cols)`, labels included.
pub fn reordered(input: &LabeledMatrix, rows: &Permutation, cols: &Permutation) -> Result<LabeledMatrix> {
    Ok(LabeledMatrix {
        matrix: apply_permutations(&input.matrix, rows, cols)?,
        row_labels: permute_labels(&input.row_labels, rows),
        col_labels: permute_labels(&input.col_labels, cols),
    })
}

fn heatmap(m: &LabeledMatrix, path: &Path, format: Option<&str>, raw: bool) -> Result<()> {
    let format = match format {
        Some(f) => f.parse()?,
        None => ImageFormat::from_path(path)?,
    };
    let mut m = m.clone();
    if !raw {
        m.matrix = normalize(&m.matrix).0;
    }
    render_heatmap(&m, path, format)
}

fn report(doc: &ResultDocument) {
    log::info!(
        "{} {}: objective {} (bound {}, gap {:.3e}), solver {}",
        doc.measure.name,
        doc.solver.status,
        doc.objective,
        doc.bound,
        doc.solver.gap,
        doc.solver.name
    );
}

pub fn cmd_seriate(args: &SeriateArgs) -> Result<()> {
    let measure = args.measure.to_measure()?;
    let input = read_matrix_csv(&args.input)?;
    if args.coordinated && !input.matrix.is_square() {
        return Err(usage(format!(
            "--coordinated needs a square matrix, got {}x{}",
            input.matrix.rows(),
            input.matrix.cols()
        )));
    }
    let mut options = SolveOptions::new(measure.clone())
        .coordinated(args.coordinated)
        .engine(args.engine.into())
        .limits(limits(&args.limits)?);
    if let Some(config) = solver_config(args.solver_config.as_deref())? {
        options = options.external(config);
    }
    if let Some(f) = args.formulation {
        options = options.formulation(f.into());
    }
    let result = seriate(&input.matrix, &options)?;
    let mut doc = ResultDocument::new(&input, &measure, args.coordinated, &result, args.timing);
    doc.instance.source = Some(args.input.clone());
    doc.verify()?;
    report(&doc);
    emit(&doc.to_json()?, args.out.as_deref())?;
    if let Some(path) = &args.heatmap {
        heatmap(&reordered(&input, &result.row_perm, &result.col_perm)?, path, None, false)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Evaluation {
    rows: usize,
    cols: usize,
    p: u32,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    measures: MeasureRecord,
    deviations: DeviationReport,
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let input = read_matrix_csv(&args.input)?;
    let a = &input.matrix;
    let (rows, cols) = match &args.perm {
        Some(path) => {
            let (r, c) = parse_permutation_text(&fs::read_to_string(path)?, path)?;
            let c = match c {
                Some(c) => c,
                None if a.is_square() => r.clone(),
                None => return Err(usage("a single permutation line needs a square matrix")),
            };
            (r, c)
        }
        None => (Permutation::identity(a.rows()), Permutation::identity(a.cols())),
    };
    let b = apply_permutations(a, &rows, &cols)?;
    let eval = Evaluation {
        rows: a.rows(),
        cols: a.cols(),
        p: args.p,
        row_perm: rows.to_one_based(),
        col_perm: cols.to_one_based(),
        measures: MeasureRecord::evaluate(&b),
        deviations: deviation_report(a, &b, args.p)?,
    };
    let text = serde_json::to_string_pretty(&eval).map_err(|e| SeriationError::Integrity(e.to_string()))? + "\n";
    emit(&text, args.out.as_deref())
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let family: Family = args.family.parse()?;
    let spec = GenSpec { family, n: args.n, m: args.m.unwrap_or(args.n), density: args.density, seed: args.seed };
    let inst = generate(&spec)?;
    write_matrix_csv(&args.out, &inst.matrix.clone().into())?;
    let sidecar = args.sidecar.clone().unwrap_or_else(|| args.out.with_extension("json"));
    let text = serde_json::to_string_pretty(&InstanceSidecar::from(&inst))
        .map_err(|e| SeriationError::Integrity(e.to_string()))?;
    fs::write(&sidecar, text + "\n")?;
    log::info!("wrote {} and {}", args.out.display(), sidecar.display());
    Ok(())
}

/// Parses a 1-based comma list with optional ranges (`1-3,7`) into 0-based indices.
fn index_set(text: &str) -> Result<Vec<usize>> {
    let one = |s: &str| -> Result<usize> {
        match s.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(usage(format!("'{s}' is not a 1-based index"))),
        }
    };
    let mut out = Vec::new();
    for part in text.split(',').filter(|s| !s.trim().is_empty()) {
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (one(lo)?, one(hi)?);
                if lo > hi {
                    return Err(usage(format!("empty range '{part}'")));
                }
                out.extend(lo..=hi);
            }
            None => out.push(one(part)?),
        }
    }
    if out.is_empty() {
        return Err(usage(format!("'{text}' names no index")));
    }
    Ok(out)
}

fn split_spec<'a>(flag: &str, text: &'a str) -> Result<(&'a str, &'a str)> {
    text.split_once(':').ok_or_else(|| usage(format!("--{flag} expects 'indices:value', got '{text}'")))
}

pub fn cmd_emit_model(args: &EmitModelArgs) -> Result<()> {
    let measure = args.measure.to_measure()?;
    let input = read_matrix_csv(&args.input)?;
    let formulation = match args.formulation {
        Some(f) => f.into(),
        None => Formulation::default_for(&measure)?,
    };
    let options = BuildOptions { coordinated: args.coordinated, symmetry_breaking: !args.no_symmetry_breaking };
    let mut model = build_model(&input.matrix, &measure, formulation, options)?;
    for (flag, specs, axis) in [("cluster", &args.cluster, Axis::Rows), ("cluster-cols", &args.cluster_cols, Axis::Cols)] {
        for spec in specs {
            let (members, kappa) = split_spec(flag, spec)?;
            let kappa = kappa.trim().parse().map_err(|_| usage(format!("kappa '{kappa}' is not an integer")))?;
            add_cluster_constraint(&mut model, axis, &index_set(members)?, kappa)?;
        }
    }
    for (flag, specs, axis) in [("pin", &args.pin, Axis::Rows), ("pin-cols", &args.pin_cols, Axis::Cols)] {
        for spec in specs {
            let (obs, positions) = split_spec(flag, spec)?;
            add_position_constraint(&mut model, axis, &index_set(obs)?, &index_set(positions)?)?;
        }
    }
    emit(&emit_lp(&model), args.out.as_deref())?;
    if args.solve {
        let config = solver_config(args.solver_config.as_deref())?
            .ok_or_else(|| SeriationError::Config("--solve needs --solver-config or SERIATION_SOLVER_CONFIG".into()))?;
        let result = solve_model(&model, &input.matrix, &config)?;
        let mut doc = ResultDocument::new(&input, &measure, args.coordinated, &result, false);
        doc.instance.source = Some(args.input.clone());
        doc.verify()?;
        report(&doc);
        emit(&doc.to_json()?, args.result.as_deref())?;
    }
    Ok(())
}

pub fn cmd_render(args: &RenderArgs) -> Result<()> {
    let m = match (&args.input, &args.result) {
        (Some(path), _) => read_matrix_csv(path)?,
        (None, Some(path)) => {
            let doc = read_result_json(path)?;
            let input = LabeledMatrix {
                matrix: doc.matrix()?,
                row_labels: doc.instance.row_labels.clone(),
                col_labels: doc.instance.col_labels.clone(),
            };
            let (r, c) = doc.permutations()?;
            reordered(&input, &r, &c)?
        }
        (None, None) => return Err(usage("render needs --in or --result")),
    };
    heatmap(&m, &args.out, args.format.as_deref(), args.raw)
}
