use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use seriation::instances::{generate, Family, GenSpec};
use seriation::io::{write_result_json, ResultDocument};
use seriation::{seriate, Measure, Result, SeriationError, SolveLimits, SolveOptions};

use crate::args::BenchArgs;

/// One solved (instance, measure) pair.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub spec: GenSpec,
    pub measure: String,
    pub coordinated: bool,
    /// `Dev_N, Dev_Mo, Dev_ME, Dev_Hom`, absent when the run failed.
    pub deviations: Option<[f64; 4]>,
    pub runtime: f64,
    pub status: String,
    pub gap: Option<f64>,
}

fn families(names: &[String]) -> Result<Vec<Family>> {
    let mut out = Vec::new();
    for name in names {
        if name == "bin" {
            out.extend([Family::BinSquare, Family::BinNonsquare]);
        } else {
            out.push(name.parse()?);
        }
    }
    Ok(out)
}

fn measure(name: &str, p: u32) -> Result<Measure> {
    match name {
        "vn" => Measure::von_neumann(p),
        "moore" => Measure::moore(p),
        "cross2" => Measure::cross2(p),
        "me" => Ok(Measure::Effectiveness),
        other => Err(SeriationError::InvalidArgument(format!("unknown bench measure '{other}'"))),
    }
}

/// Every instance of the suite in a fixed order.
pub fn suite(args: &BenchArgs) -> Result<Vec<GenSpec>> {
    let mut sizes = args.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let mut specs = Vec::new();
    for family in families(&args.families)? {
        let shapes: Vec<(usize, usize)> = if family.is_square() {
            sizes.iter().map(|&s| (s, s)).collect()
        } else {
            sizes.iter().flat_map(|&n| sizes.iter().filter(move |&&m| n < m).map(move |&m| (n, m))).collect()
        };
        let densities: Vec<Option<f64>> =
            if family.is_binary() { args.densities.iter().map(|&d| Some(d)).collect() } else { vec![None] };
        for &(n, m) in &shapes {
            for &density in &densities {
                for r in 0..args.repeats {
                    let spec = GenSpec { family, n, m, density, seed: args.seed + r };
                    spec.validate()?;
                    specs.push(spec);
                }
            }
        }
    }
    Ok(specs)
}

fn run_one(spec: &GenSpec, name: &str, args: &BenchArgs, out_dir: &Path) -> BenchRow {
    let coordinated = args.coordinated && spec.n == spec.m;
    let started = Instant::now();
    let outcome = (|| {
        let measure = measure(name, args.p)?;
        let inst = generate(spec)?;
        let mut limits = SolveLimits::none();
        if let Some(t) = args.time_limit {
            limits = limits.with_time_limit(t)?;
        }
        let options =
            SolveOptions::new(measure.clone()).coordinated(coordinated).engine(args.engine.into()).limits(limits);
        let result = seriate(&inst.matrix, &options)?;
        let mut doc = ResultDocument::new(&inst.matrix.clone().into(), &measure, coordinated, &result, false);
        doc.instance.spec = Some(spec.clone());
        let suffix = if coordinated { "_c" } else { "" };
        write_result_json(&doc, out_dir.join(format!("{}_{name}{suffix}.json", spec.stem())))?;
        Ok::<_, SeriationError>(result)
    })();
    let runtime = started.elapsed().as_secs_f64();
    match outcome {
        Ok(res) => BenchRow {
            spec: spec.clone(),
            measure: name.into(),
            coordinated,
            deviations: Some([res.deviations.dev_n, res.deviations.dev_mo, res.deviations.dev_me, res.deviations.dev_hom]),
            runtime,
            status: res.status.label().into(),
            gap: Some(res.gap()),
        },
        Err(e) => {
            log::warn!("{} {name}: {e}", spec.stem());
            BenchRow {
                spec: spec.clone(),
                measure: name.into(),
                coordinated,
                deviations: None,
                runtime,
                status: format!("error: {e}"),
                gap: None,
            }
        }
    }
}

/// Runs the suite; failures become rows with an `error:` status.
pub fn run_bench(args: &BenchArgs) -> Result<Vec<BenchRow>> {
    for name in &args.measures {
        measure(name, args.p)?;
    }
    let specs = suite(args)?;
    let results_dir = args.out_dir.join("results");
    fs::create_dir_all(&results_dir)?;
    let jobs: Vec<(&GenSpec, &String)> = specs.iter().flat_map(|s| args.measures.iter().map(move |m| (s, m))).collect();
    log::info!("bench: {} instances, {} runs", specs.len(), jobs.len());
    let work = || jobs.par_iter().map(|(s, m)| run_one(s, m, args, &results_dir)).collect::<Vec<_>>();
    let rows = match args.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| SeriationError::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    write_aggregate(&rows, &args.out_dir.join("aggregate.csv"))?;
    write_profile(&rows, &args.out_dir.join("profile.csv"))?;
    Ok(rows)
}

fn csv_err(e: csv::Error) -> SeriationError {
    SeriationError::Io(std::io::Error::other(e))
}

pub fn write_aggregate(rows: &[BenchRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "n", "m", "type", "density", "seed", "measure", "coordinated", "Dev_N", "Dev_Mo", "Dev_ME", "Dev_Hom",
        "runtime", "status", "gap",
    ])
    .map_err(csv_err)?;
    for r in rows {
        let devs: Vec<String> = match r.deviations {
            Some(d) => d.iter().map(f64::to_string).collect(),
            None => vec![String::new(); 4],
        };
        let mut rec = vec![
            r.spec.n.to_string(),
            r.spec.m.to_string(),
            r.spec.family.to_string(),
            r.spec.density.map(|d| d.to_string()).unwrap_or_default(),
            r.spec.seed.to_string(),
            r.measure.clone(),
            r.coordinated.to_string(),
        ];
        rec.extend(devs);
        rec.extend([
            format!("{:.6}", r.runtime),
            r.status.clone(),
            r.gap.map(|g| g.to_string()).unwrap_or_default(),
        ]);
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Fraction of runs solved to optimality within each observed time, per
/// measure and over all measures.
pub fn write_profile(rows: &[BenchRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["measure", "time", "fraction_solved"]).map_err(csv_err)?;
    let mut groups: Vec<String> = rows.iter().map(|r| r.measure.clone()).collect();
    groups.sort();
    groups.dedup();
    groups.push("all".into());
    for g in &groups {
        let runs: Vec<&BenchRow> = rows.iter().filter(|r| g == "all" || &r.measure == g).collect();
        let mut times: Vec<f64> = runs.iter().filter(|r| r.status == "optimal").map(|r| r.runtime).collect();
        times.sort_by(f64::total_cmp);
        for (k, t) in times.iter().enumerate() {
            let frac = (k + 1) as f64 / runs.len() as f64;
            w.write_record([g.clone(), format!("{t:.6}"), frac.to_string()]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn args(extra: &[&str]) -> BenchArgs {
        let mut argv = vec!["seriate", "bench"];
        argv.extend_from_slice(extra);
        match crate::args::RunConfig::parse_from(argv).command {
            crate::args::Command::Bench(b) => b,
            _ => unreachable!(),
        }
    }

    #[test]
    fn suite_shapes() {
        let specs = suite(&args(&["--sizes", "10,15,20", "--repeats", "2"])).unwrap();
        let count = |f: Family| specs.iter().filter(|s| s.family == f).count();
        assert_eq!(count(Family::Easy), 6);
        assert_eq!(count(Family::Nsq), 6);
        assert_eq!(count(Family::BinSquare), 18);
        assert_eq!(count(Family::BinNonsquare), 18);
        assert!(specs.iter().filter(|s| !s.family.is_square()).all(|s| s.n < s.m));
    }

    #[test]
    fn unknown_measure_is_rejected() {
        let a = args(&["--measures", "vn,bogus", "--sizes", "3", "--families", "easy", "--out-dir", "/nonexistent"]);
        assert!(matches!(run_bench(&a), Err(SeriationError::InvalidArgument(_))));
    }
}
