mod args;
mod bench;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Command, RunConfig};
use seriation::SeriationError;

fn exit_code(e: &SeriationError) -> u8 {
    match e {
        SeriationError::InvalidArgument(_)
        | SeriationError::DimensionMismatch(_)
        | SeriationError::SizeGuard { .. }
        | SeriationError::Precondition(_)
        | SeriationError::Unsupported(_)
        | SeriationError::Config(_)
        | SeriationError::Parse { .. } => 1,
        SeriationError::Infeasible => 2,
        SeriationError::NoIncumbent(_) => 3,
        _ => 4,
    }
}

fn run(config: &RunConfig) -> seriation::Result<()> {
    match &config.command {
        Command::Seriate(a) => commands::cmd_seriate(a),
        Command::Evaluate(a) => commands::cmd_evaluate(a),
        Command::Generate(a) => commands::cmd_generate(a),
        Command::EmitModel(a) => commands::cmd_emit_model(a),
        Command::Render(a) => commands::cmd_render(a),
        Command::Bench(a) => {
            let rows = bench::run_bench(a)?;
            let failed = rows.iter().filter(|r| r.deviations.is_none()).count();
            eprintln!("bench: {} runs, {failed} failed, results in {}", rows.len(), a.out_dir.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new().parse_filters(&config.log).format_timestamp(None).init();
    log::info!("run config: {}", serde_json::to_string(&config).unwrap_or_default());
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
