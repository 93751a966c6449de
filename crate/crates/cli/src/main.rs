//! `pesinlab`: run one experiment, append its record, or export records.

mod commands;
mod export;
mod params;
mod record;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{Command, Ctx, Failure};
use params::{load_config, Params};
use record::{RunConfig, RunRecord, TOOL_VERSION};

#[derive(Parser, Debug)]
#[command(name = "pesinlab", version, about = "Numerical experiments on nonuniformly hyperbolic toral maps")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML file with the same keys as the flags; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true)
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let params = match &cli.config {
        Some(path) => cli.params.over(&load_config(path).map_err(|e| Failure::Validation(format!("{e:#}")))?),
        None => Ok(cli.params.clone()),
    }
    .map_err(Failure::Io)?;

    let threads = params.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Validation(format!("--threads: {e}")))?;

    if cli.command == Command::Export {
        let input = params.input.clone().unwrap_or_else(|| PathBuf::from("runs.jsonl"));
        let select = params.select.clone().unwrap_or_default();
        let format = params.format.clone().unwrap_or_else(|| "csv".into());
        let n = match &params.out {
            Some(path) => {
                let mut buf = Vec::new();
                let n = export::export(&input, &select, &format, &mut buf)?;
                std::fs::write(path, buf).map_err(|e| Failure::Io(e.into()))?;
                n
            }
            None => export::export(&input, &select, &format, &mut std::io::stdout().lock())?,
        };
        eprintln!("exported {n} record(s)");
        return Ok(());
    }

    let mut ctx = Ctx::new(&params);
    // keys handled here rather than by the command
    let out: PathBuf = ctx.get("out", PathBuf::from("runs.jsonl"))?;
    ctx.get("threads", threads)?;
    let started_at = now();
    let (system, seed, result) = pool.install(|| commands::run(cli.command, &mut ctx))?;
    let finished_at = now();
    for key in ctx.unused() {
        eprintln!("warning: --{key} is not used by {}", cli.command.name());
    }
    ctx.resolved.remove("out");
    ctx.resolved.remove("threads");
    ctx.resolved.remove("system");
    ctx.resolved.remove("seed");
    let record = RunRecord {
        config: RunConfig {
            command: cli.command.name(),
            system,
            seed,
            out: out.display().to_string(),
            params: serde_json::to_value(&ctx.resolved).expect("params serialise"),
        },
        started_at,
        finished_at,
        tool_version: TOOL_VERSION.to_string(),
        result,
    };
    let line = record::append(&out, &record).map_err(Failure::Io)?;
    println!("{line}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: invalid input: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Computation(e)) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(1)
        }
        Err(Failure::NoMatch(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
