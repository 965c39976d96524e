// `!(x > 0.0)` style checks are kept so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod manifest;

use std::path::Path;

use clap::Parser;

use args::{Cli, Command};
use commands::{Globals, Outcome};
use error::CliError;
use manifest::{strip_out_dir, RunManifest, Versions};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    if let Err(e) = run(cli, &argv[1..]) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli, argv: &[String]) -> Result<(), CliError> {
    if let Command::Replay(r) = &cli.command {
        let recorded = RunManifest::read(&r.manifest)?;
        let mut args = vec!["regsvm".to_string()];
        args.extend(recorded.argv.iter().cloned());
        args.push("--out-dir".to_string());
        args.push(cli.out_dir.display().to_string());
        let replayed = Cli::try_parse_from(&args).map_err(|e| CliError::Manifest(e.to_string()))?;
        if matches!(replayed.command, Command::Replay(_)) {
            return Err(CliError::Manifest("a manifest cannot record a replay".into()));
        }
        return run(replayed, &recorded.argv);
    }
    if cli.jobs == 0 {
        return Err(error::arg_err("--jobs must be at least 1"));
    }
    std::fs::create_dir_all(&cli.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| error::arg_err(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| dispatch(&cli))?;
    write_manifest(&cli, argv, outcome, &cli.out_dir)
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let g = Globals {
        seed: cli.seed,
        tolerance: cli.tolerance,
        max_iters: cli.max_iters,
        out_dir: &cli.out_dir,
    };
    match &cli.command {
        Command::Synth(a) => commands::synth(&g, a),
        Command::Train(a) => commands::train(&g, a),
        Command::Cv(a) => commands::cv(&g, a),
        Command::Path(a) => commands::path(&g, a),
        Command::Benchmark(a) => commands::benchmark(&g, a),
        Command::Replay(_) => unreachable!("handled before dispatch"),
    }
}

fn write_manifest(cli: &Cli, argv: &[String], outcome: Outcome, dir: &Path) -> Result<(), CliError> {
    let parameters = serde_json::to_value(&cli.command)?;
    let command = parameters
        .as_object()
        .and_then(|o| o.keys().next().cloned())
        .unwrap_or_default()
        .to_lowercase();
    let manifest = RunManifest {
        command,
        argv: strip_out_dir(argv),
        parameters,
        seed: cli.seed,
        jobs: cli.jobs,
        tolerance: cli.tolerance,
        max_iters: cli.max_iters,
        versions: Versions::current(),
        outputs: outcome.outputs,
        warnings: outcome.warnings,
        summary: outcome.summary,
    };
    manifest.write(dir)
}
