use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use radon_lab::{run, RunConfig, RunOptions};

#[derive(Parser)]
#[command(name = "lab", version, about = "Run radon-core experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write results.json, results.csv and plot.svg.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long)]
        workers: Option<usize>,
        /// Let `oracle-refresh` overwrite fixtures that changed.
        #[arg(long)]
        force: bool,
        /// Fixture directory (default `$LAB_FIXTURES` or the committed store).
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let Command::Run { config, seed, budget, out, workers, force, fixtures } = Cli::parse().command;
    let result = RunConfig::load(&config).and_then(|mut cfg| {
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if budget.is_some() {
            cfg.budget = budget;
        }
        if out.is_some() {
            cfg.output_dir = out;
        }
        if let Some(w) = workers {
            cfg.workers = w;
        }
        cfg.validate().map_err(|(key, message)| radon_lab::LabError::Config { line: 0, message: format!("{key}: {message}") })?;
        let dir = cfg.output_dir();
        run(&cfg, &RunOptions { force, fixtures }).map(|r| (r, dir))
    });
    match result {
        Ok((record, dir)) => {
            for m in &record.metrics {
                let v = match (&m.exact, m.value) {
                    (Some(e), _) => e.clone(),
                    (None, Some(v)) => match m.stderr {
                        Some(s) => format!("{v:.6} ± {s:.2e}"),
                        None => format!("{v:.6}"),
                    },
                    (None, None) => "n/a".into(),
                };
                println!("{:<40} {v} {}", m.name, m.units);
            }
            for w in &record.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", dir.display());
            if record.violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                for v in &record.violations {
                    eprintln!("violation: {v}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
