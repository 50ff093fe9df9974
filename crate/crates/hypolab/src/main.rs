use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use hypolab::config::{ConfigErrors, ExperimentConfig};
use hypolab::experiments::{run_experiment, Report};
use hypolab::render::{write_artifacts, write_report};
use hypolab::suite::run_all;

#[derive(Parser)]
#[command(name = "hypolab", version, about = "Numerical experiments on degenerate hypoelliptic operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; defaults to the config's `out`, then `hypolab-out/<kind>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the acceptance battery.
    Suite,
    /// Regenerate CSV tables and plots from a report.json.
    Render {
        report: PathBuf,
        /// Output directory; defaults to the report's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run { config, out, seed } => cmd_run(&config, out, seed),
        Command::Suite => Ok(cmd_suite()),
        Command::Render { report, out } => cmd_render(&report, out),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if let Some(errs) = e.downcast_ref::<ConfigErrors>() {
                eprintln!("invalid config:");
                for fe in &errs.0 {
                    eprintln!("  {}: {}", fe.field, fe.message);
                }
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}

fn cmd_run(config: &Path, out: Option<PathBuf>, seed: Option<u64>) -> anyhow::Result<u8> {
    let mut cfg = ExperimentConfig::from_path(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| Path::new("hypolab-out").join(cfg.experiment.kind()));
    let report = run_experiment(&cfg)?;
    let files = write_report(&report, &dir)?;
    println!("{}: {:?} (exit {})", cfg.experiment.kind(), report.status, report.exit_code);
    for f in files {
        println!("  wrote {}", f.display());
    }
    Ok(report.exit_code as u8)
}

fn cmd_suite() -> u8 {
    let results = run_all(|r| {
        println!("{}", r.line());
        if let Some(c) = &r.companion {
            println!("INFO criterion {:2} {c}", r.id);
        }
    });
    let passed = results.iter().filter(|r| r.passed).count();
    let total: f64 = results.iter().map(|r| r.seconds).sum();
    println!("{passed}/{} criteria passed in {total:.1} s", results.len());
    if passed == results.len() {
        0
    } else {
        2
    }
}

fn cmd_render(path: &Path, out: Option<PathBuf>) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let report: Report = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let dir = out.unwrap_or_else(|| path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf));
    for f in write_artifacts(&report.result, &dir)? {
        println!("wrote {}", f.display());
    }
    Ok(0)
}
