//! `krein-index` command-line entry point.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use krein_index::report::emit;
use krein_index::run::{execute, Mode, Overrides, RunConfig, RunOutcome};
use krein_index::KreinError;

#[derive(Debug, Parser)]
#[command(name = "krein-index", version)]
#[command(about = "Hamiltonian-Krein index of -c^2 y'' + b^2 y + V y = -i z y'")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    config: PathBuf,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectrum of H_V, kernel, D_V, bounds and the index formula.
    Analyze(Common),
    /// Locate kernel crossings of an amplitude family s*V.
    Sweep(Common),
    /// Analysis plus the classified Fourier pencil spectrum.
    Pencil(Common),
    /// Pencil on the kernel-exactified model plus consistency checks; exits 4 on failure.
    Validate(Common),
    /// Use the mode given in the configuration file.
    Run(Common),
}

fn load(command: Command) -> Result<RunConfig, KreinError> {
    let (forced, common) = match command {
        Command::Analyze(c) => (Some(Mode::Analyze), c),
        Command::Sweep(c) => (Some(Mode::Sweep), c),
        Command::Pencil(c) => (Some(Mode::Pencil), c),
        Command::Validate(c) => (Some(Mode::Validate), c),
        Command::Run(c) => (None, c),
    };
    let mut cfg = RunConfig::load(&common.config)?;
    cfg.apply(&common.overrides);
    if let Some(mode) = forced {
        cfg.mode = mode;
    }
    Ok(cfg)
}

fn summary(outcome: &RunOutcome) -> String {
    let r = &outcome.report;
    let mut parts = vec![format!("mode {:?}", r.mode)];
    if let Some(a) = &r.analysis {
        parts.push(format!(
            "kappa_minus {} kernel {} kappa_ham {:?} verdict {:?}",
            a.index.kappa_minus, a.index.kernel_dim, a.index.kappa_ham, a.index.verdict
        ));
    }
    if let Some(p) = &r.pencil {
        parts.push(format!("kappa_ham_direct {}", p.counts.kappa_ham_direct));
    }
    if let Some(s) = &r.sweep {
        parts.push(format!("{} crossing(s)", s.crossings.len()));
    }
    if let Some(v) = &r.validation {
        let failed: Vec<&str> = v
            .checks
            .iter()
            .filter(|c| c.status == krein_index::report::CheckStatus::Fail)
            .map(|c| c.name.as_str())
            .collect();
        parts.push(if failed.is_empty() { "validation passed".into() } else { format!("validation FAILED: {}", failed.join(", ")) });
    }
    parts.join("; ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(cli.command).and_then(|cfg| {
        let outcome = execute(&cfg)?;
        let (json, _) = emit(&outcome.report, &outcome.tables, cfg.output.json.as_deref(), cfg.output.csv_dir.as_deref())?;
        if cfg.output.json.is_none() {
            // Broken pipes are not worth a numerical exit code.
            let _ = std::io::stdout().write_all(json.as_bytes());
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            eprintln!("{}", summary(&outcome));
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
