//! Workflows behind the command-line modes.

pub mod analyze;
pub mod config;
pub mod sweep;
pub mod validate;

use std::time::Instant;

use crate::error::Result;
use crate::report::{RunReport, SpectraTables, StageTiming};

pub use analyze::{analyze_potential, AnalysisOutput};
pub use config::{Fault, Mode, Overrides, PotentialSpec, RunConfig};

/// Exit status for a completed run whose validation failed.
pub const EXIT_VALIDATION: i32 = 4;

pub struct RunOutcome {
    pub report: RunReport,
    pub tables: SpectraTables,
}

impl RunOutcome {
    /// 0, or [`EXIT_VALIDATION`] when a validation check failed.
    pub fn exit_code(&self) -> i32 {
        match &self.report.validation {
            Some(v) if !v.passed => EXIT_VALIDATION,
            _ => 0,
        }
    }
}

struct Stopwatch {
    stages: Vec<StageTiming>,
    last: Instant,
}

impl Stopwatch {
    fn new() -> Self {
        Self { stages: Vec::new(), last: Instant::now() }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.stages.push(StageTiming { stage: stage.into(), seconds: (now - self.last).as_secs_f64() });
        self.last = now;
    }
}

/// Runs `cfg.mode` after validating the configuration.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let potential = cfg.build_potential()?;
    let mut clock = Stopwatch::new();
    let mut report = RunReport {
        tool: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        mode: cfg.mode,
        config: cfg.clone(),
        analysis: None,
        pencil: None,
        validation: None,
        sweep: None,
        timing: None,
    };
    let mut tables = SpectraTables::default();

    if cfg.mode == Mode::Sweep {
        report.sweep = Some(sweep::sweep(cfg, &potential)?);
        clock.lap("sweep");
    } else {
        let out = analyze_potential(cfg, &potential)?;
        clock.lap("analysis");
        tables.fd = Some(out.fd_eigenvalues);
        tables.fourier = Some(out.fourier_eigenvalues);
        if matches!(cfg.mode, Mode::Pencil | Mode::Validate) {
            let pencil = validate::run_pencil(cfg, &potential, cfg.mode == Mode::Validate)?;
            clock.lap("pencil");
            if cfg.mode == Mode::Validate {
                report.validation = Some(validate::validation_checks(cfg, &out.analysis, &pencil)?);
            }
            tables.pencil = Some(pencil.classified);
            report.pencil = Some(pencil.section);
        }
        report.analysis = Some(out.analysis);
    }
    if cfg.output.include_timing {
        report.timing = Some(clock.stages);
    }
    Ok(RunOutcome { report, tables })
}
