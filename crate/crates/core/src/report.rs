//! Run reports and their deterministic JSON / CSV emission.
//!
//! JSON objects come out with sorted keys and every float printed with 17
//! significant digits, so identical runs give identical bytes and a report
//! re-emitted after parsing is unchanged.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::bounds::BoundsReport;
use crate::error::{KreinError, Result};
use crate::index::IndexReport;
use crate::pencil::{ClassifiedEigenvalue, PencilCounts, SymmetryReport};
use crate::run::config::{Fault, Mode, RunConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub mode: Mode,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<Analysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pencil: Option<PencilSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Vec<StageTiming>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialChecks {
    /// `sup_n ∫_n^{n+1}|V|` over the grid.
    pub m_v: f64,
    /// Largest unit-window integral of `|V|` with `X/2 ≤ |x| ≤ X`.
    pub decay_defect: f64,
    pub tail: [f64; 2],
}

/// Amplitude rescaling applied to the finite-difference potential so that a
/// near-kernel eigenvalue just outside the window becomes an exact kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sharpening {
    pub amplitude: f64,
    pub position: usize,
    pub raw_eigenvalue: f64,
    pub sharpened_eigenvalue: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub discretization: String,
    pub dimension: usize,
    /// Bottom of the essential spectrum of the continuum operator.
    pub threshold: f64,
    pub eigenvalues_below_threshold: Vec<f64>,
    pub kernel_window: f64,
    pub kappa_minus: usize,
    pub kernel_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_eigenvalue: Option<f64>,
}

impl SpectrumSummary {
    /// Summary of ascending `values`. A kernel needs exactly one candidate;
    /// ambiguity is reported by the caller's own detection.
    pub fn from_values(discretization: &str, values: &[f64], threshold: f64, kernel_window: f64) -> Self {
        let candidates: Vec<f64> = values.iter().copied().filter(|v| v.abs() <= kernel_window).collect();
        Self {
            discretization: discretization.to_string(),
            dimension: values.len(),
            threshold,
            eigenvalues_below_threshold: values.iter().copied().filter(|&v| v < threshold).collect(),
            kernel_window,
            kappa_minus: values.iter().filter(|&&v| v < -kernel_window).count(),
            kernel_dim: candidates.len(),
            kernel_eigenvalue: (candidates.len() == 1).then(|| candidates[0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub length: usize,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub potential_checks: PotentialChecks,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharpening: Option<Sharpening>,
    pub fd: SpectrumSummary,
    pub fourier: SpectrumSummary,
    pub kappa_minus_agree: bool,
    pub index: IndexReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degeneracy_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jordan_chain: Option<ChainSummary>,
    pub bounds: BoundsReport,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PencilSection {
    pub n_modes: usize,
    pub dimension: usize,
    pub exactified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub removed_eigenvalue: Option<f64>,
    pub kappa_minus_l: usize,
    pub kernel_dim_l: usize,
    pub min_eigenvalue_l: f64,
    /// `𝐃` for a kernel function of unit `L²` norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_krein: Option<f64>,
    /// `D_V` evaluated on the same Fourier grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_v_fourier: Option<f64>,
    pub counts: PencilCounts,
    pub symmetry: SymmetryReport,
    pub max_residual: f64,
    /// Eigenvalues off the real axis, inside the gap, or Krein-negative.
    pub notable_eigenvalues: Vec<ClassifiedEigenvalue>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, ok: bool, detail: String) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        Self { name: name.to_string(), status, detail }
    }

    pub fn not_applicable(name: &str, detail: String) -> Self {
        Self { name: name.to_string(), status: CheckStatus::NotApplicable, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSection {
    pub passed: bool,
    pub fault: Fault,
    pub checks: Vec<Check>,
}

impl ValidationSection {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetPoint {
    pub s: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub s: f64,
    pub lambda: f64,
    pub bracket: [f64; 2],
    pub iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<Analysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub branch: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub tolerance: f64,
    pub net: Vec<NetPoint>,
    pub crossings: Vec<Crossing>,
    pub gap_warnings: Vec<String>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Full spectra kept out of the JSON and written as CSV on request.
#[derive(Debug, Clone, Default)]
pub struct SpectraTables {
    pub fd: Option<Vec<f64>>,
    pub fourier: Option<Vec<f64>>,
    pub pencil: Option<Vec<ClassifiedEigenvalue>>,
}

/// Pretty printing with floats as `d.dddddddddddddddde±x`.
struct ReportFormatter {
    inner: PrettyFormatter<'static>,
}

impl Formatter for ReportFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Any serializable value as deterministic JSON text (sorted keys, trailing newline).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    // Going through `Value` sorts object keys.
    let tree = serde_json::to_value(value).map_err(|e| KreinError::InvalidInput(format!("report serialization: {e}")))?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ReportFormatter { inner: PrettyFormatter::new() });
    tree.serialize(&mut ser).map_err(|e| KreinError::InvalidInput(format!("report serialization: {e}")))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

pub fn to_json(report: &RunReport) -> Result<String> {
    to_json_string(report)
}

pub fn from_json(text: &str) -> Result<RunReport> {
    serde_json::from_str(text).map_err(|e| KreinError::Config(format!("malformed report: {e}")))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| KreinError::Io { path: path.to_path_buf(), source })
}

fn csv_error(path: &Path, e: impl std::fmt::Display) -> KreinError {
    KreinError::Csv { path: path.to_path_buf(), message: e.to_string() }
}

/// `index,lambda` rows.
pub fn write_hermitian_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["index", "lambda"]).map_err(|e| csv_error(path, e))?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([i.to_string(), format!("{v:.16e}")]).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|source| KreinError::Io { path: path.to_path_buf(), source })
}

/// `index,re,im,class` rows.
pub fn write_pencil_csv(path: &Path, values: &[ClassifiedEigenvalue]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["index", "re", "im", "class"]).map_err(|e| csv_error(path, e))?;
    for (i, e) in values.iter().enumerate() {
        w.write_record([i.to_string(), format!("{:.16e}", e.re), format!("{:.16e}", e.im), format!("{:?}", e.class)])
            .map_err(|err| csv_error(path, err))?;
    }
    w.flush().map_err(|source| KreinError::Io { path: path.to_path_buf(), source })
}

/// Writes the JSON report (to `json_path`, or returns it for stdout) and the
/// CSV tables into `csv_dir`. Returns the JSON text and the CSV paths written.
pub fn emit(
    report: &RunReport,
    tables: &SpectraTables,
    json_path: Option<&Path>,
    csv_dir: Option<&Path>,
) -> Result<(String, Vec<PathBuf>)> {
    let text = to_json(report)?;
    if let Some(path) = json_path {
        write_file(path, text.as_bytes())?;
    }
    let mut written = Vec::new();
    if let Some(dir) = csv_dir {
        std::fs::create_dir_all(dir).map_err(|source| KreinError::Io { path: dir.to_path_buf(), source })?;
        if let Some(values) = &tables.fd {
            let p = dir.join("fd_spectrum.csv");
            write_hermitian_csv(&p, values)?;
            written.push(p);
        }
        if let Some(values) = &tables.fourier {
            let p = dir.join("fourier_spectrum.csv");
            write_hermitian_csv(&p, values)?;
            written.push(p);
        }
        if let Some(values) = &tables.pencil {
            let p = dir.join("pencil_spectrum.csv");
            write_pencil_csv(&p, values)?;
            written.push(p);
        }
    }
    Ok((text, written))
}
