use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KreinError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV {path}: {message}")]
    Csv { path: PathBuf, message: String },

    /// LAPACK returned a nonzero `info`.
    #[error("{routine} failed to converge (info = {info}) on a {dimension}x{dimension} matrix with norm {norm:.6e}")]
    NonConvergence {
        routine: &'static str,
        info: i32,
        dimension: usize,
        norm: f64,
    },

    #[error("eigenpair residual {residual:.3e} exceeds bound {bound:.3e} (eigenvalue index {index})")]
    ResidualTooLarge {
        index: usize,
        residual: f64,
        bound: f64,
    },

    #[error("kernel ambiguity: {} eigenvalues inside the kernel window {window:.3e}: {candidates:?}", candidates.len())]
    KernelAmbiguity { candidates: Vec<f64>, window: f64 },

    #[error("operator has no kernel inside the window {window:.3e}")]
    KernelAbsent { window: f64 },

    #[error("vector not in range: overlap with the kernel is {overlap:.3e} (allowed {allowed:.3e})")]
    NotInRange { overlap: f64, allowed: f64 },

    #[error("derivative of the kernel vector is not orthogonal to it: defect {defect:.3e}")]
    OrthogonalityDefect { defect: f64 },
}

pub type Result<T> = std::result::Result<T, KreinError>;

impl KreinError {
    /// Process exit status: 2 for configuration and input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } | Self::Csv { .. } | Self::InvalidInput(_) => 2,
            _ => 3,
        }
    }
}
