//! Run configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{KreinError, Result};
use crate::potentials::{Potential, ProblemParams, SampledPotential};
use crate::spectra::DEFAULT_KERNEL_TOL;
use crate::pencil::DEFAULT_TOL_CLASS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    /// `scale` defaults to `−c²ν(ν+1)`.
    PoschlTeller {
        nu: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
    },
    GaussianWell {
        depth: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    SquareWell {
        depth: f64,
        half_width: f64,
    },
    /// Two-column CSV `x,value` with a header row; relative paths resolve
    /// against the config file's directory.
    Sampled {
        path: PathBuf,
    },
    Sum {
        terms: Vec<PotentialSpec>,
    },
    Scaled {
        base: Box<PotentialSpec>,
        factor: f64,
    },
}

impl PotentialSpec {
    pub fn build(&self, params: ProblemParams, base_dir: &Path) -> Result<Potential> {
        Ok(match self {
            Self::Zero => Potential::Zero,
            Self::PoschlTeller { nu, scale } => {
                let scale = scale.unwrap_or(-params.c() * params.c() * nu * (nu + 1.0));
                Potential::poschl_teller(*nu, scale)?
            }
            Self::GaussianWell { depth, width, center } => Potential::gaussian_well(*depth, *width, *center)?,
            Self::SquareWell { depth, half_width } => Potential::square_well(*depth, *half_width)?,
            Self::Sampled { path } => {
                let resolved = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                Potential::Sampled(SampledPotential::from_csv(&resolved)?)
            }
            Self::Sum { terms } => {
                Potential::sum(terms.iter().map(|t| t.build(params, base_dir)).collect::<Result<_>>()?)
            }
            Self::Scaled { base, factor } => Potential::scaled(base.build(params, base_dir)?, *factor),
        })
    }

    pub fn is_sampled(&self) -> bool {
        match self {
            Self::Sampled { .. } => true,
            Self::Sum { terms } => terms.iter().any(PotentialSpec::is_sampled),
            Self::Scaled { base, .. } => base.is_sampled(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Analyze,
    Sweep,
    Pencil,
    Validate,
}

/// Deliberate faults for exercising the validation checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    #[default]
    None,
    /// Flip the sign of 𝒥 on the mode `k = +1`.
    FlipSignature,
    /// Negate 𝐃 before it enters the Fourier-side index formula.
    NegateD,
    /// Add `0.1i` to the largest real pencil eigenvalue.
    BreakSymmetry,
    /// Build the Fourier model from `1.5·V`.
    PerturbFourierPotential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    /// Interior finite-difference nodes.
    #[serde(default = "default_n_fd")]
    pub n_fd: usize,
    #[serde(default = "default_n_fourier")]
    pub n_fourier: usize,
}

fn default_half_width() -> f64 {
    20.0
}
fn default_n_fd() -> usize {
    2000
}
fn default_n_fourier() -> usize {
    512
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { half_width: default_half_width(), n_fd: default_n_fd(), n_fourier: default_n_fourier() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Required for sampled potentials; defaults to `1e−4` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_tol: Option<f64>,
    /// Defaults to `1e−6 ‖ψ₀′‖²/(2bc)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degeneracy_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_class: Option<f64>,
    /// Pencil eigenvalues with `|z| ≤ zero_window·2bc` count as zero; defaults to `kernel_tol`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_window: Option<f64>,
    /// Near-kernel eigenvalues within this multiple of the kernel window are
    /// sharpened by amplitude bisection; 0 disables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharpen_factor: Option<f64>,
    /// Relative tolerance of the `𝐃` vs `D_V` comparison; defaults to `1e−3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_formula_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub s_min: f64,
    pub s_max: f64,
    /// 0-based index of the tracked eigenvalue (1 = second lowest).
    #[serde(default = "default_branch")]
    pub branch: usize,
    /// Bisection stops once `|λ_k| ≤ tolerance·2bc`.
    #[serde(default = "default_bisection_tol")]
    pub tolerance: f64,
    #[serde(default = "default_net_points")]
    pub net_points: usize,
}

fn default_branch() -> usize {
    1
}
fn default_bisection_tol() -> f64 {
    1e-9
}
fn default_net_points() -> usize {
    41
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// JSON report path; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    /// Directory for CSV spectra; none written when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_dir: Option<PathBuf>,
    #[serde(default)]
    pub include_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_constant")]
    pub b: f64,
    #[serde(default = "default_constant")]
    pub c: f64,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub fault: Fault,
    /// Longest Jordan chain searched for at zero.
    #[serde(default = "default_chain_len")]
    pub max_chain_len: usize,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_constant() -> f64 {
    1.0
}
fn default_chain_len() -> usize {
    4
}

/// Command-line overrides; `None` leaves the file value alone.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Mass term b > 0
    #[arg(long)]
    pub b: Option<f64>,
    /// Wave speed c > 0
    #[arg(long)]
    pub c: Option<f64>,
    /// Truncation half-width X for both grids.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Interior finite-difference nodes.
    #[arg(long)]
    pub points: Option<usize>,
    /// Fourier collocation nodes (even).
    #[arg(long)]
    pub modes: Option<usize>,
    /// Half-width of the zero-eigenvalue window
    #[arg(long)]
    pub kernel_tol: Option<f64>,
    /// Mode for `run`; the other subcommands fix their own
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for CSV spectra.
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub fault: Option<Fault>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| KreinError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| KreinError::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base).map_err(|e| match e {
            KreinError::Config(m) => KreinError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// A config for `potential` with every other field at its default.
    pub fn with_potential(potential: PotentialSpec) -> Self {
        Self {
            mode: Mode::default(),
            b: 1.0,
            c: 1.0,
            potential,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            sweep: None,
            output: OutputConfig::default(),
            fault: Fault::None,
            max_chain_len: default_chain_len(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(b) = o.b {
            self.b = b;
        }
        if let Some(c) = o.c {
            self.c = c;
        }
        if let Some(x) = o.half_width {
            self.grid.half_width = x;
        }
        if let Some(n) = o.points {
            self.grid.n_fd = n;
        }
        if let Some(n) = o.modes {
            self.grid.n_fourier = n;
        }
        if let Some(t) = o.kernel_tol {
            self.tolerances.kernel_tol = Some(t);
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        if let Some(p) = &o.out {
            self.output.json = Some(p.clone());
        }
        if let Some(d) = &o.csv_dir {
            self.output.csv_dir = Some(d.clone());
        }
        if let Some(f) = o.fault {
            self.fault = f;
        }
    }

    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.b, self.c).map_err(|e| KreinError::Config(e.to_string()))
    }

    pub fn kernel_tol(&self) -> f64 {
        self.tolerances.kernel_tol.unwrap_or(DEFAULT_KERNEL_TOL)
    }

    pub fn tol_class(&self) -> f64 {
        self.tolerances.tol_class.unwrap_or(DEFAULT_TOL_CLASS)
    }

    pub fn zero_window(&self) -> f64 {
        self.tolerances.zero_window.unwrap_or_else(|| self.kernel_tol())
    }

    pub fn sharpen_factor(&self) -> f64 {
        self.tolerances.sharpen_factor.unwrap_or(10.0)
    }

    pub fn cross_formula_tol(&self) -> f64 {
        self.tolerances.cross_formula_tol.unwrap_or(1e-3)
    }

    pub fn build_potential(&self) -> Result<Potential> {
        self.potential.build(self.params()?, &self.base_dir)
    }

    /// Checks every constraint that does not need the potential data.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(KreinError::Config(m));
        self.params()?;
        let g = &self.grid;
        if !(g.half_width.is_finite() && g.half_width > 0.0) {
            return bad(format!("grid.half_width must be positive, got {}", g.half_width));
        }
        if g.n_fd < 3 {
            return bad(format!("grid.n_fd must be at least 3, got {}", g.n_fd));
        }
        if g.n_fourier < 8 || !g.n_fourier.is_multiple_of(2) {
            return bad(format!("grid.n_fourier must be even and at least 8, got {}", g.n_fourier));
        }
        if self.potential.is_sampled() && self.tolerances.kernel_tol.is_none() {
            return bad("sampled potentials need an explicit tolerances.kernel_tol".into());
        }
        let t = &self.tolerances;
        for (name, value) in [
            ("kernel_tol", t.kernel_tol),
            ("degeneracy_tol", t.degeneracy_tol),
            ("tol_class", t.tol_class),
            ("zero_window", t.zero_window),
            ("cross_formula_tol", t.cross_formula_tol),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return bad(format!("tolerances.{name} must be positive, got {v}"));
                }
            }
        }
        if let Some(f) = t.sharpen_factor {
            if !(f.is_finite() && f >= 0.0) {
                return bad(format!("tolerances.sharpen_factor must be nonnegative, got {f}"));
            }
        }
        if self.max_chain_len < 2 {
            return bad(format!("max_chain_len must be at least 2, got {}", self.max_chain_len));
        }
        if self.mode == Mode::Sweep {
            let Some(s) = &self.sweep else {
                return bad("sweep mode needs a [sweep] table".into());
            };
            if !(s.s_min.is_finite() && s.s_max.is_finite() && s.s_min < s.s_max) {
                return bad(format!("sweep needs s_min < s_max, got [{}, {}]", s.s_min, s.s_max));
            }
            if s.net_points < 2 {
                return bad(format!("sweep.net_points must be at least 2, got {}", s.net_points));
            }
            if s.branch >= g.n_fd {
                return bad(format!("sweep.branch {} exceeds the grid size {}", s.branch, g.n_fd));
            }
            if !(s.tolerance.is_finite() && s.tolerance > 0.0) {
                return bad(format!("sweep.tolerance must be positive, got {}", s.tolerance));
            }
        }
        Ok(())
    }
}
