//! Hamiltonian–Krein instability index for the spectral problem
//! `−c² y″ + b² y + V(x) y = −i z y′` on the real line.
//!
//! The index is computed two ways: from the negative spectrum of the
//! Schrödinger operator `H_V` plus the sign of the scalar `D_V` (finite
//! differences), and by classifying the eigenvalues of the Krein-space pencil
//! `𝒥𝓛` assembled on a periodic Fourier grid.

// Forces the system OpenBLAS/LAPACK to be linked.
extern crate openblas_src;

pub mod bounds;
pub mod error;
pub mod index;
pub mod krein_fourier;
mod lapack;
pub mod pencil;
pub mod potentials;
pub mod report;
pub mod run;
pub mod schrodinger_fd;
pub mod spectra;

pub use error::{KreinError, Result};
pub use potentials::{Potential, ProblemParams};
