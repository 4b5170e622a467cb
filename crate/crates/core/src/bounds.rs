//! A priori bounds on the number of non-positive eigenvalues.

use serde::{Deserialize, Serialize};

use crate::potentials::{negative_part_moments, Potential, ProblemParams};

/// Simpson nodes per unit length used by the bounds.
pub const POINTS_PER_UNIT: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// `1 + c⁻² ∫|x| |min(V + b², 0)|`, absent when `V ≥ −b²` on the grid.
    pub bargmann: Option<f64>,
    /// `(2bc)⁻¹ ∫|V₋|`.
    pub birman_schwinger: f64,
    pub kappa_minus_observed: usize,
    pub kernel_dim: usize,
    /// Integrals only cover `[−X, X]`.
    pub note: String,
}

impl BoundsReport {
    pub fn new(p: &Potential, params: ProblemParams, half_width: f64, kappa_minus: usize, kernel_dim: usize) -> Self {
        Self {
            bargmann: bargmann_bound(p, params, half_width),
            birman_schwinger: birman_schwinger_bound(p, params, half_width),
            kappa_minus_observed: kappa_minus,
            kernel_dim,
            note: format!("integrals over [-{half_width}, {half_width}] are lower bounds on the full-line values"),
        }
    }

    /// `κ₋ ≤ Bargmann` (when present) and `κ₋ + dim ker ≤ Birman–Schwinger`.
    pub fn holds(&self) -> bool {
        let bargmann_ok = self.bargmann.is_none_or(|b| self.kappa_minus_observed as f64 <= b);
        let bargmann_absent_ok = self.bargmann.is_some() || self.kappa_minus_observed == 0;
        let bs_ok = (self.kappa_minus_observed + self.kernel_dim) as f64 <= self.birman_schwinger;
        bargmann_ok && bargmann_absent_ok && bs_ok
    }
}

fn quad_points(half_width: f64) -> usize {
    ((2.0 * half_width * POINTS_PER_UNIT as f64).ceil() as usize).max(2)
}

pub fn bargmann_bound(p: &Potential, params: ProblemParams, half_width: f64) -> Option<f64> {
    let (first, _) = negative_part_moments(p, params, half_width, quad_points(half_width));
    // A dip below −b² touching only x = 0 has zero first moment but still counts.
    let n = quad_points(half_width);
    let b2 = params.schrodinger_threshold();
    let dips = (0..=n).any(|i| {
        let x = -half_width + 2.0 * half_width * i as f64 / n as f64;
        p.eval(x) + b2 < 0.0
    });
    (dips || first > 0.0).then(|| 1.0 + first / (params.c() * params.c()))
}

pub fn birman_schwinger_bound(p: &Potential, params: ProblemParams, half_width: f64) -> f64 {
    let (_, second) = negative_part_moments(p, params, half_width, quad_points(half_width));
    second / params.threshold()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ProblemParams {
        ProblemParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn free_problem() {
        assert_eq!(bargmann_bound(&Potential::Zero, unit(), 20.0), None);
        assert_eq!(birman_schwinger_bound(&Potential::Zero, unit(), 20.0), 0.0);
        let report = BoundsReport::new(&Potential::Zero, unit(), 20.0, 0, 0);
        assert!(report.holds());
        assert!(!BoundsReport::new(&Potential::Zero, unit(), 20.0, 1, 0).holds());
    }

    #[test]
    fn repulsive_potential() {
        let p = Potential::gaussian_well(3.0, 1.0, 0.0).unwrap();
        assert_eq!(birman_schwinger_bound(&p, unit(), 10.0), 0.0);
        assert_eq!(bargmann_bound(&p, unit(), 10.0), None);
    }

    #[test]
    fn poschl_teller_values() {
        let p = Potential::poschl_teller(2.0, -6.0).unwrap();
        let bs = birman_schwinger_bound(&p, unit(), 20.0);
        assert!((bs - 6.0).abs() < 1e-6);
        let bargmann = bargmann_bound(&p, unit(), 20.0).unwrap();
        let x0 = 6f64.sqrt().acosh();
        let exact = 1.0 + 2.0 * (6.0 * (x0 * x0.tanh() - x0.cosh().ln()) - 0.5 * x0 * x0);
        assert!((bargmann - exact).abs() < 1e-4, "{bargmann} vs {exact}");
        assert!(BoundsReport::new(&p, unit(), 20.0, 1, 1).holds());
    }

    #[test]
    fn bargmann_grows_with_amplitude() {
        let base = Potential::gaussian_well(-1.0, 1.0, 0.0).unwrap();
        let values: Vec<f64> = [1.5, 2.0, 4.0, 8.0]
            .iter()
            .map(|&s| bargmann_bound(&Potential::scaled(base.clone(), s), unit(), 10.0).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] >= w[0]), "{values:?}");
    }
}
