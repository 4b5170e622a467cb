//! Real potentials `V(x)` and the integral quantities used to check the
//! local-integrability and decay hypotheses.
//!
//! Quadrature is composite Simpson on uniform sub-grids whose end points are
//! placed on every jump/kink of the potential, with one-sided limits taken at
//! those end points, so piecewise-constant and piecewise-linear potentials
//! integrate exactly.

use std::path::Path;

use crate::error::{KreinError, Result};

/// Nodes per unit window used by [`m_v`] and [`decay_defect`].
pub const DEFAULT_WINDOW_POINTS: usize = 201;

/// The constants `b > 0`, `c > 0` of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    b: f64,
    c: f64,
}

impl ProblemParams {
    pub fn new(b: f64, c: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0 && c.is_finite() && c > 0.0) {
            return Err(KreinError::InvalidInput(format!(
                "b and c must be positive and finite (b = {b}, c = {c})"
            )));
        }
        Ok(Self { b, c })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `2bc`, the bottom of the essential spectrum of the Krein-space operator.
    pub fn threshold(&self) -> f64 {
        2.0 * self.b * self.c
    }

    /// `b²`, the bottom of the essential spectrum of the Schrödinger operator.
    pub fn schrodinger_threshold(&self) -> f64 {
        self.b * self.b
    }
}

/// A potential sampled on a strictly ascending grid, linearly interpolated
/// between nodes and extended by zero outside `[xs[0], xs[n-1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPotential {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl SampledPotential {
    pub fn new(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if xs.len() != vs.len() {
            return Err(KreinError::DimensionMismatch { expected: xs.len(), got: vs.len() });
        }
        if xs.len() < 2 {
            return Err(KreinError::InvalidInput("a sampled potential needs at least 2 nodes".into()));
        }
        if xs.iter().chain(&vs).any(|v| !v.is_finite()) {
            return Err(KreinError::InvalidInput("sampled potential contains non-finite values".into()));
        }
        if let Some(w) = xs.windows(2).find(|w| w[1] <= w[0]) {
            return Err(KreinError::InvalidInput(format!(
                "sample grid must be strictly ascending ({} followed by {})",
                w[0], w[1]
            )));
        }
        Ok(Self { xs, vs })
    }

    /// Reads a two-column `x,value` CSV with a header row.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let csv_err = |message: String| KreinError::Csv { path: path.to_path_buf(), message };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(source) => KreinError::Io { path: path.to_path_buf(), source },
                other => csv_err(format!("{other:?}")),
            })?;
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_err(e.to_string()))?;
            if record.len() != 2 {
                return Err(csv_err(format!("row {} has {} columns, expected 2", line + 2, record.len())));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| csv_err(format!("row {}: cannot parse {s:?} as a number", line + 2)))
            };
            xs.push(parse(&record[0])?);
            vs.push(parse(&record[1])?);
        }
        Self::new(xs, vs).map_err(|e| csv_err(e.to_string()))
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn vs(&self) -> &[f64] {
        &self.vs
    }

    fn eval_side(&self, x: f64, side: Side) -> f64 {
        let (lo, hi) = (self.xs[0], self.xs[self.xs.len() - 1]);
        let inside = match side {
            Side::Point => lo <= x && x <= hi,
            Side::Right => lo <= x && x < hi,
            Side::Left => lo < x && x <= hi,
        };
        if !inside {
            return 0.0;
        }
        let j = self.xs.partition_point(|&node| node <= x);
        if j == 0 {
            return self.vs[0];
        }
        if j >= self.xs.len() {
            return self.vs[self.xs.len() - 1];
        }
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let t = (x - x0) / (x1 - x0);
        self.vs[j - 1] * (1.0 - t) + self.vs[j] * t
    }
}

/// A real-valued potential on the line.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `V ≡ 0`.
    Zero,
    /// `scale · sech²(x)`. `nu` labels the bound-state family: when
    /// `scale = −c²ν(ν+1)` the levels are `b² − c²(ν−k)²`, see
    /// [`poschl_teller_levels`].
    PoschlTeller { nu: f64, scale: f64 },
    /// `depth · exp(−((x − center)/width)²)`.
    GaussianWell { depth: f64, width: f64, center: f64 },
    /// `depth` on `|x| < half_width`, zero outside.
    SquareWell { depth: f64, half_width: f64 },
    Sampled(SampledPotential),
    Sum(Vec<Potential>),
    Scaled { base: Box<Potential>, factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Point,
    Left,
    Right,
}

impl Potential {
    pub fn poschl_teller(nu: f64, scale: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0 && scale.is_finite()) {
            return Err(KreinError::InvalidInput(format!("Pöschl–Teller needs nu > 0 (got nu = {nu}, scale = {scale})")));
        }
        Ok(Self::PoschlTeller { nu, scale })
    }

    pub fn gaussian_well(depth: f64, width: f64, center: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0 && depth.is_finite() && center.is_finite()) {
            return Err(KreinError::InvalidInput(format!("Gaussian well needs width > 0 (got {width})")));
        }
        Ok(Self::GaussianWell { depth, width, center })
    }

    pub fn square_well(depth: f64, half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0 && depth.is_finite()) {
            return Err(KreinError::InvalidInput(format!("square well needs half_width > 0 (got {half_width})")));
        }
        Ok(Self::SquareWell { depth, half_width })
    }

    pub fn sampled(xs: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        SampledPotential::new(xs, vs).map(Self::Sampled)
    }

    pub fn sum(terms: Vec<Potential>) -> Self {
        Self::Sum(terms)
    }

    pub fn scaled(base: Potential, factor: f64) -> Self {
        Self::Scaled { base: Box::new(base), factor }
    }

    /// `V(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_side(x, Side::Point)
    }

    fn eval_side(&self, x: f64, side: Side) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::PoschlTeller { scale, .. } => {
                let ch = x.cosh();
                scale / (ch * ch)
            }
            Self::GaussianWell { depth, width, center } => {
                let t = (x - center) / width;
                depth * (-t * t).exp()
            }
            Self::SquareWell { depth, half_width } => {
                let inside = match side {
                    Side::Point => x.abs() < *half_width,
                    Side::Right => -half_width <= x && x < *half_width,
                    Side::Left => -half_width < x && x <= *half_width,
                };
                if inside {
                    *depth
                } else {
                    0.0
                }
            }
            Self::Sampled(s) => s.eval_side(x, side),
            Self::Sum(terms) => terms.iter().map(|t| t.eval_side(x, side)).sum(),
            Self::Scaled { base, factor } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * base.eval_side(x, side)
                }
            }
        }
    }

    /// Points where the potential may jump or kink.
    fn collect_breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            Self::SquareWell { half_width, .. } => out.extend([-half_width, *half_width]),
            Self::Sampled(s) => out.extend_from_slice(&s.xs),
            Self::Sum(terms) => terms.iter().for_each(|t| t.collect_breakpoints(out)),
            Self::Scaled { base, factor } if *factor != 0.0 => base.collect_breakpoints(out),
            _ => {}
        }
    }

    pub fn is_sampled(&self) -> bool {
        match self {
            Self::Sampled(_) => true,
            Self::Sum(terms) => terms.iter().any(Potential::is_sampled),
            Self::Scaled { base, .. } => base.is_sampled(),
            _ => false,
        }
    }
}

/// Closed-form levels `b² − c²(ν − k)²`, `k = 0, 1, …` with `ν − k > 0`, of
/// `−c² d²/dx² + b² − c²ν(ν+1) sech² x`.
pub fn poschl_teller_levels(nu: f64, params: ProblemParams) -> Vec<f64> {
    let c2 = params.c() * params.c();
    (0..)
        .map(|k| nu - k as f64)
        .take_while(|m| *m > 0.0)
        .map(|m| params.schrodinger_threshold() - c2 * m * m)
        .collect()
}

/// Composite Simpson of `g(x, V(x))` over `[a, b]`, split at the potential's
/// breakpoints and at `extra_breaks`.
fn integrate<G>(p: &Potential, a: f64, b: f64, quad_points: usize, extra_breaks: &[f64], g: G) -> f64
where
    G: Fn(f64, f64) -> f64,
{
    assert!(quad_points >= 2, "quadrature needs at least 2 points");
    if b <= a {
        return 0.0;
    }
    let mut cuts = Vec::new();
    p.collect_breakpoints(&mut cuts);
    cuts.extend_from_slice(extra_breaks);
    cuts.retain(|&t| t > a && t < b);
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let total_intervals = (quad_points - 1).max(2) as f64;
    cuts.windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let mut n = ((total_intervals * (hi - lo) / (b - a)).ceil() as usize).max(2);
            if n % 2 == 1 {
                n += 1;
            }
            let h = (hi - lo) / n as f64;
            let mut acc = g(lo, p.eval_side(lo, Side::Right)) + g(hi, p.eval_side(hi, Side::Left));
            for i in 1..n {
                let x = lo + i as f64 * h;
                let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += weight * g(x, p.eval(x));
            }
            acc * h / 3.0
        })
        .sum()
}

/// `∫_x^{x+1} |V(s)| ds` by composite Simpson with about `quad_points` nodes.
///
/// Panics if `quad_points < 2`.
pub fn window_integral(p: &Potential, x: f64, quad_points: usize) -> f64 {
    integrate(p, x, x + 1.0, quad_points, &[], |_, v| v.abs())
}

/// Largest unit-window integral `∫_n^{n+1}|V|` over integers `|n| ≤ search_half_width`.
pub fn m_v(p: &Potential, search_half_width: f64) -> f64 {
    let reach = search_half_width.max(0.0).floor() as i64;
    (-reach..=reach)
        .map(|n| window_integral(p, n as f64, DEFAULT_WINDOW_POINTS))
        .fold(0.0, f64::max)
}

/// Largest unit-window integral of `|V|` in the tails `tail_start ≤ |x| ≤ tail_end`.
///
/// For an integer `m` in range the windows are `[m, m+1]` and `[−m−1, −m]`,
/// so every window lies in `|s| ≥ tail_start`.
///
/// Panics unless `tail_end > tail_start`.
pub fn decay_defect(p: &Potential, tail_start: f64, tail_end: f64) -> f64 {
    assert!(tail_end > tail_start, "decay_defect needs tail_end > tail_start");
    let first = tail_start.max(0.0).ceil() as i64;
    let last = tail_end.floor() as i64;
    (first..=last)
        .flat_map(|m| [m as f64, -(m as f64) - 1.0])
        .map(|x| window_integral(p, x, DEFAULT_WINDOW_POINTS))
        .fold(0.0, f64::max)
}

/// `(∫_{−X}^{X} |x|·|min{V + b², 0}| dx, ∫_{−X}^{X} |V₋| dx)` with `V₋ = min{V, 0}`.
///
/// Panics if `quad_points < 2`.
pub fn negative_part_moments(
    p: &Potential,
    params: ProblemParams,
    half_width: f64,
    quad_points: usize,
) -> (f64, f64) {
    let b2 = params.schrodinger_threshold();
    let first = integrate(p, -half_width, half_width, quad_points, &[0.0], |x, v| {
        x.abs() * (v + b2).min(0.0).abs()
    });
    let second = integrate(p, -half_width, half_width, quad_points, &[0.0], |_, v| v.min(0.0).abs());
    (first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt2() -> Potential {
        Potential::poschl_teller(2.0, -6.0).unwrap()
    }

    fn unit() -> ProblemParams {
        ProblemParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(pt2().eval(0.0), -6.0);
        assert_eq!(Potential::scaled(pt2(), 0.0).eval(3.7), 0.0);
        let s = Potential::sampled(vec![0.0, 1.0], vec![2.0, 4.0]).unwrap();
        assert!((s.eval(0.5) - 3.0).abs() < 1e-15);
        assert_eq!(s.eval(-0.1), 0.0);
        assert_eq!(s.eval(1.1), 0.0);
        let sum = Potential::sum(vec![pt2(), Potential::square_well(-1.0, 2.0).unwrap()]);
        assert!((sum.eval(0.5) - (pt2().eval(0.5) - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn invalid_constructors() {
        assert!(ProblemParams::new(0.0, 1.0).is_err());
        assert!(ProblemParams::new(1.0, -2.0).is_err());
        assert!(Potential::sampled(vec![0.0], vec![1.0]).is_err());
        assert!(Potential::sampled(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Potential::sampled(vec![1.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Potential::gaussian_well(-1.0, 0.0, 0.0).is_err());
        assert!(Potential::square_well(-1.0, -1.0).is_err());
    }

    #[test]
    fn window_integral_examples() {
        assert_eq!(window_integral(&Potential::Zero, 0.0, 10), 0.0);
        let sq = Potential::square_well(-3.0, 5.0).unwrap();
        assert!((window_integral(&sq, 0.0, 3) - 3.0).abs() < 1e-14);
        // window straddling the jump at x = 5: exact thanks to breakpoint alignment
        assert!((window_integral(&sq, 4.5, 3) - 1.5).abs() < 1e-14);
        let coarse = window_integral(&pt2(), 0.0, 1_000);
        let fine = window_integral(&pt2(), 0.0, 10_000);
        assert!((coarse - fine).abs() < 1e-8);
        // antiderivative oracle: ∫_0^1 6 sech² = 6 tanh 1
        assert!((fine - 6.0 * 1f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn window_integral_error_shrinks() {
        let exact = 6.0 * (1.3f64.tanh() - 0.3f64.tanh());
        let errs: Vec<f64> = [3, 5, 9, 17, 33]
            .iter()
            .map(|&n| (window_integral(&pt2(), 0.3, n) - exact).abs())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
    }

    #[test]
    fn m_v_examples() {
        assert_eq!(m_v(&Potential::Zero, 10.0), 0.0);
        let sq = Potential::square_well(-3.0, 5.0).unwrap();
        assert!((m_v(&sq, 20.0) - 3.0).abs() < 1e-13);
        // brute-force over windows: [−1,0] and [0,1] both give 6 tanh 1
        let brute = (-30..=30)
            .map(|n| 6.0 * (((n + 1) as f64).tanh() - (n as f64).tanh()))
            .fold(0.0, f64::max);
        assert!((m_v(&pt2(), 30.0) - brute).abs() < 1e-10);
        assert!((brute - 6.0 * 1f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn decay_defect_examples() {
        assert_eq!(decay_defect(&Potential::Zero, 1.0, 5.0), 0.0);
        let xs: Vec<f64> = (0..=100).map(|i| -5.0 + 0.1 * i as f64).collect();
        let vs: Vec<f64> = xs.iter().map(|x| -(25.0 - x * x)).collect();
        let compact = Potential::sampled(xs, vs).unwrap();
        assert_eq!(decay_defect(&compact, 6.0, 12.0), 0.0);
        let tail = decay_defect(&pt2(), 10.0, 20.0);
        assert!(tail <= 4.0 * 6.0 * (-20.0f64).exp(), "tail {tail:e}");
        // analytic window [10, 11]
        let exact = 6.0 * (11f64.tanh() - 10f64.tanh());
        assert!((tail - exact).abs() < 1e-3 * exact);
    }

    #[test]
    fn negative_part_moments_examples() {
        assert_eq!(negative_part_moments(&Potential::Zero, unit(), 10.0, 101), (0.0, 0.0));
        let (_, mass) = negative_part_moments(&pt2(), unit(), 20.0, 40_001);
        assert!((mass - 12.0 * 20f64.tanh()).abs() < 1e-9);
        let shallow = Potential::gaussian_well(-0.9, 1.0, 0.0).unwrap();
        let (first, second) = negative_part_moments(&shallow, unit(), 10.0, 2_001);
        assert_eq!(first, 0.0);
        assert!((second - 0.9 * std::f64::consts::PI.sqrt()).abs() < 1e-6);
        // first moment of the Pöschl–Teller well: ∫|x|·max(6 sech² x − 1, 0)
        let (moment, _) = negative_part_moments(&pt2(), unit(), 20.0, 200_001);
        let x0 = 6f64.sqrt().acosh();
        // ∫_0^{x0} x (6 sech² − 1) dx = 6 (x0 tanh x0 − ln cosh x0) − x0²/2, doubled
        let exact = 2.0 * (6.0 * (x0 * x0.tanh() - x0.cosh().ln()) - 0.5 * x0 * x0);
        assert!((moment - exact).abs() < 1e-6, "{moment} vs {exact}");
    }

    #[test]
    fn poschl_teller_levels_closed_form() {
        assert_eq!(poschl_teller_levels(2.0, unit()), vec![-3.0, 0.0]);
        assert_eq!(poschl_teller_levels(3.0, unit()), vec![-8.0, -3.0, 0.0]);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        std::fs::write(&path, "x,value\n-1,0\n0,-2.5\n1,0\n").unwrap();
        let s = SampledPotential::from_csv(&path).unwrap();
        assert_eq!(s.xs(), &[-1.0, 0.0, 1.0]);
        assert_eq!(s.vs(), &[0.0, -2.5, 0.0]);
        std::fs::write(&path, "x,value\n0,1\n0,2\n").unwrap();
        assert!(matches!(SampledPotential::from_csv(&path), Err(KreinError::Csv { .. })));
        std::fs::write(&path, "x,value\n0,abc\n1,2\n").unwrap();
        assert!(SampledPotential::from_csv(&path).is_err());
        assert!(matches!(
            SampledPotential::from_csv(&dir.path().join("missing.csv")),
            Err(KreinError::Io { .. })
        ));
    }

    fn arb_potential() -> impl Strategy<Value = Potential> {
        prop_oneof![
            (0.5f64..4.0, -20.0f64..20.0).prop_map(|(nu, s)| Potential::poschl_teller(nu, s).unwrap()),
            (-5.0f64..5.0, 0.2f64..3.0, -3.0f64..3.0)
                .prop_map(|(d, w, c)| Potential::gaussian_well(d, w, c).unwrap()),
            (-5.0f64..5.0, 0.2f64..6.0).prop_map(|(d, h)| Potential::square_well(d, h).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn scaling_is_linear(p in arb_potential(), s in -4.0f64..4.0, x in -10.0f64..10.0) {
            let scaled = Potential::scaled(p.clone(), s).eval(x);
            prop_assert!((scaled - s * p.eval(x)).abs() <= 1e-12 * (1.0 + scaled.abs()));
            prop_assert_eq!(Potential::scaled(p.clone(), 1.0).eval(x), p.eval(x));
        }

        #[test]
        fn window_integral_subadditive(p in arb_potential(), q in arb_potential(), x in -6.0f64..6.0) {
            let both = Potential::sum(vec![p.clone(), q.clone()]);
            let lhs = window_integral(&both, x, 401);
            let rhs = window_integral(&p, x, 401) + window_integral(&q, x, 401);
            prop_assert!(lhs >= 0.0);
            prop_assert!(lhs <= rhs + 1e-6 * (1.0 + rhs));
        }

        #[test]
        fn search_ranges_are_monotone(p in arb_potential(), r in 0.0f64..8.0, extra in 0.0f64..4.0) {
            prop_assert!(m_v(&p, r) <= m_v(&p, r + extra));
            prop_assert!(decay_defect(&p, 1.0, 2.0 + r) <= decay_defect(&p, 1.0, 2.0 + r + extra));
        }
    }
}
