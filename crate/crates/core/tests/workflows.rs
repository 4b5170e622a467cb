//! Library-level workflow checks against hand-assembled computations.

use proptest::prelude::*;

use krein_index::index::{compute_dv, kappa_ham_formula, Verdict};
use krein_index::potentials::{Potential, ProblemParams};
use krein_index::report::{from_json, to_json};
use krein_index::run::config::SweepConfig;
use krein_index::run::sweep::locate_crossings;
use krein_index::run::{analyze_potential, execute, Mode, PotentialSpec, RunConfig};
use krein_index::schrodinger_fd::{assemble_h, Grid};
use krein_index::spectra::{eig_hermitian, tridiagonal_eigenvalues};

fn unit() -> ProblemParams {
    ProblemParams::new(1.0, 1.0).unwrap()
}

fn small(spec: PotentialSpec) -> RunConfig {
    let mut cfg = RunConfig::with_potential(spec);
    cfg.grid.n_fd = 1000;
    cfg.grid.n_fourier = 128;
    cfg
}

#[test]
fn analyze_matches_hand_assembled_pipeline() {
    let mut cfg = small(PotentialSpec::PoschlTeller { nu: 2.0, scale: Some(-6.0) });
    cfg.grid.n_fd = 2000;
    let a = analyze_potential(&cfg, &cfg.build_potential().unwrap()).unwrap().analysis;

    let g = Grid::new(20.0, 2000).unwrap();
    let s = eig_hermitian(&assemble_h(&Potential::poschl_teller(2.0, -6.0).unwrap(), unit(), &g), unit(), 1e-4).unwrap();
    let k = s.detect_kernel().unwrap();
    let d_v = compute_dv(&s, &k, &g).unwrap();
    let expected = kappa_ham_formula(s.count_negative(), k.dimension, Some(d_v), 1e-9).unwrap();
    assert_eq!(a.index.kappa_minus, expected.kappa_minus);
    assert_eq!(a.index.kappa_ham, expected.kappa_ham);
    assert_eq!(a.index.d_v, Some(d_v));
    assert_eq!(a.index.verdict, Verdict::Unstable);
    assert!(a.sharpening.is_none());
    assert_eq!(a.fd.eigenvalues_below_threshold.len(), 2);
}

#[test]
fn analyze_free_and_deeper_well() {
    let free = small(PotentialSpec::Zero);
    let a = analyze_potential(&free, &Potential::Zero).unwrap().analysis;
    assert_eq!(a.index.verdict, Verdict::NoNegativeSpectrum);
    assert!(a.jordan_chain.is_none() && a.bounds.bargmann.is_none());

    // The zero mode of −12 sech² needs sharpening on this grid.
    let mut deep = RunConfig::with_potential(PotentialSpec::PoschlTeller { nu: 3.0, scale: None });
    deep.grid.n_fourier = 128;
    let a = analyze_potential(&deep, &deep.build_potential().unwrap()).unwrap().analysis;
    assert_eq!((a.index.kappa_minus, a.index.kernel_dim), (2, 1));
    assert_eq!(a.index.verdict, Verdict::Unstable);
    let sh = a.sharpening.expect("zero mode sits outside the window at n = 2000");
    assert!((sh.amplitude - 1.0).abs() < 1e-3 && sh.sharpened_eigenvalue.abs() < 1e-9);

    deep.tolerances.sharpen_factor = Some(0.0);
    let raw = analyze_potential(&deep, &deep.build_potential().unwrap()).unwrap().analysis;
    assert!(raw.sharpening.is_none());
    assert_eq!(raw.index.kappa_minus, 3, "without sharpening the zero mode counts as negative");
}

#[test]
fn report_is_deterministic_and_round_trips() {
    let mut cfg = small(PotentialSpec::GaussianWell { depth: -3.0, width: 1.0, center: 0.5 });
    cfg.mode = Mode::Validate;
    let first = to_json(&execute(&cfg).unwrap().report).unwrap();
    let second = to_json(&execute(&cfg).unwrap().report).unwrap();
    assert_eq!(first, second);
    assert_eq!(to_json(&from_json(&first).unwrap()).unwrap(), first);

    cfg.output.include_timing = true;
    let timed = execute(&cfg).unwrap().report;
    assert!(timed.timing.unwrap().iter().any(|t| t.stage == "pencil"));
}

#[test]
fn sweep_crossings_reevaluate_inside_tolerance() {
    let mut cfg = small(PotentialSpec::PoschlTeller { nu: 2.0, scale: Some(-1.0) });
    cfg.mode = Mode::Sweep;
    cfg.sweep = Some(SweepConfig { s_min: 1.0, s_max: 13.0, branch: 1, tolerance: 1e-9, net_points: 25 });
    let report = execute(&cfg).unwrap().report;
    let sw = report.sweep.unwrap();
    // ν(ν+1) = s: the second level vanishes at ν = 2 (s = 6) and the third at ν = 3.
    assert_eq!(sw.crossings.len(), 1);
    let c = &sw.crossings[0];
    assert!((c.s - 6.0).abs() < 2e-3, "{c:?}");
    let g = Grid::new(20.0, 1000).unwrap();
    let h = assemble_h(&Potential::poschl_teller(2.0, -c.s).unwrap(), unit(), &g);
    assert!(tridiagonal_eigenvalues(&h, 1, 1).unwrap()[0].abs() <= 1e-9 * 2.0);
    let a = c.analysis.as_ref().unwrap();
    assert_eq!((a.index.kappa_minus, a.index.kernel_dim), (1, 1));

    cfg.sweep.as_mut().unwrap().branch = 2;
    let third = execute(&cfg).unwrap().report.sweep.unwrap();
    assert!(third.crossings.iter().any(|c| (c.s - 12.0).abs() < 1e-2), "{:?}", third.crossings);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn crossing_count_grows_with_range(lo in 0.5f64..5.0, width in 0.5f64..10.0, extra in 0.0f64..8.0) {
        let g = Grid::new(15.0, 300).unwrap();
        let p = Potential::poschl_teller(2.0, -1.0).unwrap();
        // Same step, so the wide net contains every narrow node.
        let narrow = SweepConfig { s_min: lo, s_max: lo + width, branch: 1, tolerance: 1e-8, net_points: 9 };
        let k = ((width + extra) / width).ceil().max(1.0);
        let wide = SweepConfig { s_max: lo + width * k, net_points: 1 + 8 * k as usize, ..narrow.clone() };
        let a = locate_crossings(&p, unit(), &g, &narrow).unwrap().crossings.len();
        let b = locate_crossings(&p, unit(), &g, &wide).unwrap().crossings.len();
        prop_assert!(b >= a, "narrow {a} wide {b}");
    }
}
