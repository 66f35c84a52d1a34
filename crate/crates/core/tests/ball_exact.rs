use std::f64::consts::PI;

use steklov_core::ball::{
    degree_roots, derivative_formula, derivative_numeric, neumann_ball_spectrum,
    neumann_ball_spectrum_with, neumann_char, niwa_annulus_lambda1, steklov_ball_spectrum,
    ScanOptions,
};
use steklov_core::{BallProblem, ConcentratedDensity, Error};

fn disk() -> BallProblem {
    BallProblem::new(2, 2.0 * PI).unwrap()
}

#[test]
fn zero_is_always_the_first_eigenvalue() {
    let p = disk();
    for eps in [0.2, 0.1, 0.01] {
        let d = ConcentratedDensity::new(&p, eps).unwrap();
        let s = neumann_ball_spectrum(&d, &p, 3).unwrap();
        assert_eq!(s.eigenvalues[0], 0.0);
        assert_eq!(s.cluster_of(0), Some(0..1));
    }
}

#[test]
fn every_root_sits_in_a_sign_change_bracket() {
    let p = disk();
    let d = ConcentratedDensity::new(&p, 0.1).unwrap();
    for k in 0..4 {
        for r in degree_roots(k, &d, &p, 40.0, 0.05).unwrap() {
            let lo = neumann_char(k, r.lo, &d, &p).unwrap();
            let hi = neumann_char(k, r.hi, &d, &p).unwrap();
            assert!(lo.signum() != hi.signum() || lo == 0.0 || hi == 0.0);
            assert!(r.hi - r.lo <= 1e-12 * r.hi);
        }
    }
}

#[test]
fn degree_one_modes_are_double_on_the_disk() {
    let p = disk();
    let d = ConcentratedDensity::new(&p, 0.05).unwrap();
    let s = neumann_ball_spectrum(&d, &p, 7).unwrap();
    assert_eq!(s.eigenvalues[1], s.eigenvalues[2]);
    assert_eq!(s.labels[1].degree, 1);
    assert_eq!(s.cluster_of(1), Some(1..3));
    assert_eq!(s.cluster_of(3), Some(3..5));
}

#[test]
fn three_dimensional_multiplicities() {
    let p = BallProblem::new(3, 4.0 * PI).unwrap();
    let d = ConcentratedDensity::new(&p, 0.05).unwrap();
    let s = neumann_ball_spectrum(&d, &p, 9).unwrap();
    assert_eq!(s.cluster_of(1), Some(1..4));
    assert_eq!(s.cluster_of(4), Some(4..9));
    assert!(s.eigenvalues[1] > 1.0 && s.eigenvalues[1] < 1.1);
}

#[test]
fn approaches_steklov_from_above() {
    let p = disk();
    let limit = steklov_ball_spectrum(&p, 6).unwrap();
    let mut previous = [f64::INFINITY; 6];
    for eps in [0.1, 0.05, 0.025, 0.0125] {
        let d = ConcentratedDensity::new(&p, eps).unwrap();
        let s = neumann_ball_spectrum(&d, &p, 6).unwrap();
        for j in 1..6 {
            let gap = s.eigenvalues[j] - limit.eigenvalues[j];
            assert!(gap > 0.0, "j={j} eps={eps}");
            assert!(gap < previous[j], "j={j} eps={eps}");
            previous[j] = gap;
        }
    }
}

#[test]
fn small_window_reports_exhaustion() {
    let p = disk();
    let d = ConcentratedDensity::new(&p, 0.1).unwrap();
    let opts = ScanOptions {
        lambda_max: Some(1.5),
        step: None,
    };
    match neumann_ball_spectrum_with(&d, &p, 6, &opts) {
        Err(Error::ScanExhausted {
            found, requested, ..
        }) => {
            assert_eq!(requested, 6);
            assert_eq!(found, 3);
        }
        other => panic!("expected exhaustion, got {other:?}"),
    }
}

#[test]
fn numeric_derivative_matches_closed_form_on_disk() {
    let p = disk();
    let est = derivative_numeric(&p, 1, &[0.08, 0.04, 0.02, 0.01]).unwrap();
    let want = derivative_formula(&p, 1.0);
    assert!(
        (est.slope - want).abs() < 0.01 * want,
        "{} vs {want}",
        est.slope
    );
    assert!(est.quotients.iter().all(|&q| q > 0.0));
    assert_eq!(est.table.len(), 4);

    let zero = derivative_numeric(&p, 0, &[0.08, 0.04, 0.02]).unwrap();
    assert_eq!(zero.slope, 0.0);
}

#[test]
fn annulus_eigenvalue_grows_with_width() {
    let grid: Vec<f64> = (0..10).map(|i| 0.05 + 0.05 * i as f64).collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&e| niwa_annulus_lambda1(e).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]), "{values:?}");
    for &e in &[0.1, 0.33, 0.6] {
        let a = niwa_annulus_lambda1(e).unwrap();
        let b = niwa_annulus_lambda1(e + 1e-6).unwrap();
        assert!((a - b).abs() < 1e-3);
    }
}

#[test]
fn annulus_recovers_disk_as_hole_closes() {
    // (j'_{1,1})^2 for the full disk, j'_{1,1} = 1.8411837813406593
    let disk_value = 1.841_183_781_340_659_3_f64.powi(2);
    let nearly_full = niwa_annulus_lambda1(1.0 - 1e-6).unwrap();
    assert!((nearly_full - disk_value).abs() < 1e-3, "{nearly_full}");
}
