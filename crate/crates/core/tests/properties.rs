use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use steklov_core::fem::{
    assemble_boundary_mass, assemble_stiffness, generate_disk_mesh, SolverOptions,
};
use steklov_core::perturb::{mass, steklov_at, BoundaryFunction};
use steklov_core::specfun::{bessel_jy, BesselOrder};
use steklov_core::{BallProblem, ConcentratedDensity};

fn trig_density(c: &[f64]) -> impl Fn(f64) -> f64 + '_ {
    move |t| 1.0 + 0.3 * (c[0] * t.cos() + c[1] * (2.0 * t).sin() + c[2] * (3.0 * t).cos())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wronskian_identity(twice in 0u32..=40, x in 0.05f64..80.0) {
        let v = bessel_jy(BesselOrder::from_twice(twice), x).unwrap();
        let w = v.j * v.y_prime - v.j_prime * v.y;
        let want = 2.0 / (PI * x);
        prop_assert!(((w - want) / want).abs() < 1e-8, "{} vs {}", w, want);
    }

    #[test]
    fn concentrated_density_keeps_mass(
        dim in 2usize..=5,
        m in 0.5f64..20.0,
        eps in 0.001f64..0.25,
    ) {
        let problem = BallProblem::new(dim, m).unwrap();
        let d = ConcentratedDensity::new(&problem, eps).unwrap();
        prop_assert!((d.total_mass(&problem) - m).abs() < 1e-12 * m);
        prop_assert_eq!(d.inner_value(), eps);
        prop_assert!(d.annulus_value() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rayleigh_and_orthonormality(c in prop::array::uniform3(-1.0f64..1.0)) {
        let mesh = generate_disk_mesh(4).unwrap();
        let rho = BoundaryFunction::from_angle(&mesh, trig_density(&c));
        let s = steklov_at(&mesh, &rho, 6, &SolverOptions::default()).unwrap();
        let k = DMatrix::from(&assemble_stiffness(&mesh).unwrap());
        let b = DMatrix::from(&assemble_boundary_mass(&mesh, &rho.edge_values()).unwrap());
        let gram = s.eigenvectors.transpose() * &b * &s.eigenvectors;
        prop_assert!((gram - DMatrix::identity(6, 6)).amax() < 1e-8);
        for j in 0..6 {
            let u = s.eigenvectors.column(j);
            let q = (u.transpose() * &k * u)[(0, 0)];
            prop_assert!((q - s.eigenvalues[j]).abs() < 1e-8 * s.eigenvalues[j].max(1.0));
        }
    }

    #[test]
    fn eigenvalues_scale_inversely(c in prop::array::uniform3(-1.0f64..1.0), scale in 0.1f64..10.0) {
        let mesh = generate_disk_mesh(3).unwrap();
        let rho = BoundaryFunction::from_angle(&mesh, trig_density(&c));
        let a = steklov_at(&mesh, &rho, 5, &SolverOptions::default()).unwrap();
        let b = steklov_at(&mesh, &rho.scaled(scale), 5, &SolverOptions::default()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues).skip(1) {
            prop_assert!((x - scale * y).abs() < 1e-10 * x);
        }
        prop_assert!((mass(&mesh, &rho.scaled(scale)) - scale * mass(&mesh, &rho)).abs() < 1e-12);
    }

    #[test]
    fn refinement_lowers_constant_density_spectrum(m in 0.5f64..20.0) {
        let mut previous: Option<Vec<f64>> = None;
        for r in 2..=4 {
            let mesh = generate_disk_mesh(r).unwrap();
            let rho = BoundaryFunction::constant(&mesh, m / (2.0 * PI));
            let s = steklov_at(&mesh, &rho, 6, &SolverOptions::default()).unwrap();
            if let Some(p) = &previous {
                for (fine, coarse) in s.eigenvalues.iter().zip(p).skip(1) {
                    prop_assert!(*fine <= *coarse * (1.0 + 1e-12));
                }
            }
            previous = Some(s.eigenvalues);
        }
    }
}
