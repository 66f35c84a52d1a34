use nalgebra::DMatrix;
use steklov_core::ball::neumann_ball_spectrum;
use steklov_core::fem::{
    assemble_boundary_mass, assemble_interior_mass, generate_disk_mesh, neumann_fem,
    sample_concentrated, steklov_fem, DiskMeshBuilder, EigenMethod, SolverOptions,
};
use steklov_core::{BallProblem, ConcentratedDensity};

fn unit_boundary(mesh: &steklov_core::fem::Mesh, value: f64) -> Vec<f64> {
    vec![value; mesh.boundary_edges().len()]
}

#[test]
fn steklov_disk_converges_at_second_order() {
    let mut errors = Vec::new();
    for r in 3..=6 {
        let mesh = generate_disk_mesh(r).unwrap();
        let rho = 1.0 / (2.0 * std::f64::consts::PI);
        let s = steklov_fem(
            &mesh,
            &unit_boundary(&mesh, rho),
            6,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-10);
        let exact = [0.0, 2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI];
        errors.push((s.eigenvalues[1] - exact[1]).abs() / exact[1]);
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.8, "observed order {order}, errors {errors:?}");
    }
}

#[test]
fn solvers_agree_on_a_disk() {
    let mesh = generate_disk_mesh(4).unwrap();
    let rho = unit_boundary(&mesh, 1.0);
    let dense = SolverOptions {
        method: EigenMethod::Dense,
        ..Default::default()
    };
    let sub = SolverOptions {
        method: EigenMethod::Subspace,
        ..Default::default()
    };
    let a = steklov_fem(&mesh, &rho, 8, &dense).unwrap();
    let b = steklov_fem(&mesh, &rho, 8, &sub).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() < 1e-10, "{x} vs {y}");
    }
}

#[test]
fn eigenvectors_are_b_orthonormal_and_satisfy_rayleigh() {
    let mesh = generate_disk_mesh(5).unwrap();
    let rho: Vec<f64> = mesh
        .boundary_angles()
        .iter()
        .map(|t| 1.0 + 0.3 * t.cos())
        .collect();
    // per edge: average of its two vertex values
    let n = rho.len();
    let edge_rho: Vec<f64> = (0..n).map(|e| 0.5 * (rho[e] + rho[(e + 1) % n])).collect();
    let s = steklov_fem(&mesh, &edge_rho, 6, &SolverOptions::default()).unwrap();
    let k = DMatrix::from(&steklov_core::fem::assemble_stiffness(&mesh).unwrap());
    let b = DMatrix::from(&assemble_boundary_mass(&mesh, &edge_rho).unwrap());
    let gram = s.eigenvectors.transpose() * &b * &s.eigenvectors;
    assert!((gram - DMatrix::identity(6, 6)).amax() < 1e-8);
    for j in 0..6 {
        let u = s.eigenvectors.column(j);
        let q = (u.transpose() * &k * u)[(0, 0)];
        assert!((q - s.eigenvalues[j]).abs() < 1e-8 * s.eigenvalues[j].max(1.0));
    }
    assert_eq!(s.boundary_traces.nrows(), mesh.boundary_vertices().len());
    let v = mesh.boundary_vertices()[3];
    assert_eq!(s.boundary_traces[(3, 2)], s.eigenvectors[(v, 2)]);
}

#[test]
fn eigenvalues_scale_inversely_with_density() {
    let mesh = generate_disk_mesh(4).unwrap();
    let a = steklov_fem(
        &mesh,
        &unit_boundary(&mesh, 1.0),
        5,
        &SolverOptions::default(),
    )
    .unwrap();
    let b = steklov_fem(
        &mesh,
        &unit_boundary(&mesh, 2.5),
        5,
        &SolverOptions::default(),
    )
    .unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - 2.5 * y).abs() < 1e-10);
    }
}

#[test]
fn nested_meshes_decrease_eigenvalues() {
    let problem = BallProblem::new(2, 2.0 * std::f64::consts::PI).unwrap();
    let density = ConcentratedDensity::new(&problem, 0.25).unwrap();
    let mut previous: Option<Vec<f64>> = None;
    for r in 3..=5 {
        // unaligned nested meshes: the density sample changes, so compare
        // the constant-density Neumann problem only
        let mesh = generate_disk_mesh(r).unwrap();
        let s = neumann_fem(
            &mesh,
            &vec![1.0; mesh.triangles().len()],
            6,
            &SolverOptions::default(),
        )
        .unwrap();
        if let Some(p) = &previous {
            for (fine, coarse) in s.eigenvalues.iter().zip(p) {
                assert!(*fine <= coarse + 1e-12);
            }
        }
        previous = Some(s.eigenvalues);
    }
    let mesh = DiskMeshBuilder::new(16)
        .align(density.interface_radius())
        .build()
        .unwrap();
    let rho = sample_concentrated(&mesh, &density);
    let m = DMatrix::from(&assemble_interior_mass(&mesh, &rho).unwrap());
    let mass: f64 = m.iter().sum();
    assert!((mass - density.total_mass(&problem)).abs() < 0.02);
}

#[test]
fn neumann_fem_matches_ball_spectrum() {
    let problem = BallProblem::new(2, 2.0 * std::f64::consts::PI).unwrap();
    let density = ConcentratedDensity::new(&problem, 0.1).unwrap();
    let exact = neumann_ball_spectrum(&density, &problem, 4).unwrap();
    let mesh = DiskMeshBuilder::new(32).align(0.9).build().unwrap();
    let rho = sample_concentrated(&mesh, &density);
    let s = neumann_fem(&mesh, &rho, 4, &SolverOptions::default()).unwrap();
    for j in 1..4 {
        let rel = (s.eigenvalues[j] - exact.eigenvalues[j]).abs() / exact.eigenvalues[j];
        assert!(
            rel < 5e-3,
            "j = {j}: fem {} exact {}",
            s.eigenvalues[j],
            exact.eigenvalues[j]
        );
    }
}

#[test]
fn concentrated_neumann_tends_to_steklov() {
    // 40 uniform rings put a ring on 1 - ε for each ε below
    let mesh = DiskMeshBuilder::new(40).build().unwrap();
    let problem = BallProblem::new(2, 2.0 * std::f64::consts::PI).unwrap();
    let steklov = steklov_fem(
        &mesh,
        &unit_boundary(&mesh, 1.0),
        4,
        &SolverOptions::default(),
    )
    .unwrap();
    let mut gaps = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let density = ConcentratedDensity::new(&problem, eps).unwrap();
        let rho = sample_concentrated(&mesh, &density);
        let s = neumann_fem(&mesh, &rho, 4, &SolverOptions::default()).unwrap();
        gaps.push((s.eigenvalues[1] - steklov.eigenvalues[1]).abs());
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}
