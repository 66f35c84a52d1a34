//! Linear finite elements for weighted Steklov and Neumann problems in 2D.

pub mod assembly;
pub mod eigen;
pub mod mesh;

pub use assembly::{
    assemble_boundary_mass, assemble_interior_mass, assemble_stiffness, boundary_matrix,
    boundary_quadratic_form, sample_radial,
};
pub use eigen::{solve_generalized, DiscreteSpectrum, EigenMethod, SolverOptions};
pub use mesh::{generate_disk_mesh, generate_disk_mesh_aligned, DiskMeshBuilder, Mesh};

use nalgebra::DMatrix;

use crate::ball::ConcentratedDensity;
use crate::error::Result;

fn with_traces(mesh: &Mesh, mut spectrum: DiscreteSpectrum) -> DiscreteSpectrum {
    let bv = mesh.boundary_vertices();
    spectrum.boundary_traces = DMatrix::from_fn(bv.len(), spectrum.len(), |i, j| {
        spectrum.eigenvectors[(bv[i], j)]
    });
    spectrum
}

/// `-Δu = 0` in Ω, `∂u/∂n = λ ρ u` on ∂Ω, with `ρ` given per boundary edge.
pub fn steklov_fem(
    mesh: &Mesh,
    boundary_density: &[f64],
    count: usize,
    options: &SolverOptions,
) -> Result<DiscreteSpectrum> {
    let k = assemble_stiffness(mesh)?;
    let b = assemble_boundary_mass(mesh, boundary_density)?;
    Ok(with_traces(
        mesh,
        solve_generalized(&k, &b, count, options)?,
    ))
}

/// `-Δu = λ ρ u` in Ω, `∂u/∂n = 0` on ∂Ω, with `ρ` given per triangle.
pub fn neumann_fem(
    mesh: &Mesh,
    density: &[f64],
    count: usize,
    options: &SolverOptions,
) -> Result<DiscreteSpectrum> {
    let k = assemble_stiffness(mesh)?;
    let m = assemble_interior_mass(mesh, density)?;
    Ok(with_traces(
        mesh,
        solve_generalized(&k, &m, count, options)?,
    ))
}

/// Per-triangle values of a concentrated density, sampled at centroids.
pub fn sample_concentrated(mesh: &Mesh, density: &ConcentratedDensity) -> Vec<f64> {
    sample_radial(mesh, |r| density.value_at(r))
}
