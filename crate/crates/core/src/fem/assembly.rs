//! P1 stiffness and mass matrices.

use nalgebra_sparse::{CooMatrix, CscMatrix};

use super::mesh::Mesh;
use crate::error::{Error, Result};

/// Smallest triangle area (relative to the mesh area) the assembler accepts.
const AREA_FLOOR: f64 = 1e-14;

/// Area and the barycentric gradients of a triangle.
fn triangle_geometry(p: [[f64; 2]; 3]) -> (f64, [[f64; 2]; 3]) {
    let area = 0.5
        * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let twice = 2.0 * area;
    let mut grads = [[0.0; 2]; 3];
    for k in 0..3 {
        let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
        grads[k] = [(a[1] - b[1]) / twice, (b[0] - a[0]) / twice];
    }
    (area, grads)
}

fn check_areas(mesh: &Mesh) -> Result<()> {
    let total: f64 = mesh.area().abs();
    for t in 0..mesh.triangles().len() {
        let a = mesh.triangle_area(t);
        if !(a > AREA_FLOOR * total) {
            return Err(Error::Mesh(format!("triangle {t} has area {a:e}")));
        }
    }
    Ok(())
}

fn check_density(values: &[f64], expected: usize, what: &str) -> Result<()> {
    if values.len() != expected {
        return Err(Error::InvalidInput(format!(
            "{what} density has {} values, expected {expected}",
            values.len()
        )));
    }
    if let Some(i) = values.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{what} density must be positive, entry {i} is {}",
            values[i]
        )));
    }
    Ok(())
}

/// `K_ij = ∫ ∇φ_i · ∇φ_j`.
pub fn assemble_stiffness(mesh: &Mesh) -> Result<CscMatrix<f64>> {
    check_areas(mesh)?;
    let n = mesh.num_vertices();
    let mut coo = CooMatrix::new(n, n);
    for tri in mesh.triangles() {
        let (area, g) = triangle_geometry(tri.map(|i| mesh.vertices()[i]));
        for a in 0..3 {
            for b in 0..3 {
                let v = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                coo.push(tri[a], tri[b], v);
            }
        }
    }
    Ok(CscMatrix::from(&coo))
}

/// `M_ij = ∫ ρ φ_i φ_j` with `ρ` constant on each triangle.
pub fn assemble_interior_mass(mesh: &Mesh, density: &[f64]) -> Result<CscMatrix<f64>> {
    check_areas(mesh)?;
    check_density(density, mesh.triangles().len(), "interior")?;
    let n = mesh.num_vertices();
    let mut coo = CooMatrix::new(n, n);
    for (tri, &rho) in mesh.triangles().iter().zip(density) {
        let (area, _) = triangle_geometry(tri.map(|i| mesh.vertices()[i]));
        for a in 0..3 {
            for b in 0..3 {
                let w = if a == b { 2.0 } else { 1.0 };
                coo.push(tri[a], tri[b], rho * area * w / 12.0);
            }
        }
    }
    Ok(CscMatrix::from(&coo))
}

/// `B_ij = ∫_∂Ω ρ φ_i φ_j` with `ρ` constant on each boundary edge.
pub fn assemble_boundary_mass(mesh: &Mesh, density: &[f64]) -> Result<CscMatrix<f64>> {
    check_density(density, mesh.boundary_edges().len(), "boundary")?;
    Ok(boundary_matrix(mesh, density))
}

/// Boundary mass with arbitrary (possibly signed) edge weights.
pub fn boundary_matrix(mesh: &Mesh, weights: &[f64]) -> CscMatrix<f64> {
    let n = mesh.num_vertices();
    let mut coo = CooMatrix::new(n, n);
    for (e, (&[a, b], &w)) in mesh.boundary_edges().iter().zip(weights).enumerate() {
        let l = mesh.edge_length(e) * w / 6.0;
        coo.push(a, a, 2.0 * l);
        coo.push(b, b, 2.0 * l);
        coo.push(a, b, l);
        coo.push(b, a, l);
    }
    CscMatrix::from(&coo)
}

/// `∫_∂Ω w u²` for a nodal `u` and per-edge weights `w`; `w` may change sign.
pub fn boundary_quadratic_form(mesh: &Mesh, u: &[f64], weights: &[f64]) -> f64 {
    mesh.boundary_edges()
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(e, (&[a, b], &w))| {
            let (ua, ub) = (u[a], u[b]);
            w * mesh.edge_length(e) / 3.0 * (ua * ua + ua * ub + ub * ub)
        })
        .sum()
}

/// Samples a radial density at triangle centroids.
pub fn sample_radial(mesh: &Mesh, density: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..mesh.triangles().len())
        .map(|t| {
            let [x, y] = mesh.centroid(t);
            density(x.hypot(y))
        })
        .collect()
}
