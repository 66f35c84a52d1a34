//! Density perturbation of eigenvalue clusters: symmetric functions of a
//! cluster, their differential with respect to the density, and the
//! stationarity test under a mass constraint.

mod bandle_hersch;

pub use bandle_hersch::{
    bandle_hersch_check, discretization_tolerance, symmetric_density_sampler, BandleHerschReport,
    TrialOutcome, Violation,
};

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CscMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_boundary_mass, assemble_interior_mass, boundary_quadratic_form, steklov_fem,
    DiscreteSpectrum, Mesh, SolverOptions,
};
use crate::spectrum::relative_gap;

/// Eigenvalues closer than this (relative) are one cluster.
pub const MERGE_GAP: f64 = 1e-4;
/// Eigenvalues further apart than this (relative) are distinct clusters.
pub const SPLIT_GAP: f64 = 1e-2;
/// Eigenvalues below this magnitude are taken as exactly zero.
pub const ZERO_SNAP: f64 = 1e-10;
/// Profile deviation below which a density counts as critical.
pub const CRITICALITY_THRESHOLD: f64 = 1e-3;

/// Elementary symmetric polynomial `e_h` of `values`.
pub fn symmetric_function(values: &[f64], h: usize) -> Result<f64> {
    if h == 0 || h > values.len() {
        return Err(Error::InvalidInput(format!(
            "symmetric function order must lie in 1..={}, got {h}",
            values.len()
        )));
    }
    Ok(elementary(values)[h])
}

/// `[e_0, e_1, ..., e_n]` by the one-term-at-a-time recurrence.
fn elementary(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &v) in values.iter().enumerate() {
        for h in (1..=i + 1).rev() {
            e[h] += v * e[h - 1];
        }
    }
    e
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// An index set `F` split into clusters of (numerically) equal eigenvalues,
/// each separated from the rest of the spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPartition {
    clusters: Vec<Vec<usize>>,
    values: Vec<f64>,
}

impl ClusterPartition {
    /// Splits `indices` (consecutive, increasing) into clusters of the sorted
    /// `eigenvalues`. Neighbours closer than [`MERGE_GAP`] merge, neighbours
    /// further than [`SPLIT_GAP`] separate, and anything in between is
    /// refused. The values just outside the index range must be separated.
    pub fn certify(eigenvalues: &[f64], indices: &[usize]) -> Result<Self> {
        let (&first, &last) = match (indices.first(), indices.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InvalidInput("empty index set".into())),
        };
        if indices.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::InvalidInput(format!(
                "index set {indices:?} is not a consecutive range"
            )));
        }
        if last + 1 >= eigenvalues.len() {
            return Err(Error::InvalidInput(format!(
                "certifying index {last} needs eigenvalue {} as well, only {} computed",
                last + 1,
                eigenvalues.len()
            )));
        }
        let snap = |v: f64| if v.abs() < ZERO_SNAP { 0.0 } else { v };
        let classify = |i: usize| -> Result<bool> {
            let (a, b) = (snap(eigenvalues[i]), snap(eigenvalues[i + 1]));
            let g = relative_gap(a, b);
            if g < MERGE_GAP {
                Ok(true)
            } else if g > SPLIT_GAP {
                Ok(false)
            } else {
                Err(Error::Partition(format!(
                    "eigenvalues {i} and {} ({a}, {b}) have relative gap {g:.3e}, between \
                     {MERGE_GAP:e} and {SPLIT_GAP:e}",
                    i + 1
                )))
            }
        };
        if first > 0 && classify(first - 1)? {
            return Err(Error::Partition(format!(
                "eigenvalue {first} coincides with eigenvalue {}",
                first - 1
            )));
        }
        if classify(last)? {
            return Err(Error::Partition(format!(
                "eigenvalue {last} coincides with eigenvalue {}",
                last + 1
            )));
        }
        let mut clusters = vec![vec![first]];
        for i in first..last {
            if classify(i)? {
                clusters.last_mut().expect("nonempty").push(i + 1);
            } else {
                clusters.push(vec![i + 1]);
            }
        }
        let values = clusters
            .iter()
            .map(|c| snap(c.iter().map(|&i| eigenvalues[i]).sum::<f64>() / c.len() as f64))
            .collect();
        Ok(Self { clusters, values })
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    /// Common eigenvalue of each cluster.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// All indices of `F`.
    pub fn indices(&self) -> Vec<usize> {
        self.clusters.iter().flatten().copied().collect()
    }

    /// `|F|`
    pub fn size(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// `Λ_{F,h}` at the common cluster values.
    pub fn symmetric_function(&self, h: usize) -> Result<f64> {
        let expanded: Vec<f64> = self
            .clusters
            .iter()
            .zip(&self.values)
            .flat_map(|(c, &v)| std::iter::repeat_n(v, c.len()))
            .collect();
        symmetric_function(&expanded, h)
    }

    /// The weights `c_k` of the differential of `Λ_{F,h}`: the sum over
    /// `h_1 + ... + h_n = h` of
    /// `C(|F_k|-1, h_k-1) λ_k^{h_k} Π_{j≠k} C(|F_j|, h_j) λ_j^{h_j}`.
    pub fn coefficients(&self, h: usize) -> Result<Vec<f64>> {
        let size = self.size();
        if h == 0 || h > size {
            return Err(Error::InvalidInput(format!(
                "symmetric function order must lie in 1..={size}, got {h}"
            )));
        }
        Ok((0..self.clusters.len())
            .map(|k| self.coefficient(k, h))
            .collect())
    }

    fn coefficient(&self, k: usize, h: usize) -> f64 {
        let sizes: Vec<usize> = self.clusters.iter().map(Vec::len).collect();
        let mut total = 0.0;
        let mut parts = vec![0usize; sizes.len()];
        self.compositions(k, 0, h, &sizes, &mut parts, &mut total);
        total
    }

    fn compositions(
        &self,
        k: usize,
        j: usize,
        remaining: usize,
        sizes: &[usize],
        parts: &mut Vec<usize>,
        total: &mut f64,
    ) {
        if j == sizes.len() {
            if remaining == 0 {
                *total += parts
                    .iter()
                    .enumerate()
                    .map(|(i, &hi)| {
                        let lam = self.values[i].powi(hi as i32);
                        if i == k {
                            if hi == 0 {
                                0.0
                            } else {
                                binomial(sizes[i] - 1, hi - 1) * lam
                            }
                        } else {
                            binomial(sizes[i], hi) * lam
                        }
                    })
                    .product::<f64>();
            }
            return;
        }
        for hj in 0..=sizes[j].min(remaining) {
            parts[j] = hj;
            self.compositions(k, j + 1, remaining - hj, sizes, parts, total);
        }
    }
}

/// Nodal values at the boundary vertices of a mesh, in boundary order.
/// Integrals use the trapezoidal rule on each boundary edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFunction {
    values: Vec<f64>,
}

impl BoundaryFunction {
    pub fn new(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        let n = mesh.boundary_vertices().len();
        if values.len() != n {
            return Err(Error::InvalidInput(format!(
                "boundary function has {} values, mesh has {n} boundary vertices",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "boundary function is not finite".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        Self {
            values: vec![value; mesh.boundary_vertices().len()],
        }
    }

    /// Evaluates `f(θ)` at the polar angle of each boundary vertex.
    pub fn from_angle(mesh: &Mesh, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: mesh.boundary_angles().into_iter().map(f).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mean of the two end values on each boundary edge.
    pub fn edge_values(&self) -> Vec<f64> {
        let n = self.values.len();
        (0..n)
            .map(|e| 0.5 * (self.values[e] + self.values[(e + 1) % n]))
            .collect()
    }

    pub fn integrate(&self, mesh: &Mesh) -> f64 {
        self.edge_values()
            .iter()
            .enumerate()
            .map(|(e, v)| v * mesh.edge_length(e))
            .sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + t · other`
    pub fn axpy(&self, t: f64, other: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + t * b)
                .collect(),
        }
    }

    /// Same function with the boundary vertices shifted by `k` positions.
    pub fn rotated(&self, k: usize) -> Self {
        let mut values = self.values.clone();
        let len = values.len().max(1);
        values.rotate_right(k % len);
        Self { values }
    }
}

/// `M[ρ] = ∫_∂Ω ρ dσ`; being linear, it is also its own differential.
pub fn mass(mesh: &Mesh, rho: &BoundaryFunction) -> f64 {
    rho.integrate(mesh)
}

/// Steklov eigenpairs for a boundary density given at the vertices.
pub fn steklov_at(
    mesh: &Mesh,
    rho: &BoundaryFunction,
    count: usize,
    options: &SolverOptions,
) -> Result<DiscreteSpectrum> {
    steklov_fem(mesh, &rho.edge_values(), count, options)
}

/// Gram–Schmidt (applied twice) in the inner product `xᵀ B y`.
pub fn orthonormalize_boundary(vectors: &DMatrix<f64>, b: &CscMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut q = vectors.clone();
    for j in 0..q.ncols() {
        let start = b_norm(b, &q.column(j).clone_owned());
        if !(start > 0.0) {
            return Err(Error::RankDeficient(format!("vector {j} has zero B-norm")));
        }
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i).clone_owned();
                let bqi = b * &qi;
                let proj = bqi.dot(&q.column(j));
                q.column_mut(j).axpy(-proj, &qi, 1.0);
            }
        }
        let norm = b_norm(b, &q.column(j).clone_owned());
        if !(norm > 1e-8 * start) {
            return Err(Error::RankDeficient(format!(
                "vector {j} lies in the span of the previous ones"
            )));
        }
        q.column_mut(j).scale_mut(1.0 / norm);
    }
    Ok(q)
}

fn b_norm(b: &CscMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(b * v)).max(0.0).sqrt()
}

/// Cluster eigenvectors orthonormalized per cluster, with the `c_k` weights.
fn weighted_bases(
    spectrum: &DiscreteSpectrum,
    partition: &ClusterPartition,
    b: &CscMatrix<f64>,
    h: usize,
) -> Result<Vec<(f64, DMatrix<f64>)>> {
    let c = partition.coefficients(h)?;
    if let Some(&bad) = partition.indices().iter().find(|&&i| i >= spectrum.len()) {
        return Err(Error::InvalidInput(format!(
            "cluster index {bad} exceeds the {} computed eigenpairs",
            spectrum.len()
        )));
    }
    partition
        .clusters()
        .iter()
        .zip(c)
        .map(|(cluster, ck)| {
            let cols = DMatrix::from_fn(spectrum.eigenvectors.nrows(), cluster.len(), |r, j| {
                spectrum.eigenvectors[(r, cluster[j])]
            });
            Ok((ck, orthonormalize_boundary(&cols, b)?))
        })
        .collect()
}

/// `dΛ_{F,h}[ρ][ρ̇] = -Σ_k c_k Σ_{l∈F_k} ∫_∂Ω (Tr u_l)² ρ̇ dσ`.
pub fn differential_sym(
    mesh: &Mesh,
    rho: &BoundaryFunction,
    spectrum: &DiscreteSpectrum,
    partition: &ClusterPartition,
    h: usize,
    rho_dot: &BoundaryFunction,
) -> Result<f64> {
    let b = assemble_boundary_mass(mesh, &rho.edge_values())?;
    let weights = rho_dot.edge_values();
    let mut total = 0.0;
    for (ck, basis) in weighted_bases(spectrum, partition, &b, h)? {
        for u in basis.column_iter() {
            total += ck * boundary_quadratic_form(mesh, u.as_slice(), &weights);
        }
    }
    Ok(-total)
}

/// `(max S - min S) / mean S`, with the mean taken from `integral / measure`.
/// A profile that vanishes identically has deviation 0.
fn deviation(values: &[f64], mean: f64) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if hi == 0.0 && lo == 0.0 {
        0.0
    } else {
        (hi - lo) / mean.abs()
    }
}

/// The stationarity profile `S = Σ_k c_k Σ_{l∈F_k} (Tr u_l)²` on the boundary
/// and its relative spread. A mass-constrained critical density has `S`
/// constant.
pub fn criticality_residual_steklov(
    mesh: &Mesh,
    rho: &BoundaryFunction,
    spectrum: &DiscreteSpectrum,
    partition: &ClusterPartition,
    h: usize,
) -> Result<(BoundaryFunction, f64)> {
    let b = assemble_boundary_mass(mesh, &rho.edge_values())?;
    let mut profile = vec![0.0; mesh.boundary_vertices().len()];
    for (ck, basis) in weighted_bases(spectrum, partition, &b, h)? {
        for u in basis.column_iter() {
            for (p, &v) in profile.iter_mut().zip(mesh.boundary_vertices()) {
                *p += ck * u[v] * u[v];
            }
        }
    }
    let profile = BoundaryFunction::new(mesh, profile)?;
    let mean = profile.integrate(mesh) / mesh.boundary_length();
    let dev = deviation(profile.values(), mean);
    Ok((profile, dev))
}

/// Interior counterpart: `S = Σ_k c_k Σ_l u_l²` at every vertex, with the
/// eigenvectors orthonormalized in the weighted mass inner product.
pub fn criticality_residual_neumann(
    mesh: &Mesh,
    interior_rho: &[f64],
    spectrum: &DiscreteSpectrum,
    partition: &ClusterPartition,
    h: usize,
) -> Result<(Vec<f64>, f64)> {
    let m = assemble_interior_mass(mesh, interior_rho)?;
    let mut profile = vec![0.0; mesh.num_vertices()];
    for (ck, basis) in weighted_bases(spectrum, partition, &m, h)? {
        for u in basis.column_iter() {
            for (p, v) in profile.iter_mut().zip(u.iter()) {
                *p += ck * v * v;
            }
        }
    }
    // area-weighted mean of the P1 interpolant
    let integral: f64 = mesh
        .triangles()
        .iter()
        .enumerate()
        .map(|(t, tri)| mesh.triangle_area(t) * tri.iter().map(|&i| profile[i]).sum::<f64>() / 3.0)
        .sum();
    let dev = deviation(&profile, integral / mesh.area());
    Ok((profile, dev))
}
