//! Lowest eigenpairs of `K u = λ B u` with `K` positive semidefinite and `B`
//! positive semidefinite, through the shifted pencil `K + σB`, which must be
//! positive definite.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::CscMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Problems up to this size go through the dense solver under `Auto`.
pub const DENSE_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    #[default]
    Auto,
    Dense,
    /// Block inverse iteration on the shifted pencil with Rayleigh–Ritz.
    Subspace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub sigma: f64,
    pub method: EigenMethod,
    /// Relative residual `‖Ku - λBu‖ / (‖(K + σB)u‖ + (λ + σ)‖Bu‖)` accepted
    /// by the iterative solver.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            method: EigenMethod::Auto,
            tolerance: 1e-10,
            max_iterations: 3000,
        }
    }
}

/// Eigenvalues in increasing order with `B`-orthonormal eigenvectors (columns).
/// `boundary_traces` holds the eigenvector rows at the boundary vertices
/// when the spectrum comes from a mesh, and is empty otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub boundary_traces: DMatrix<f64>,
}

impl DiscreteSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        self.eigenvectors.column(j).iter().copied().collect()
    }
}

fn sparse_rank_bound(b: &CscMatrix<f64>) -> usize {
    (0..b.nrows())
        .filter(|&i| b.get_entry(i, i).map_or(0.0, |e| e.into_value()) != 0.0)
        .count()
}

fn check_inputs(k: &CscMatrix<f64>, b: &CscMatrix<f64>, count: usize, sigma: f64) -> Result<()> {
    let n = k.nrows();
    if k.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::InvalidInput(
            "K and B must be square of equal size".into(),
        ));
    }
    if count == 0 {
        return Err(Error::InvalidInput("requested zero eigenpairs".into()));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "shift must be positive, got {sigma}"
        )));
    }
    let rank = sparse_rank_bound(b);
    if count > rank {
        return Err(Error::InvalidInput(format!(
            "requested {count} eigenpairs but B has rank at most {rank}"
        )));
    }
    Ok(())
}

/// Flips each column so its largest-magnitude entry is positive.
fn fix_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let i = col.iamax();
        if col[i] < 0.0 {
            col.neg_mut();
        }
    }
}

/// The `count` smallest eigenpairs of `K u = λ B u`.
pub fn solve_generalized(
    k: &CscMatrix<f64>,
    b: &CscMatrix<f64>,
    count: usize,
    options: &SolverOptions,
) -> Result<DiscreteSpectrum> {
    check_inputs(k, b, count, options.sigma)?;
    let dense = match options.method {
        EigenMethod::Dense => true,
        EigenMethod::Subspace => false,
        EigenMethod::Auto => k.nrows() <= DENSE_LIMIT,
    };
    let (eigenvalues, mut eigenvectors) = if dense {
        solve_dense(k, b, count, options.sigma)?
    } else {
        solve_subspace(k, b, count, options)?
    };
    fix_signs(&mut eigenvectors);
    Ok(DiscreteSpectrum {
        eigenvalues,
        eigenvectors,
        boundary_traces: DMatrix::zeros(0, count),
    })
}

fn singular(sigma: f64) -> Error {
    Error::SingularPencil {
        sigma,
        suggested: 10.0 * sigma,
    }
}

/// Reduces `B w = μ (K + σB) w` to a standard symmetric problem through the
/// Cholesky factor of `K + σB`; the largest `μ` give the smallest `λ = 1/μ - σ`.
fn solve_dense(
    k: &CscMatrix<f64>,
    b: &CscMatrix<f64>,
    count: usize,
    sigma: f64,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let bd = DMatrix::from(b);
    let a = DMatrix::from(k) + &bd * sigma;
    let l = Cholesky::new(a).ok_or_else(|| singular(sigma))?.unpack();
    let x = l
        .solve_lower_triangular(&bd)
        .ok_or_else(|| singular(sigma))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| singular(sigma))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mu_max = eig.eigenvalues[order[0]];
    let lt = l.transpose();
    let n = k.nrows();
    let mut values = Vec::with_capacity(count);
    let mut vectors = DMatrix::zeros(n, count);
    for (j, &i) in order.iter().take(count).enumerate() {
        let mu = eig.eigenvalues[i];
        if !(mu > 1e-12 * mu_max) {
            return Err(Error::RankDeficient(format!(
                "B supports only {j} eigenpairs, {count} requested"
            )));
        }
        values.push(1.0 / mu - sigma);
        let u = lt
            .solve_upper_triangular(&eig.eigenvectors.column(i).clone_owned())
            .ok_or_else(|| singular(sigma))?;
        vectors.set_column(j, &(u / mu.sqrt()));
    }
    Ok((values, vectors))
}

/// Ritz pairs of the pencil `(Vᵀ K V, Vᵀ B V)`, ascending, with `B`-orthonormal
/// combined vectors `V W`.
fn rayleigh_ritz(
    k: &CscMatrix<f64>,
    b: &CscMatrix<f64>,
    basis: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let kb = basis.transpose() * (k * basis);
    let bb = basis.transpose() * (b * basis);
    let kb = (&kb + kb.transpose()) * 0.5;
    let bb = (&bb + bb.transpose()) * 0.5;
    let lb = Cholesky::<f64, Dyn>::new(bb)
        .ok_or_else(|| Error::NotConverged("iteration basis lost rank".into()))?
        .unpack();
    let x = lb.solve_lower_triangular(&kb).expect("nonsingular factor");
    let c = lb
        .solve_lower_triangular(&x.transpose())
        .expect("nonsingular factor");
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let w = DMatrix::from_fn(order.len(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    let w = lb
        .transpose()
        .solve_upper_triangular(&w)
        .expect("nonsingular factor");
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    Ok((values, basis * w))
}

fn solve_subspace(
    k: &CscMatrix<f64>,
    b: &CscMatrix<f64>,
    count: usize,
    options: &SolverOptions,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let sigma = options.sigma;
    let n = k.nrows();
    let a = k + &(b * sigma);
    let chol = CscCholesky::factor(&a).map_err(|_| singular(sigma))?;
    let block = (2 * count).max(count + 8).min(sparse_rank_bound(b)).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut x = DMatrix::from_fn(n, block, |_, _| rng.gen_range(-1.0..1.0));
    let mut worst = f64::INFINITY;
    for _ in 0..options.max_iterations {
        let y = chol.solve(&(b * &x));
        let (shifted, v) = rayleigh_ritz(&a, b, &y)?;
        x = v;
        let lead = x.columns(0, count).clone_owned();
        let ax = &a * &lead;
        let bx = b * &lead;
        worst = 0.0f64;
        for j in 0..count {
            let r = ax.column(j) - bx.column(j) * shifted[j];
            let scale = ax.column(j).norm() + shifted[j].abs() * bx.column(j).norm();
            worst = worst.max(r.norm() / scale);
        }
        if worst <= options.tolerance {
            return Ok((shifted[..count].iter().map(|m| m - sigma).collect(), lead));
        }
    }
    Err(Error::NotConverged(format!(
        "relative residual {worst:e} after {} iterations",
        options.max_iterations
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra_sparse::CooMatrix;

    fn diag(values: &[f64]) -> CscMatrix<f64> {
        let mut coo = CooMatrix::new(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            if v != 0.0 {
                coo.push(i, i, v);
            }
        }
        CscMatrix::from(&coo)
    }

    fn laplacian_1d(n: usize) -> CscMatrix<f64> {
        let mut coo = CooMatrix::new(n, n);
        for i in 0..n {
            coo.push(i, i, if i == 0 || i == n - 1 { 1.0 } else { 2.0 });
            if i + 1 < n {
                coo.push(i, i + 1, -1.0);
                coo.push(i + 1, i, -1.0);
            }
        }
        CscMatrix::from(&coo)
    }

    #[test]
    fn diagonal_pencil() {
        let k = diag(&[3.0, 1.0, 8.0]);
        let b = diag(&[1.0, 1.0, 2.0]);
        let s = solve_generalized(&k, &b, 3, &SolverOptions::default()).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([1.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!((s.eigenvectors[(2, 2)] - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn singular_b_limits_count() {
        let k = laplacian_1d(4);
        let b = diag(&[1.0, 0.0, 0.0, 1.0]);
        let s = solve_generalized(&k, &b, 2, &SolverOptions::default()).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-14);
        // Steklov on a path: λ = 2/3 for the antisymmetric mode
        assert!((s.eigenvalues[1] - 2.0 / 3.0).abs() < 1e-13);
        assert!(matches!(
            solve_generalized(&k, &b, 3, &SolverOptions::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn indefinite_shift_reported() {
        let k = diag(&[0.0, 0.0, 1.0]);
        let b = diag(&[1.0, 0.0, 0.0]);
        let err = solve_generalized(&k, &b, 1, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SingularPencil { .. }));
        let sub = SolverOptions {
            method: EigenMethod::Subspace,
            ..Default::default()
        };
        assert!(matches!(
            solve_generalized(&k, &b, 1, &sub),
            Err(Error::SingularPencil { .. })
        ));
    }

    #[test]
    fn dense_and_subspace_agree() {
        let n = 60;
        let k = laplacian_1d(n);
        let b = diag(&(0..n).map(|i| 1.0 + (i % 3) as f64).collect::<Vec<_>>());
        let dense = SolverOptions {
            method: EigenMethod::Dense,
            ..Default::default()
        };
        let sub = SolverOptions {
            method: EigenMethod::Subspace,
            ..Default::default()
        };
        let a = solve_generalized(&k, &b, 6, &dense).unwrap();
        let c = solve_generalized(&k, &b, 6, &sub).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&c.eigenvalues) {
            assert!((x - y).abs() < 1e-12 * x.abs().max(1.0), "{x} vs {y}");
        }
        let bd = DMatrix::from(&b);
        for s in [&a, &c] {
            let gram = s.eigenvectors.transpose() * &bd * &s.eigenvectors;
            assert!((gram - DMatrix::identity(6, 6)).amax() < 1e-10);
        }
    }
}
