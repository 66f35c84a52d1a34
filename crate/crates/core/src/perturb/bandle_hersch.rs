//! Randomized check that, among boundary densities of fixed mass invariant
//! under rotation by `2π/n`, the constant density maximizes `λ_0, ..., λ_n`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mass, steklov_at, BoundaryFunction};
use crate::ball::steklov_ball_spectrum;
use crate::error::{Error, Result};
use crate::fem::{Mesh, SolverOptions};
use crate::BallProblem;

/// Lower clamp applied to sampled densities before rescaling.
pub const SAMPLE_FLOOR: f64 = 0.1;
/// Harmonics `m n θ`, `m = 1..=HARMONICS`, used by the sampler.
pub const HARMONICS: usize = 3;

/// A positive random trigonometric polynomial in the boundary angle with
/// frequencies that are multiples of `n`, rescaled to mass `total_mass`.
/// Equal `(seed, stream)` pairs give identical samples.
pub fn symmetric_density_sampler(
    mesh: &Mesh,
    n: usize,
    total_mass: f64,
    seed: u64,
    stream: u64,
) -> Result<BoundaryFunction> {
    let nb = mesh.boundary_vertices().len();
    if n == 0 || !nb.is_multiple_of(n) {
        return Err(Error::InvalidInput(format!(
            "{nb} boundary vertices cannot carry a {n}-fold symmetric density"
        )));
    }
    if !(total_mass > 0.0) {
        return Err(Error::InvalidInput(format!(
            "mass must be positive, got {total_mass}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let coeffs: Vec<(f64, f64)> = (1..=HARMONICS)
        .map(|m| {
            let a: f64 = rng.gen_range(-0.5..0.5);
            let b: f64 = rng.gen_range(-0.5..0.5);
            (a / m as f64, b / m as f64)
        })
        .collect();
    let raw = BoundaryFunction::from_angle(mesh, |t| {
        let v: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let f = ((i + 1) * n) as f64 * t;
                a * f.cos() + b * f.sin()
            })
            .sum();
        (1.0 + v).max(SAMPLE_FLOOR)
    });
    Ok(raw.scaled(total_mass / mass(mesh, &raw)))
}

/// `max_{j<count} |λ_j^h - λ_j|` for the density `M / 2π` on a unit-disk
/// mesh, against the exact disk spectrum.
pub fn discretization_tolerance(
    mesh: &Mesh,
    total_mass: f64,
    count: usize,
    options: &SolverOptions,
) -> Result<f64> {
    let problem = BallProblem::new(2, total_mass)?;
    let exact = steklov_ball_spectrum(&problem, count)?;
    let rho = BoundaryFunction::constant(mesh, problem.steklov_density());
    let fem = steklov_at(mesh, &rho, count, options)?;
    Ok(fem
        .eigenvalues
        .iter()
        .zip(&exact.eigenvalues)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: usize,
    pub index: usize,
    pub eigenvalue: f64,
    pub bound: f64,
    /// The offending density at the boundary vertices.
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub eigenvalues: Vec<f64>,
    /// `max_j (λ_j[ρ] - λ_j[const])`; positive values exceed the constant.
    pub max_excess: f64,
    pub density_min: f64,
    pub density_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandleHerschReport {
    pub symmetry: usize,
    pub total_mass: f64,
    pub tolerance: f64,
    /// Eigenvalues `λ_0..=λ_n` for the constant density of the same mass.
    pub constant: Vec<f64>,
    pub trials: Vec<TrialOutcome>,
    pub violations: Vec<Violation>,
}

/// Samples `trials` densities of mass `total_mass` with `n`-fold symmetry and
/// compares `λ_j`, `j = 0..=n`, with the constant density of equal mass plus
/// `tolerance`. Trial `i` uses stream `i` of `seed`.
pub fn bandle_hersch_check(
    mesh: &Mesh,
    n: usize,
    total_mass: f64,
    trials: usize,
    seed: u64,
    tolerance: f64,
    options: &SolverOptions,
) -> Result<BandleHerschReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let count = n + 1;
    // one extra eigenvalue keeps the top of the range away from the solver edge
    let solve = |rho: &BoundaryFunction| -> Result<Vec<f64>> {
        let mut ev = steklov_at(mesh, rho, count + 1, options)?.eigenvalues;
        ev.truncate(count);
        Ok(ev)
    };
    let constant_rho = BoundaryFunction::constant(mesh, total_mass / mesh.boundary_length());
    let constant = solve(&constant_rho)?;
    let results: Vec<Result<(TrialOutcome, Vec<Violation>)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let rho = symmetric_density_sampler(mesh, n, total_mass, seed, trial as u64)?;
            let eigenvalues = solve(&rho)?;
            let mut violations = Vec::new();
            for (j, (&l, &c)) in eigenvalues.iter().zip(&constant).enumerate() {
                if l > c + tolerance {
                    violations.push(Violation {
                        trial,
                        index: j,
                        eigenvalue: l,
                        bound: c + tolerance,
                        density: rho.values().to_vec(),
                    });
                }
            }
            let max_excess = eigenvalues
                .iter()
                .zip(&constant)
                .map(|(l, c)| l - c)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((
                TrialOutcome {
                    trial,
                    eigenvalues,
                    max_excess,
                    density_min: rho.min(),
                    density_max: rho.max(),
                },
                violations,
            ))
        })
        .collect();
    let mut outcomes = Vec::with_capacity(trials);
    let mut violations = Vec::new();
    for r in results {
        let (o, v) = r?;
        outcomes.push(o);
        violations.extend(v);
    }
    Ok(BandleHerschReport {
        symmetry: n,
        total_mass,
        tolerance,
        constant,
        trials: outcomes,
        violations,
    })
}
