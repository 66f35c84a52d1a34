//! Exact spectra on the unit ball by separation of variables.
//!
//! With `u = R(r) Y_k(ω)` for a spherical harmonic of degree `k`, the radial
//! factor of `-Δu = λρu` is `r^{(2-N)/2} Z_ν(√(λρ) r)` with `ν = k + (N-2)/2`.
//! For the two-valued density `ρ_ε` the radial factor is `J_ν` on the core
//! `r < 1 - ε` and a combination of `J_ν`, `Y_ν` in the layer; C¹ matching at
//! `r = 1 - ε` and `R'(1) = 0` give a 3×3 homogeneous system whose
//! determinant vanishes exactly at the degree-`k` eigenvalues.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{self, Bracketed};
use crate::specfun::{bessel_j, bessel_j_prime, bessel_jy, BesselOrder};
use crate::spectrum::{ModeLabel, Spectrum};

/// Largest admissible layer width for [`ConcentratedDensity::new`].
pub const DEFAULT_EPS_MAX: f64 = 0.25;
/// Relative gap below which two exact eigenvalues are the same cluster.
pub const CLUSTER_GAP: f64 = 1e-6;
/// Bisection stops once the bracket is this narrow relative to the root.
pub const ROOT_REL_TOL: f64 = 1e-13;

/// Volume of the unit ball in `R^n`, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // V_n = (2π / n) V_{n-2}, V_0 = 1, V_1 = 2
    let mut v = if n.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut d = if n.is_multiple_of(2) { 2 } else { 3 };
    while d <= n {
        v *= 2.0 * std::f64::consts::PI / d as f64;
        d += 2;
    }
    v
}

fn binomial(n: i64, k: i64) -> usize {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * (n - i) as u128 / (i + 1) as u128;
    }
    out as usize
}

/// Dimension of the degree-`k` spherical harmonics on `S^{N-1}`:
/// `C(N+k-1, k) - C(N+k-3, k-2)`.
pub fn harmonic_multiplicity(dimension: usize, degree: usize) -> usize {
    let (n, k) = (dimension as i64, degree as i64);
    binomial(n + k - 1, k) - binomial(n + k - 3, k - 2)
}

/// Unit ball in `R^N` carrying total mass `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallProblem {
    dimension: usize,
    total_mass: f64,
    volume: f64,
    surface: f64,
}

impl BallProblem {
    pub fn new(dimension: usize, total_mass: f64) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidInput(format!(
                "dimension must be >= 2, got {dimension}"
            )));
        }
        if !(total_mass > 0.0) || !total_mass.is_finite() {
            return Err(Error::InvalidInput(format!(
                "total mass must be positive, got {total_mass}"
            )));
        }
        let volume = unit_ball_volume(dimension);
        Ok(Self {
            dimension,
            total_mass,
            volume,
            surface: dimension as f64 * volume,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `|Ω|`
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `|∂Ω|`
    pub fn surface(&self) -> f64 {
        self.surface
    }

    /// The constant boundary density `M / |∂Ω|` of the limiting problem.
    pub fn steklov_density(&self) -> f64 {
        self.total_mass / self.surface
    }

    /// Steklov eigenvalue of the degree-`k` harmonics: `k |∂Ω| / M`.
    pub fn steklov_eigenvalue(&self, degree: usize) -> f64 {
        degree as f64 / self.steklov_density()
    }
}

/// The mass-concentrating density: `ε` in the core `|x| < 1 - ε`, and the
/// constant making the total mass `M` in the boundary layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentratedDensity {
    epsilon: f64,
    inner_value: f64,
    annulus_value: f64,
}

impl ConcentratedDensity {
    pub fn new(problem: &BallProblem, epsilon: f64) -> Result<Self> {
        Self::with_max(problem, epsilon, DEFAULT_EPS_MAX)
    }

    pub fn with_max(problem: &BallProblem, epsilon: f64, eps_max: f64) -> Result<Self> {
        if !(epsilon > 0.0) || epsilon > eps_max || epsilon >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "layer width must lie in (0, {eps_max}], got {epsilon}"
            )));
        }
        let core_fraction = (1.0 - epsilon).powi(problem.dimension as i32);
        let core = problem.volume * core_fraction;
        let layer = problem.volume * (1.0 - core_fraction);
        let layer_mass = problem.total_mass - epsilon * core;
        if !(layer_mass > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon = {epsilon} leaves no mass for the boundary layer (M = {})",
                problem.total_mass
            )));
        }
        Ok(Self {
            epsilon,
            inner_value: epsilon,
            annulus_value: layer_mass / layer,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn inner_value(&self) -> f64 {
        self.inner_value
    }

    pub fn annulus_value(&self) -> f64 {
        self.annulus_value
    }

    /// Radius `1 - ε` of the interface between core and layer.
    pub fn interface_radius(&self) -> f64 {
        1.0 - self.epsilon
    }

    pub fn value_at(&self, r: f64) -> f64 {
        if r < self.interface_radius() {
            self.inner_value
        } else {
            self.annulus_value
        }
    }

    /// `∫_Ω ρ_ε dx`, evaluated from the two pieces.
    pub fn total_mass(&self, problem: &BallProblem) -> f64 {
        let core_fraction = self.interface_radius().powi(problem.dimension as i32);
        problem.volume
            * (self.inner_value * core_fraction + self.annulus_value * (1.0 - core_fraction))
    }
}

/// First `count` Steklov eigenvalues of the ball with constant density
/// `M/|∂Ω|`: `k |∂Ω| / M` repeated `m(N, k)` times.
pub fn steklov_ball_spectrum(problem: &BallProblem, count: usize) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be >= 1".into()));
    }
    let mut modes = Vec::new();
    let mut total = 0;
    let mut k = 0;
    while total < count {
        let m = harmonic_multiplicity(problem.dimension, k);
        modes.push((
            problem.steklov_eigenvalue(k),
            ModeLabel {
                degree: k,
                radial: 0,
            },
            m,
        ));
        total += m;
        k += 1;
    }
    Ok(Spectrum::from_modes(modes, count, CLUSTER_GAP))
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Characteristic determinant `F(λ)` for angular degree `k`; its zeros in
/// `λ > 0` are the degree-`k` eigenvalues of `-Δu = λρ_ε u`, `∂_ν u = 0`.
///
/// Unknowns are the core amplitude `C` and the layer coefficients `A, B`.
/// Rows: continuity of `R` and `R'` at `1 - ε`, and `R'(1) = 0`. Each row is
/// divided by its largest magnitude, which keeps `F` of order one and does not
/// change its sign.
pub fn neumann_char(
    degree: usize,
    lambda: f64,
    density: &ConcentratedDensity,
    problem: &BallProblem,
) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
    }
    let order = BesselOrder::for_degree(problem.dimension, degree)?;
    let a = (2.0 - problem.dimension as f64) / 2.0;
    let r0 = density.interface_radius();
    let s_in = (lambda * density.inner_value).sqrt();
    let s_out = (lambda * density.annulus_value).sqrt();

    let j_core = bessel_j(order, s_in * r0)?;
    let jp_core = bessel_j_prime(order, s_in * r0)?;
    let at_interface = bessel_jy(order, s_out * r0)?;
    let at_edge = bessel_jy(order, s_out)?;

    let mut rows = [
        [j_core, -at_interface.j, -at_interface.y],
        [
            s_in * jp_core,
            -s_out * at_interface.j_prime,
            -s_out * at_interface.y_prime,
        ],
        [
            0.0,
            a * at_edge.j + s_out * at_edge.j_prime,
            a * at_edge.y + s_out * at_edge.y_prime,
        ],
    ];
    for row in rows.iter_mut() {
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::Domain(format!(
                "characteristic row not representable at lambda = {lambda}, degree {degree}"
            )));
        }
        row.iter_mut().for_each(|v| *v /= scale);
    }
    Ok(det3(&rows))
}

/// Controls for the per-degree root scan.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScanOptions {
    /// Upper end of the scanned `λ` window. Defaults to
    /// `2 λ_{count-1}(0) + 2 |∂Ω|/M`.
    pub lambda_max: Option<f64>,
    /// Initial grid step. Defaults to `0.05 |∂Ω|/M`.
    pub step: Option<f64>,
}

/// Degree-`k` eigenvalues in `(0, lambda_max]`, each with its final bracket.
pub fn degree_roots(
    degree: usize,
    density: &ConcentratedDensity,
    problem: &BallProblem,
    lambda_max: f64,
    step: f64,
) -> Result<Vec<Bracketed>> {
    let f = |lambda: f64| neumann_char(degree, lambda, density, problem);
    roots::scan_roots(f, 0.5 * step, lambda_max, step, ROOT_REL_TOL)
}

/// First `count` eigenvalues of the `ρ_ε`-weighted Neumann problem on the
/// ball, including `λ_0 = 0`.
pub fn neumann_ball_spectrum(
    density: &ConcentratedDensity,
    problem: &BallProblem,
    count: usize,
) -> Result<Spectrum> {
    neumann_ball_spectrum_with(density, problem, count, &ScanOptions::default())
}

pub fn neumann_ball_spectrum_with(
    density: &ConcentratedDensity,
    problem: &BallProblem,
    count: usize,
    options: &ScanOptions,
) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be >= 1".into()));
    }
    let unit = 1.0 / problem.steklov_density();
    let step = options.step.unwrap_or(0.05 * unit);
    let lambda_max = match options.lambda_max {
        Some(v) => v,
        None => {
            let limit = steklov_ball_spectrum(problem, count)?;
            2.0 * limit.eigenvalues[count - 1] + 2.0 * unit
        }
    };
    let mut modes = vec![(
        0.0,
        ModeLabel {
            degree: 0,
            radial: 0,
        },
        1,
    )];
    let mut found = 1;
    for degree in 0.. {
        let roots = degree_roots(degree, density, problem, lambda_max, step)?;
        // The lowest degree-k eigenvalue increases with k, so the first empty
        // degree above 0 ends the search.
        if degree > 0 && roots.is_empty() {
            break;
        }
        let m = harmonic_multiplicity(problem.dimension, degree);
        let radial_offset = usize::from(degree == 0);
        for (i, r) in roots.iter().enumerate() {
            modes.push((
                r.root,
                ModeLabel {
                    degree,
                    radial: i + radial_offset,
                },
                m,
            ));
            found += m;
        }
    }
    if found < count {
        return Err(Error::ScanExhausted {
            requested: count,
            found,
            lambda_max,
        });
    }
    Ok(Spectrum::from_modes(modes, count, CLUSTER_GAP))
}

/// Right-hand side of the first-order expansion at `ε = 0`:
/// `2Mλ²/(3N|Ω|) + 2λ²|Ω|/(2Mλ + N²|Ω|)`.
pub fn derivative_formula(problem: &BallProblem, lambda0: f64) -> f64 {
    let n = problem.dimension as f64;
    let m = problem.total_mass;
    let vol = problem.volume;
    let l2 = lambda0 * lambda0;
    2.0 * m * l2 / (3.0 * n * vol) + 2.0 * l2 * vol / (2.0 * m * lambda0 + n * n * vol)
}

/// Numerical `λ_j'(0)` from difference quotients over an `ε` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    pub index: usize,
    pub lambda0: f64,
    pub eps_grid: Vec<f64>,
    /// `λ_j(ε)` on the grid.
    pub eigenvalues: Vec<f64>,
    /// `(λ_j(ε) - λ_j(0)) / ε`.
    pub quotients: Vec<f64>,
    /// Neville table; level `l` has `len - l` entries, each extrapolating
    /// `l + 1` consecutive quotients to `ε = 0`.
    pub table: Vec<Vec<f64>>,
    pub slope: f64,
}

/// Polynomial extrapolation of `values` sampled at `nodes` to 0
/// (Richardson for halving grids).
pub fn extrapolate_to_zero(nodes: &[f64], values: &[f64]) -> Vec<Vec<f64>> {
    let mut table = vec![values.to_vec()];
    for level in 1..values.len() {
        let prev = &table[level - 1];
        let next = (0..prev.len() - 1)
            .map(|i| {
                let (hi, lo) = (nodes[i], nodes[i + level]);
                prev[i + 1] + (prev[i + 1] - prev[i]) * lo / (hi - lo)
            })
            .collect();
        table.push(next);
    }
    table
}

pub fn validate_eps_grid(eps_grid: &[f64], eps_max: f64) -> Result<()> {
    if eps_grid.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "epsilon grid needs at least 3 points, got {}",
            eps_grid.len()
        )));
    }
    if eps_grid.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput(
            "epsilon grid must be strictly decreasing".into(),
        ));
    }
    if eps_grid.iter().any(|&e| !(e > 0.0) || e > eps_max) {
        return Err(Error::InvalidInput(format!(
            "epsilon grid must lie in (0, {eps_max}]"
        )));
    }
    Ok(())
}

/// `λ_j'(0)` by Richardson-extrapolated one-sided differences on `eps_grid`.
pub fn derivative_numeric(
    problem: &BallProblem,
    index: usize,
    eps_grid: &[f64],
) -> Result<DerivativeEstimate> {
    validate_eps_grid(eps_grid, DEFAULT_EPS_MAX)?;
    let lambda0 = steklov_ball_spectrum(problem, index + 1)?.eigenvalues[index];
    let eigenvalues = eps_grid
        .par_iter()
        .map(|&eps| {
            let density = ConcentratedDensity::new(problem, eps)?;
            Ok(neumann_ball_spectrum(&density, problem, index + 1)?.eigenvalues[index])
        })
        .collect::<Result<Vec<f64>>>()?;
    let quotients: Vec<f64> = eigenvalues
        .iter()
        .zip(eps_grid)
        .map(|(l, e)| (l - lambda0) / e)
        .collect();
    let table = extrapolate_to_zero(eps_grid, &quotients);
    let slope = table.last().unwrap()[0];
    Ok(DerivativeEstimate {
        index,
        lambda0,
        eps_grid: eps_grid.to_vec(),
        eigenvalues,
        quotients,
        table,
        slope,
    })
}

/// `J_1'(x r0) Y_1'(x) - J_1'(x) Y_1'(x r0)` with `r0 = 1 - ε`, divided by a
/// positive scale.
pub fn niwa_cross_product(x: f64, epsilon: f64) -> Result<f64> {
    let order = BesselOrder::integer(1);
    let inner = bessel_jy(order, x * (1.0 - epsilon))?;
    let outer = bessel_jy(order, x)?;
    let scale = inner.y_prime.abs() + outer.y_prime.abs();
    Ok((inner.j_prime * outer.y_prime - outer.j_prime * inner.y_prime) / scale)
}

/// First positive eigenvalue of the Neumann Laplacian on the planar annulus
/// `1 - ε < |x| < 1` (unit weight), which belongs to degree 1.
pub fn niwa_annulus_lambda1(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!(
            "annulus width must lie in (0, 1), got {epsilon}"
        )));
    }
    const START: f64 = 0.05;
    const END: f64 = 20.0;
    const STEP: f64 = 0.005;
    let f = |x: f64| niwa_cross_product(x, epsilon);
    let mut a = START;
    let mut fa = f(a)?;
    while a < END {
        let b = a + STEP;
        let fb = f(b)?;
        if fa.signum() != fb.signum() {
            let root = roots::bisect(f, a, b, ROOT_REL_TOL)?.root;
            return Ok(root * root);
        }
        a = b;
        fa = fb;
    }
    Err(Error::Bracket(format!(
        "no degree-1 annulus root in [{START}, {END}] for epsilon = {epsilon}"
    )))
}

/// First positive Neumann eigenvalue of the unit disk, `(j'_{1,1})²`: the
/// limit of [`niwa_annulus_lambda1`] as the hole shrinks.
pub fn disk_neumann_lambda1() -> Result<f64> {
    let order = BesselOrder::integer(1);
    let root = roots::bisect(|x| bessel_j_prime(order, x), 1.5, 2.2, ROOT_REL_TOL)?.root;
    Ok(root * root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn disk() -> BallProblem {
        BallProblem::new(2, 2.0 * PI).unwrap()
    }

    #[test]
    fn disk_neumann_limit() {
        assert_relative_eq!(
            disk_neumann_lambda1().unwrap(),
            3.389_957_716_671_889,
            max_relative = 1e-13
        );
    }

    #[test]
    fn geometry_constants() {
        assert_relative_eq!(unit_ball_volume(2), PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(4), PI * PI / 2.0, max_relative = 1e-15);
        for n in 2..8 {
            let p = BallProblem::new(n, 1.0).unwrap();
            assert_eq!(p.surface(), n as f64 * p.volume());
        }
        assert!(BallProblem::new(1, 1.0).is_err());
        assert!(BallProblem::new(2, 0.0).is_err());
    }

    #[test]
    fn harmonic_multiplicities() {
        assert_eq!(harmonic_multiplicity(2, 0), 1);
        assert!((1..6).all(|k| harmonic_multiplicity(2, k) == 2));
        assert!((0..6).all(|k| harmonic_multiplicity(3, k) == 2 * k + 1));
        assert_eq!(harmonic_multiplicity(4, 2), 9);
    }

    #[test]
    fn steklov_closed_forms() {
        let s = steklov_ball_spectrum(&disk(), 5).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 1.0, 2.0, 2.0]);
        let ball = BallProblem::new(3, 4.0 * PI).unwrap();
        let s = steklov_ball_spectrum(&ball, 5).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([0.0, 1.0, 1.0, 1.0, 2.0]) {
            assert_relative_eq!(*got, want, max_relative = 1e-15);
        }
        let heavy = BallProblem::new(2, 4.0 * PI).unwrap();
        let s = steklov_ball_spectrum(&heavy, 3).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 0.5, 0.5]);
        assert!(steklov_ball_spectrum(&heavy, 0).is_err());
    }

    #[test]
    fn doubling_mass_halves_steklov_eigenvalues() {
        let a = steklov_ball_spectrum(&BallProblem::new(3, 2.0).unwrap(), 12).unwrap();
        let b = steklov_ball_spectrum(&BallProblem::new(3, 4.0).unwrap(), 12).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert_relative_eq!(*y, 0.5 * x, max_relative = 1e-15);
        }
    }

    #[test]
    fn concentrated_density_mass_identity() {
        for n in [2, 3] {
            let p = BallProblem::new(n, 2.5).unwrap();
            for eps in [1e-3, 0.01, 0.05, 0.1, 0.2] {
                let d = ConcentratedDensity::new(&p, eps).unwrap();
                assert_relative_eq!(d.total_mass(&p), 2.5, max_relative = 1e-12);
                assert_eq!(d.inner_value(), eps);
                assert!(d.annulus_value() > 0.0);
            }
        }
    }

    #[test]
    fn concentrated_density_rejects_bad_widths() {
        let p = disk();
        assert!(ConcentratedDensity::new(&p, 0.0).is_err());
        assert!(ConcentratedDensity::new(&p, 0.3).is_err());
        // M so small that the core alone exceeds it
        let light = BallProblem::new(2, 0.01).unwrap();
        assert!(ConcentratedDensity::new(&light, 0.1).is_err());
    }

    #[test]
    fn characteristic_vanishes_at_origin_for_degree_zero() {
        let p = disk();
        let d = ConcentratedDensity::new(&p, 0.1).unwrap();
        let tiny = neumann_char(0, 1e-12, &d, &p).unwrap();
        let moderate = neumann_char(0, 0.5, &d, &p).unwrap();
        assert!(tiny.abs() < 1e-6 * moderate.abs().max(1e-3));
        assert!(neumann_char(1, 0.0, &d, &p).is_err());
        assert!(neumann_char(1, -1.0, &d, &p).is_err());
    }

    #[test]
    fn derivative_formula_values() {
        assert_relative_eq!(
            derivative_formula(&disk(), 1.0),
            11.0 / 12.0,
            max_relative = 1e-15
        );
        let ball = BallProblem::new(3, 4.0 * PI).unwrap();
        assert_relative_eq!(derivative_formula(&ball, 1.0), 0.8, max_relative = 1e-15);
        assert_eq!(derivative_formula(&ball, 0.0), 0.0);
    }

    #[test]
    fn neville_is_exact_for_polynomials() {
        let nodes = [0.3, 0.2, 0.1, 0.05];
        let values: Vec<f64> = nodes
            .iter()
            .map(|e| 2.0 - e + 4.0 * e * e - e * e * e)
            .collect();
        let table = extrapolate_to_zero(&nodes, &values);
        assert_relative_eq!(table[3][0], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn grid_validation() {
        assert!(validate_eps_grid(&[0.1, 0.05], 0.25).is_err());
        assert!(validate_eps_grid(&[0.1, 0.1, 0.05], 0.25).is_err());
        assert!(validate_eps_grid(&[0.3, 0.1, 0.05], 0.25).is_err());
        assert!(validate_eps_grid(&[0.1, 0.05, 0.025], 0.25).is_ok());
    }

    #[test]
    fn niwa_rejects_degenerate_widths() {
        assert!(niwa_annulus_lambda1(0.0).is_err());
        assert!(niwa_annulus_lambda1(1.0).is_err());
    }
}
