//! Fixtures shared by the benchmarks.

use std::f64::consts::TAU;

use steklov_core::fem::{generate_disk_mesh, Mesh};
use steklov_core::{BallProblem, ConcentratedDensity};

/// The unit disk with mass `2π`, so that `λ_k = k`.
pub fn unit_disk() -> BallProblem {
    BallProblem::new(2, TAU).expect("valid disk")
}

pub fn concentrated(problem: &BallProblem, eps: f64) -> ConcentratedDensity {
    ConcentratedDensity::new(problem, eps).expect("admissible epsilon")
}

pub fn disk_mesh(refinement: u32) -> Mesh {
    generate_disk_mesh(refinement).expect("valid refinement")
}
