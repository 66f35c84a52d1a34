//! Bessel functions of the first and second kind, `J_ν` and `Y_ν`, with
//! derivatives.
//!
//! Only the orders produced by separating variables in an `N`-ball are
//! supported: `ν = k + (N - 2)/2`, which is an integer for even `N` and a
//! half-integer for odd `N`. [`BesselOrder`] stores `2ν` so both families are
//! exact.
//!
//! Evaluation:
//! - `x <= 2`: ascending power series for `J_ν` (no cancellation there).
//! - `x > 2`: Miller backward recurrence. Integer ladders are normalised with
//!   `J_0 + 2 Σ J_2k = 1`; half-integer ladders with the closed forms of
//!   `J_{1/2}` and `J_{3/2}`.
//! - `Y_0`, `Y_1` come from Neumann series over the `J` ladder, `Y_{1/2}` and
//!   `Y_{3/2}` from their closed forms (Hankel's expansion replaces the
//!   Neumann series for `x >= 25`); higher orders use forward recurrence,
//!   which is stable for `Y`.
//! - Derivatives use `C'_ν = (ν/x) C_ν - C_{ν+1}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 2.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// Non-negative order on the half-integer lattice, stored as `2ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BesselOrder {
    twice: u32,
}

impl BesselOrder {
    pub const fn integer(n: u32) -> Self {
        Self { twice: 2 * n }
    }

    /// The order `n + 1/2`.
    pub const fn half_integer(n: u32) -> Self {
        Self { twice: 2 * n + 1 }
    }

    pub const fn from_twice(twice: u32) -> Self {
        Self { twice }
    }

    /// Order of the radial factor for angular degree `k` in dimension `N`:
    /// `ν = k + (N - 2)/2`.
    pub fn for_degree(dimension: usize, degree: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::Domain(format!(
                "dimension must be at least 2, got {dimension}"
            )));
        }
        let twice = 2 * degree + dimension - 2;
        u32::try_from(twice)
            .map(|twice| Self { twice })
            .map_err(|_| Error::Domain(format!("order 2*nu = {twice} is out of range")))
    }

    pub fn from_f64(nu: f64) -> Result<Self> {
        let twice = 2.0 * nu;
        if !nu.is_finite() || nu < 0.0 || twice.fract() != 0.0 || twice > f64::from(u32::MAX) {
            return Err(Error::Domain(format!(
                "order {nu} is not a non-negative multiple of 1/2"
            )));
        }
        Ok(Self {
            twice: twice as u32,
        })
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice.is_multiple_of(2)
    }

    /// `ν + 1`.
    pub fn next(self) -> Self {
        Self {
            twice: self.twice + 2,
        }
    }

    /// Steps above the ladder base (0 or 1/2).
    fn rung(self) -> usize {
        (self.twice / 2) as usize
    }
}

/// `J_ν`, `Y_ν` and their derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderValues {
    pub j: f64,
    pub y: f64,
    pub j_prime: f64,
    pub y_prime: f64,
}

fn check_nonnegative(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!(
            "Bessel argument must be >= 0, got {x}"
        )));
    }
    Ok(())
}

fn check_positive(x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "Bessel argument must be > 0, got {x}"
        )));
    }
    Ok(())
}

/// First-kind Bessel function `J_ν(x)` for `x >= 0`.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    Ok(j_values(order, 0, x)[0])
}

/// Second-kind Bessel function `Y_ν(x)` for `x > 0`. May return `-inf` when
/// the value overflows close to the origin.
pub fn bessel_y(order: BesselOrder, x: f64) -> Result<f64> {
    check_positive(x)?;
    Ok(y_values(order, 0, x)[0])
}

/// `J_ν'(x)`. At `x = 0` the series limit is returned (`+inf` for `ν = 1/2`).
pub fn bessel_j_prime(order: BesselOrder, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    if x == 0.0 {
        return Ok(match order.twice {
            1 => f64::INFINITY,
            2 => 0.5,
            _ => 0.0,
        });
    }
    let j = j_values(order, 1, x);
    Ok(order.value() / x * j[0] - j[1])
}

/// `Y_ν'(x)` for `x > 0`.
pub fn bessel_y_prime(order: BesselOrder, x: f64) -> Result<f64> {
    check_positive(x)?;
    let y = y_values(order, 1, x);
    Ok(order.value() / x * y[0] - y[1])
}

/// All four values at once, sharing the recurrence work.
pub fn bessel_jy(order: BesselOrder, x: f64) -> Result<CylinderValues> {
    check_positive(x)?;
    let j = j_values(order, 1, x);
    let y = y_values(order, 1, x);
    let nu = order.value();
    Ok(CylinderValues {
        j: j[0],
        y: y[0],
        j_prime: nu / x * j[0] - j[1],
        y_prime: nu / x * y[0] - y[1],
    })
}

/// `J_{ν}, J_{ν+1}, ..., J_{ν+extra}` at `x >= 0`.
fn j_values(order: BesselOrder, extra: usize, x: f64) -> Vec<f64> {
    if x <= SERIES_LIMIT {
        return (0..=extra)
            .map(|i| j_series(BesselOrder::from_twice(order.twice + 2 * i as u32), x))
            .collect();
    }
    let first = order.rung();
    let ladder = if order.is_integer() {
        j_integer_miller(first + extra, x)
    } else {
        j_half_miller(first + extra, x)
    };
    ladder[first..=first + extra].to_vec()
}

/// Ascending series `Σ (-1)^k (x/2)^{2k+ν} / (k! Γ(k+ν+1))`.
fn j_series(order: BesselOrder, x: f64) -> f64 {
    let nu = order.value();
    let hx = 0.5 * x;
    // (x/2)^ν / Γ(ν+1), built as a product so large orders do not overflow.
    let (mut lead, mut a) = if order.is_integer() {
        (1.0, 1.0)
    } else {
        (hx.sqrt() / (0.5 * PI.sqrt()), 1.5)
    };
    while a <= nu {
        lead *= hx / a;
        a += 1.0;
    }
    if lead == 0.0 {
        return 0.0;
    }
    let q = -hx * hx;
    let mut term = lead;
    let mut sum = lead;
    for k in 1..400 {
        let k = k as f64;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn miller_start(top: usize, x: f64) -> usize {
    let m0 = top.max(x.ceil() as usize);
    let start = m0 + 20 + (40.0 * m0 as f64).sqrt() as usize;
    start + start % 2
}

/// Backward recurrence for `J_0..=J_top`, normalised by `J_0 + 2 Σ J_2k = 1`.
fn j_integer_miller(top: usize, x: f64) -> Vec<f64> {
    let start = miller_start(top, x);
    let mut out = vec![0.0; top + 1];
    let mut above = 0.0;
    let mut current = 1.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= top {
            out[k] = current;
        }
        if k % 2 == 0 {
            norm += 2.0 * current;
        }
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            norm *= RESCALE_BY;
            out.iter_mut().for_each(|v| *v *= RESCALE_BY);
        }
    }
    out[0] = current;
    norm += current;
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// Backward recurrence for `J_{1/2}..=J_{top+1/2}`, normalised against the
/// closed forms of `J_{1/2}` and `J_{3/2}`.
fn j_half_miller(top: usize, x: f64) -> Vec<f64> {
    let start = miller_start(top + 1, x);
    let mut out = vec![0.0; top.max(1) + 1];
    let mut above = 0.0;
    let mut current = 1.0;
    for k in (1..=start).rev() {
        if k < out.len() {
            out[k] = current;
        }
        let nu = k as f64 + 0.5;
        let below = 2.0 * nu / x * current - above;
        above = current;
        current = below;
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            out.iter_mut().for_each(|v| *v *= RESCALE_BY);
        }
    }
    out[0] = current;
    let amp = (2.0 / (PI * x)).sqrt();
    let (s, c) = x.sin_cos();
    let exact_half = amp * s;
    let exact_three_halves = amp * (s / x - c);
    let scale = if exact_half.abs() >= exact_three_halves.abs() {
        exact_half / out[0]
    } else {
        exact_three_halves / out[1]
    };
    out.iter_mut().for_each(|v| *v *= scale);
    out.truncate(top + 1);
    out
}

/// `Y_{ν}, ..., Y_{ν+extra}` at `x > 0`.
fn y_values(order: BesselOrder, extra: usize, x: f64) -> Vec<f64> {
    let first = order.rung();
    let top = first + extra;
    let (y0, y1) = if order.is_integer() {
        y_integer_base(x)
    } else {
        let amp = (2.0 / (PI * x)).sqrt();
        let (s, c) = x.sin_cos();
        (-amp * c, -amp * (c / x + s))
    };
    let base = if order.is_integer() { 0.0 } else { 0.5 };
    let mut ladder = Vec::with_capacity(top + 1);
    ladder.push(y0);
    ladder.push(y1);
    for n in 1..top {
        let nu = base + n as f64;
        let next = 2.0 * nu / x * ladder[n] - ladder[n - 1];
        ladder.push(next);
    }
    ladder.truncate(top + 1);
    ladder[first..=top].to_vec()
}

/// Hankel expansion `(J_ν, Y_ν)` for large `x`, summed until the terms stop
/// decreasing.
fn hankel(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    let (s, c) = chi.sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

/// `(Y_0(x), Y_1(x))` from the Neumann series
/// `Y_0 = (2/π)(ln(x/2)+γ) J_0 - (4/π) Σ (-1)^k J_2k / k` and its derivative.
fn y_integer_base(x: f64) -> (f64, f64) {
    if x >= ASYMPTOTIC_LIMIT {
        return (hankel(0.0, x).1, hankel(1.0, x).1);
    }
    let len = x.ceil() as usize + 34;
    let j: Vec<f64> = if x <= SERIES_LIMIT {
        (0..=len)
            .map(|n| j_series(BesselOrder::integer(n as u32), x))
            .collect()
    } else {
        j_integer_miller(len, x)
    };
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k < len {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
        k += 1;
    }
    let y0 = 2.0 / PI * log_term * j[0] - 4.0 / PI * s0;
    let y1 = -2.0 / PI * j[0] / x + 2.0 / PI * log_term * j[1] + 2.0 / PI * s1;
    (y0, y1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn j(nu: f64, x: f64) -> f64 {
        bessel_j(BesselOrder::from_f64(nu).unwrap(), x).unwrap()
    }

    fn y(nu: f64, x: f64) -> f64 {
        bessel_y(BesselOrder::from_f64(nu).unwrap(), x).unwrap()
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(j(0.0, 0.0), 1.0);
        assert_eq!(j(1.0, 0.0), 0.0);
        assert_eq!(j(0.5, 0.0), 0.0);
        assert_eq!(bessel_j_prime(BesselOrder::integer(1), 0.0).unwrap(), 0.5);
    }

    #[test]
    fn first_zeros() {
        assert!(j(0.0, 2.404825557695773).abs() < 1e-9);
        assert!(y(0.0, 0.8935769662791675).abs() < 1e-9);
        assert!(y(1.0, 2.197141326031017).abs() < 1e-9);
    }

    #[test]
    fn derivative_identities() {
        let o0 = BesselOrder::integer(0);
        let jp = bessel_j_prime(o0, 1.5).unwrap();
        assert_relative_eq!(jp, -j(1.0, 1.5), max_relative = 1e-14);
        let yp = bessel_y_prime(o0, 2.0).unwrap();
        assert_relative_eq!(yp, -y(1.0, 2.0), max_relative = 1e-14);
        // J_1'(x) -> 1/2 as x -> 0
        let small = bessel_j_prime(BesselOrder::integer(1), 1e-8).unwrap();
        assert_relative_eq!(small, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn y_diverges_at_origin() {
        assert!(bessel_y(BesselOrder::integer(0), 0.0).is_err());
        let near = y(0.0, 1e-300);
        assert!(near < -400.0 && near.is_finite());
        assert!(y(0.0, 1e-12) < y(0.0, 1e-6));
    }

    #[test]
    fn domain_errors() {
        let o = BesselOrder::integer(2);
        assert!(bessel_j(o, -1.0).is_err());
        assert!(bessel_j(o, f64::NAN).is_err());
        assert!(bessel_y(o, -0.5).is_err());
        assert!(bessel_y_prime(o, 0.0).is_err());
        assert!(BesselOrder::from_f64(0.3).is_err());
        assert!(BesselOrder::from_f64(-1.0).is_err());
    }

    #[test]
    fn order_for_degree() {
        assert_eq!(BesselOrder::for_degree(2, 3).unwrap().value(), 3.0);
        assert_eq!(BesselOrder::for_degree(3, 0).unwrap().value(), 0.5);
        assert_eq!(BesselOrder::for_degree(4, 1).unwrap().value(), 2.0);
        assert!(BesselOrder::for_degree(1, 0).is_err());
    }

    #[test]
    fn spherical_closed_forms() {
        for &x in &[0.3, 1.0, 1.9, 2.1, 7.0, 40.0] {
            let amp = (2.0 / (PI * x)).sqrt();
            assert_relative_eq!(j(0.5, x), amp * x.sin(), max_relative = 1e-13);
            assert_relative_eq!(y(0.5, x), -amp * x.cos(), max_relative = 1e-13);
        }
    }

    #[test]
    fn series_and_recurrence_agree_at_switchover() {
        for twice in 0..20 {
            let o = BesselOrder::from_twice(twice);
            let lo = j_series(o, 2.0);
            let hi = j_values(o, 0, 2.0 + 1e-12)[0];
            let ladder = if o.is_integer() {
                j_integer_miller(o.rung(), 2.0)
            } else {
                j_half_miller(o.rung(), 2.0)
            };
            assert_relative_eq!(lo, hi, max_relative = 1e-10);
            assert_relative_eq!(lo, ladder[o.rung()], max_relative = 1e-11);
        }
    }

    #[test]
    fn large_order_small_argument_underflows_to_zero() {
        assert_eq!(j(30.0, 1e-20), 0.0);
        assert!(y(30.0, 1e-3).is_infinite() || y(30.0, 1e-3) < -1e100);
    }
}
