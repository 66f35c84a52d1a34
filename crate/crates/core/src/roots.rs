//! Sign-change scanning and bisection for scalar characteristic functions.

use crate::error::{Error, Result};

/// A root together with the final bracket it was polished in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracketed {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Bisection on `[lo, hi]` until the bracket is narrower than
/// `rel_tol * max(|lo|, |hi|)`. `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<Bracketed>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(Bracketed {
            root: lo,
            lo,
            hi: lo,
        });
    }
    if f_hi == 0.0 {
        return Ok(Bracketed {
            root: hi,
            lo: hi,
            hi,
        });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * lo.abs().max(hi.abs()) || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(Bracketed {
                root: mid,
                lo: mid,
                hi: mid,
            });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bracketed {
        root: 0.5 * (lo + hi),
        lo,
        hi,
    })
}

/// Sign changes of `f` on the uniform grid `start, start + step, ...` up to
/// `end`, each returned as a cell `(a, b)`.
pub fn sign_changes<F>(mut f: F, start: f64, end: f64, step: f64) -> Result<Vec<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(step > 0.0) || !(end > start) {
        return Err(Error::InvalidInput(format!(
            "bad scan window [{start}, {end}] with step {step}"
        )));
    }
    let cells = ((end - start) / step).ceil() as usize;
    let mut cells_out = Vec::new();
    let mut a = start;
    let mut fa = f(a)?;
    for i in 1..=cells {
        let b = (start + i as f64 * step).min(end);
        let fb = f(b)?;
        // signum(0.0) = 1, so an exact zero counts as positive.
        if fa.signum() != fb.signum() {
            cells_out.push((a, b));
        }
        a = b;
        fa = fb;
    }
    Ok(cells_out)
}

/// Scans for sign changes, halving the step until two consecutive scans
/// agree on the number of roots, then polishes every root by bisection.
pub fn scan_roots<F>(
    mut f: F,
    start: f64,
    end: f64,
    step: f64,
    rel_tol: f64,
) -> Result<Vec<Bracketed>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut step = step;
    let mut cells = sign_changes(&mut f, start, end, step)?;
    for _ in 0..6 {
        let finer = sign_changes(&mut f, start, end, 0.5 * step)?;
        step *= 0.5;
        let agreed = finer.len() == cells.len();
        cells = finer;
        if agreed {
            break;
        }
    }
    cells
        .into_iter()
        .map(|(a, b)| bisect(&mut f, a, b, rel_tol))
        .collect()
}
