//! One-dimensional numerical primitives: golden-section minimization and
//! adaptive Simpson quadrature. Both are deliberately dependency-free; every
//! caller in this crate works on smooth or piecewise-smooth scalar functions
//! over explicit brackets.

use crate::error::{Error, Result};

/// (√5 − 1) / 2, the golden-section contraction ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes `f` over `[a, b]` by golden-section search, shrinking the
/// bracket until its width is at most `tol`. Returns `(argmin, f(argmin))`.
///
/// The search assumes `f` is unimodal on the bracket; on multimodal input it
/// converges to some local minimizer inside `[a, b]`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    debug_assert!(a <= b && tol > 0.0);
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Integrates `f` over `[a, b]` by adaptive Simpson quadrature to absolute
/// tolerance `tol`. Fails if the recursion cannot reach the tolerance within
/// a fixed depth (a sign of a non-integrable or pathological integrand).
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    debug_assert!(tol > 0.0);
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson_rule(a, b, fa, fm, fb);
    simpson_step(&mut f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

const MAX_DEPTH: u32 = 60;

fn simpson_rule(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson_rule(a, m, fa, flm, fm);
    let right = simpson_rule(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // Richardson criterion: the halved composite rule is accurate enough once
    // the correction term is below 15x the remaining tolerance.
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "adaptive quadrature failed to converge on [{a}, {b}]"
        )));
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}
