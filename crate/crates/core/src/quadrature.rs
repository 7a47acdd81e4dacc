//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Recursion depth limit for [`adaptive_simpson`].
pub const MAX_DEPTH: u32 = 50;

/// `∫_a^b f` to absolute tolerance `tol`. Reversed limits give the negated
/// integral.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numerical(format!("non-finite integration limits [{a}, {b}]")));
    }
    if b < a {
        return adaptive_simpson(f, b, a, tol).map(|v| -v);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut evals = 3usize;
    let v = step(f, a, b, fa, fm, fb, whole, tol, 1e-3 * tol, MAX_DEPTH, &mut evals)?;
    if !v.is_finite() {
        return Err(Error::Numerical(format!(
            "quadrature on [{a}, {b}] produced {v} after {evals} evaluations"
        )));
    }
    Ok(v)
}

/// Sum of [`adaptive_simpson`] over consecutive pieces, splitting at the
/// interior points of `breaks` that fall inside `(a, b)`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    if b < a {
        return integrate_with_breaks(f, b, a, breaks, tol).map(|v| -v);
    }
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let pieces = pts.len() + 1;
    let mut lo = a;
    let mut total = 0.0;
    for hi in pts.into_iter().chain(std::iter::once(b)) {
        // one-sided values at the piece ends, so jumps at breaks are harmless
        let nudge = 1e-13 * (hi - lo);
        let inside = |x: f64| f(x.clamp(lo + nudge, hi - nudge));
        total += adaptive_simpson(&inside, lo, hi, tol / pieces as f64)?;
        lo = hi;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    floor: f64,
    depth: u32,
    evals: &mut usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let unresolvable = b - a <= 64.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0);
    // intervals at round-off width may stop once their error is negligible
    // against the overall tolerance
    if delta.abs() <= 15.0 * tol || (unresolvable && delta.abs() <= floor) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "adaptive Simpson did not reach tolerance {tol:e} on [{a}, {b}] (error estimate {:e}, {} evaluations)",
            delta.abs() / 15.0,
            evals
        )));
    }
    Ok(step(f, a, m, fa, flm, fm, left, 0.5 * tol, floor, depth - 1, evals)?
        + step(f, m, b, fm, frm, fb, right, 0.5 * tol, floor, depth - 1, evals)?)
}
