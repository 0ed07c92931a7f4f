//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Hard cap on interval halvings.
const MAX_DEPTH: u32 = 40;

/// Leaf discrepancy above which a depth-capped interval is reported as a
/// numeric failure instead of being accepted.
const CAP_FAILURE: f64 = 1e-5;

/// Integrate `f` over `[a, b]` with absolute tolerance `tol`.
///
/// Endpoint singularities (integrable ones like `-ln x` or `x^{-1/2}`) are
/// handled by nudging non-finite evaluations toward the interior; intervals
/// that still disagree by more than `CAP_FAILURE` at the depth cap yield
/// `Error::Numeric`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a < b) {
        return Err(Error::Domain(format!("bad interval [{a}, {b}]")));
    }
    let width = b - a;
    let eval = |x: f64| -> f64 {
        let v = f(x);
        if v.is_finite() {
            return v;
        }
        // nudge toward the interval center
        let dir = if x < 0.5 * (a + b) { 1.0 } else { -1.0 };
        let v = f(x + dir * 1e-12 * width);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (eval(a), eval(m), eval(b));
    let whole = width * (fa + 4.0 * fm + fb) / 6.0;
    simpson_step(&eval, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
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
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
    let diff = left + right - whole;
    if diff.abs() <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    if depth == 0 {
        if diff.abs() > CAP_FAILURE {
            return Err(Error::Numeric(format!(
                "quadrature stalled on [{a}, {b}] (residual {diff:e})"
            )));
        }
        return Ok(left + right + diff / 15.0);
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}
