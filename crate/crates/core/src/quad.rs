//! Adaptive Simpson quadrature with an absolute-error target.
//!
//! This is the one quadrature routine used everywhere in the crate:
//! potentials of non-polynomial reaction terms, profile tables, and the
//! independent integral checks in the test suites. Integrands are smooth
//! by construction (square-root singularities are removed by substitution
//! before calling in here), so plain Simpson subdivision converges fast.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 60;

/// Integrate `f` over `[a, b]` to absolute accuracy `tol`.
///
/// `a > b` is allowed and flips the sign. Fails if the recursion cannot
/// reach the tolerance (non-smooth or non-finite integrand).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds [{a}, {b}] must be finite")));
    }
    if tol <= 0.0 {
        return Err(Error::Domain(format!("quadrature tolerance {tol} must be positive")));
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let flo = f(lo);
    let fhi = f(hi);
    let m = 0.5 * (lo + hi);
    let fm = f(m);
    let whole = simpson(lo, hi, flo, fm, fhi);
    let v = refine(&f, lo, hi, flo, fm, fhi, whole, tol, MAX_DEPTH)?;
    Ok(sign * v)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
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
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(Error::NumericalFault(format!(
            "integrand non-finite near [{a}, {b}]"
        )));
    }
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol {
        // Richardson extrapolation: one order better than the halved panels.
        return Ok(left + right + err / 15.0);
    }
    if depth == 0 {
        return Err(Error::Convergence(format!(
            "quadrature did not reach tol {tol} on [{a}, {b}]"
        )));
    }
    let half_tol = 0.5 * tol;
    let lv = refine(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?;
    let rv = refine(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?;
    Ok(lv + rv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14, "got {v}");
    }

    #[test]
    fn sine_over_half_period() {
        let v = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let fwd = integrate(|x| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        let rev = integrate(|x| x.exp(), 1.0, 0.0, 1e-12).unwrap();
        assert_eq!(fwd, -rev);
    }

    #[test]
    fn steep_but_smooth_integrand() {
        // 1/sqrt(x) on [1e-6, 1]: steep near the left end, still resolvable.
        let v = integrate(|x| 1.0 / x.sqrt(), 1e-6, 1.0, 1e-10).unwrap();
        let exact = 2.0 * (1.0 - 1e-3);
        assert!((v - exact).abs() < 1e-9, "got {v}, want {exact}");
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|x| x, 2.0, 2.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(integrate(|x| x, 0.0, 1.0, 0.0).is_err());
    }
}
