//! Bracketing scalar root finder (Brent's safeguarded inverse-quadratic /
//! secant / bisection scheme).

use crate::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Accept when `|f(x)| <= ftol` and the bracket has collapsed below `xtol`.
    pub ftol: f64,
    pub xtol: f64,
    pub max_iter: usize,
}

impl RootOptions {
    pub fn with_ftol(ftol: f64) -> Self {
        Self {
            ftol,
            xtol: 1e-13,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    /// Final bracket (ordered), with opposite-sign (or zero) objective values.
    pub bracket: (f64, f64),
}

/// Finds a root of `f` in `[a, b]` given `fa = f(a)` and `fb = f(b)` of
/// opposite sign. Endpoint values are passed in so callers can supply limits
/// at points where `f` itself is not defined.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    opts: &RootOptions,
) -> Result<Root> {
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0, bracket: ordered(a, a) });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0, bracket: ordered(b, b) });
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "root not bracketed: f({a}) = {fa}, f({b}) = {fb}"
        )));
    }

    // b: current best, a: previous iterate, c: contrapoint with f(c) of opposite sign to f(b)
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * opts.xtol;
        let xm = 0.5 * (c - b);
        if fb == 0.0 || (xm.abs() <= tol1 && fb.abs() <= opts.ftol) {
            return Ok(Root { x: b, fx: fb, iterations: iter, bracket: ordered(b, c) });
        }
        if xm.abs() <= 2.0 * f64::EPSILON * b.abs() {
            // bracket is at machine resolution but the residual is still too large
            return Err(Error::SolverNotConverged { iterations: iter, residual: fb.abs() });
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::SolverNotConverged { iterations: iter, residual: f64::NAN });
        }
    }
    Err(Error::SolverNotConverged { iterations: opts.max_iter, residual: fb.abs() })
}

fn ordered(x: f64, y: f64) -> (f64, f64) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}
