//! Bracketed scalar root finding.
//!
//! Both solvers require an interval `[lo, hi]` on which the function changes
//! sign and never leave it. [`newton_bracketed`] takes Newton steps when they
//! land inside the current bracket and shrink it fast enough, and falls back
//! to bisection otherwise.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("non-finite function value at x = {x}")]
    NonFinite { x: f64 },
    #[error("no convergence after {iterations} iterations (bracket [{lo}, {hi}])")]
    MaxIterations { iterations: usize, lo: f64, hi: f64 },
}

/// Termination criteria: stop once the bracket width is below
/// `abs + rel * |x|`, or an exact zero is hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_iter: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 0.0,
            rel: 4.0 * f64::EPSILON,
            max_iter: 500,
        }
    }
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Tolerance {
            rel,
            ..Tolerance::default()
        }
    }

    fn width_ok(&self, lo: f64, hi: f64) -> bool {
        let scale = lo.abs().max(hi.abs());
        (hi - lo).abs() <= self.abs + self.rel * scale
    }
}

fn check(x: f64, fx: f64) -> Result<f64, RootError> {
    if fx.is_finite() {
        Ok(fx)
    } else {
        Err(RootError::NonFinite { x })
    }
}

/// Orients the bracket so that `f(neg) < 0 < f(pos)`; returns an exact root
/// early if an endpoint already is one.
fn orient(
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
) -> Result<Result<(f64, f64), f64>, RootError> {
    if f_lo == 0.0 {
        return Ok(Err(lo));
    }
    if f_hi == 0.0 {
        return Ok(Err(hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(RootError::NoSignChange { lo, hi, f_lo, f_hi });
    }
    Ok(Ok(if f_lo < 0.0 { (lo, hi) } else { (hi, lo) }))
}

/// Plain bisection.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64, RootError>
where
    F: FnMut(f64) -> f64,
{
    let f_lo = check(lo, f(lo))?;
    let f_hi = check(hi, f(hi))?;
    let (mut neg, mut pos) = match orient(lo, hi, f_lo, f_hi)? {
        Ok(b) => b,
        Err(root) => return Ok(root),
    };
    for _ in 0..tol.max_iter {
        let mid = 0.5 * (neg + pos);
        if tol.width_ok(neg, pos) || mid == neg || mid == pos {
            return Ok(mid);
        }
        let f_mid = check(mid, f(mid))?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid < 0.0 {
            neg = mid;
        } else {
            pos = mid;
        }
    }
    Err(RootError::MaxIterations {
        iterations: tol.max_iter,
        lo: neg.min(pos),
        hi: neg.max(pos),
    })
}

/// Safeguarded Newton iteration. `f` returns `(value, derivative)`.
pub fn newton_bracketed<F>(mut f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64, RootError>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    let f_lo = check(lo, f_lo)?;
    let f_hi = check(hi, f_hi)?;
    let (mut neg, mut pos) = match orient(lo, hi, f_lo, f_hi)? {
        Ok(b) => b,
        Err(root) => return Ok(root),
    };

    let mut x = 0.5 * (neg + pos);
    let mut step_before_last = (pos - neg).abs();
    let mut last_step = step_before_last;
    let (mut fx, mut dfx) = f(x);
    check(x, fx)?;

    for _ in 0..tol.max_iter {
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        let (a, b) = (neg.min(pos), neg.max(pos));

        let newton = x - fx / dfx;
        let use_newton = dfx.is_finite()
            && dfx != 0.0
            && newton > a
            && newton < b
            && (fx / dfx).abs() * 2.0 <= step_before_last.abs();

        step_before_last = last_step;
        let next = if use_newton {
            newton
        } else {
            0.5 * (a + b)
        };
        last_step = next - x;

        let converged = last_step.abs() <= tol.abs + tol.rel * next.abs() || tol.width_ok(a, b);
        if next == x || converged {
            // One last evaluation keeps the returned point's residual honest.
            let (f_next, _) = f(next);
            if f_next.is_finite() && f_next.abs() <= fx.abs() {
                return Ok(next);
            }
            return Ok(x);
        }
        x = next;
        let (v, d) = f(x);
        fx = check(x, v)?;
        dfx = d;
    }
    Err(RootError::MaxIterations {
        iterations: tol.max_iter,
        lo: neg.min(pos),
        hi: neg.max(pos),
    })
}
