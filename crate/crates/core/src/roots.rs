//! Safeguarded Newton–bisection for monotone scalar equations.
//!
//! Every local inverse in this crate is the solution of `g(x) = y` for a
//! strictly monotone `g` on a known bracket, so a bracketed Newton iteration
//! that falls back to bisection whenever the Newton step leaves the bracket
//! (or stalls) is all we need.

use crate::error::{Error, Result};

/// Absolute step tolerance.
pub const ABS_TOL: f64 = 1e-14;
/// Iteration budget.
pub const MAX_ITER: usize = 200;

/// Solves `g(x) = target` for `x` in `[lo, hi]`, where `g` is strictly
/// monotone and continuous on the bracket and `dg` is its derivative.
///
/// Termination uses a step criterion that is absolute (`ABS_TOL`) for
/// moderate roots and relative (a few ulps) for roots near zero, where the
/// preimage sequence of a parabolic map lives.
pub fn solve_monotone<G, D>(g: G, dg: D, target: f64, lo: f64, hi: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let f = |x: f64| g(x) - target;
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    // an endpoint that solves the equation up to rounding is accepted as is;
    // |x g'(x)| stands in for the size of the terms that cancel in g(x) - target
    let end_tol = |x: f64| 4.0 * f64::EPSILON * target.abs().max((x * dg(x)).abs());
    if fa.abs() <= end_tol(a) && fa.abs() <= fb.abs() {
        return Ok(a);
    }
    if fb.abs() <= end_tol(b) {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Convergence {
            target,
            iterations: 0,
            residual: fa.abs().min(fb.abs()),
        });
    }
    // orient so that f(a) < 0 < f(b)
    if fa > 0.0 {
        std::mem::swap(&mut a, &mut b);
    }

    let mut x = 0.5 * (a + b);
    for it in 0..MAX_ITER {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let d = dg(x);
        let newton = x - fx / d;
        let inside = d.is_finite() && d != 0.0 && (newton - a) * (newton - b) < 0.0;
        let next = if inside { newton } else { 0.5 * (a + b) };
        let step = (next - x).abs();
        x = next;
        let tol = ABS_TOL.min(4.0 * f64::EPSILON * x.abs()).max(f64::MIN_POSITIVE);
        if step <= tol || (a - b).abs() <= tol {
            return Ok(x);
        }
        if it + 1 == MAX_ITER {
            break;
        }
    }
    Err(Error::Convergence {
        target,
        iterations: MAX_ITER,
        residual: f(x).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_quadratic() {
        let x = solve_monotone(|x| x + x * x, |x| 1.0 + 2.0 * x, 0.3, 0.0, 1.0).unwrap();
        let exact = (-1.0 + (1.0f64 + 1.2).sqrt()) / 2.0;
        assert!((x - exact).abs() < 1e-15);
    }

    #[test]
    fn handles_decreasing_functions() {
        let x = solve_monotone(|x| 1.0 / x - 1.0, |x| -1.0 / (x * x), 0.5, 0.5, 1.0).unwrap();
        assert!((x - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn relative_accuracy_near_zero() {
        let y = 1e-12;
        let x = solve_monotone(|x| x + x * x, |x| 1.0 + 2.0 * x, y, 0.0, 1.0).unwrap();
        assert!(((x + x * x) - y).abs() <= 1e-27);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(solve_monotone(|x| x, |_| 1.0, 2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn endpoint_roots_up_to_rounding() {
        let a = 0.1f64 + 0.2; // 0.30000000000000004
        assert_eq!(solve_monotone(|x| x, |_| 1.0, 0.3, a, 1.0).unwrap(), a);
        // tiny targets keep their relative accuracy
        let x = solve_monotone(|x| x + x * x, |x| 1.0 + 2.0 * x, 1e-17, 0.0, 0.5).unwrap();
        assert!((x - 1e-17).abs() < 1e-30);
    }

    #[test]
    fn endpoint_roots() {
        assert_eq!(solve_monotone(|x| x, |_| 1.0, 0.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(solve_monotone(|x| x, |_| 1.0, 1.0, 0.0, 1.0).unwrap(), 1.0);
    }
}
