//! Open transfer operators evaluated pointwise on a function handle.

use crate::error::{Error, Result};
use crate::induced::InducedOpenSystem;
use crate::map::{Branch, ParabolicMap};

fn interior(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("x = {x} must lie in (0, 1)")))
    }
}

/// `Q_0 f(x) = |phi_0'(x)| f(phi_0(x))`, or 0 when `phi_0(x)` falls in `[0, a_N]`.
pub fn apply_q0(map: &ParabolicMap, n: usize, f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
    interior(x)?;
    let edge = map.preimage(n)?;
    let (y, d) = map.inverse_with_derivative(Branch::Left, x)?;
    Ok(if y > edge { d * f(y) } else { 0.0 })
}

/// `Q_1 f(x) = |phi_1'(x)| f(phi_1(x))`; the right branch never lands in the hole.
pub fn apply_q1(map: &ParabolicMap, f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
    interior(x)?;
    let (y, d) = map.inverse_with_derivative(Branch::Right, x)?;
    Ok(d * f(y))
}

/// `Q f = Q_0 f + Q_1 f`.
pub fn apply_q(map: &ParabolicMap, n: usize, f: &dyn Fn(f64) -> f64, x: f64) -> Result<f64> {
    Ok(apply_q0(map, n, f, x)? + apply_q1(map, f, x)?)
}

/// `N_z f(x) = sum_{i <= N} z^i |zeta_i'(x)| f(zeta_i(x))`.
pub fn apply_open_induced(
    sys: &InducedOpenSystem,
    z: f64,
    f: &dyn Fn(f64) -> f64,
    x: f64,
) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    let mut zi = 1.0;
    for bp in sys.all_branches(x)? {
        zi *= z;
        acc += zi * bp.log_weight.exp() * f(bp.value);
    }
    Ok(acc)
}

/// Largest `|(1 - N_z)(1 - z Q_0) f - (1 - z Q) f|` over `points`.
pub fn identity_residual(
    sys: &InducedOpenSystem,
    z: f64,
    f: &dyn Fn(f64) -> f64,
    points: &[f64],
) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("z = {z} must lie in [0, 1]")));
    }
    let map = sys.map();
    let n = sys.branches();
    let g = |y: f64| -> f64 {
        // g = (1 - z Q_0) f; branch points are interior so Q_0 is defined
        let q0 = if y > 0.0 && y < 1.0 {
            apply_q0(map, n, f, y).unwrap_or(f64::NAN)
        } else {
            0.0
        };
        f(y) - z * q0
    };
    let mut worst: f64 = 0.0;
    for &x in points {
        let lhs = g(x) - apply_open_induced(sys, z, &g, x)?;
        let rhs = f(x) - z * apply_q(map, n, f, x)?;
        let r = (lhs - rhs).abs();
        if r.is_nan() {
            return Err(Error::Domain(format!("identity residual undefined at x = {x}")));
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

/// `count` midpoints of a uniform partition of `(0, 1)`.
pub fn sample_points(count: usize) -> Vec<f64> {
    (0..count).map(|i| (i as f64 + 0.5) / count as f64).collect()
}
