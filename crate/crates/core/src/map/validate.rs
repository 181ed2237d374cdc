//! Numerical spot checks of the structural assumptions on a parabolic map.

use serde::{Deserialize, Serialize};

use super::{Branch, Family, MapSpec, ParabolicMap, PwlWeights};

/// Relative tolerance on the fitted local exponent.
pub const EXPONENT_REL_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub checks: Vec<Check>,
    /// Slope of `log(F'(x) - 1)` against `log x` near the fixed point.
    pub fitted_exponent: Option<f64>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn push(checks: &mut Vec<Check>, name: &str, passed: bool, detail: String) {
    checks.push(Check {
        name: name.to_string(),
        passed,
        detail,
    });
}

/// Runs all checks; failures are reported, never raised.
pub fn validate_hypotheses(spec: &MapSpec) -> HypothesisReport {
    let mut checks = Vec::new();

    if let Some(PwlWeights::Explicit(p)) = &spec.pwl_weights {
        let total: f64 = p.iter().sum();
        let positive = p.iter().all(|&v| v > 0.0);
        push(
            &mut checks,
            "normalization",
            positive && (total - 1.0).abs() <= 1e-12,
            format!("sum p_k = {total:.17e}, all positive: {positive}"),
        );
    }

    let map = match spec.build() {
        Ok(m) => m,
        Err(e) => {
            push(&mut checks, "construction", false, e.to_string());
            return HypothesisReport {
                checks,
                fitted_exponent: None,
            };
        }
    };
    push(&mut checks, "construction", true, String::new());

    full_branches(&map, &mut checks);
    monotonicity(&map, &mut checks);
    let fitted = local_exponent(&map, &mut checks);
    expansion(&map, &mut checks);

    HypothesisReport {
        checks,
        fitted_exponent: fitted,
    }
}

fn full_branches(map: &ParabolicMap, checks: &mut Vec<Check>) {
    let a = map.cut();
    let ev = |b, x| map.eval_branch(b, x).unwrap_or(f64::NAN);
    let (l0, l1) = (ev(Branch::Left, 0.0), ev(Branch::Left, a));
    let (r0, r1) = (ev(Branch::Right, a), ev(Branch::Right, 1.0));
    let left_ok = l0.abs() <= 1e-12 && (l1 - 1.0).abs() <= 1e-12;
    let (lo, hi) = (r0.min(r1), r0.max(r1));
    let right_ok = lo.abs() <= 1e-12 && (hi - 1.0).abs() <= 1e-12;
    push(
        checks,
        "full_branches",
        left_ok && right_ok,
        format!("F0(0)={l0:e} F0(a)={l1} F1(a+)={r0} F1(1)={r1}"),
    );
}

fn monotonicity(map: &ParabolicMap, checks: &mut Vec<Check>) {
    const SAMPLES: usize = 2000;
    let a = map.cut();
    // piecewise-linear maps are only resolved down to a deep preimage
    let lo = match map.family() {
        Family::PiecewiseLinear => map.preimage(1000).unwrap_or(0.0),
        _ => 0.0,
    };
    let mut ok = true;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=SAMPLES {
        let x = lo + (a - lo) * i as f64 / SAMPLES as f64;
        let y = map.eval_branch(Branch::Left, x).unwrap_or(f64::NAN);
        if !(y > prev) && i > 0 {
            ok = false;
        }
        prev = y;
    }
    let sign = if map.right_branch_increasing() { 1.0 } else { -1.0 };
    let mut prev = f64::NAN;
    for i in 1..=SAMPLES {
        let x = a + (1.0 - a) * i as f64 / SAMPLES as f64;
        let y = sign * map.eval_branch(Branch::Right, x).unwrap_or(f64::NAN);
        if i > 1 && !(y > prev) {
            ok = false;
        }
        prev = y;
    }
    push(checks, "monotone_branches", ok, format!("{SAMPLES} samples per branch"));
}

fn local_exponent(map: &ParabolicMap, checks: &mut Vec<Check>) -> Option<f64> {
    let mut pts = Vec::new();
    if map.family() == Family::PiecewiseLinear {
        // midpoints of deep levels A_k, k geometric in [100, 10^4]
        for j in 0..=20 {
            let k = (100.0 * 10f64.powf(2.0 * j as f64 / 20.0)).round() as usize;
            let (Ok(ak), Ok(ak1)) = (map.preimage(k), map.preimage(k - 1)) else {
                continue;
            };
            let x = 0.5 * (ak + ak1);
            if let Ok(d) = map.branch_derivative(Branch::Left, x) {
                pts.push((x.ln(), (d - 1.0).ln()));
            }
        }
    } else {
        for j in 0..=20 {
            let x = 10f64.powf(-4.0 + 2.0 * j as f64 / 20.0);
            if let Ok(d) = map.branch_derivative(Branch::Left, x) {
                pts.push((x.ln(), (d - 1.0).ln()));
            }
        }
    }
    let slope = crate::stats::ols(&pts).map(|f| f.slope);
    let s = map.s();
    let passed = slope.is_some_and(|v| ((v - s) / s).abs() <= EXPONENT_REL_TOL);
    push(
        checks,
        "local_exponent",
        passed,
        format!("fitted {slope:?}, declared s = {s}"),
    );
    slope
}

fn expansion(map: &ParabolicMap, checks: &mut Vec<Check>) {
    const DELTA: f64 = 1e-3;
    let a = map.cut();
    let mut min = f64::INFINITY;
    for i in 0..=1000 {
        let x = a + DELTA + (1.0 - a - 2.0 * DELTA) * i as f64 / 1000.0;
        if let Ok(d) = map.branch_derivative(Branch::Right, x) {
            min = min.min(d.abs());
        }
    }
    push(
        checks,
        "right_branch_expanding",
        min > 1.0,
        format!("min |F'| on [a+{DELTA}, 1-{DELTA}] = {min}"),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lsv_passes_everything() {
        let r = validate_hypotheses(&MapSpec::lsv(0.5));
        assert!(r.all_passed(), "{r:?}");
        let fitted = r.fitted_exponent.unwrap();
        assert!((fitted - 0.5).abs() < 1e-6);
    }

    #[test]
    fn builtins_pass() {
        for spec in [
            MapSpec::pomeau_manneville(0.5),
            MapSpec::pomeau_manneville(2.0),
            MapSpec::lsv(2.0),
            MapSpec::farey(),
            MapSpec::pwl_zipf(0.5),
            MapSpec::pwl_zipf(2.0),
        ] {
            let r = validate_hypotheses(&spec);
            assert!(r.all_passed(), "{spec:?}: {r:?}");
        }
    }

    #[test]
    fn harmonic_pwl_has_exponent_one() {
        let r = validate_hypotheses(&MapSpec::pwl_harmonic());
        let s = r.fitted_exponent.unwrap();
        assert!((s - 1.0).abs() < 0.05, "fitted {s}");
        assert!(r.all_passed());
    }

    #[test]
    fn unnormalized_weights_are_flagged() {
        let r = validate_hypotheses(&MapSpec::pwl_explicit(1.0, vec![0.5, 0.2, 0.2]));
        assert!(!r.check("normalization").unwrap().passed);
        assert!(!r.all_passed());
    }

    #[test]
    fn wrong_declared_exponent_is_flagged() {
        let mut spec = MapSpec::pwl_harmonic();
        spec.s = 2.0;
        let r = validate_hypotheses(&spec);
        assert!(!r.check("local_exponent").unwrap().passed);
    }
}
