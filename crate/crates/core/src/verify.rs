//! Built-in self-checks against closed forms and cross-method agreement.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::escape::{escape_markov, escape_ulam_markov, EscapeOptions};
use crate::induced::InducedOpenSystem;
use crate::map::{MapSpec, ParabolicMap};
use crate::spectral::{gibbs_cylinder_masses, leading_eigen, DEFAULT_MAXITER, DEFAULT_TOL};
use crate::transfer::{identity_residual, pwl_exact, sample_points};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<44} {:>10.3e} (tol {:.0e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

fn check(name: String, value: f64, tolerance: f64) -> Check {
    Check {
        name,
        value,
        tolerance,
        pass: value <= tolerance,
    }
}

fn harmonic(m: usize) -> f64 {
    (1..=m).map(|i| 1.0 / i as f64).sum()
}

fn pwl_closed_forms(out: &mut Vec<Check>) -> Result<()> {
    let map = Arc::new(MapSpec::pwl_harmonic().build()?);
    for n in [2usize, 5, 10] {
        let nf = n as f64;
        let sys = InducedOpenSystem::build(map.clone(), n)?;
        let a = pwl_exact(&sys)?;
        let t = leading_eigen(&a, DEFAULT_TOL, DEFAULT_MAXITER)?;
        out.push(check(
            format!("pwl lambda_N, N={n}"),
            (t.lambda - nf / (nf + 1.0)).abs(),
            1e-12,
        ));
        let rho = gibbs_cylinder_masses(&a, &t)?;
        let worst = rho
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let k = (i + 1) as f64;
                (r - (nf + 1.0) / (nf * k * (k + 1.0))).abs()
            })
            .fold(0.0, f64::max);
        out.push(check(format!("pwl cylinder masses, N={n}"), worst, 1e-12));
        let g = escape_markov(&map, n, &EscapeOptions::default())?.gamma_mu;
        let exact = (1.0 + 1.0 / nf).ln() * (nf / (nf + 1.0)) / (harmonic(n + 1) - 1.0);
        out.push(check(format!("pwl gamma_mu, N={n}"), (g - exact).abs(), 1e-10));
    }
    Ok(())
}

fn identities(out: &mut Vec<Check>) -> Result<()> {
    let f = |x: f64| x * x;
    let pts = sample_points(50);
    for spec in [MapSpec::pwl_harmonic(), MapSpec::lsv(0.5), MapSpec::farey()] {
        let map = Arc::new(spec.build()?);
        let mut worst: f64 = 0.0;
        for n in [2usize, 4, 8] {
            let sys = InducedOpenSystem::build(map.clone(), n)?;
            for z in [0.25, 0.9, 1.0] {
                worst = worst.max(identity_residual(&sys, z, &f, &pts)?);
            }
        }
        out.push(check(
            format!("operator identity, {}", map.family().tag()),
            worst,
            1e-10,
        ));
    }
    Ok(())
}

fn cross_method(out: &mut Vec<Check>, map: &ParabolicMap) -> Result<()> {
    let opts = EscapeOptions {
        pressure_root: true,
        ..EscapeOptions::default()
    };
    for n in 2..=6 {
        let induced = escape_markov(map, n, &opts)?;
        let ulam = escape_ulam_markov(map, n, &opts)?;
        out.push(check(
            format!("induced formula vs ulam, lsv 0.5, N={n}"),
            (induced.gamma_mu - ulam.gamma_mu).abs() / induced.gamma_mu,
            2e-3,
        ));
        let p = induced.gamma_pressure.unwrap_or(f64::NAN);
        out.push(check(
            format!("pressure root vs ulam, lsv 0.5, N={n}"),
            (p - ulam.gamma_mu).abs() / p,
            2e-3,
        ));
    }
    Ok(())
}

/// Runs every check; a computation error becomes a failing row.
pub fn run_all() -> Vec<Check> {
    let mut out = Vec::new();
    let guard = |name: &str, r: Result<()>, out: &mut Vec<Check>| {
        if let Err(e) = r {
            out.push(Check {
                name: format!("{name}: {e}"),
                value: f64::NAN,
                tolerance: 0.0,
                pass: false,
            });
        }
    };
    let r = pwl_closed_forms(&mut out);
    guard("pwl closed forms", r, &mut out);
    let r = identities(&mut out);
    guard("operator identity", r, &mut out);
    let r = MapSpec::lsv(0.5)
        .build()
        .and_then(|m| cross_method(&mut out, &m));
    guard("cross-method", r, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_pass() {
        let mut out = Vec::new();
        pwl_closed_forms(&mut out).unwrap();
        assert_eq!(out.len(), 9);
        assert!(out.iter().all(|c| c.pass), "{out:?}");
    }

    #[test]
    fn display_row() {
        let c = check("x".into(), 1e-14, 1e-12);
        assert!(c.to_string().starts_with("PASS x"));
        assert!(!check("y".into(), f64::NAN, 1.0).pass);
    }
}
