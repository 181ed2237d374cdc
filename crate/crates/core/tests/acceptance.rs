//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use parabolic_escape::escape::{
    escape_markov, escape_ulam_epsilon, escape_ulam_markov, geometric_indices, sandwich_bounds,
    sweep, EscapeOptions, Method,
};
use parabolic_escape::induced::InducedOpenSystem;
use parabolic_escape::map::MapSpec;
use parabolic_escape::montecarlo::{mc_escape_rate, survival_curve};
use parabolic_escape::spectral::{leading_eigen, mu_mass, DEFAULT_MAXITER, DEFAULT_TOL};
use parabolic_escape::transfer::{identity_residual, induced_operator, sample_points};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn harmonic(m: usize) -> f64 {
    (1..=m).map(|i| 1.0 / i as f64).sum()
}

/// `sum_{k > n} k^(-sigma)`: direct to `n + 10^5`, Euler–Maclaurin beyond.
fn power_tail(sigma: f64, n: usize) -> f64 {
    let m = n + 100_000;
    let direct: f64 = ((n + 1)..=m).rev().map(|k| (k as f64).powf(-sigma)).sum();
    let x = m as f64;
    let em = x.powf(1.0 - sigma) / (sigma - 1.0) - 0.5 * x.powf(-sigma)
        + sigma * x.powf(-sigma - 1.0) / 12.0
        - sigma * (sigma + 1.0) * (sigma + 2.0) * x.powf(-sigma - 3.0) / 720.0;
    direct + em
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn gauss_mass(a: f64, b: f64) -> f64 {
    simpson(|x| 1.0 / ((1.0 + x) * std::f64::consts::LN_2), a, b, 2000)
}

fn pwl_exact_values() -> Outcome {
    let map = Arc::new(MapSpec::pwl_harmonic().build().unwrap());
    let opts = EscapeOptions::default();
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for n in [2usize, 5, 10, 100] {
        let nf = n as f64;
        let sys = InducedOpenSystem::build(map.clone(), n).unwrap();
        let a = induced_operator(&sys, opts.grid).unwrap();
        let t = leading_eigen(&a, DEFAULT_TOL, DEFAULT_MAXITER).unwrap();
        worst.0 = worst.0.max((t.lambda - nf / (nf + 1.0)).abs());
        let r = escape_markov(&map, n, &opts).unwrap();
        let rho = parabolic_escape::spectral::gibbs_cylinder_masses(&a, &t).unwrap();
        for (i, v) in rho.iter().enumerate() {
            let k = (i + 1) as f64;
            worst.1 = worst.1.max((v - (nf + 1.0) / (nf * k * (k + 1.0))).abs());
        }
        let exact = (1.0 + 1.0 / nf).ln() * (nf / (nf + 1.0)) / (harmonic(n + 1) - 1.0);
        worst.2 = worst.2.max((r.gamma_mu - exact).abs());
    }
    outcome(
        worst.0 <= 1e-12 && worst.1 <= 1e-12 && worst.2 <= 1e-10,
        format!(
            "max |dlambda| {:.1e}, |drho| {:.1e}, |dgamma| {:.1e}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn zipf_scaling() -> Outcome {
    let opts = EscapeOptions::default();
    let ns = geometric_indices(100, 10_000);
    let mut pass = true;
    let mut detail = Vec::new();
    let mut oracle_err: f64 = 0.0;
    for s in [2.0, 1.0, 0.5] {
        let map = MapSpec::pwl_zipf(s).build().unwrap();
        let table = sweep(&map, &ns, Method::InducedFormula, &opts).unwrap();
        assert!(table.failures.is_empty(), "{:?}", table.failures);
        let sigma = 1.0 + 1.0 / s;
        let zeta = power_tail(sigma, 0);
        for r in &table.reports {
            let n = r.n().unwrap();
            let tail = power_tail(sigma, n) / zeta;
            let mean: f64 = (1..=n).map(|k| k as f64 * (k as f64).powf(-sigma)).sum::<f64>() / zeta;
            let lambda = 1.0 - tail;
            let gamma = -(-tail).ln_1p() * lambda / mean;
            oracle_err = oracle_err
                .max(((r.gamma_mu - gamma) / gamma).abs())
                .max(((r.m_h - tail) / tail).abs());
        }
        let pts: Vec<(f64, f64)> = table
            .reports
            .iter()
            .map(|r| (r.m_h.ln(), r.gamma_mu.ln()))
            .collect();
        if s > 1.0 {
            let k = pts.len() as f64;
            let (mx, my) = pts
                .iter()
                .fold((0.0, 0.0), |(a, b), p| (a + p.0 / k, b + p.1 / k));
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let slope = sxy / sxx;
            pass &= ((slope - s) / s).abs() <= 0.03;
            detail.push(format!("s=2 slope {slope:.4}"));
        } else {
            let top: Vec<f64> = table
                .reports
                .iter()
                .filter(|r| r.n().unwrap() * 10 >= 10_000)
                .map(|r| {
                    if s == 1.0 {
                        r.gamma_mu * (-r.m_h.ln()) / r.m_h
                    } else {
                        r.gamma_mu / r.m_h
                    }
                })
                .collect();
            let lo = top.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = top.iter().cloned().fold(0.0, f64::max);
            let var = (hi - lo) / lo;
            pass &= var < 0.10;
            detail.push(format!("s={s} variation {:.2}%", 100.0 * var));
        }
    }
    pass &= oracle_err <= 1e-6;
    detail.push(format!("closed-form rel err {oracle_err:.1e}"));
    outcome(pass, detail.join(", "))
}

fn operator_identity() -> Outcome {
    let f = |x: f64| x * x;
    let pts = sample_points(50);
    let mut worst: f64 = 0.0;
    for spec in [MapSpec::pwl_harmonic(), MapSpec::lsv(0.5), MapSpec::farey()] {
        let map = Arc::new(spec.build().unwrap());
        for n in [2usize, 4, 8] {
            let sys = InducedOpenSystem::build(map.clone(), n).unwrap();
            for z in [0.25, 0.9, 1.0] {
                worst = worst.max(identity_residual(&sys, z, &f, &pts).unwrap());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max residual {worst:.1e}"))
}

fn cross_method() -> Outcome {
    let map = MapSpec::lsv(0.5).build().unwrap();
    let opts = EscapeOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 2..=6 {
        let a = escape_markov(&map, n, &opts).unwrap();
        let u = escape_ulam_markov(&map, n, &opts).unwrap();
        let rel = (a.gamma_mu - u.gamma_mu).abs() / a.gamma_mu;
        pass &= rel <= 2e-3;
        parts.push(format!("N={n} {rel:.1e}"));
    }
    outcome(pass, format!("relative gaps {}", parts.join(", ")))
}

fn monte_carlo() -> Outcome {
    let map = MapSpec::lsv(0.5).build().unwrap();
    let edge = map.preimage(3).unwrap();
    let curve = survival_curve(&map, edge, 60, 10_000_000, 20_240_601).unwrap();
    let r = mc_escape_rate(&curve, (20, 60)).unwrap();
    let g = escape_markov(&map, 3, &EscapeOptions::default()).unwrap().gamma_mu;
    let gap = (r.gamma - g).abs();
    let allowed = (0.05 * g).max(3.0 * r.stderr);
    outcome(
        gap <= allowed,
        format!(
            "mc {:.5} +- {:.1e} vs induced {g:.5}, gap {:.2}%",
            r.gamma,
            r.stderr,
            100.0 * gap / g
        ),
    )
}

fn gauss_limit() -> Outcome {
    let map = MapSpec::farey().build().unwrap();
    let opts = EscapeOptions::default();
    let ns = [2usize, 5, 10, 20, 50, 100];
    let mut lambdas = Vec::new();
    let mut rho1 = f64::NAN;
    for &n in &ns {
        let sys = InducedOpenSystem::build(Arc::new(map.clone()), n).unwrap();
        let a = induced_operator(&sys, opts.grid).unwrap();
        let t = leading_eigen(&a, DEFAULT_TOL, DEFAULT_MAXITER).unwrap();
        if n == 100 {
            rho1 = parabolic_escape::spectral::gibbs_cylinder_masses(&a, &t).unwrap()[0];
        }
        lambdas.push(t.lambda);
    }
    let increasing = lambdas.windows(2).all(|w| w[1] > w[0]);
    let target1 = gauss_mass(0.5, 1.0);
    let tail = gauss_mass(0.0, 1.0 / 101.0);
    let leak = 1.0 - lambdas[ns.len() - 1];
    let rel = (leak - tail).abs() / tail;
    outcome(
        increasing && (rho1 - target1).abs() <= 1e-3 && rel <= 0.20,
        format!(
            "rho([1]) {rho1:.5} vs {target1:.5}, 1-lambda {leak:.5} vs {tail:.5} ({:.1}%), increasing {increasing}",
            100.0 * rel
        ),
    )
}

fn sandwich() -> Outcome {
    let opts = EscapeOptions::default();
    let families = [
        ("lsv 0.5", MapSpec::lsv(0.5)),
        ("pm 0.5", MapSpec::pomeau_manneville(0.5)),
        ("farey", MapSpec::farey()),
        ("pwl", MapSpec::pwl_harmonic()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, spec)) in families.iter().enumerate() {
        let map = spec.build().unwrap();
        let (lo, hi) = (map.preimage(20).unwrap(), map.preimage(2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7 + i as u64);
        let eps: Vec<f64> = (0..20).map(|_| rng.random_range(lo..hi)).collect();
        let misses: usize = eps
            .par_iter()
            .map(|&e| {
                let b = sandwich_bounds(&map, e, &opts).unwrap();
                let d = escape_ulam_epsilon(&map, e, &opts).unwrap().gamma_mu;
                let inside = d >= b.lower * (1.0 - 1e-3) && d <= b.upper * (1.0 + 1e-3);
                usize::from(!inside)
            })
            .sum();
        pass &= misses == 0;
        parts.push(format!("{name} {misses}/20 outside"));
    }
    outcome(pass, parts.join(", "))
}

fn mass_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for s in [0.5, 1.0, 2.0] {
        let map = Arc::new(MapSpec::lsv(s).build().unwrap());
        for n in 2..=6 {
            let sys = InducedOpenSystem::build(map.clone(), n).unwrap();
            let a = induced_operator(&sys, 4096).unwrap();
            let t = leading_eigen(&a, DEFAULT_TOL, DEFAULT_MAXITER).unwrap();
            worst = worst.max(mu_mass(&a, &t).unwrap().discrepancy);
        }
    }
    outcome(worst <= 1e-8, format!("max discrepancy {worst:.1e}"))
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 pwl exact values", Duration::from_secs(1), pwl_exact_values),
        ("2 shrinking-hole scaling", Duration::from_secs(30), zipf_scaling),
        ("3 operator identity", Duration::from_secs(5), operator_identity),
        ("4 induced vs ulam", Duration::from_secs(60), cross_method),
        ("5 monte carlo", Duration::from_secs(120), monte_carlo),
        ("6 gauss-map limit", Duration::from_secs(60), gauss_limit),
        ("7 sandwich bounds", Duration::from_secs(120), sandwich),
        ("8 mass identity", Duration::from_secs(30), mass_identity),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let pass = out.pass && took <= budget;
        failed += usize::from(!pass);
        println!(
            "criterion {name}: {} ({}; {:.2} s of {} s)",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
