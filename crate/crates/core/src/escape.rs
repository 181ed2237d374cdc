//! Escape rates through holes `[0, a_N]` and `[0, epsilon]`.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::induced::InducedOpenSystem;
use crate::map::{Family, ParabolicMap};
use crate::montecarlo::{mc_escape_rate, survival_curve};
use crate::spectral::{
    gibbs_cylinder_masses, dominant_support, leading_eigen, mu_mass, perron_root, SpectralTriple,
    DEFAULT_MAXITER, DEFAULT_TOL,
};
use crate::stats::ols;
use crate::transfer::{assemble_ulam_open, induced_operator, Grid, TransferMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hole {
    /// `[0, a_N]`.
    Markov(usize),
    /// `[0, epsilon]`.
    Epsilon(f64),
}

impl Hole {
    /// Right end of the hole, which is also its Lebesgue measure.
    pub fn edge(&self, map: &ParabolicMap) -> Result<f64> {
        match *self {
            Hole::Markov(n) => map.preimage(n),
            Hole::Epsilon(e) => Ok(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// `-log lambda_N / sum_k k rho_N([k])` from the induced system.
    #[serde(rename = "induced")]
    InducedFormula,
    /// `-log` of the Perron root of the open Ulam matrix of `F`.
    #[serde(rename = "ulam")]
    UlamDirect,
    #[serde(rename = "montecarlo")]
    MonteCarlo,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::InducedFormula => "induced",
            Method::UlamDirect => "ulam",
            Method::MonteCarlo => "montecarlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EscapeOptions {
    /// Grid size `M`.
    pub grid: usize,
    pub tol: f64,
    pub maxiter: usize,
    /// Also solve `lambda(N_z) = 1` for the induced route.
    pub pressure_root: bool,
    pub samples: u64,
    pub n_max: usize,
    /// Fitting window; defaults to `[n_max / 3, n_max]`.
    pub window: Option<(usize, usize)>,
    pub seed: u64,
}

impl Default for EscapeOptions {
    fn default() -> Self {
        EscapeOptions {
            grid: 4096,
            tol: DEFAULT_TOL,
            maxiter: DEFAULT_MAXITER,
            pressure_root: false,
            samples: 1_000_000,
            n_max: 60,
            window: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub family: Family,
    pub s: f64,
    pub hole: Hole,
    /// `a_N` for a Markov hole, `epsilon` otherwise.
    pub a_n: f64,
    pub m_h: f64,
    /// Perron root of the operator the method uses (`exp(-gamma)` for Monte Carlo).
    pub lambda: f64,
    pub gamma_rho: Option<f64>,
    pub sum_k_rho: Option<f64>,
    pub gamma_mu: f64,
    pub method: Method,
    pub grid_m: Option<usize>,
    pub eigen_residual: Option<f64>,
    pub runtime_ms: f64,
    /// `|int e_N d nu_N - sum_k k rho_N([k])|`.
    pub mass_discrepancy: Option<f64>,
    /// `log z` where `lambda(N_z) = 1`.
    pub gamma_pressure: Option<f64>,
    /// Monte Carlo standard error.
    pub stderr: Option<f64>,
}

pub const CSV_HEADER: [&str; 13] = [
    "family",
    "s",
    "N",
    "a_N",
    "m_H",
    "lambda",
    "gamma_rho",
    "sum_k_rho",
    "gamma_mu",
    "method",
    "grid_M",
    "eigen_residual",
    "runtime_ms",
];

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

impl EscapeReport {
    /// Hole index for Markov holes.
    pub fn n(&self) -> Option<usize> {
        match self.hole {
            Hole::Markov(n) => Some(n),
            Hole::Epsilon(_) => None,
        }
    }

    /// One CSV record in [`CSV_HEADER`] order.
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.family.tag().to_string(),
            fmt_f(self.s),
            self.n().map(|n| n.to_string()).unwrap_or_default(),
            fmt_f(self.a_n),
            fmt_f(self.m_h),
            fmt_f(self.lambda),
            fmt_opt(self.gamma_rho),
            fmt_opt(self.sum_k_rho),
            fmt_f(self.gamma_mu),
            self.method.tag().to_string(),
            self.grid_m.map(|m| m.to_string()).unwrap_or_default(),
            fmt_opt(self.eigen_residual),
            format!("{:.3}", self.runtime_ms),
        ]
    }
}

/// `gamma_rho = -log lambda_N`.
pub fn escape_rate_induced(t: &SpectralTriple) -> Result<f64> {
    if !(t.lambda > 0.0 && t.lambda < 1.0) {
        return Err(Error::Domain(format!(
            "leading eigenvalue {} is not in (0, 1)",
            t.lambda
        )));
    }
    Ok(-t.lambda.ln())
}

/// `gamma_mu = gamma_rho / sum_k k rho_N([k])`.
pub fn escape_rate_original(t: &SpectralTriple, masses: &[f64]) -> Result<f64> {
    let total: f64 = masses.iter().sum();
    if masses.iter().any(|&m| m < -1e-15) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Normalization { sum: total });
    }
    let mean: f64 = masses.iter().enumerate().map(|(k, m)| (k + 1) as f64 * m).sum();
    Ok(escape_rate_induced(t)? / mean)
}

/// `-log` of the leading eigenvalue of an open Ulam matrix.
pub fn escape_rate_ulam(p: &TransferMatrix) -> Result<f64> {
    let t = leading_eigen(p, DEFAULT_TOL, DEFAULT_MAXITER)?;
    escape_rate_induced(&t)
}

fn arc(map: &ParabolicMap) -> Arc<ParabolicMap> {
    Arc::new(map.clone())
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Solves `lambda(N_z) = 1` for `z` in `[1, 1 / lambda_N]` and returns `log z`.
pub fn pressure_root_rate(a: &TransferMatrix, lambda_n: f64, opts: &EscapeOptions) -> Result<f64> {
    let active = dominant_support(a)?;
    let g = |u: f64| -> Result<f64> {
        let az = a.with_z(u.exp())?;
        Ok(perron_root(&az, &active, opts.tol, opts.maxiter)?.ln())
    };
    // g is increasing and close to linear in u = log z; Illinois false position
    let (mut u0, mut u1) = (0.0, -lambda_n.ln());
    let (mut g0, mut g1) = (lambda_n.ln(), g(u1)?);
    if g1 < 0.0 {
        return Err(Error::Domain(format!("no pressure root below z = {}", u1.exp())));
    }
    let mut side = 0;
    for _ in 0..100 {
        let u = (u0 * g1 - u1 * g0) / (g1 - g0);
        let gu = g(u)?;
        if gu.abs() <= 1e-15 || (u1 - u0).abs() <= 1e-15 * u1.abs() {
            return Ok(u);
        }
        if gu > 0.0 {
            u1 = u;
            g1 = gu;
            if side == 1 {
                g0 *= 0.5;
            }
            side = 1;
        } else {
            u0 = u;
            g0 = gu;
            if side == -1 {
                g1 *= 0.5;
            }
            side = -1;
        }
    }
    Err(Error::Convergence {
        target: 1.0,
        iterations: 100,
        residual: g0.abs().min(g1.abs()),
    })
}

/// Induced-route escape rate through the Markov hole `[0, a_N]`.
pub fn escape_markov(map: &ParabolicMap, n: usize, opts: &EscapeOptions) -> Result<EscapeReport> {
    let start = Instant::now();
    let sys = InducedOpenSystem::build(arc(map), n)?;
    let a = induced_operator(&sys, opts.grid)?;
    let mut t = leading_eigen(&a, opts.tol, opts.maxiter)?;
    let rho = gibbs_cylinder_masses(&a, &t)?;
    t.rho_cyl = Some(rho.clone());
    let gamma_rho = escape_rate_induced(&t)?;
    let gamma_mu = escape_rate_original(&t, &rho)?;
    let mass = mu_mass(&a, &t)?;
    let gamma_pressure = if opts.pressure_root {
        Some(pressure_root_rate(&a, t.lambda, opts)?)
    } else {
        None
    };
    let edge = sys.hole_edge();
    Ok(EscapeReport {
        family: map.family(),
        s: map.s(),
        hole: Hole::Markov(n),
        a_n: edge,
        m_h: edge,
        lambda: t.lambda,
        gamma_rho: Some(gamma_rho),
        sum_k_rho: Some(mass.mass_k),
        gamma_mu,
        method: Method::InducedFormula,
        grid_m: Some(a.dim()),
        eigen_residual: Some(t.eigen_residual()),
        runtime_ms: ms(start),
        mass_discrepancy: Some(mass.discrepancy),
        gamma_pressure,
        stderr: None,
    })
}

/// Spectral data of the induced operator, for callers that need more than the rate.
pub fn induced_triple(
    map: &ParabolicMap,
    n: usize,
    opts: &EscapeOptions,
) -> Result<(TransferMatrix, SpectralTriple)> {
    let sys = InducedOpenSystem::build(arc(map), n)?;
    let a = induced_operator(&sys, opts.grid)?;
    let mut t = leading_eigen(&a, opts.tol, opts.maxiter)?;
    t.rho_cyl = Some(gibbs_cylinder_masses(&a, &t)?);
    Ok((a, t))
}

fn ulam_report(map: &ParabolicMap, hole: Hole, opts: &EscapeOptions) -> Result<EscapeReport> {
    let start = Instant::now();
    let edge = hole.edge(map)?;
    let grid = Grid::with_hole_edge(map, edge, opts.grid)?;
    let p = assemble_ulam_open(map, &grid)?;
    let t = leading_eigen(&p, opts.tol, opts.maxiter)?;
    let gamma = escape_rate_induced(&t)?;
    Ok(EscapeReport {
        family: map.family(),
        s: map.s(),
        hole,
        a_n: edge,
        m_h: edge,
        lambda: t.lambda,
        gamma_rho: None,
        sum_k_rho: None,
        gamma_mu: gamma,
        method: Method::UlamDirect,
        grid_m: Some(p.dim()),
        eigen_residual: Some(t.eigen_residual()),
        runtime_ms: ms(start),
        mass_discrepancy: None,
        gamma_pressure: None,
        stderr: None,
    })
}

/// Ulam-route escape rate through `[0, epsilon]`.
pub fn escape_ulam_epsilon(
    map: &ParabolicMap,
    epsilon: f64,
    opts: &EscapeOptions,
) -> Result<EscapeReport> {
    ulam_report(map, Hole::Epsilon(epsilon), opts)
}

/// Ulam-route escape rate through `[0, a_N]`.
pub fn escape_ulam_markov(map: &ParabolicMap, n: usize, opts: &EscapeOptions) -> Result<EscapeReport> {
    ulam_report(map, Hole::Markov(n), opts)
}

fn mc_report(map: &ParabolicMap, hole: Hole, opts: &EscapeOptions) -> Result<EscapeReport> {
    let start = Instant::now();
    let edge = hole.edge(map)?;
    let curve = survival_curve(map, edge, opts.n_max, opts.samples, opts.seed)?;
    let window = opts.window.unwrap_or(((opts.n_max / 3).max(1), opts.n_max));
    let r = mc_escape_rate(&curve, window)?;
    Ok(EscapeReport {
        family: map.family(),
        s: map.s(),
        hole,
        a_n: edge,
        m_h: edge,
        lambda: (-r.gamma).exp(),
        gamma_rho: None,
        sum_k_rho: None,
        gamma_mu: r.gamma,
        method: Method::MonteCarlo,
        grid_m: None,
        eigen_residual: None,
        runtime_ms: ms(start),
        mass_discrepancy: None,
        gamma_pressure: None,
        stderr: Some(r.stderr),
    })
}

/// Escape rate through `hole` by the chosen route.
pub fn escape(
    map: &ParabolicMap,
    hole: Hole,
    method: Method,
    opts: &EscapeOptions,
) -> Result<EscapeReport> {
    match (method, hole) {
        (Method::InducedFormula, Hole::Markov(n)) => escape_markov(map, n, opts),
        (Method::InducedFormula, Hole::Epsilon(_)) => Err(Error::Config(
            "the induced route needs a Markov hole; use the ulam method or sandwich bounds".into(),
        )),
        (Method::UlamDirect, h) => ulam_report(map, h, opts),
        (Method::MonteCarlo, h) => mc_report(map, h, opts),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub n: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub reports: Vec<EscapeReport>,
    pub failures: Vec<SweepFailure>,
    /// Hole indices `N` at which `gamma_mu(N) > gamma_mu(N_prev) + 1e-10`.
    pub monotonicity_violations: Vec<usize>,
}

/// One report per hole index, computed in parallel and kept in input order.
/// Failures are collected rather than aborting the sweep.
pub fn sweep(
    map: &ParabolicMap,
    ns: &[usize],
    method: Method,
    opts: &EscapeOptions,
) -> Result<SweepTable> {
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("hole indices must be strictly increasing".into()));
    }
    let results: Vec<(usize, Result<EscapeReport>)> = ns
        .par_iter()
        .map(|&n| (n, escape(map, Hole::Markov(n), method, opts)))
        .collect();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (n, r) in results {
        match r {
            Ok(rep) => reports.push(rep),
            Err(e) => failures.push(SweepFailure {
                n,
                error: e.to_string(),
            }),
        }
    }
    let monotonicity_violations = reports
        .windows(2)
        .filter(|w| w[1].gamma_mu > w[0].gamma_mu + 1e-10)
        .filter_map(|w| w[1].n())
        .collect();
    Ok(SweepTable {
        reports,
        failures,
        monotonicity_violations,
    })
}

/// `ceil(n0 r^j)` for `r = sqrt 2`, deduplicated, ending at `n1`.
pub fn geometric_indices(n0: usize, n1: usize) -> Vec<usize> {
    geometric_indices_ratio(n0, n1, std::f64::consts::SQRT_2)
}

pub fn geometric_indices_ratio(n0: usize, n1: usize, r: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut j = 0;
    loop {
        let v = (n0 as f64 * r.powi(j)).ceil() as usize;
        let v = v.min(n1);
        if out.last() != Some(&v) {
            out.push(v);
        }
        if v >= n1 {
            return out;
        }
        j += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `s < 1`: `gamma ~ const m(H)`.
    Linear,
    /// `s = 1`: `gamma ~ const m(H) / (-log m(H))`.
    LogCorrected,
    /// `s > 1`: `gamma ~ const m(H)^s`.
    Power,
}

impl Regime {
    pub fn from_s(s: f64) -> Self {
        if (s - 1.0).abs() < 1e-12 {
            Regime::LogCorrected
        } else if s < 1.0 {
            Regime::Linear
        } else {
            Regime::Power
        }
    }

    /// The quantity expected to settle to a constant.
    pub fn normalized(self, gamma: f64, m: f64, s: f64) -> f64 {
        match self {
            Regime::Linear => gamma / m,
            Regime::LogCorrected => gamma * (-m.ln()) / m,
            Regime::Power => gamma / m.powf(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub regime: Regime,
    /// Least-squares slope of `log gamma_mu` against `log m(H)`.
    pub slope: f64,
    pub r_squared: f64,
    /// Regime-normalized rate at the smallest hole.
    pub constant: f64,
    /// `(max - min) / min` of the normalized rate over the top decade of `N`.
    pub variation_top_decade: f64,
    pub rows: usize,
}

/// Fits the shrinking-hole law selected by `s` to a sweep.
pub fn fit_scaling(reports: &[EscapeReport], s: f64) -> Result<ScalingFit> {
    if reports.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} rows, need at least 5",
            reports.len()
        )));
    }
    let (mmin, mmax) = reports.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
        (lo.min(r.m_h), hi.max(r.m_h))
    });
    // hole measures decay like N^(-1/s), so for s > 1 the span is read off N
    let (nmin, nmax) = reports
        .iter()
        .filter_map(|r| r.n())
        .fold((usize::MAX, 0), |(lo, hi), n| (lo.min(n), hi.max(n)));
    let span_n = if nmax > 0 { (nmax as f64 / nmin as f64).log10() } else { 0.0 };
    let span = (mmax / mmin).log10().max(span_n);
    if span < 1.5 {
        return Err(Error::InsufficientData(format!(
            "sweep spans {span:.2} decades, need 1.5"
        )));
    }
    if reports.iter().any(|r| !(r.gamma_mu > 0.0)) {
        return Err(Error::Domain("escape rates must be positive to fit".into()));
    }
    let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.m_h.ln(), r.gamma_mu.ln())).collect();
    let fit = ols(&pts).ok_or_else(|| Error::InsufficientData("degenerate fit".into()))?;
    let regime = Regime::from_s(s);
    let n_top = reports.iter().filter_map(|r| r.n()).max();
    let top: Vec<f64> = reports
        .iter()
        .filter(|r| match (r.n(), n_top) {
            (Some(n), Some(top)) => 10 * n >= top,
            _ => r.m_h <= 10.0 * mmin,
        })
        .map(|r| regime.normalized(r.gamma_mu, r.m_h, s))
        .collect();
    let (lo, hi) = top
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let smallest = reports
        .iter()
        .min_by(|a, b| a.m_h.partial_cmp(&b.m_h).unwrap())
        .unwrap();
    Ok(ScalingFit {
        regime,
        slope: fit.slope,
        r_squared: fit.r_squared,
        constant: regime.normalized(smallest.gamma_mu, smallest.m_h, s),
        variation_top_decade: (hi - lo) / lo,
        rows: reports.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub epsilon: f64,
    /// `a_{N+1} < epsilon <= a_N`.
    pub n_eps: usize,
    /// `gamma_mu(H_{N+1})`.
    pub lower: f64,
    /// `gamma_mu(H_N)`.
    pub upper: f64,
}

/// `N` with `a_{N+1} < epsilon <= a_N`.
pub fn hole_index_below(map: &ParabolicMap, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < map.cut()) {
        return Err(Error::Domain(format!(
            "epsilon = {epsilon} must lie in (0, a = {})",
            map.cut()
        )));
    }
    // epsilon < a puts it in some A_n with n >= 2, and then N = n - 1
    Ok(map.return_time(epsilon)? - 1)
}

/// Markov-hole bounds on the escape rate through `[0, epsilon]`.
pub fn sandwich_bounds(map: &ParabolicMap, epsilon: f64, opts: &EscapeOptions) -> Result<Sandwich> {
    let n = hole_index_below(map, epsilon)?;
    if n < 2 {
        return Err(Error::Domain(format!(
            "epsilon = {epsilon} lies above a_2; the induced route needs N >= 2"
        )));
    }
    let upper = escape_markov(map, n, opts)?.gamma_mu;
    let lower = escape_markov(map, n + 1, opts)?.gamma_mu;
    Ok(Sandwich {
        epsilon,
        n_eps: n,
        lower,
        upper,
    })
}
