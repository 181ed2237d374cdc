//! Leading eigen-data of nonnegative transfer matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transfer::TransferMatrix;

/// Default stopping tolerance on the Collatz–Wielandt ratio spread.
pub const DEFAULT_TOL: f64 = 1e-13;
pub const DEFAULT_MAXITER: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralTriple {
    pub lambda: f64,
    /// Right eigenvector, scaled so that `sum nu_i h_i = 1`.
    pub h: Vec<f64>,
    /// Left eigenvector, a probability vector.
    pub nu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_cyl: Option<Vec<f64>>,
    /// `|A h - lambda h|_inf / |h|_inf`.
    pub residual_right: f64,
    /// `|A^T nu - lambda nu|_inf / |nu|_inf`.
    pub residual_left: f64,
    pub iterations: usize,
}

impl SpectralTriple {
    pub fn eigen_residual(&self) -> f64 {
        self.residual_right.max(self.residual_left)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Cells with an incoming and an outgoing edge inside the pruned support.
fn core_support(a: &TransferMatrix) -> Vec<bool> {
    let m = a.dim();
    let mut active = vec![true; m];
    loop {
        let ind: Vec<f64> = active.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let rows = a.apply(&ind);
        let cols = a.apply_transpose(&ind);
        let mut changed = false;
        for i in 0..m {
            if active[i] && !(rows[i] > 0.0 && cols[i] > 0.0) {
                active[i] = false;
                changed = true;
            }
        }
        if !changed {
            return active;
        }
    }
}

/// Grows the set reachable from `start` along edges of `A` (or of `A^T`).
fn reach(a: &TransferMatrix, active: &[bool], start: usize, forward: bool) -> Vec<bool> {
    let m = a.dim();
    let mut seen = vec![false; m];
    seen[start] = true;
    let mut frontier = vec![0.0; m];
    frontier[start] = 1.0;
    loop {
        // successors j of i have A_ij > 0, i.e. (A^T e_i)_j > 0
        let next = if forward {
            a.apply_transpose(&frontier)
        } else {
            a.apply(&frontier)
        };
        let mut grew = false;
        frontier.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..m {
            if next[j] > 0.0 && active[j] && !seen[j] {
                seen[j] = true;
                frontier[j] = 1.0;
                grew = true;
            }
        }
        if !grew {
            return seen;
        }
    }
}

/// A few unguarded power steps on `active`, enough to tell the dominant
/// class apart from the others.
fn rough(apply: impl Fn(&[f64]) -> Vec<f64>, active: &[bool]) -> Vec<f64> {
    let mut v: Vec<f64> = active.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut prev = 0.0;
    for it in 0..2000 {
        let mut w = apply(&v);
        w.iter_mut().zip(active).for_each(|(x, &b)| {
            if !b {
                *x = 0.0
            }
        });
        let scale = w.iter().fold(0.0f64, |acc, &x| acc.max(x));
        if !(scale > 0.0) {
            return w;
        }
        v = w.into_iter().map(|x| x / scale).collect();
        if it >= 30 && (scale - prev).abs() <= 1e-9 * scale {
            break;
        }
        prev = scale;
    }
    v
}

/// The communicating class carrying the leading eigenvalue.
///
/// Cells without in- or out-edges are pruned first. Among the rest, the
/// class is the one where both rough Perron vectors are largest; other
/// classes (coarse-grid artefacts such as isolated self-loops) are left to
/// the tail fill-in of [`leading_eigen`].
pub fn dominant_support(a: &TransferMatrix) -> Result<Vec<bool>> {
    let core = core_support(a);
    if !core.iter().any(|&b| b) {
        return Err(Error::Reducible);
    }
    let h = rough(|v| a.apply(v), &core);
    let nu = rough(|v| a.apply_transpose(v), &core);
    let (start, best) = h
        .iter()
        .zip(&nu)
        .map(|(x, y)| x * y)
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });
    if !(best > 0.0) {
        return Err(Error::Reducible);
    }
    let fwd = reach(a, &core, start, true);
    let bwd = reach(a, &core, start, false);
    let class: Vec<bool> = (0..core.len()).map(|i| fwd[i] && bwd[i]).collect();
    // a lone cell needs a self-loop
    let mut e = vec![0.0; core.len()];
    e[start] = 1.0;
    if class.iter().filter(|&&b| b).count() == 1 && !(a.apply(&e)[start] > 0.0) {
        return Err(Error::Reducible);
    }
    Ok(class)
}

/// Power iteration with Collatz–Wielandt bounds on the support: stops
/// once the ratios `(A v)_i / v_i` agree to `tol` relative. Off the support
/// the vector is then filled in from `v = A v / lambda`.
fn power(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    active: &[bool],
    tol: f64,
    maxiter: usize,
) -> Result<(f64, Vec<f64>, usize)> {
    let m = active.len();
    let mut v: Vec<f64> = active.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut spread = f64::INFINITY;
    for it in 1..=maxiter {
        let mut w = apply(&v);
        w.iter_mut().zip(active).for_each(|(x, &b)| {
            if !b {
                *x = 0.0
            }
        });
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..m {
            if active[i] && v[i] > 0.0 {
                let r = w[i] / v[i];
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        let scale = w.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain("power iteration collapsed to zero".into()));
        }
        v = w.into_iter().map(|x| x / scale).collect();
        spread = (hi - lo) / hi;
        if spread <= tol {
            let lambda = 0.5 * (lo + hi);
            extend(&apply, active, lambda, &mut v);
            return Ok((lambda, v, it));
        }
    }
    Err(Error::EigenNonConvergence {
        iterations: maxiter,
        spread,
    })
}

/// Fills cells off the support from `v = A v / lambda`.
fn extend(apply: &impl Fn(&[f64]) -> Vec<f64>, active: &[bool], lambda: f64, v: &mut [f64]) {
    // exact after as many passes as the longest transient path, geometric
    // where another class has a self-loop
    for _ in 0..active.len().max(1000) {
        let w = apply(v);
        let top = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let mut change = 0.0f64;
        for i in 0..v.len() {
            if !active[i] {
                let x = w[i] / lambda;
                change = change.max((x - v[i]).abs());
                v[i] = x;
            }
        }
        if change <= 1e-16 * top {
            return;
        }
    }
}

fn residual(apply: impl Fn(&[f64]) -> Vec<f64>, lambda: f64, v: &[f64]) -> f64 {
    let w = apply(v);
    let num = w
        .iter()
        .zip(v)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - lambda * b).abs()));
    let den = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    num / den
}

/// Leading eigenvalue only, on a support already known to be irreducible.
pub fn perron_root(a: &TransferMatrix, active: &[bool], tol: f64, maxiter: usize) -> Result<f64> {
    Ok(power(|v| a.apply(v), active, tol, maxiter)?.0)
}

/// Leading eigenvalue with right and left Perron vectors.
pub fn leading_eigen(a: &TransferMatrix, tol: f64, maxiter: usize) -> Result<SpectralTriple> {
    let active = dominant_support(a)?;
    let (lambda, mut h, it_r) = power(|v| a.apply(v), &active, tol, maxiter)?;
    let (lambda_left, mut nu, it_l) = power(|v| a.apply_transpose(v), &active, tol, maxiter)?;
    if ((lambda - lambda_left) / lambda).abs() > 1e3 * tol.max(1e-15) {
        return Err(Error::EigenNonConvergence {
            iterations: it_r.max(it_l),
            spread: ((lambda - lambda_left) / lambda).abs(),
        });
    }
    let total: f64 = nu.iter().sum();
    nu.iter_mut().for_each(|x| *x /= total);
    let pair: f64 = nu.iter().zip(&h).map(|(n, x)| n * x).sum();
    h.iter_mut().for_each(|x| *x /= pair);
    let residual_right = residual(|v| a.apply(v), lambda, &h);
    let residual_left = residual(|v| a.apply_transpose(v), lambda, &nu);
    Ok(SpectralTriple {
        lambda,
        h,
        nu,
        rho_cyl: None,
        residual_right,
        residual_left,
        iterations: it_r.max(it_l),
    })
}

fn branch_count(a: &TransferMatrix) -> usize {
    a.branches()
        .unwrap_or_else(|| a.grid().levels().iter().copied().max().unwrap_or(0))
}

/// `rho_N([k]) = nu A(h 1_{A_k}) / lambda`, the pull-back form.
pub fn gibbs_cylinder_masses(a: &TransferMatrix, t: &SpectralTriple) -> Result<Vec<f64>> {
    let n = branch_count(a);
    let rho: Vec<f64> = (1..=n)
        .map(|k| {
            let w = a.apply_level(&t.h, k);
            t.nu.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>() / t.lambda
        })
        .collect();
    let sum: f64 = rho.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Normalization { sum });
    }
    Ok(rho)
}

/// `rho_N([k])` as the mass `sum_{cells in A_k} nu_i h_i`.
pub fn cylinder_masses_indicator(a: &TransferMatrix, t: &SpectralTriple) -> Vec<f64> {
    let n = branch_count(a);
    let g = a.grid();
    let mut rho = vec![0.0; n];
    for (c, (x, y)) in t.nu.iter().zip(&t.h).enumerate() {
        let k = g.level(c);
        if !g.is_hole(c) && (1..=n).contains(&k) {
            rho[k - 1] += x * y;
        }
    }
    rho
}

/// `e_N = sum_{k<N} Q_0^k h_N` on the grid of `a`.
pub fn e_function(a: &TransferMatrix, t: &SpectralTriple) -> Result<Vec<f64>> {
    let n = branch_count(a);
    let mut term = t.h.clone();
    let mut e = t.h.clone();
    for _ in 1..n {
        term = a.apply_q0(&term).ok_or_else(|| {
            Error::Domain("operator does not carry its Q_0 factor".into())
        })?;
        for (acc, x) in e.iter_mut().zip(&term) {
            *acc += x;
        }
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    /// `int e_N d nu_N`.
    pub mass_e: f64,
    /// `sum_k k rho_N([k])`.
    pub mass_k: f64,
    pub discrepancy: f64,
}

pub fn mu_mass(a: &TransferMatrix, t: &SpectralTriple) -> Result<MassReport> {
    let e = e_function(a, t)?;
    let mass_e: f64 = e.iter().zip(&t.nu).map(|(x, y)| x * y).sum();
    let rho = match &t.rho_cyl {
        Some(r) => r.clone(),
        None => gibbs_cylinder_masses(a, t)?,
    };
    let mass_k: f64 = rho.iter().enumerate().map(|(k, r)| (k + 1) as f64 * r).sum();
    Ok(MassReport {
        mass_e,
        mass_k,
        discrepancy: (mass_e - mass_k).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::induced::InducedOpenSystem;
    use crate::map::MapSpec;
    use crate::transfer::{
        assemble_induced_composite, assemble_ulam_open, induced_operator, pwl_exact, Grid,
    };
    use std::sync::Arc;

    fn sys(spec: MapSpec, n: usize) -> InducedOpenSystem {
        InducedOpenSystem::build(Arc::new(spec.build().unwrap()), n).unwrap()
    }

    fn triple(a: &TransferMatrix) -> SpectralTriple {
        leading_eigen(a, DEFAULT_TOL, DEFAULT_MAXITER).unwrap()
    }

    #[test]
    fn pwl_perron_root_and_constant_eigenfunction() {
        let s = sys(MapSpec::pwl_harmonic(), 2);
        let a = pwl_exact(&s).unwrap();
        let t = triple(&a);
        assert!((t.lambda - 2.0 / 3.0).abs() < 1e-15);
        let h0 = t.h[1];
        assert!(t.h.iter().all(|&x| (x - h0).abs() < 1e-15));
        assert!((t.nu.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let rho = gibbs_cylinder_masses(&a, &t).unwrap();
        assert!((rho[0] - 0.75).abs() < 1e-15 && (rho[1] - 0.25).abs() < 1e-15);
        let mass = mu_mass(&a, &t).unwrap();
        assert!((mass.mass_k - 1.25).abs() < 1e-14);
        assert!(mass.discrepancy < 1e-14);
    }

    #[test]
    fn pwl_e_function_has_two_levels() {
        let s = sys(MapSpec::pwl_harmonic(), 2);
        let a = pwl_exact(&s).unwrap();
        let t = triple(&a);
        let e = e_function(&a, &t).unwrap();
        // cells: hole, A_2, A_1; Q_0 h on A_1 picks up h on A_2 with slope p_2/p_1
        let h = t.h[2];
        assert!((e[2] - h * (1.0 + 1.0 / 3.0)).abs() < 1e-15);
        assert!((e[1] - h).abs() < 1e-15);
    }

    #[test]
    fn one_by_one() {
        let map = Arc::new(MapSpec::lsv(0.5).build().unwrap());
        let s = InducedOpenSystem::build(map.clone(), 2).unwrap();
        let g = Grid::uniform(&map, 1).unwrap();
        let a = crate::transfer::assemble_induced_matrix(&s, &g).unwrap();
        let t = triple(&a);
        assert!((t.lambda - (1.0 - s.hole_edge())).abs() < 1e-15);
        assert_eq!(t.nu, vec![1.0]);
        assert!((t.h[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lsv_triple_invariants() {
        let s = sys(MapSpec::lsv(0.5), 4);
        let a = induced_operator(&s, 1024).unwrap();
        let t = triple(&a);
        assert!(t.lambda > 0.0 && t.lambda < 1.0);
        assert!(t.eigen_residual() <= 1e-12, "{}", t.eigen_residual());
        assert!(t.h.iter().all(|&x| x >= 0.0) && t.nu.iter().all(|&x| x >= 0.0));
        let rho = gibbs_cylinder_masses(&a, &t).unwrap();
        let ind = cylinder_masses_indicator(&a, &t);
        for (x, y) in rho.iter().zip(&ind) {
            assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
        }
        let mass = mu_mass(&a, &t).unwrap();
        assert!(mass.discrepancy <= 1e-8, "{mass:?}");
        assert!(mass.mass_k >= 1.0);
    }

    #[test]
    fn lambda_increases_with_n() {
        let map = Arc::new(MapSpec::farey().build().unwrap());
        let mut prev = 0.0;
        for n in [2, 4, 8, 16] {
            let s = InducedOpenSystem::build(map.clone(), n).unwrap();
            let a = induced_operator(&s, 512).unwrap();
            let t = triple(&a);
            assert!(t.lambda > prev && t.lambda < 1.0);
            prev = t.lambda;
        }
    }

    #[test]
    fn ulam_open_is_irreducible_and_substochastic() {
        let map = MapSpec::lsv(0.5).build().unwrap();
        let g = Grid::with_hole_edge(&map, 0.1, 512).unwrap();
        let p = assemble_ulam_open(&map, &g).unwrap();
        let t = triple(&p);
        assert!(t.lambda < 1.0 && t.lambda > 0.5);
        assert!(t.eigen_residual() < 1e-12);
    }

    #[test]
    fn reducible_support_is_rejected() {
        // z = 0 switches every branch off
        let map = Arc::new(MapSpec::farey().build().unwrap());
        let s = InducedOpenSystem::build(map.clone(), 3).unwrap();
        let g = Grid::markov(&map, 3, 60).unwrap();
        let a = assemble_induced_composite(&s, &g).unwrap().with_z(0.0).unwrap();
        assert!(matches!(leading_eigen(&a, 1e-13, 100), Err(Error::Reducible)));
    }

    #[test]
    fn json_round_trip() {
        let s = sys(MapSpec::pwl_harmonic(), 3);
        let a = pwl_exact(&s).unwrap();
        let mut t = triple(&a);
        t.rho_cyl = Some(gibbs_cylinder_masses(&a, &t).unwrap());
        let back: SpectralTriple = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
