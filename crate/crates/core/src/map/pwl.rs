//! Weight sequences for the piecewise-linear (countable Markov) family.
//!
//! A weight sequence `p_1, p_2, ...` fixes the partition `A_k = (a_k, a_{k-1}]`
//! through the tails `a_k = sum_{j>k} p_j`. Tails are evaluated directly, never
//! as `1 - partial sum`, so deep preimages keep full relative precision.

use serde::{Deserialize, Serialize};

/// How the weights `p_k` of a piecewise-linear map are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PwlWeights {
    /// `p_k = 1/(k(k+1))`, tails `a_k = 1/(k+1)`; intermittency exponent 1.
    Harmonic,
    /// `p_k = k^(-1-1/s) / zeta(1+1/s)`, so that `a_k ~ k^(-1/s)`.
    Zipf,
    /// A finite list of weights; tails vanish past the end of the list.
    Explicit(Vec<f64>),
}

/// Evaluated weights with direct tail access.
#[derive(Debug, Clone)]
pub(crate) enum Weights {
    Harmonic,
    Zipf { sigma: f64, zeta: f64 },
    Explicit { p: Vec<f64>, tails: Vec<f64> },
}

impl Weights {
    pub(crate) fn new(w: &PwlWeights, s: f64) -> Self {
        match w {
            PwlWeights::Harmonic => Weights::Harmonic,
            PwlWeights::Zipf => {
                let sigma = 1.0 + 1.0 / s;
                Weights::Zipf {
                    sigma,
                    zeta: hurwitz_zeta(sigma, 1.0),
                }
            }
            PwlWeights::Explicit(p) => {
                let mut tails = vec![0.0; p.len() + 1];
                for k in (0..p.len()).rev() {
                    tails[k] = tails[k + 1] + p[k];
                }
                Weights::Explicit {
                    p: p.clone(),
                    tails,
                }
            }
        }
    }

    /// `p_k` for `k >= 1`.
    pub(crate) fn weight(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match self {
            Weights::Harmonic => {
                let k = k as f64;
                1.0 / (k * (k + 1.0))
            }
            Weights::Zipf { sigma, zeta } => (k as f64).powf(-sigma) / zeta,
            Weights::Explicit { p, .. } => p.get(k - 1).copied().unwrap_or(0.0),
        }
    }

    /// `a_k = sum_{j>k} p_j` for `k >= 0`.
    pub(crate) fn tail(&self, k: usize) -> f64 {
        match self {
            Weights::Harmonic => 1.0 / (k as f64 + 1.0),
            Weights::Zipf { sigma, zeta } => {
                if k == 0 {
                    1.0
                } else {
                    hurwitz_zeta(*sigma, k as f64 + 1.0) / zeta
                }
            }
            Weights::Explicit { tails, .. } => tails.get(k).copied().unwrap_or(0.0),
        }
    }

    pub(crate) fn len(&self) -> Option<usize> {
        match self {
            Weights::Explicit { p, .. } => Some(p.len()),
            _ => None,
        }
    }
}

// B_{2m} / (2m)! for m = 1..=8
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
];

/// Hurwitz zeta `sum_{j>=0} (q + j)^(-sigma)` for `sigma > 1`, `q > 0`,
/// by Euler–Maclaurin summation after a short direct head.
pub(crate) fn hurwitz_zeta(sigma: f64, q: f64) -> f64 {
    const HEAD: usize = 12;
    let mut head = 0.0;
    let mut x = q;
    if q < HEAD as f64 {
        for _ in 0..HEAD {
            head += x.powf(-sigma);
            x += 1.0;
        }
    }
    // tail from x onwards
    let mut tail = x.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * x.powf(-sigma);
    let mut rising = sigma; // sigma (sigma+1) ... (sigma + 2m - 2)
    let mut pow = x.powf(-sigma - 1.0);
    let x2 = x * x;
    for (m, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = c * rising * pow;
        tail += term;
        if term.abs() < 1e-18 * tail.abs() {
            break;
        }
        let j = 2.0 * m as f64;
        rising *= (sigma + j + 1.0) * (sigma + j + 2.0);
        pow /= x2;
    }
    head + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_tail(sigma: f64, from: usize) -> f64 {
        // direct sum plus integral tail estimate, used only at loose tolerance
        let n = 200_000usize;
        let mut s = 0.0;
        for j in (from..from + n).rev() {
            s += (j as f64).powf(-sigma);
        }
        let x = (from + n) as f64;
        s + x.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * x.powf(-sigma)
    }

    #[test]
    fn riemann_zeta_values() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((hurwitz_zeta(2.0, 1.0) - pi2_6).abs() < 1e-15);
        let z4 = std::f64::consts::PI.powi(4) / 90.0;
        assert!((hurwitz_zeta(4.0, 1.0) - z4).abs() < 1e-15);
        // zeta(3/2) = 2.612375348685488...
        assert!((hurwitz_zeta(1.5, 1.0) - 2.612_375_348_685_488).abs() < 1e-13);
    }

    #[test]
    fn hurwitz_matches_direct_summation() {
        for &sigma in &[1.5, 2.0, 3.0] {
            for &q in &[2usize, 11, 57, 1000] {
                let a = hurwitz_zeta(sigma, q as f64);
                let b = brute_tail(sigma, q);
                assert!((a - b).abs() < 1e-12 * b, "sigma {sigma} q {q}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn harmonic_tails() {
        let w = Weights::new(&PwlWeights::Harmonic, 1.0);
        assert_eq!(w.tail(0), 1.0);
        assert_eq!(w.tail(1), 0.5);
        assert!((w.tail(2) - 1.0 / 3.0).abs() < 1e-16);
        assert!((w.weight(1) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn zipf_tails_are_consistent_with_weights() {
        let w = Weights::new(&PwlWeights::Zipf, 2.0);
        assert!((w.tail(0) - 1.0).abs() < 1e-15);
        for k in 1..200 {
            let diff = w.tail(k - 1) - w.tail(k);
            assert!((diff - w.weight(k)).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn explicit_tails() {
        let w = Weights::new(&PwlWeights::Explicit(vec![0.5, 0.25, 0.25]), 1.0);
        assert_eq!(w.tail(0), 1.0);
        assert_eq!(w.tail(1), 0.5);
        assert_eq!(w.tail(3), 0.0);
        assert_eq!(w.tail(10), 0.0);
        assert_eq!(w.len(), Some(3));
    }
}
