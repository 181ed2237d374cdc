//! The open jump transformation.
//!
//! The first-return map `G = F^tau` onto `(a, 1]` has one full branch per
//! level set `A_n`, with local inverse `zeta_n = phi_0^(n-1) o phi_1`. With a
//! Markov hole `[0, a_N]` only the branches `n <= N` survive.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::map::{Branch, Family, ParabolicMap, PreimageSeq, Weights};

/// `zeta_n(x)` together with `log |zeta_n'(x)|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub value: f64,
    pub log_weight: f64,
}

#[derive(Debug, Clone)]
pub struct InducedOpenSystem {
    map: Arc<ParabolicMap>,
    n: usize,
    preimages: PreimageSeq,
}

impl InducedOpenSystem {
    /// Builds the system with surviving symbols `1..=n`.
    pub fn build(map: Arc<ParabolicMap>, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("Markov hole index N = {n} must be >= 2")));
        }
        let preimages = map.preimage_sequence(n)?;
        Ok(InducedOpenSystem { map, n, preimages })
    }

    pub fn map(&self) -> &ParabolicMap {
        &self.map
    }

    pub fn map_arc(&self) -> &Arc<ParabolicMap> {
        &self.map
    }

    /// Number of surviving branches `N`.
    pub fn branches(&self) -> usize {
        self.n
    }

    pub fn preimages(&self) -> &PreimageSeq {
        &self.preimages
    }

    /// Right end of the hole, `a_N`.
    pub fn hole_edge(&self) -> f64 {
        self.preimages.get(self.n)
    }

    fn check(&self, k: usize, x: f64) -> Result<()> {
        if k < 1 || k > self.n {
            return Err(Error::Domain(format!("branch {k} outside 1..={}", self.n)));
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        Ok(())
    }

    /// `zeta_k(x)` and its log-derivative.
    pub fn branch(&self, k: usize, x: f64) -> Result<BranchPoint> {
        self.check(k, x)?;
        match self.map.family() {
            Family::Farey => {
                let d = k as f64 + x;
                Ok(BranchPoint {
                    value: 1.0 / d,
                    log_weight: -2.0 * d.ln(),
                })
            }
            Family::PiecewiseLinear => {
                let w = self.pwl_weights();
                let p = w.weight(k);
                Ok(BranchPoint {
                    value: self.preimages.get(k) + p * x,
                    log_weight: p.ln(),
                })
            }
            _ => {
                let mut it = self.chain(x)?;
                let mut last = it.next().expect("at least one branch")?;
                for _ in 1..k {
                    last = it.next().expect("chain covers all branches")?;
                }
                Ok(last)
            }
        }
    }

    fn pwl_weights(&self) -> Weights {
        let spec = self.map.spec();
        Weights::new(
            spec.pwl_weights.as_ref().expect("pwl map carries weights"),
            spec.s,
        )
    }

    pub fn eval_zeta(&self, k: usize, x: f64) -> Result<f64> {
        Ok(self.branch(k, x)?.value)
    }

    pub fn eval_log_weight(&self, k: usize, x: f64) -> Result<f64> {
        Ok(self.branch(k, x)?.log_weight)
    }

    /// All surviving branches at `x`, `zeta_1(x), ..., zeta_N(x)`, computed
    /// by one pass of the composition.
    pub fn all_branches(&self, x: f64) -> Result<Vec<BranchPoint>> {
        self.check(1, x)?;
        match self.map.family() {
            Family::Farey | Family::PiecewiseLinear => {
                (1..=self.n).map(|k| self.branch(k, x)).collect()
            }
            _ => self.chain(x)?.collect(),
        }
    }

    /// Iterates `zeta_1(x), zeta_2(x), ...` by repeated application of
    /// `phi_0`, accumulating `-sum log |F'|` along the preimage chain.
    fn chain(&self, x: f64) -> Result<impl Iterator<Item = Result<BranchPoint>> + '_> {
        let (y, d) = self.map.inverse_with_derivative(Branch::Right, x)?;
        let mut state = Some(BranchPoint {
            value: y,
            log_weight: d.ln(),
        });
        let mut remaining = self.n;
        Ok(std::iter::from_fn(move || {
            if remaining == 0 {
                return None;
            }
            remaining -= 1;
            let cur = state?;
            if remaining > 0 {
                match self.map.inverse_with_derivative(Branch::Left, cur.value) {
                    Ok((y, d)) => {
                        state = Some(BranchPoint {
                            value: y,
                            log_weight: cur.log_weight + d.ln(),
                        })
                    }
                    Err(e) => {
                        state = None;
                        remaining = 0;
                        return Some(Err(e));
                    }
                }
            }
            Some(Ok(cur))
        }))
    }

    /// The jump map `G(y) = F_1(F_0^(n-1)(y))` for `y` in `A_n`, `n <= N`.
    pub fn eval_jump(&self, y: f64) -> Result<f64> {
        let n = self.map.return_time(y)?;
        let mut v = y;
        for _ in 1..n {
            v = self.map.eval_branch(Branch::Left, v)?;
        }
        self.map.eval_branch(Branch::Right, v)
    }

    /// `sum_{k<=N} sup_x |zeta_k'(x)|`, sampled on a uniform grid of `samples` points.
    pub fn summability_proxy(&self, samples: usize) -> Result<f64> {
        let mut sup = vec![f64::NEG_INFINITY; self.n];
        for i in 0..=samples {
            let x = i as f64 / samples as f64;
            for (k, bp) in self.all_branches(x)?.into_iter().enumerate() {
                sup[k] = sup[k].max(bp.log_weight);
            }
        }
        Ok(sup.iter().map(|l| l.exp()).sum())
    }
}
