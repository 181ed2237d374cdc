//! Parabolic interval maps with two full branches.
//!
//! A map `F: [0,1] -> [0,1]` is split at the branch cut `a` into the left
//! branch `F_0` on `J_0 = [0, a]` (increasing, `F_0(0) = 0`, `F_0(a) = 1`) and
//! the right branch `F_1` on `J_1 = (a, 1]`. The origin is an indifferent
//! fixed point with `F'(x) - 1 ~ c x^s`. The local inverses are `phi_0` and
//! `phi_1`, and the preimages `a_0 = 1`, `a_1 = a`, `a_n = phi_0(a_{n-1})`
//! cut `(0, 1]` into the level sets `A_n = (a_n, a_{n-1}]` of the return time.

mod pwl;
mod validate;

use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::solve_monotone;

pub use pwl::PwlWeights;
pub(crate) use pwl::Weights;
pub use validate::{validate_hypotheses, Check, HypothesisReport};

/// Default cap on return times.
pub const DEFAULT_RETURN_TIME_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `x + x^(1+s) mod 1`.
    PomeauManneville,
    /// `x (1 + (2x)^s)` on `[0, 1/2]`, `2x - 1` on `(1/2, 1]`.
    Lsv,
    /// `x / (1 - x)` on `[0, 1/2]`, `(1 - x) / x` on `(1/2, 1]`.
    Farey,
    /// Affine on each `A_k`, fixed by a weight sequence.
    PiecewiseLinear,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::PomeauManneville => "pm",
            Family::Lsv => "lsv",
            Family::Farey => "farey",
            Family::PiecewiseLinear => "pwl",
        }
    }
}

/// Serializable description of a parabolic map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub family: Family,
    /// Intermittency exponent. Ignored (forced to 1) for the Farey map.
    pub s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pwl_weights: Option<PwlWeights>,
}

impl MapSpec {
    pub fn pomeau_manneville(s: f64) -> Self {
        MapSpec {
            family: Family::PomeauManneville,
            s,
            pwl_weights: None,
        }
    }

    pub fn lsv(s: f64) -> Self {
        MapSpec {
            family: Family::Lsv,
            s,
            pwl_weights: None,
        }
    }

    pub fn farey() -> Self {
        MapSpec {
            family: Family::Farey,
            s: 1.0,
            pwl_weights: None,
        }
    }

    /// `p_k = 1/(k(k+1))`.
    pub fn pwl_harmonic() -> Self {
        MapSpec {
            family: Family::PiecewiseLinear,
            s: 1.0,
            pwl_weights: Some(PwlWeights::Harmonic),
        }
    }

    /// `p_k` proportional to `k^(-1-1/s)`.
    pub fn pwl_zipf(s: f64) -> Self {
        MapSpec {
            family: Family::PiecewiseLinear,
            s,
            pwl_weights: Some(PwlWeights::Zipf),
        }
    }

    pub fn pwl_explicit(s: f64, weights: Vec<f64>) -> Self {
        MapSpec {
            family: Family::PiecewiseLinear,
            s,
            pwl_weights: Some(PwlWeights::Explicit(weights)),
        }
    }

    /// Builds the runtime map, rejecting parameters outside the family's range.
    pub fn build(&self) -> Result<ParabolicMap> {
        ParabolicMap::new(self.clone())
    }
}

/// Which monotone branch of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Left,
    Right,
}

impl Branch {
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            0 => Ok(Branch::Left),
            1 => Ok(Branch::Right),
            _ => Err(Error::Domain(format!("branch index {i} is not 0 or 1"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Pm { s: f64 },
    Lsv { s: f64, two_s: f64 },
    Farey,
    Pwl { w: Weights },
}

/// The preimages `a_0 >= a_1 >= ... >= a_N` of `1` under the left branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageSeq {
    pub values: Vec<f64>,
}

impl PreimageSeq {
    /// Largest index `N` held.
    pub fn depth(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }

    /// Lebesgue measure of `A_n = (a_n, a_{n-1}]`.
    pub fn level_width(&self, n: usize) -> f64 {
        self.values[n - 1] - self.values[n]
    }
}

/// A validated parabolic map with a grow-only cache of preimages.
#[derive(Debug)]
pub struct ParabolicMap {
    spec: MapSpec,
    kind: Kind,
    a: f64,
    return_time_cap: usize,
    cache: RwLock<Vec<f64>>,
}

impl Clone for ParabolicMap {
    fn clone(&self) -> Self {
        let cached = self.cache.read().expect("preimage cache poisoned").clone();
        ParabolicMap {
            spec: self.spec.clone(),
            kind: self.kind.clone(),
            a: self.a,
            return_time_cap: self.return_time_cap,
            cache: RwLock::new(cached),
        }
    }
}

impl ParabolicMap {
    pub fn new(spec: MapSpec) -> Result<Self> {
        let s = spec.s;
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Domain(format!("intermittency exponent s = {s} must be positive")));
        }
        let (kind, a) = match spec.family {
            Family::PomeauManneville => {
                let a = solve_monotone(
                    |x| x + x.powf(1.0 + s),
                    |x| 1.0 + (1.0 + s) * x.powf(s),
                    1.0,
                    0.0,
                    1.0,
                )?;
                (Kind::Pm { s }, a)
            }
            Family::Lsv => (
                Kind::Lsv {
                    s,
                    two_s: 2f64.powf(s),
                },
                0.5,
            ),
            Family::Farey => {
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::Domain("the Farey map has s = 1".into()));
                }
                (Kind::Farey, 0.5)
            }
            Family::PiecewiseLinear => {
                let weights = spec
                    .pwl_weights
                    .clone()
                    .unwrap_or(if s == 1.0 { PwlWeights::Harmonic } else { PwlWeights::Zipf });
                if let PwlWeights::Explicit(p) = &weights {
                    if p.len() < 2 || p.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                        return Err(Error::Domain(
                            "piecewise-linear weights must be at least two positive reals".into(),
                        ));
                    }
                    let total: f64 = p.iter().sum();
                    if (total - 1.0).abs() > 1e-12 {
                        return Err(Error::Domain(format!(
                            "piecewise-linear weights sum to {total}, not 1"
                        )));
                    }
                }
                let w = Weights::new(&weights, s);
                let a = w.tail(1);
                (Kind::Pwl { w }, a)
            }
        };
        let mut spec = spec;
        if spec.family == Family::PiecewiseLinear && spec.pwl_weights.is_none() {
            spec.pwl_weights = Some(if s == 1.0 { PwlWeights::Harmonic } else { PwlWeights::Zipf });
        }
        Ok(ParabolicMap {
            spec,
            kind,
            a,
            return_time_cap: DEFAULT_RETURN_TIME_CAP,
            cache: RwLock::new(vec![1.0, a]),
        })
    }

    pub fn with_return_time_cap(mut self, cap: usize) -> Self {
        self.return_time_cap = cap.max(1);
        self
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn family(&self) -> Family {
        self.spec.family
    }

    pub fn s(&self) -> f64 {
        self.spec.s
    }

    /// The branch cut `a`.
    pub fn cut(&self) -> f64 {
        self.a
    }

    /// Whether the right branch is orientation-preserving.
    pub fn right_branch_increasing(&self) -> bool {
        !matches!(self.kind, Kind::Farey)
    }

    /// `F(x)`. The cut `a` belongs to the left branch.
    pub fn eval(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        if x <= self.a {
            self.eval_branch(Branch::Left, x)
        } else {
            self.eval_branch(Branch::Right, x)
        }
    }

    /// Evaluates one branch formula on the closure of its domain.
    pub fn eval_branch(&self, b: Branch, x: f64) -> Result<f64> {
        Ok(match (&self.kind, b) {
            (Kind::Pm { s }, Branch::Left) => x + x.powf(1.0 + s),
            (Kind::Pm { s }, Branch::Right) => x + x.powf(1.0 + s) - 1.0,
            (Kind::Lsv { s, .. }, Branch::Left) => x * (1.0 + (2.0 * x).powf(*s)),
            (Kind::Lsv { .. }, Branch::Right) => 2.0 * x - 1.0,
            (Kind::Farey, Branch::Left) => x / (1.0 - x),
            (Kind::Farey, Branch::Right) => (1.0 - x) / x,
            (Kind::Pwl { w }, Branch::Left) => {
                if x <= 0.0 {
                    0.0
                } else {
                    let k = self.level_index(x)?;
                    if k == 1 {
                        // closure of the left branch at the cut
                        1.0
                    } else {
                        let ak = if w.len() == Some(k) { 0.0 } else { self.preimage(k)? };
                        let ak1 = self.preimage(k - 1)?;
                        ak1 + (x - ak) * (w.weight(k - 1) / w.weight(k))
                    }
                }
            }
            (Kind::Pwl { w }, Branch::Right) => (x - self.a) / w.weight(1),
        })
    }

    /// `F'(x)`; an error at the branch cut for the smooth families.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        if !matches!(self.kind, Kind::Pwl { .. }) && x == self.a {
            return Err(Error::Domain(format!(
                "F is not differentiable at the branch cut a = {}",
                self.a
            )));
        }
        if x <= self.a {
            self.branch_derivative(Branch::Left, x)
        } else {
            self.branch_derivative(Branch::Right, x)
        }
    }

    /// Derivative of a branch formula on the closure of its domain.
    pub fn branch_derivative(&self, b: Branch, x: f64) -> Result<f64> {
        Ok(match (&self.kind, b) {
            (Kind::Pm { s }, _) => 1.0 + (1.0 + s) * x.powf(*s),
            (Kind::Lsv { s, two_s }, Branch::Left) => 1.0 + (1.0 + s) * two_s * x.powf(*s),
            (Kind::Lsv { .. }, Branch::Right) => 2.0,
            (Kind::Farey, Branch::Left) => 1.0 / ((1.0 - x) * (1.0 - x)),
            (Kind::Farey, Branch::Right) => -1.0 / (x * x),
            (Kind::Pwl { w }, Branch::Left) => {
                if x <= 0.0 {
                    1.0
                } else {
                    let k = self.level_index(x)?.max(2);
                    w.weight(k - 1) / w.weight(k)
                }
            }
            (Kind::Pwl { w }, Branch::Right) => 1.0 / w.weight(1),
        })
    }

    /// The local inverse `phi_b(y)`, with `phi_0(y)` in `[0, a]` and
    /// `phi_1(y)` in `[a, 1]`.
    pub fn inverse_branch(&self, b: Branch, y: f64) -> Result<f64> {
        check_unit(y)?;
        match (&self.kind, b) {
            (Kind::Pm { s }, Branch::Left) => {
                let s = *s;
                solve_monotone(
                    |x| x + x.powf(1.0 + s),
                    |x| 1.0 + (1.0 + s) * x.powf(s),
                    y,
                    0.0,
                    y.min(self.a),
                )
            }
            (Kind::Pm { s }, Branch::Right) => {
                let s = *s;
                solve_monotone(
                    |x| x + x.powf(1.0 + s) - 1.0,
                    |x| 1.0 + (1.0 + s) * x.powf(s),
                    y,
                    self.a,
                    1.0,
                )
            }
            (Kind::Lsv { s, two_s }, Branch::Left) => {
                let (s, two_s) = (*s, *two_s);
                solve_monotone(
                    |x| x * (1.0 + (2.0 * x).powf(s)),
                    |x| 1.0 + (1.0 + s) * two_s * x.powf(s),
                    y,
                    0.0,
                    y.min(0.5),
                )
            }
            (Kind::Lsv { .. }, Branch::Right) => Ok(0.5 * (y + 1.0)),
            (Kind::Farey, Branch::Left) => Ok(y / (1.0 + y)),
            (Kind::Farey, Branch::Right) => Ok(1.0 / (1.0 + y)),
            (Kind::Pwl { w }, Branch::Left) => {
                if y <= 0.0 {
                    return Ok(0.0);
                }
                // y in A_{k-1} has its preimage in A_k
                let j = self.level_index(y)?;
                if w.len().is_some_and(|len| j >= len) {
                    // a finite weight list has nothing below its last level
                    return Ok(0.0);
                }
                let k = j + 1;
                let ak = if w.len() == Some(k) { 0.0 } else { self.preimage(k)? };
                let aj = self.preimage(j)?;
                Ok(ak + (y - aj) * (w.weight(k) / w.weight(j)))
            }
            (Kind::Pwl { w }, Branch::Right) => Ok(self.a + w.weight(1) * y),
        }
    }

    /// `|phi_b'(y)|`.
    pub fn inverse_derivative(&self, b: Branch, y: f64) -> Result<f64> {
        match (&self.kind, b) {
            (Kind::Farey, _) => Ok(1.0 / ((1.0 + y) * (1.0 + y))),
            (Kind::Lsv { .. }, Branch::Right) => Ok(0.5),
            (Kind::Pwl { w }, Branch::Right) => Ok(w.weight(1)),
            (Kind::Pwl { w }, Branch::Left) => {
                if y <= 0.0 {
                    return Ok(1.0);
                }
                let j = self.level_index(y)?;
                if w.len().is_some_and(|len| j >= len) {
                    return Ok(0.0);
                }
                Ok(w.weight(j + 1) / w.weight(j))
            }
            _ => {
                let x = self.inverse_branch(b, y)?;
                Ok(1.0 / self.branch_derivative(b, x)?.abs())
            }
        }
    }

    /// `(phi_b(y), |phi_b'(y)|)` with a single root solve.
    pub fn inverse_with_derivative(&self, b: Branch, y: f64) -> Result<(f64, f64)> {
        let x = self.inverse_branch(b, y)?;
        let d = match (&self.kind, b) {
            (Kind::Pm { .. }, _) | (Kind::Lsv { .. }, Branch::Left) => {
                1.0 / self.branch_derivative(b, x)?.abs()
            }
            _ => self.inverse_derivative(b, y)?,
        };
        Ok((x, d))
    }

    /// `a_n`, extending the cache when needed.
    pub fn preimage(&self, n: usize) -> Result<f64> {
        if let Some(v) = self.cache.read().expect("preimage cache poisoned").get(n) {
            return Ok(*v);
        }
        self.extend_cache(n)?;
        Ok(self.cache.read().expect("preimage cache poisoned")[n])
    }

    /// `a_0, ..., a_n`.
    pub fn preimage_sequence(&self, n: usize) -> Result<PreimageSeq> {
        if n < 1 {
            return Err(Error::Domain("preimage sequence needs N >= 1".into()));
        }
        self.extend_cache(n)?;
        let cache = self.cache.read().expect("preimage cache poisoned");
        Ok(PreimageSeq {
            values: cache[..=n].to_vec(),
        })
    }

    fn extend_cache(&self, n: usize) -> Result<()> {
        let have = self.cache.read().expect("preimage cache poisoned").len();
        if have > n {
            return Ok(());
        }
        let mut cache = self.cache.write().expect("preimage cache poisoned");
        while cache.len() <= n {
            let k = cache.len();
            let prev = cache[k - 1];
            let next = match &self.kind {
                Kind::Farey => 1.0 / (k as f64 + 1.0),
                Kind::Pwl { w } => {
                    if let Some(len) = w.len() {
                        if k >= len {
                            return Err(Error::Domain(format!(
                                "explicit weight list of length {len} has no preimage a_{k}"
                            )));
                        }
                    }
                    w.tail(k)
                }
                _ => {
                    let x = Self::raw_left_inverse(&self.kind, self.a, prev)?;
                    let back = self.eval_branch(Branch::Left, x)?;
                    if (back - prev).abs() > 1e-12 {
                        return Err(Error::Convergence {
                            target: prev,
                            iterations: crate::roots::MAX_ITER,
                            residual: (back - prev).abs(),
                        });
                    }
                    x
                }
            };
            if !(next > 0.0 && next < prev) {
                return Err(Error::Domain(format!(
                    "preimage sequence stopped decreasing at n = {k} (a_n = {next:e})"
                )));
            }
            cache.push(next);
        }
        Ok(())
    }

    fn raw_left_inverse(kind: &Kind, a: f64, y: f64) -> Result<f64> {
        match kind {
            Kind::Pm { s } => {
                let s = *s;
                solve_monotone(
                    |x| x + x.powf(1.0 + s),
                    |x| 1.0 + (1.0 + s) * x.powf(s),
                    y,
                    0.0,
                    y.min(a),
                )
            }
            Kind::Lsv { s, two_s } => {
                let (s, two_s) = (*s, *two_s);
                solve_monotone(
                    |x| x * (1.0 + (2.0 * x).powf(s)),
                    |x| 1.0 + (1.0 + s) * two_s * x.powf(s),
                    y,
                    0.0,
                    y.min(0.5),
                )
            }
            _ => unreachable!("closed-form families never root-find preimages"),
        }
    }

    /// Index `n` with `x` in `A_n = (a_n, a_{n-1}]`, for `x` in `(0, 1]`.
    fn level_index(&self, x: f64) -> Result<usize> {
        if x > self.a {
            return Ok(1);
        }
        if let Kind::Pwl { w } = &self.kind {
            if let Some(len) = w.len() {
                // the last level of a finite weight list reaches down to 0
                if x <= w.tail(len - 1) {
                    return Ok(len);
                }
            }
        }
        loop {
            let len = {
                let cache = self.cache.read().expect("preimage cache poisoned");
                if *cache.last().expect("cache holds a_0") < x {
                    return Ok(cache.partition_point(|&v| v >= x));
                }
                cache.len()
            };
            if len > self.return_time_cap {
                return Err(Error::ReturnTimeOverflow {
                    x,
                    cap: self.return_time_cap,
                });
            }
            let mut target = (2 * len).max(64).min(self.return_time_cap);
            if let Kind::Pwl { w } = &self.kind {
                if let Some(n) = w.len() {
                    target = target.min(n - 1);
                }
            }
            self.extend_cache(target)?;
        }
    }

    /// The return time `tau(x) = 1 + min{i >= 0 : F^i(x) in (a, 1]}`.
    pub fn return_time(&self, x: f64) -> Result<usize> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::Domain(format!("return time needs x in (0, 1], got {x}")));
        }
        self.level_index(x)
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("x = {x} is outside [0, 1]")))
    }
}
