//! Survival probabilities by direct orbit simulation.
//!
//! Samples are drawn uniformly on `[0, 1]` in fixed chunks of `2^16`; chunk
//! `c` uses a ChaCha8 stream keyed by `(seed, c)`, so counts do not depend on
//! the number of worker threads.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{Branch, ParabolicMap};
use crate::stats::ols;

pub const CHUNK: u64 = 1 << 16;
/// Survivors required at the end of a fitting window.
pub const MIN_SURVIVORS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    /// `1, 2, ..., n_max`.
    pub n_values: Vec<usize>,
    /// Points whose first `n` iterates `x, F x, ..., F^{n-1} x` avoid the hole.
    pub survivors: Vec<u64>,
    pub estimates: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
}

impl SurvivalCurve {
    /// Binomial standard error of each estimate.
    pub fn stderr(&self) -> Vec<f64> {
        let n = self.samples as f64;
        self.estimates.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect()
    }

    /// CSV with columns `n,survivors,estimate,stderr`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "survivors", "estimate", "stderr"])?;
        for (i, se) in self.stderr().into_iter().enumerate() {
            wr.write_record([
                self.n_values[i].to_string(),
                self.survivors[i].to_string(),
                format!("{:.16e}", self.estimates[i]),
                format!("{se:.16e}"),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Number of leading iterates of `x` outside `[0, edge]`, capped at `n_max`.
fn lifetime(map: &ParabolicMap, edge: f64, n_max: usize, mut x: f64) -> usize {
    let a = map.cut();
    for j in 0..n_max {
        if x <= edge {
            return j;
        }
        let b = if x <= a { Branch::Left } else { Branch::Right };
        // branch formulas are total on [0, 1]; clamp rounding past the ends
        x = map.eval_branch(b, x).unwrap_or(0.0).clamp(0.0, 1.0);
    }
    n_max
}

/// Survival counts for the hole `[0, edge]` at `n = 1..=n_max`.
pub fn survival_curve(
    map: &ParabolicMap,
    edge: f64,
    n_max: usize,
    samples: u64,
    seed: u64,
) -> Result<SurvivalCurve> {
    if samples < 1000 {
        return Err(Error::Domain(format!("need at least 1000 samples, got {samples}")));
    }
    if n_max < 10 {
        return Err(Error::Domain(format!("need n_max >= 10, got {n_max}")));
    }
    if !(0.0..1.0).contains(&edge) {
        return Err(Error::Domain(format!("hole edge {edge} outside [0, 1)")));
    }
    let chunks = samples.div_ceil(CHUNK);
    // hist[j] counts samples that survive exactly j steps
    let hist = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut h = vec![0u64; n_max + 1];
            for _ in 0..count {
                let x: f64 = rng.random();
                h[lifetime(map, edge, n_max, x)] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; n_max + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut survivors = vec![0u64; n_max];
    let mut tail = 0u64;
    for n in (1..=n_max).rev() {
        tail += hist[n];
        survivors[n - 1] = tail;
    }
    let estimates = survivors.iter().map(|&s| s as f64 / samples as f64).collect();
    Ok(SurvivalCurve {
        n_values: (1..=n_max).collect(),
        survivors,
        estimates,
        samples,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McRate {
    pub gamma: f64,
    pub stderr: f64,
}

/// Least-squares slope of `-log m(S_n)` over `n` in `[lo, hi]`.
///
/// The standard error adds the regression residual term and the binomial
/// error of the nested survivor counts propagated through the slope weights.
pub fn mc_escape_rate(curve: &SurvivalCurve, window: (usize, usize)) -> Result<McRate> {
    let (lo, hi) = window;
    let n_max = *curve.n_values.last().unwrap_or(&0);
    if !(lo >= 1 && lo + 2 <= hi && hi <= n_max) {
        return Err(Error::Domain(format!(
            "window [{lo}, {hi}] must satisfy 1 <= lo, lo + 2 <= hi <= {n_max}"
        )));
    }
    let at_hi = curve.survivors[hi - 1];
    if at_hi < MIN_SURVIVORS {
        return Err(Error::InsufficientData(format!(
            "{at_hi} survivors at n = {hi}, need {MIN_SURVIVORS}"
        )));
    }
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .map(|n| (n as f64, -curve.estimates[n - 1].ln()))
        .collect();
    let fit = ols(&pts).ok_or_else(|| Error::InsufficientData("degenerate window".into()))?;
    let mean = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean).powi(2)).sum();
    // survivor sets are nested, so for m <= n the delta method gives
    // Cov(-log p_m, -log p_n) ~ (1 - p_m) / (N p_m)
    let w: Vec<f64> = (lo..=hi).map(|n| (n as f64 - mean) / sxx).collect();
    let c: Vec<f64> = (lo..=hi)
        .map(|n| {
            let p = curve.estimates[n - 1];
            (1.0 - p) / (curve.samples as f64 * p)
        })
        .collect();
    // sum_{m,n} w_m w_n c_min(m,n) via suffix sums of the weights
    let mut tail = 0.0;
    let mut binom = 0.0;
    for i in (0..w.len()).rev() {
        binom += c[i] * w[i] * (w[i] + 2.0 * tail);
        tail += w[i];
    }
    Ok(McRate {
        gamma: fit.slope,
        stderr: (fit.slope_stderr.powi(2) + binom).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::MapSpec;

    #[test]
    fn one_step_survival_is_the_complement_of_the_hole() {
        let map = MapSpec::lsv(0.5).build().unwrap();
        let edge = map.preimage(3).unwrap();
        let c = survival_curve(&map, edge, 10, 200_000, 7).unwrap();
        let se = (edge * (1.0 - edge) / 200_000f64).sqrt();
        assert!((c.estimates[0] - (1.0 - edge)).abs() < 4.0 * se);
        assert!(c.survivors.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let map = MapSpec::farey().build().unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| survival_curve(&map, 0.2, 20, 300_000, 42).unwrap())
        };
        assert_eq!(run(1), run(4));
        let other = survival_curve(&map, 0.2, 20, 300_000, 43).unwrap();
        assert_ne!(run(2).survivors, other.survivors);
    }

    #[test]
    fn large_hole_empties_quickly() {
        let map = MapSpec::lsv(1.0).build().unwrap();
        let c = survival_curve(&map, 0.999, 10, 10_000, 1).unwrap();
        assert!(c.estimates[1] < 1e-3);
    }

    #[test]
    fn geometric_curve_gives_exact_rate() {
        let lambda: f64 = 0.8;
        let samples = 1u64 << 40;
        let estimates: Vec<f64> = (1..=30).map(|n| lambda.powi(n)).collect();
        let curve = SurvivalCurve {
            n_values: (1..=30).collect(),
            survivors: estimates.iter().map(|p| (p * samples as f64) as u64).collect(),
            estimates,
            samples,
            seed: 0,
        };
        let r = mc_escape_rate(&curve, (5, 30)).unwrap();
        assert!((r.gamma + lambda.ln()).abs() < 1e-12);
    }

    #[test]
    fn too_few_survivors() {
        let map = MapSpec::lsv(0.5).build().unwrap();
        let c = survival_curve(&map, 0.4, 40, 2000, 3).unwrap();
        assert!(matches!(
            mc_escape_rate(&c, (10, 40)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn csv_export() {
        let map = MapSpec::farey().build().unwrap();
        let c = survival_curve(&map, 0.25, 10, 1000, 0).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,survivors,estimate,stderr\n1,"));
        assert_eq!(text.lines().count(), 11);
    }
}
