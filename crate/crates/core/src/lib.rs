//! Escape rates of parabolic interval maps through holes around the
//! indifferent fixed point.
//!
//! The crate builds the open induced (jump) system of a map with a hole
//! `[0, a_N]`, extracts the leading spectral data of the discretized open
//! transfer operators, turns it into escape rates of the original map, and
//! checks the shrinking-hole asymptotics against closed forms and Monte
//! Carlo simulation.
//!
//! ```
//! use parabolic_escape::prelude::*;
//!
//! // piecewise-linear map with p_k = 1/(k(k+1)) and hole [0, a_2]
//! let map = MapSpec::pwl_harmonic().build()?;
//! let report = escape_markov(&map, 2, &EscapeOptions::default())?;
//! assert!((report.gamma_mu - 0.324_372_1).abs() < 1e-7);
//! # Ok::<(), parabolic_escape::Error>(())
//! ```

// `!(x > 0.0)` guards are meant to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod escape;
pub mod induced;
pub mod map;
pub mod montecarlo;
pub mod roots;
pub mod spectral;
pub mod stats;
pub mod transfer;
pub mod verify;

pub use error::{Error, Result};

// the guide's snippets run as doc-tests
#[cfg(doctest)]
mod book;

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::escape::{
        escape, escape_markov, escape_rate_induced, escape_rate_original, escape_rate_ulam,
        escape_ulam_epsilon, escape_ulam_markov, fit_scaling, geometric_indices, sandwich_bounds,
        sweep, EscapeOptions, EscapeReport, Hole, Method, Regime, Sandwich, ScalingFit, SweepTable,
    };
    pub use crate::induced::InducedOpenSystem;
    pub use crate::map::{Branch, Family, MapSpec, ParabolicMap, PreimageSeq, PwlWeights};
    pub use crate::montecarlo::{mc_escape_rate, survival_curve, McRate, SurvivalCurve};
    pub use crate::spectral::{leading_eigen, SpectralTriple};
    pub use crate::transfer::{Grid, MatrixKind, TransferMatrix};
}
