//! Discretized open transfer operators.
//!
//! All matrices act on piecewise-constant functions over a [`Grid`], stored
//! as cell averages, and are square over *all* grid cells; cells inside the
//! hole carry zero columns (and, for [`MatrixKind::UlamOpen`], zero rows).
//!
//! The branch matrices of `F` are exact Ulam projections,
//! `(Q_b)_{ij} = m(phi_b(B_i) ∩ B_j) / m(B_i)` with hole columns removed
//! from `Q_0`. On a grid aligned with `a_1, ..., a_N` the induced operator
//! is represented as `N_z = z Q_1 sum_{k<N} (z Q_0)^k` without forming the
//! product, which keeps the level structure of the induced branches exact.

mod csr;
mod grid;
mod pointwise;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::induced::InducedOpenSystem;
use crate::map::{Branch, Family, ParabolicMap, Weights};

pub(crate) use csr::Csr;
pub use grid::Grid;
pub use pointwise::{
    apply_open_induced, apply_q, apply_q0, apply_q1, identity_residual, sample_points,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// The open induced operator `N_z` on functions.
    InducedOpen,
    /// Ulam matrix of `F` with the hole removed, Markov (row) convention.
    UlamOpen,
    /// The rank-one matrix of a piecewise-linear map on its natural partition.
    PwlExact,
}

impl MatrixKind {
    pub fn tag(self) -> &'static str {
        match self {
            MatrixKind::InducedOpen => "induced_open",
            MatrixKind::UlamOpen => "ulam_open",
            MatrixKind::PwlExact => "pwl_exact",
        }
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Sparse {
        a: Csr,
        at: Csr,
    },
    /// `A = 1 r^T` with `r_j = z^k p_k` on cells of level `k`.
    RankOne {
        p: Vec<f64>,
        z: f64,
        q0: Csr,
    },
    Composite {
        q0: Csr,
        q0t: Csr,
        q1: Csr,
        q1t: Csr,
        n: usize,
        z: f64,
    },
}

#[derive(Debug, Clone)]
pub struct TransferMatrix {
    kind: MatrixKind,
    grid: Grid,
    storage: Storage,
}

impl TransferMatrix {
    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Matrix size `M` (number of grid cells).
    pub fn dim(&self) -> usize {
        self.grid.cells()
    }

    /// `A v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim(), "vector length must match the grid");
        match &self.storage {
            Storage::Sparse { a, .. } => a.matvec(v),
            Storage::RankOne { p, z, .. } => {
                let s = self.rank_one_row(p, *z).iter().zip(v).map(|(r, x)| r * x).sum();
                vec![s; v.len()]
            }
            Storage::Composite { q0, q1, n, z, .. } => {
                let mut w = v.to_vec();
                for _ in 1..*n {
                    let q = q0.matvec(&w);
                    for (wi, (vi, qi)) in w.iter_mut().zip(v.iter().zip(q)) {
                        *wi = vi + z * qi;
                    }
                }
                q1.matvec(&w).into_iter().map(|x| z * x).collect()
            }
        }
    }

    /// `A^T u`.
    pub fn apply_transpose(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.dim(), "vector length must match the grid");
        match &self.storage {
            Storage::Sparse { at, .. } => at.matvec(u),
            Storage::RankOne { p, z, .. } => {
                let s: f64 = u.iter().sum();
                self.rank_one_row(p, *z).into_iter().map(|r| r * s).collect()
            }
            Storage::Composite { q0t, q1t, n, z, .. } => {
                let t: Vec<f64> = q1t.matvec(u).into_iter().map(|x| z * x).collect();
                let mut w = t.clone();
                for _ in 1..*n {
                    let q = q0t.matvec(&w);
                    for (wi, (ti, qi)) in w.iter_mut().zip(t.iter().zip(q)) {
                        *wi = ti + z * qi;
                    }
                }
                w
            }
        }
    }

    fn rank_one_row(&self, p: &[f64], z: f64) -> Vec<f64> {
        if z == 1.0 {
            return p.to_vec();
        }
        p.iter()
            .enumerate()
            .map(|(j, &v)| v * z.powi(self.grid.level(j) as i32))
            .collect()
    }

    /// `A (v 1_{A_k})`: the part of the operator carried by branch `k`.
    pub fn apply_level(&self, v: &[f64], k: usize) -> Vec<f64> {
        let masked: Vec<f64> = v
            .iter()
            .enumerate()
            .map(|(j, &x)| if !self.grid.is_hole(j) && self.grid.level(j) == k { x } else { 0.0 })
            .collect();
        self.apply(&masked)
    }

    /// The same operator with the weight `z^k` on branch `k`.
    pub fn with_z(&self, z: f64) -> Result<Self> {
        if !(z.is_finite() && z >= 0.0) {
            return Err(Error::Domain(format!("z = {z} must be a nonnegative real")));
        }
        let storage = match &self.storage {
            Storage::RankOne { p, q0, .. } => Storage::RankOne {
                p: p.clone(),
                z,
                q0: q0.clone(),
            },
            Storage::Composite {
                q0, q0t, q1, q1t, n, ..
            } => Storage::Composite {
                q0: q0.clone(),
                q0t: q0t.clone(),
                q1: q1.clone(),
                q1t: q1t.clone(),
                n: *n,
                z,
            },
            Storage::Sparse { .. } => {
                return Err(Error::Domain(
                    "an assembled sparse matrix has lost its branch structure".into(),
                ))
            }
        };
        Ok(TransferMatrix {
            kind: self.kind,
            grid: self.grid.clone(),
            storage,
        })
    }

    /// `Q_0 v`, for operators that keep their branch factors.
    pub fn apply_q0(&self, v: &[f64]) -> Option<Vec<f64>> {
        match &self.storage {
            Storage::Composite { q0, .. } | Storage::RankOne { q0, .. } => Some(q0.matvec(v)),
            _ => None,
        }
    }

    /// `Q_1 v` for the induced composite representation.
    pub fn apply_q1(&self, v: &[f64]) -> Option<Vec<f64>> {
        match &self.storage {
            Storage::Composite { q1, .. } => Some(q1.matvec(v)),
            _ => None,
        }
    }

    /// Number of surviving branches when the operator remembers it.
    pub fn branches(&self) -> Option<usize> {
        match &self.storage {
            Storage::Composite { n, .. } => Some(*n),
            Storage::RankOne { .. } => self.grid.levels().iter().copied().max(),
            Storage::Sparse { .. } => None,
        }
    }

    /// Dense row-major copy, built column by column.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        let mut rows = vec![vec![0.0; m]; m];
        let mut e = vec![0.0; m];
        for j in 0..m {
            e[j] = 1.0;
            for (i, v) in self.apply(&e).into_iter().enumerate() {
                rows[i][j] = v;
            }
            e[j] = 0.0;
        }
        rows
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.apply(&vec![1.0; self.dim()])
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.apply_transpose(&vec![1.0; self.dim()])
    }

    fn header(&self) -> String {
        let nodes: Vec<String> = self.grid.nodes().iter().map(|v| format!("{v:.16e}")).collect();
        format!(
            "# M={}\n# kind={}\n# nodes={}\n",
            self.dim(),
            self.kind.tag(),
            nodes.join(",")
        )
    }

    /// Dense CSV dump with a commented header (`M`, `kind`, grid nodes).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.header().as_bytes())?;
        for row in self.to_dense() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Dense little-endian binary dump: magic `PEMX`, `u64` M, `u8` kind,
    /// `M + 1` node values, then `M * M` entries row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"PEMX")?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        w.write_all(&[self.kind as u8])?;
        for v in self.grid.nodes() {
            w.write_all(&v.to_le_bytes())?;
        }
        for row in self.to_dense() {
            for v in row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Images of the grid nodes under `phi_b`, snapped onto nodes they hit up
/// to rounding so that aligned grids stay exactly aligned.
fn node_images(map: &ParabolicMap, grid: &Grid, b: Branch) -> Result<Vec<f64>> {
    let nodes = grid.nodes();
    nodes
        .iter()
        .map(|&x| {
            let y = map.inverse_branch(b, x)?;
            let c = nodes.partition_point(|&v| v < y);
            for k in [c.saturating_sub(1), c.min(nodes.len() - 1)] {
                if (nodes[k] - y).abs() <= 1e-12 * y.abs() {
                    return Ok(nodes[k]);
                }
            }
            Ok(y)
        })
        .collect()
}

/// Rows `m(image_i ∩ B_j) / m(B_i)` for the intervals between consecutive
/// entries of `images`, skipping hole columns.
fn overlap_rows(grid: &Grid, images: &[f64]) -> Vec<Vec<(usize, f64)>> {
    (0..grid.cells())
        .map(|i| {
            let (lo, hi) = {
                let (u, v) = (images[i], images[i + 1]);
                (u.min(v), u.max(v))
            };
            let w = grid.width(i);
            let mut row = Vec::new();
            if hi <= grid.hole_edge() {
                return row;
            }
            let (j0, j1) = (grid.locate(lo), grid.locate(hi));
            for j in j0.max(grid.hole_cells())..=j1 {
                let ov = grid.overlap(j, lo, hi);
                if ov > 0.0 {
                    row.push((j, ov / w));
                }
            }
            row
        })
        .collect()
}

/// Function-convention Ulam matrices `(Q_0, Q_1)` of the two branches of `F`
/// with the hole `[0, grid.hole_edge()]` removed.
pub(crate) fn open_branch_matrices(map: &ParabolicMap, grid: &Grid) -> Result<(Csr, Csr)> {
    let m = grid.cells();
    let q0 = Csr::from_rows(overlap_rows(grid, &node_images(map, grid, Branch::Left)?), m);
    let q1 = Csr::from_rows(overlap_rows(grid, &node_images(map, grid, Branch::Right)?), m);
    Ok((q0, q1))
}

fn check_markov_grid(sys: &InducedOpenSystem, grid: &Grid) -> Result<()> {
    for v in &sys.preimages().values {
        if !grid.nodes().contains(v) {
            return Err(Error::Domain(format!(
                "grid is not aligned with the preimage a = {v:e}"
            )));
        }
    }
    if grid.hole_edge() != sys.hole_edge() {
        return Err(Error::Domain("grid hole edge differs from a_N".into()));
    }
    Ok(())
}

/// `N = Q_1 sum_{k<N} Q_0^k` on a Markov-aligned grid.
pub fn assemble_induced_composite(sys: &InducedOpenSystem, grid: &Grid) -> Result<TransferMatrix> {
    check_markov_grid(sys, grid)?;
    let (q0, q1) = open_branch_matrices(sys.map(), grid)?;
    Ok(TransferMatrix {
        kind: MatrixKind::InducedOpen,
        grid: grid.clone(),
        storage: Storage::Composite {
            q0t: q0.transpose(),
            q1t: q1.transpose(),
            q0,
            q1,
            n: sys.branches(),
            z: 1.0,
        },
    })
}

/// Ulam matrix of `N` from the exact overlaps `sum_n m(zeta_n(B_i) ∩ B_j) / m(B_i)`;
/// any grid works, cells need not be aligned.
pub fn assemble_induced_matrix(sys: &InducedOpenSystem, grid: &Grid) -> Result<TransferMatrix> {
    let nodes = grid.nodes();
    let n = sys.branches();
    let mut images = vec![Vec::with_capacity(nodes.len()); n];
    for &x in nodes {
        for (k, bp) in sys.all_branches(x)?.into_iter().enumerate() {
            images[k].push(bp.value);
        }
    }
    let m = grid.cells();
    // the hole of the induced system is empty: every column is live
    let open = Grid::from_nodes(sys.map(), nodes.to_vec(), 0.0)?;
    let mut rows = vec![Vec::new(); m];
    for img in &images {
        for (i, r) in overlap_rows(&open, img).into_iter().enumerate() {
            rows[i].extend(r);
        }
    }
    let a = Csr::from_rows(rows, m);
    Ok(TransferMatrix {
        kind: MatrixKind::InducedOpen,
        grid: grid.clone(),
        storage: Storage::Sparse { at: a.transpose(), a },
    })
}

/// Ulam matrix of `F` with hole `[0, grid.hole_edge()]`, in the Markov
/// convention `P_ij = m(B_i ∩ F^{-1} B_j) / m(B_i)`.
pub fn assemble_ulam_open(map: &ParabolicMap, grid: &Grid) -> Result<TransferMatrix> {
    if !(grid.hole_edge() > 0.0) {
        return Err(Error::Domain("Ulam matrix of the open map needs a hole".into()));
    }
    let (q0, q1) = open_branch_matrices(map, grid)?;
    let m = grid.cells();
    let w = grid.widths();
    let mut rows = vec![Vec::new(); m];
    for q in [&q0, &q1] {
        for i in grid.hole_cells()..m {
            for (j, v) in q.row(i) {
                rows[j].push((i, v * w[i] / w[j]));
            }
        }
    }
    let a = Csr::from_rows(rows, m);
    Ok(TransferMatrix {
        kind: MatrixKind::UlamOpen,
        grid: grid.clone(),
        storage: Storage::Sparse { at: a.transpose(), a },
    })
}

/// The rank-one matrix with every row `(p_1, ..., p_N)` on the natural partition.
pub fn pwl_exact(sys: &InducedOpenSystem) -> Result<TransferMatrix> {
    let map = sys.map();
    if map.family() != Family::PiecewiseLinear {
        return Err(Error::Domain("exact rank-one matrix needs a piecewise-linear map".into()));
    }
    let grid = Grid::natural(map, sys.branches())?;
    let w = Weights::new(map.spec().pwl_weights.as_ref().expect("pwl weights"), map.s());
    let p = (0..grid.cells())
        .map(|j| if grid.is_hole(j) { 0.0 } else { w.weight(grid.level(j)) })
        .collect();
    // Q_0 is exact on the natural partition: A_j picks up A_{j+1} with slope p_{j+1}/p_j
    let (q0, _) = open_branch_matrices(map, &grid)?;
    Ok(TransferMatrix {
        kind: MatrixKind::PwlExact,
        grid,
        storage: Storage::RankOne { p, z: 1.0, q0 },
    })
}

/// The default induced operator: rank-one for piecewise-linear maps,
/// otherwise the composite form on an `m`-cell Markov grid.
pub fn induced_operator(sys: &InducedOpenSystem, m: usize) -> Result<TransferMatrix> {
    if sys.map().family() == Family::PiecewiseLinear {
        pwl_exact(sys)
    } else {
        let grid = Grid::markov(sys.map(), sys.branches(), m)?;
        assemble_induced_composite(sys, &grid)
    }
}
