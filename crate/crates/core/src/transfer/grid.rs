use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::ParabolicMap;

/// A partition of `[0, 1]` into cells, with the leading `hole_cells` cells
/// covering the hole `[0, hole_edge]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nodes: Vec<f64>,
    hole_edge: f64,
    hole_cells: usize,
    /// Return time of each survivor cell (0 for hole cells).
    levels: Vec<usize>,
}

impl Grid {
    /// Cells aligned with `a_N, ..., a_1`; about `m` cells in total, a
    /// minimum of `ceil(m / 2S)` per segment (hole and each level) and the
    /// rest shared by length.
    pub fn markov(map: &ParabolicMap, n: usize, m: usize) -> Result<Self> {
        let seq = map.preimage_sequence(n)?;
        let mut bps = vec![0.0];
        bps.extend(seq.values.iter().rev().copied());
        Self::from_breakpoints(map, &bps, seq.get(n), m, true)
    }

    /// A single hole cell `[0, epsilon]`, then cells aligned with the `a_n` above `epsilon`.
    pub fn with_hole_edge(map: &ParabolicMap, epsilon: f64, m: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < map.cut()) {
            return Err(Error::Domain(format!(
                "hole edge {epsilon} must lie in (0, a = {})",
                map.cut()
            )));
        }
        // align with the a_n above epsilon, at most m/4 of them
        let mut above = vec![1.0];
        let mut k = 1;
        while k <= (m / 4).max(1) {
            let ak = map.preimage(k)?;
            if ak <= epsilon {
                break;
            }
            above.push(ak);
            k += 1;
        }
        let mut bps = vec![0.0, epsilon];
        bps.extend(above.iter().rev().copied());
        Self::from_breakpoints(map, &bps, epsilon, m, false)
    }

    /// The natural partition `[0, a_N], A_N, ..., A_1`.
    pub fn natural(map: &ParabolicMap, n: usize) -> Result<Self> {
        let seq = map.preimage_sequence(n)?;
        let mut nodes = vec![0.0];
        nodes.extend(seq.values.iter().rev().copied());
        Self::from_nodes(map, nodes, seq.get(n))
    }

    /// `m` equal cells and no hole.
    pub fn uniform(map: &ParabolicMap, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("grid needs at least one cell".into()));
        }
        let nodes = (0..=m).map(|i| i as f64 / m as f64).collect();
        Self::from_nodes(map, nodes, 0.0)
    }

    /// Validates explicit nodes; `hole_edge` must be a node (or 0 for none).
    pub fn from_nodes(map: &ParabolicMap, nodes: Vec<f64>, hole_edge: f64) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::Domain("grid nodes must run from 0 to 1".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("grid nodes must be strictly increasing".into()));
        }
        let hole_cells = if hole_edge > 0.0 {
            match nodes.iter().position(|&v| v == hole_edge) {
                Some(i) => i,
                None => {
                    return Err(Error::Domain(format!("hole edge {hole_edge} is not a grid node")))
                }
            }
        } else {
            0
        };
        let mut levels = vec![0; nodes.len() - 1];
        for (i, lvl) in levels.iter_mut().enumerate().skip(hole_cells) {
            *lvl = map.return_time(0.5 * (nodes[i] + nodes[i + 1]))?;
        }
        Ok(Grid {
            nodes,
            hole_edge,
            hole_cells,
            levels,
        })
    }

    /// Subdivides each segment between breakpoints; with `split_hole` false
    /// the first segment stays a single cell.
    fn from_breakpoints(
        map: &ParabolicMap,
        bps: &[f64],
        hole_edge: f64,
        m: usize,
        split_hole: bool,
    ) -> Result<Self> {
        let widths: Vec<f64> = bps.windows(2).map(|w| w[1] - w[0]).collect();
        let counts = if split_hole {
            allocate(&widths, m)
        } else {
            let mut c = vec![1];
            c.extend(allocate(&widths[1..], m.saturating_sub(1).max(1)));
            c
        };
        let mut nodes = Vec::with_capacity(counts.iter().sum::<usize>() + 1);
        for (s, &c) in counts.iter().enumerate() {
            let (lo, hi) = (bps[s], bps[s + 1]);
            nodes.push(lo);
            for j in 1..c {
                nodes.push(lo + (hi - lo) * j as f64 / c as f64);
            }
        }
        nodes.push(1.0);
        Self::from_nodes(map, nodes, hole_edge)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of cells `M`.
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn hole_edge(&self) -> f64 {
        self.hole_edge
    }

    pub fn hole_cells(&self) -> usize {
        self.hole_cells
    }

    pub fn is_hole(&self, cell: usize) -> bool {
        cell < self.hole_cells
    }

    pub fn width(&self, cell: usize) -> f64 {
        self.nodes[cell + 1] - self.nodes[cell]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Return time of a survivor cell; 0 inside the hole.
    pub fn level(&self, cell: usize) -> usize {
        self.levels[cell]
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    /// Cell containing `x`, with cells closed on the right.
    pub fn locate(&self, x: f64) -> usize {
        let p = self.nodes.partition_point(|&v| v < x);
        p.saturating_sub(1).min(self.cells() - 1)
    }

    /// Lebesgue measure of `[lo, hi]` inside `cell`.
    pub(crate) fn overlap(&self, cell: usize, lo: f64, hi: f64) -> f64 {
        (hi.min(self.nodes[cell + 1]) - lo.max(self.nodes[cell])).max(0.0)
    }
}

/// Splits `m` cells over segments of the given widths (largest remainder).
fn allocate(widths: &[f64], m: usize) -> Vec<usize> {
    let s = widths.len();
    let mut base = m.div_ceil(2 * s).max(1);
    if base * s > m {
        base = (m / s).max(1);
    }
    let spare = m.saturating_sub(base * s);
    let total: f64 = widths.iter().sum();
    let shares: Vec<f64> = widths.iter().map(|w| spare as f64 * w / total).collect();
    let mut counts: Vec<usize> = shares.iter().map(|v| base + v.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&i, &j| {
        let (fi, fj) = (shares[i].fract(), shares[j].fract());
        fj.partial_cmp(&fi).unwrap().then(i.cmp(&j))
    });
    for &i in order.iter().take((base * s + spare).saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}
