//! Radial discretisation of `[0, r_max]` and second-order finite-difference
//! operators.
//!
//! The origin is closed with a parity ghost node: an even field has
//! `g(-r) = g(r)`, an odd field `g(-r) = -g(r)`, which encodes the regularity
//! of the flow variables (`f` even with `f(0) = 1`, `z` odd with `z(0) = 0`)
//! and keeps the stencils second order at the first node. The outer boundary
//! uses one-sided stencils; evolution overrides those nodes with Dirichlet
//! data, so they only matter for diagnostics.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

/// Minimum number of radial intervals; below this the one-sided stencils and
/// the tail-fit diagnostics (which need eight nodes beyond `r_max / 2`) break.
pub const MIN_INTERVALS: usize = 16;

/// Reflection symmetry of a nodal field across `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// `g(-r) = g(r)`; first derivative vanishes at the origin.
    Even,
    /// `g(-r) = -g(r)`; the value vanishes at the origin.
    Odd,
}

/// Node-placement descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpacing {
    /// Equal steps `h = r_max / n`.
    Uniform,
    /// `r(x) = r_max * x^gamma` on `x in [0, 1]`; `gamma > 1` clusters nodes
    /// near the origin. Restricted to `gamma = 1` or `gamma >= 2` so the map
    /// has a bounded second derivative.
    Power { gamma: f64 },
    /// Nodes supplied verbatim (e.g. read back from a snapshot).
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridError {
    /// Fewer than [`MIN_INTERVALS`] intervals requested.
    TooFewIntervals { requested: usize },
    /// `r_max` not a positive finite number.
    InvalidExtent,
    /// Stretch map rejected (non-monotone or unbounded second derivative).
    InvalidStretch,
    /// Node list is not strictly increasing from exactly zero.
    NonMonotonic { index: usize },
    /// Field length does not match the node count.
    LengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::TooFewIntervals { requested } => write!(
                f,
                "grid needs at least {MIN_INTERVALS} intervals, got {requested}"
            ),
            GridError::InvalidExtent => write!(f, "r_max must be positive and finite"),
            GridError::InvalidStretch => write!(
                f,
                "stretch map must be strictly monotone with bounded second derivative \
                 (power maps: gamma = 1 or gamma >= 2)"
            ),
            GridError::NonMonotonic { index } => {
                write!(f, "nodes must increase strictly from 0 (violated at index {index})")
            }
            GridError::LengthMismatch { expected, got } => {
                write!(f, "field has {got} values but the grid has {expected} nodes")
            }
        }
    }
}

impl core::error::Error for GridError {}

/// Radial grid `r_0 = 0 < r_1 < ... < r_N = r_max` with precomputed
/// difference stencils. Immutable after construction.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    spacing: GridSpacing,
    /// Exact step for uniform grids; stencils use it directly so uniform
    /// spacing is not polluted by node round-off.
    step: Option<f64>,
    d1_c: Vec<[f64; 3]>,
    d2_c: Vec<[f64; 3]>,
    d1_end: [f64; 3],
    d2_end: [f64; 4],
    /// Five-point derivative rows (fourth order) for the curvature
    /// diagnostics and the axis-refined evolution stencils; `d1h_lo[i]` is
    /// the window start as a virtual node index (negative indices are
    /// parity ghosts).
    d1h_lo: Vec<isize>,
    d1h_w: Vec<[f64; 5]>,
    d2h_w: Vec<[f64; 5]>,
    /// Folded symmetric stencils at the origin: `d/dr` of an odd field on
    /// `(field[1], field[2])` and `d^2/dr^2` of an even field on
    /// `(field[0], field[1], field[2])`, both fourth order.
    odd_d1_origin: [f64; 2],
    even_d2_origin: [f64; 3],
}

impl RadialGrid {
    /// Builds a grid over `[0, r_max]` with `n` intervals (`n + 1` nodes).
    pub fn build(r_max: f64, n: usize, spacing: GridSpacing) -> Result<Self, GridError> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(GridError::InvalidExtent);
        }
        if n < MIN_INTERVALS {
            return Err(GridError::TooFewIntervals { requested: n });
        }
        let mut nodes = Vec::with_capacity(n + 1);
        let step = match spacing {
            GridSpacing::Uniform => {
                let h = r_max / n as f64;
                for i in 0..=n {
                    nodes.push(i as f64 * h);
                }
                nodes[n] = r_max;
                Some(h)
            }
            GridSpacing::Power { gamma } => {
                if !gamma.is_finite() || !(gamma == 1.0 || gamma >= 2.0) {
                    return Err(GridError::InvalidStretch);
                }
                for i in 0..=n {
                    let x = i as f64 / n as f64;
                    nodes.push(r_max * math::powf(x, gamma));
                }
                nodes[0] = 0.0;
                nodes[n] = r_max;
                None
            }
            GridSpacing::Explicit => return Err(GridError::InvalidStretch),
        };
        Self::finish(nodes, spacing, step)
    }

       /// Uniform grid over `[0, r_max]` with `n` intervals.
    pub fn uniform(r_max: f64, n: usize) -> Result<Self, GridError> {
        Self::build(r_max, n, GridSpacing::Uniform)
    }

    /// Builds a grid from an explicit node list (first node must be exactly 0).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, GridError> {
        if nodes.len() < MIN_INTERVALS + 1 {
            return Err(GridError::TooFewIntervals {
                requested: nodes.len().saturating_sub(1),
            });
        }
        Self::finish(nodes, GridSpacing::Explicit, None)
    }

    fn finish(nodes: Vec<f64>, spacing: GridSpacing, step: Option<f64>) -> Result<Self, GridError> {
        if nodes[0] != 0.0 {
            return Err(GridError::NonMonotonic { index: 0 });
        }
        for i in 1..nodes.len() {
            if !nodes[i].is_finite() || nodes[i] <= nodes[i - 1] {
                return Err(GridError::NonMonotonic { index: i });
            }
        }
        let n = nodes.len() - 1;
        let gap = |i: usize| -> f64 {
            match step {
                Some(h) => h,
                None => nodes[i + 1] - nodes[i],
            }
        };
        let mut d1_c = vec![[0.0; 3]; n + 1];
        let mut d2_c = vec![[0.0; 3]; n + 1];
        for i in 1..n {
            let hm = gap(i - 1);
            let hp = gap(i);
            d1_c[i] = [
                -hp / (hm * (hm + hp)),
                (hp - hm) / (hm * hp),
                hm / (hp * (hm + hp)),
            ];
            d2_c[i] = [
                2.0 / (hm * (hm + hp)),
                -2.0 / (hm * hp),
                2.0 / (hp * (hm + hp)),
            ];
        }
        let d1_end_v = zero_sum(fd_weights(nodes[n], &nodes[n - 2..=n], 1));
        let d2_end_v = zero_sum(fd_weights(nodes[n], &nodes[n - 3..=n], 2));
        let d1_end = [d1_end_v[0], d1_end_v[1], d1_end_v[2]];
        let d2_end = [d2_end_v[0], d2_end_v[1], d2_end_v[2], d2_end_v[3]];

        // Virtual node positions: negative indices mirror across the origin.
        let vpos = |v: isize| -> f64 {
            if v < 0 {
                -nodes[(-v) as usize]
            } else {
                nodes[v as usize]
            }
        };
        let mut d1h_lo = Vec::with_capacity(n + 1);
        let mut d1h_w = Vec::with_capacity(n + 1);
        let mut d2h_w = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let lo = (j as isize - 2).clamp(-2, n as isize - 4);
            let xs: Vec<f64> = (0..5).map(|k| vpos(lo + k)).collect();
            let w = zero_sum(fd_weights(nodes[j], &xs, 1));
            d1h_lo.push(lo);
            d1h_w.push([w[0], w[1], w[2], w[3], w[4]]);
            let w2 = zero_sum(fd_weights(nodes[j], &xs, 2));
            d2h_w.push([w2[0], w2[1], w2[2], w2[3], w2[4]]);
        }

        // Fold the symmetric j = 0 rows across the origin.
        let sym: Vec<f64> = (-2..=2).map(vpos).collect();
        let w1 = fd_weights(0.0, &sym, 1);
        let odd_d1_origin = [w1[3] - w1[1], w1[4] - w1[0]];
        let w2 = fd_weights(0.0, &sym, 2);
        let folded = zero_sum(alloc::vec![w2[2], w2[1] + w2[3], w2[0] + w2[4]]);
        let even_d2_origin = [folded[0], folded[1], folded[2]];

        Ok(RadialGrid {
            nodes,
            spacing,
            step,
            d1_c,
            d2_c,
            d1_end,
            d2_end,
            d1h_lo,
            d1h_w,
            d2h_w,
            odd_d1_origin,
            even_d2_origin,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of nodes (`intervals + 1`).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn spacing(&self) -> GridSpacing {
        self.spacing
    }

    /// Exact step of a uniform grid, `None` otherwise.
    pub fn uniform_step(&self) -> Option<f64> {
        self.step
    }

    /// Smallest interval adjacent to node `i`; the local scale entering the
    /// stability limit.
    pub fn local_spacing(&self, i: usize) -> f64 {
        let n = self.nodes.len() - 1;
        if let Some(h) = self.step {
            return h;
        }
        if i == 0 {
            self.nodes[1]
        } else if i == n {
            self.nodes[n] - self.nodes[n - 1]
        } else {
            let hm = self.nodes[i] - self.nodes[i - 1];
            let hp = self.nodes[i + 1] - self.nodes[i];
            hm.min(hp)
        }
    }

    /// Indices of the outer tail `r > r_max / 2`, used by the decay and mass
    /// fits.
    pub fn tail_range(&self) -> core::ops::Range<usize> {
        let half = self.r_max() / 2.0;
        let start = self.nodes.partition_point(|&r| r <= half);
        start..self.nodes.len()
    }

    fn check_len(&self, field: &[f64]) -> Result<(), GridError> {
        if field.len() != self.nodes.len() {
            return Err(GridError::LengthMismatch {
                expected: self.nodes.len(),
                got: field.len(),
            });
        }
        Ok(())
    }

    /// Second-order first derivative. Centered in the interior, parity ghost
    /// at the origin, one-sided three-point stencil at `r_N`.
    pub fn d1(&self, field: &[f64], parity: Parity) -> Result<Vec<f64>, GridError> {
        self.check_len(field)?;
        let n = self.nodes.len() - 1;
        let mut out = vec![0.0; n + 1];
        // Ghost closure at r = 0: symmetric stencils across the origin. The
        // even value is identically zero; the odd one uses the folded
        // five-point row, which is what the singular z/r limits want.
        out[0] = match parity {
            Parity::Even => 0.0,
            Parity::Odd => self.odd_d1_origin[0] * field[1] + self.odd_d1_origin[1] * field[2],
        };
        for i in 1..n {
            let [cm, c0, cp] = self.d1_c[i];
            out[i] = cm * field[i - 1] + c0 * field[i] + cp * field[i + 1];
        }
        let [e0, e1, e2] = self.d1_end;
        out[n] = e0 * field[n - 2] + e1 * field[n - 1] + e2 * field[n];
        Ok(out)
    }

    /// Five-point fourth-order first derivative with the same parity
    /// closure. The curvature diagnostics need it: `lambda_1` enters the
    /// Bianchi residual divided by `r`, and a second-order `df/dr` leaves a
    /// first-order residual at the first few nodes.
    pub(crate) fn d1_refined(&self, field: &[f64], parity: Parity) -> Result<Vec<f64>, GridError> {
        self.check_len(field)?;
        let n = self.nodes.len() - 1;
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        let mut out = vec![0.0; n + 1];
        out[0] = match parity {
            Parity::Even => 0.0,
            Parity::Odd => self.odd_d1_origin[0] * field[1] + self.odd_d1_origin[1] * field[2],
        };
        for j in 1..=n {
            out[j] = self.apply_row(&self.d1h_w[j], self.d1h_lo[j], field, sign);
        }
        Ok(out)
    }

    /// Five-point fourth-order second derivative at node `j` (same windows
    /// and parity folding as [`Self::d1_refined`]).
    pub(crate) fn d2_refined_at(&self, field: &[f64], parity: Parity, j: usize) -> f64 {
        if j == 0 {
            return match parity {
                Parity::Even => self.even_d2_origin(field),
                Parity::Odd => -2.0 * field[0] / (self.nodes[1] * self.nodes[1]),
            };
        }
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        self.apply_row(&self.d2h_w[j], self.d1h_lo[j], field, sign)
    }

    /// Fourth-order first derivative at a single node.
    pub(crate) fn d1_refined_at(&self, field: &[f64], parity: Parity, j: usize) -> f64 {
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        if j == 0 {
            return match parity {
                Parity::Even => 0.0,
                Parity::Odd => self.odd_d1_origin_value(field),
            };
        }
        self.apply_row(&self.d1h_w[j], self.d1h_lo[j], field, sign)
    }

    fn apply_row(&self, w: &[f64; 5], lo: isize, field: &[f64], sign: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &wk) in w.iter().enumerate() {
            let v = lo + k as isize;
            let val = if v < 0 { sign * field[(-v) as usize] } else { field[v as usize] };
            acc += wk * val;
        }
        acc
    }

    /// Fourth-order `d^2/dr^2` of an even field at the origin: the regular
    /// limit shared by both sectional curvatures.
    pub(crate) fn even_d2_origin(&self, field: &[f64]) -> f64 {
        self.even_d2_origin[0] * field[0]
            + self.even_d2_origin[1] * field[1]
            + self.even_d2_origin[2] * field[2]
    }

    /// Origin value of the first derivative of an odd field (fourth order).
    pub(crate) fn odd_d1_origin_value(&self, field: &[f64]) -> f64 {
        self.odd_d1_origin[0] * field[1] + self.odd_d1_origin[1] * field[2]
    }

    /// Second-order second derivative; same boundary treatment as [`Self::d1`]
    /// with a four-point one-sided stencil at `r_N`.
    pub fn d2(&self, field: &[f64], parity: Parity) -> Result<Vec<f64>, GridError> {
        self.check_len(field)?;
        let n = self.nodes.len() - 1;
        let mut out = vec![0.0; n + 1];
        let r1 = self.nodes[1];
        out[0] = match parity {
            Parity::Even => self.even_d2_origin(field),
            Parity::Odd => -2.0 * field[0] / (r1 * r1),
        };
        for i in 1..n {
            let [cm, c0, cp] = self.d2_c[i];
            out[i] = cm * field[i - 1] + c0 * field[i] + cp * field[i + 1];
        }
        let [e0, e1, e2, e3] = self.d2_end;
        out[n] = e0 * field[n - 3] + e1 * field[n - 2] + e2 * field[n - 1] + e3 * field[n];
        Ok(out)
    }
}

/// Forces the weights of a derivative stencil to sum to exactly zero (in
/// left-to-right evaluation order) by adjusting the last one; an O(ulp)
/// perturbation that makes constant fields differentiate to exactly zero.
fn zero_sum(mut w: Vec<f64>) -> Vec<f64> {
    let mut acc = 0.0;
    for &v in &w[..w.len() - 1] {
        acc += v;
    }
    *w.last_mut().unwrap() = -acc;
    w
}

/// Finite-difference weights for the `m`-th derivative at `x0` on arbitrary
/// nodes `xs` (Fornberg's recursion).
fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}
