//! Hyperspherical chart on `S^n(r)`.
//!
//! Axes `0..n-1` are polar angles in `(0, π)` sampled at half-cell offsets
//! `(j + 1/2) π / N`, so no node sits on a pole. Axis `n-1` is the periodic
//! azimuth sampled at `j · 2π / N` with `N` even.
//!
//! Finite-difference stencils never go one-sided. A stencil leaving a polar
//! axis through `θ_a = 0` (or `π`) lands on the same sphere point as the grid
//! node reached by reflecting `θ_a`, replacing every later polar angle by
//! `π - θ_b` and shifting the azimuth by `π`. That coordinate map is a
//! diagonal affine involution with Jacobian `±1` per axis, so coordinate
//! components of any tensor pick up one sign per flipped slot. Each field
//! component therefore carries a parity bit-mask (XOR of its slot axes) and a
//! ghost read is `(-1)^{popcount(parity & flip)}` times the mirrored node.

use crate::error::{domain, Result};
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

pub const MAX_DIM: usize = 5;

/// Pointwise checks stay at least this far from the polar boundaries.
pub const COLLAR_MARGIN: f64 = 0.2;

static NEXT_CHART_ID: AtomicU64 = AtomicU64::new(1);

/// Central-difference accuracy order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FdOrder {
    Second,
    Fourth,
    Sixth,
    #[default]
    Eighth,
}

impl FdOrder {
    pub fn from_int(order: usize) -> Result<Self> {
        match order {
            2 => Ok(Self::Second),
            4 => Ok(Self::Fourth),
            6 => Ok(Self::Sixth),
            8 => Ok(Self::Eighth),
            _ => domain(format!("finite-difference order must be 2, 4, 6 or 8, got {order}")),
        }
    }

    pub fn as_int(self) -> usize {
        match self {
            Self::Second => 2,
            Self::Fourth => 4,
            Self::Sixth => 6,
            Self::Eighth => 8,
        }
    }

    pub fn half_width(self) -> usize {
        self.as_int() / 2
    }

    /// Weights for offsets `-r..=r` of the first derivative (unit spacing).
    pub fn first_weights(self) -> &'static [f64] {
        match self {
            Self::Second => &[-0.5, 0.0, 0.5],
            Self::Fourth => &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
            Self::Sixth => &[-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
            Self::Eighth => &[
                1.0 / 280.0,
                -4.0 / 105.0,
                1.0 / 5.0,
                -4.0 / 5.0,
                0.0,
                4.0 / 5.0,
                -1.0 / 5.0,
                4.0 / 105.0,
                -1.0 / 280.0,
            ],
        }
    }

    /// Weights for offsets `-r..=r` of the second derivative (unit spacing).
    pub fn second_weights(self) -> &'static [f64] {
        match self {
            Self::Second => &[1.0, -2.0, 1.0],
            Self::Fourth => &[-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            Self::Sixth => &[1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
            Self::Eighth => &[
                -1.0 / 560.0,
                8.0 / 315.0,
                -1.0 / 5.0,
                8.0 / 5.0,
                -205.0 / 72.0,
                8.0 / 5.0,
                -1.0 / 5.0,
                8.0 / 315.0,
                -1.0 / 560.0,
            ],
        }
    }
}

#[derive(Debug)]
pub struct Chart {
    id: u64,
    n: usize,
    lambda: f64,
    radius: f64,
    dims: Vec<usize>,
    strides: Vec<usize>,
    spacing: Vec<f64>,
    angles: Vec<Vec<f64>>,
    axis_weights: Vec<Vec<f64>>,
    order: FdOrder,
}

impl Chart {
    /// Chart for the round sphere with `Ric = (n-1) λ g`, i.e. radius `1/√λ`.
    pub fn new(n: usize, lambda: f64, dims: &[usize], order: FdOrder) -> Result<Self> {
        if !(3..=MAX_DIM).contains(&n) {
            return domain(format!("sphere dimension must be 3, 4 or 5, got {n}"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("lambda must be positive, got {lambda}"));
        }
        if dims.len() != n {
            return domain(format!("need {n} axis resolutions, got {}", dims.len()));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 8) {
            return domain(format!("each axis needs at least 8 nodes, got {d}"));
        }
        if !dims[n - 1].is_multiple_of(2) {
            return domain("the periodic axis needs an even node count");
        }
        let mut strides = vec![1; n];
        for a in (0..n - 1).rev() {
            strides[a] = strides[a + 1] * dims[a + 1];
        }
        let mut spacing = Vec::with_capacity(n);
        let mut angles = Vec::with_capacity(n);
        let mut axis_weights = Vec::with_capacity(n);
        for (a, &d) in dims.iter().enumerate() {
            if a < n - 1 {
                let h = PI / d as f64;
                spacing.push(h);
                angles.push((0..d).map(|j| (j as f64 + 0.5) * h).collect());
                axis_weights.push(polar_weights(d, n - 1 - a));
            } else {
                let h = 2.0 * PI / d as f64;
                spacing.push(h);
                angles.push((0..d).map(|j| j as f64 * h).collect());
                axis_weights.push(vec![h; d]);
            }
        }
        Ok(Self {
            id: NEXT_CHART_ID.fetch_add(1, Ordering::Relaxed),
            n,
            lambda,
            radius: 1.0 / lambda.sqrt(),
            dims: dims.to_vec(),
            strides,
            spacing,
            angles,
            axis_weights,
            order,
        })
    }

    pub fn id(&self) -> u64 {
        self.id
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }
    pub fn order(&self) -> FdOrder {
        self.order
    }
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn axis_angles(&self, axis: usize) -> &[f64] {
        &self.angles[axis]
    }
    pub fn axis_weights(&self, axis: usize) -> &[f64] {
        &self.axis_weights[axis]
    }
    /// Number of packed components of a symmetric 2-tensor.
    pub fn nsym(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn multi_index(&self, node: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut rest = node;
        for a in 0..self.n {
            idx[a] = rest / self.strides[a];
            rest %= self.strides[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        (0..self.n).map(|a| idx[a] * self.strides[a]).sum()
    }

    pub fn node_angles(&self, node: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(node);
        let mut th = [0.0; MAX_DIM];
        for a in 0..self.n {
            th[a] = self.angles[a][idx[a]];
        }
        th
    }

    /// Quadrature weight of a node for `∫_{S^n(1)} f dθ`-densities, i.e.
    /// it already contains the unit-sphere volume density.
    pub fn node_weight(&self, node: usize) -> f64 {
        let idx = self.multi_index(node);
        (0..self.n).map(|a| self.axis_weights[a][idx[a]]).product()
    }

    /// Volume density of the unit sphere, `∏_a sin^{n-1-a} θ_a`.
    pub fn unit_density(&self, node: usize) -> f64 {
        let th = self.node_angles(node);
        (0..self.n - 1).map(|a| th[a].sin().powi((self.n - 1 - a) as i32)).product()
    }

    /// Whether every polar angle lies in `[margin, π - margin]`.
    pub fn in_collar(&self, node: usize) -> bool {
        let th = self.node_angles(node);
        (0..self.n - 1).all(|a| th[a] >= COLLAR_MARGIN && th[a] <= PI - COLLAR_MARGIN)
    }

    pub fn collar_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.in_collar(k)).collect()
    }

    /// Node reached from `idx` by moving `offset` cells along `axis`, and the
    /// mask of axes whose coordinate direction is reversed on the way.
    #[inline]
    pub fn neighbor(&self, idx: &[usize; MAX_DIM], axis: usize, offset: isize) -> (usize, u32) {
        let n = self.n;
        let d = self.dims[axis] as isize;
        let j = idx[axis] as isize + offset;
        let periodic = n - 1;
        if axis == periodic {
            let jj = j.rem_euclid(d) as usize;
            let base = self.flat_index(idx) as isize + (jj as isize - idx[axis] as isize) * self.strides[axis] as isize;
            return (base as usize, 0);
        }
        if (0..d).contains(&j) {
            let base = self.flat_index(idx) as isize + offset * self.strides[axis] as isize;
            return (base as usize, 0);
        }
        let mirrored = if j < 0 { -1 - j } else { 2 * d - 1 - j };
        let mut m = *idx;
        m[axis] = mirrored as usize;
        let mut flip = 1u32 << axis;
        for b in axis + 1..periodic {
            m[b] = self.dims[b] - 1 - idx[b];
            flip |= 1 << b;
        }
        m[periodic] = (idx[periodic] + self.dims[periodic] / 2) % self.dims[periodic];
        (self.flat_index(&m), flip)
    }
}

/// Exact moment `∫_0^π cos(kθ) sin^m θ dθ`.
fn polar_moment(k: usize, m: usize) -> f64 {
    // sin^m θ = (2i)^-m Σ_r C(m,r) (-1)^r e^{i(m-2r)θ}
    // ∫_0^π e^{iaθ} dθ = π (a = 0), i (1 - (-1)^a) / a otherwise
    let integral = |a: i64| -> (f64, f64) {
        if a == 0 {
            (PI, 0.0)
        } else if a % 2 == 0 {
            (0.0, 0.0)
        } else {
            (0.0, 2.0 / a as f64)
        }
    };
    let mut re = 0.0;
    let mut im = 0.0;
    let mut binom = 1.0;
    for r in 0..=m {
        if r > 0 {
            binom = binom * (m - r + 1) as f64 / r as f64;
        }
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        let a = m as i64 - 2 * r as i64;
        let (r1, i1) = integral(a + k as i64);
        let (r2, i2) = integral(a - k as i64);
        re += sign * binom * 0.5 * (r1 + r2);
        im += sign * binom * 0.5 * (i1 + i2);
    }
    // multiply by (2i)^-m = 2^-m (-i)^m
    let (pr, pi_) = match m % 4 {
        0 => (1.0, 0.0),
        1 => (0.0, -1.0),
        2 => (-1.0, 0.0),
        _ => (0.0, 1.0),
    };
    (re * pr - im * pi_) / 2f64.powi(m as i32)
}

/// Weights on the half-offset nodes `(j+1/2)π/N` integrating
/// `cos(kθ) sin^m θ` exactly for `k < N` (a Fejér-type rule).
pub fn polar_weights(nodes: usize, m: usize) -> Vec<f64> {
    let moments: Vec<f64> = (0..nodes).map(|k| polar_moment(k, m)).collect();
    (0..nodes)
        .map(|j| {
            let th = (j as f64 + 0.5) * PI / nodes as f64;
            let mut w = moments[0];
            for (k, mu) in moments.iter().enumerate().skip(1) {
                w += 2.0 * mu * (k as f64 * th).cos();
            }
            w / nodes as f64
        })
        .collect()
}
