//! Domains, lattice grids with an exterior halo, and signed distance.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A point in R^n for n ≤ 2. In 1D the second coordinate is zero.
pub type Point = [f64; 2];

/// Bounded smooth domains with closed-form distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Disk { center: Point, radius: f64 },
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return invalid(format!("interval needs a < b, got ({a}, {b})"));
        }
        Ok(Domain::Interval { a, b })
    }

    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return invalid(format!("disk radius must be positive, got {radius}"));
        }
        Ok(Domain::Disk { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Disk { .. } => 2,
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn distance(&self, x: Point) -> f64 {
        match *self {
            Domain::Interval { a, b } => (x[0] - a).min(b - x[0]),
            Domain::Disk { center, radius } => {
                radius - (x[0] - center[0]).hypot(x[1] - center[1])
            }
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        self.distance(x) > 0.0
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Disk { radius, .. } => 2.0 * radius,
        }
    }

    /// Inradius: the largest value the distance attains.
    pub fn inradius(&self) -> f64 {
        self.diameter() / 2.0
    }

    /// The dilated domain {x : d(x, U) < eps}.
    pub fn dilate(&self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0) {
            return invalid(format!("dilation radius must be nonnegative, got {eps}"));
        }
        Ok(match *self {
            Domain::Interval { a, b } => Domain::Interval { a: a - eps, b: b + eps },
            Domain::Disk { center, radius } => Domain::Disk { center, radius: radius + eps },
        })
    }

    /// Axis-aligned bounding box as (lower, upper) corners.
    fn bounds(&self) -> (Point, Point) {
        match *self {
            Domain::Interval { a, b } => ([a, 0.0], [b, 0.0]),
            Domain::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
        }
    }

    /// A boundary point nearest to `x` (used to anchor boundary collars).
    pub fn boundary_point(&self, x: Point) -> Point {
        match *self {
            Domain::Interval { a, b } => {
                if (x[0] - a).abs() <= (b - x[0]).abs() {
                    [a, 0.0]
                } else {
                    [b, 0.0]
                }
            }
            Domain::Disk { center, radius } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let r = dx.hypot(dy);
                if r == 0.0 {
                    [center[0] + radius, center[1]]
                } else {
                    [center[0] + radius * dx / r, center[1] + radius * dy / r]
                }
            }
        }
    }
}

/// Uniform lattice h·Z^n restricted to a box covering U plus a halo of width `r_cut`.
///
/// Nodes are stored row-major with the first coordinate fastest.
#[derive(Debug, Clone)]
pub struct Grid {
    domain: Domain,
    h: f64,
    r_cut: f64,
    lo: [i64; 2],
    shape: [usize; 2],
    dist: Vec<f64>,
    interior: Vec<usize>,
}

impl Grid {
    pub fn new(domain: Domain, h: f64, r_cut: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return invalid(format!("grid spacing must be positive, got {h}"));
        }
        let diam = domain.diameter();
        if !(r_cut >= diam * (1.0 - 1e-12)) {
            return invalid(format!("R_cut = {r_cut} must be at least diam(U) = {diam}"));
        }
        let (blo, bhi) = domain.bounds();
        let dim = domain.dim();
        let mut lo = [0i64; 2];
        let mut shape = [1usize; 2];
        for k in 0..dim {
            let i0 = ((blo[k] - r_cut) / h - 1e-9).ceil() as i64;
            let i1 = ((bhi[k] + r_cut) / h + 1e-9).floor() as i64;
            lo[k] = i0;
            shape[k] = (i1 - i0 + 1) as usize;
        }
        let len = shape[0] * shape[1];
        if len > 50_000_000 {
            return invalid(format!("grid with {len} stored nodes is too large"));
        }
        let mut g = Grid { domain, h, r_cut, lo, shape, dist: Vec::new(), interior: Vec::new() };
        g.dist = (0..len).map(|i| domain.distance(g.point(i))).collect();
        g.interior = (0..len).filter(|&i| g.dist[i] > 0.0).collect();
        Ok(g)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn r_cut(&self) -> f64 {
        self.r_cut
    }
    pub fn len(&self) -> usize {
        self.dist.len()
    }
    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    /// Lattice indices of stored node `idx`.
    pub fn lattice(&self, idx: usize) -> [i64; 2] {
        let i = (idx % self.shape[0]) as i64 + self.lo[0];
        let j = (idx / self.shape[0]) as i64 + self.lo[1];
        [i, j]
    }

    pub fn point(&self, idx: usize) -> Point {
        let [i, j] = self.lattice(idx);
        [i as f64 * self.h, j as f64 * self.h]
    }

    /// Coordinates of an arbitrary lattice site, stored or not.
    pub fn lattice_point(&self, l: [i64; 2]) -> Point {
        [l[0] as f64 * self.h, l[1] as f64 * self.h]
    }

    /// Stored index of a lattice site, if inside the box.
    #[inline]
    pub fn index_of(&self, l: [i64; 2]) -> Option<usize> {
        let i = l[0] - self.lo[0];
        let j = l[1] - self.lo[1];
        if i < 0 || j < 0 || i as usize >= self.shape[0] || j as usize >= self.shape[1] {
            None
        } else {
            Some(i as usize + j as usize * self.shape[0])
        }
    }

    /// Stored index of the lattice site nearest to `x`, if inside the box.
    pub fn nearest(&self, x: Point) -> Option<usize> {
        let l = [(x[0] / self.h).round() as i64, (x[1] / self.h).round() as i64];
        self.index_of(l)
    }

    /// Signed distance of node `idx` to the boundary of U.
    pub fn distance(&self, idx: usize) -> f64 {
        self.dist[idx]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    /// Stored indices of nodes inside U, in storage order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Stored indices of nodes outside U (the halo).
    pub fn halo(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.dist[i] <= 0.0).collect()
    }

    /// Stored indices of nodes lying in `region`, in storage order.
    pub fn nodes_in(&self, region: &Domain) -> Vec<usize> {
        (0..self.len()).filter(|&i| region.contains(self.point(i))).collect()
    }

    /// Interior nodes with d ≥ `margin`.
    pub fn nodes_with_margin(&self, margin: f64) -> Vec<usize> {
        self.interior.iter().copied().filter(|&i| self.dist[i] >= margin).collect()
    }
}
