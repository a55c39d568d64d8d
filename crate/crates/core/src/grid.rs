//! Radial grids for N-dimensional radially symmetric problems.
//!
//! A grid is a strictly increasing node list `r_0 < ... < r_M`. Each node owns
//! a cell bounded by the midpoints of its neighbouring intervals; cell volumes
//! are the exact N-dimensional shell volumes and double as quadrature weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of the computational domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainKind {
    /// `R^N` truncated at `r_infinity`; the outer boundary carries the decay-matched condition.
    WholeSpace { r_infinity: f64 },
    /// Ball of the given radius with homogeneous Dirichlet data.
    Ball { radius: f64 },
    /// Annulus `inner <= r <= outer`, Dirichlet on both spheres.
    Annulus { inner: f64, outer: f64 },
}

impl DomainKind {
    pub fn inner_radius(&self) -> f64 {
        match *self {
            DomainKind::Annulus { inner, .. } => inner,
            _ => 0.0,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match *self {
            DomainKind::WholeSpace { r_infinity } => r_infinity,
            DomainKind::Ball { radius } => radius,
            DomainKind::Annulus { outer, .. } => outer,
        }
    }

    pub fn is_whole_space(&self) -> bool {
        matches!(self, DomainKind::WholeSpace { .. })
    }
}

/// Which one-sided limit to take when a profile jumps exactly at a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

/// Volume of the unit ball in `R^dim`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        n => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Surface area of the unit sphere in `R^dim`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    dim as f64 * unit_ball_volume(dim)
}

/// `y^n - x^n` without cancellation for nearby arguments.
fn power_difference(x: f64, y: f64, n: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..n {
        acc += x.powi(k as i32) * y.powi((n - 1 - k) as i32);
    }
    (y - x) * acc
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct GridRecord {
    dim: usize,
    kind: DomainKind,
    stretch: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Nodes, cell volumes and half-cell volumes of a radial mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    kind: DomainKind,
    stretch: f64,
    nodes: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
    weights: Vec<f64>,
}

impl Serialize for RadialGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridRecord {
            dim: self.dim,
            kind: self.kind.clone(),
            stretch: self.stretch,
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RadialGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = GridRecord::deserialize(d)?;
        RadialGrid::from_nodes(rec.dim, rec.kind, rec.nodes, rec.stretch)
            .map_err(serde::de::Error::custom)
    }
}

impl RadialGrid {
    /// Builds `intervals + 1` nodes whose spacing grows by `stretch` per cell.
    pub fn build(dim: usize, kind: DomainKind, intervals: usize, stretch: f64) -> Result<Self> {
        if intervals < 16 {
            return Err(Error::InvalidGrid(format!(
                "at least 16 intervals required, got {intervals}"
            )));
        }
        if !(stretch.is_finite() && stretch >= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "stretch must be >= 1, got {stretch}"
            )));
        }
        let (r0, r1) = (kind.inner_radius(), kind.outer_radius());
        if !(r0 >= 0.0 && r1 > r0 && r1.is_finite()) {
            return Err(Error::InvalidGrid(format!("radii must satisfy 0 <= {r0} < {r1}")));
        }
        let m = intervals as i32;
        let first = if stretch == 1.0 {
            (r1 - r0) / intervals as f64
        } else {
            (r1 - r0) * (stretch - 1.0) / (stretch.powi(m) - 1.0)
        };
        let mut nodes = Vec::with_capacity(intervals + 1);
        let mut r = r0;
        let mut h = first;
        nodes.push(r0);
        for _ in 1..intervals {
            r += h;
            nodes.push(r);
            h *= stretch;
        }
        nodes.push(r1);
        Self::from_nodes(dim, kind, nodes, stretch)
    }

    /// Wraps an explicit node list; validates ordering and endpoints.
    pub fn from_nodes(dim: usize, kind: DomainKind, nodes: Vec<f64>, stretch: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidGrid(format!("dimension must be >= 3, got {dim}")));
        }
        if nodes.len() < 17 {
            return Err(Error::InvalidGrid("at least 16 intervals required".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidGrid("nodes must be finite and strictly increasing".into()));
        }
        let (r0, r1) = (kind.inner_radius(), kind.outer_radius());
        let last = *nodes.last().unwrap();
        if (nodes[0] - r0).abs() > 1e-12 * r1 || (last - r1).abs() > 1e-12 * r1 {
            return Err(Error::InvalidGrid("endpoints do not match the domain".into()));
        }
        let n = nodes.len();
        let omega = unit_ball_volume(dim);
        let mut left = vec![0.0; n];
        let mut right = vec![0.0; n];
        for i in 0..n - 1 {
            let mid = 0.5 * (nodes[i] + nodes[i + 1]);
            right[i] = omega * power_difference(nodes[i], mid, dim);
            left[i + 1] = omega * power_difference(mid, nodes[i + 1], dim);
        }
        let weights = left.iter().zip(&right).map(|(l, r)| l + r).collect();
        Ok(Self {
            dim,
            kind,
            stretch,
            nodes,
            left,
            right,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights (cell volumes).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn outer_radius(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Largest interval length.
    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Half-cell volumes to the left and right of node `i`.
    pub fn half_volumes(&self, i: usize) -> (f64, f64) {
        (self.left[i], self.right[i])
    }

    /// Exact measure of the domain.
    pub fn domain_volume(&self) -> f64 {
        unit_ball_volume(self.dim) * power_difference(self.nodes[0], self.outer_radius(), self.dim)
    }

    /// Index of the node closest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        let idx = self.nodes.partition_point(|&x| x < r);
        if idx == 0 {
            0
        } else if idx >= self.nodes.len() {
            self.nodes.len() - 1
        } else if (self.nodes[idx] - r).abs() < (r - self.nodes[idx - 1]).abs() {
            idx
        } else {
            idx - 1
        }
    }

    /// Moves the nearest interior node onto each radius in `radii`.
    pub fn pinned(mut self, radii: &[f64]) -> Result<Self> {
        let (r0, r1) = (self.nodes[0], self.outer_radius());
        for &p in radii {
            if !(p > r0 && p < r1) {
                return Err(Error::InvalidGrid(format!("pinned radius {p} outside ({r0}, {r1})")));
            }
            let i = self.nearest(p);
            if i == 0 || i == self.nodes.len() - 1 {
                return Err(Error::InvalidGrid(format!("cannot pin radius {p}: too close to boundary")));
            }
            self.nodes[i] = p;
        }
        Self::from_nodes(self.dim, self.kind, self.nodes, self.stretch)
    }

    /// Splits every cell, keeping all existing nodes and the geometric grading.
    pub fn refined(&self) -> Self {
        let q = self.stretch.sqrt();
        let frac = 1.0 / (1.0 + q);
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(w[0] + frac * (w[1] - w[0]));
        }
        nodes.push(self.outer_radius());
        Self::from_nodes(self.dim, self.kind.clone(), nodes, q)
            .expect("refinement preserves grid validity")
    }

    /// Samples a pointwise function at the nodes.
    pub fn sample_fn(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }

    /// Volume-weighted average of the two one-sided limits at each node.
    pub fn sample_sided(&self, f: impl Fn(f64, Side) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let r = self.nodes[i];
                let (l, rt) = (self.left[i], self.right[i]);
                match (l > 0.0, rt > 0.0) {
                    (true, true) => (l * f(r, Side::Left) + rt * f(r, Side::Right)) / (l + rt),
                    (false, _) => f(r, Side::Right),
                    (_, false) => f(r, Side::Left),
                }
            })
            .collect()
    }

    /// Quadrature of nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Weighted `L^2` inner product.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(u.iter().zip(v))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// Weighted `L^2` norm.
    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// Weighted `L^p` norm of `|u|` over nodes with `r >= r_min`.
    pub fn lp_norm_outside(&self, u: &[f64], p: f64, r_min: f64) -> f64 {
        let s: f64 = self
            .nodes
            .iter()
            .zip(u.iter().zip(&self.weights))
            .filter(|(r, _)| **r >= r_min)
            .map(|(_, (v, w))| w * v.abs().powf(p))
            .sum();
        s.powf(1.0 / p)
    }

    /// Linear interpolation of nodal values at radius `r`.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        let n = self.nodes.len();
        if r <= self.nodes[0] {
            return values[0];
        }
        if r >= self.nodes[n - 1] {
            return values[n - 1];
        }
        let j = self.nodes.partition_point(|&x| x <= r);
        let (x0, x1) = (self.nodes[j - 1], self.nodes[j]);
        let t = (r - x0) / (x1 - x0);
        values[j - 1] * (1.0 - t) + values[j] * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(m: usize, q: f64) -> RadialGrid {
        RadialGrid::build(3, DomainKind::WholeSpace { r_infinity: 200.0 }, m, q).unwrap()
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn uniform_ball_grid() {
        let g = RadialGrid::build(3, DomainKind::Ball { radius: 1.0 }, 100, 1.0).unwrap();
        assert_eq!(g.len(), 101);
        for w in g.nodes().windows(2) {
            assert!((w[1] - w[0] - 0.01).abs() < 1e-12);
        }
        let total: f64 = g.weights().iter().sum();
        assert!((total / (4.0 / 3.0 * std::f64::consts::PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stretched_grid_grows() {
        let g = ws(800, 1.005);
        let h: Vec<f64> = g.nodes().windows(2).map(|w| w[1] - w[0]).collect();
        assert!(h.windows(2).all(|p| p[1] > p[0]));
        assert!((g.outer_radius() - 200.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RadialGrid::build(3, DomainKind::Ball { radius: 1.0 }, 8, 1.0).is_err());
        assert!(RadialGrid::build(3, DomainKind::Ball { radius: 1.0 }, 32, 0.9).is_err());
        assert!(RadialGrid::build(2, DomainKind::Ball { radius: 1.0 }, 32, 1.0).is_err());
        assert!(RadialGrid::build(3, DomainKind::Ball { radius: -1.0 }, 32, 1.0).is_err());
    }

    #[test]
    fn pin_and_refine_keep_nodes() {
        let g = ws(400, 1.01).pinned(&[1.0]).unwrap();
        let i = g.nearest(1.0);
        assert_eq!(g.nodes()[i], 1.0);
        let f = g.refined();
        assert_eq!(f.intervals(), 800);
        assert!(f.nodes().contains(&1.0));
        assert!((f.stretch() - 1.01f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sided_sampling_averages_jump() {
        let g = RadialGrid::build(3, DomainKind::Ball { radius: 2.0 }, 40, 1.0).unwrap().pinned(&[1.0]).unwrap();
        let i = g.nearest(1.0);
        let v = g.sample_sided(|r, s| if r < 1.0 || (r == 1.0 && s == Side::Left) { 1.0 } else { 0.0 });
        let (l, r) = g.half_volumes(i);
        assert!((v[i] - l / (l + r)).abs() < 1e-15);
        let mass = g.integrate(&v);
        assert!((mass - unit_ball_volume(3)).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let g = ws(64, 1.05);
        let s = serde_json::to_string(&g).unwrap();
        let back: RadialGrid = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
    }
}
