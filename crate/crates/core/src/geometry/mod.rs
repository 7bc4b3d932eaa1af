//! Observation windows, points, regions and indexed point configurations.
//!
//! All equilibrium sampling happens on a periodic window (a flat torus), which
//! stands in for translation invariance on the whole space. Free windows exist
//! for conditioned sampling with an explicit boundary configuration.

mod configuration;
mod grid;
pub mod snapshot;

pub use configuration::PointConfiguration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("window half side must be positive and finite, got {0}")]
    HalfSide(f64),
    #[error("dimension must be 1, 2 or 3, got {0}")]
    Dimension(usize),
    #[error("point {0:?} lies outside the window")]
    OutsideWindow(Point),
    #[error("point {0:?} coincides with an existing point")]
    Collision(Point),
    #[error("grid cell size must be positive and finite, got {0}")]
    CellSize(f64),
    #[error("translation requires a periodic window")]
    FreeTranslation,
    #[error("invalid region: {0}")]
    Region(String),
}

/// Boundary behaviour of a window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Free,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::Free => "free",
        })
    }
}

impl std::str::FromStr for Boundary {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "free" => Ok(Boundary::Free),
            other => Err(format!("unknown boundary `{other}`")),
        }
    }
}

/// A point in up to three dimensions. Coordinates past the window dimension
/// are kept at zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point(pub [f64; 3]);

impl Point {
    pub const ORIGIN: Point = Point([0.0; 3]);

    pub fn new1(x: f64) -> Self {
        Point([x, 0.0, 0.0])
    }

    pub fn new2(x: f64, y: f64) -> Self {
        Point([x, y, 0.0])
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Point([x, y, z])
    }

    /// Builds a point from up to three coordinates.
    pub fn from_slice(coords: &[f64]) -> Self {
        let mut p = [0.0; 3];
        for (dst, src) in p.iter_mut().zip(coords) {
            *dst = *src;
        }
        Point(p)
    }

    pub fn coords(&self, dim: usize) -> &[f64] {
        &self.0[..dim]
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Sup norm, the norm whose balls are the cubes `[-r, r]^d`.
    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

impl std::ops::Sub for Point {
    type Output = Point;

    fn sub(self, rhs: Point) -> Point {
        Point([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl std::ops::Add for Point {
    type Output = Point;

    fn add(self, rhs: Point) -> Point {
        Point([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl std::ops::Neg for Point {
    type Output = Point;

    fn neg(self) -> Point {
        Point([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// The cube `[-half_side, half_side]^dim`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    half_side: f64,
    dim: usize,
    boundary: Boundary,
}

impl Window {
    pub fn new(half_side: f64, dim: usize, boundary: Boundary) -> Result<Self, GeometryError> {
        if !(half_side.is_finite() && half_side > 0.0) {
            return Err(GeometryError::HalfSide(half_side));
        }
        if !(1..=3).contains(&dim) {
            return Err(GeometryError::Dimension(dim));
        }
        Ok(Self {
            half_side,
            dim,
            boundary,
        })
    }

    pub fn periodic(half_side: f64, dim: usize) -> Result<Self, GeometryError> {
        Self::new(half_side, dim, Boundary::Periodic)
    }

    pub fn free(half_side: f64, dim: usize) -> Result<Self, GeometryError> {
        Self::new(half_side, dim, Boundary::Free)
    }

    pub fn half_side(&self) -> f64 {
        self.half_side
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    pub fn volume(&self) -> f64 {
        self.side().powi(self.dim as i32)
    }

    /// Same window with the other boundary behaviour.
    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        Self { boundary, ..*self }
    }

    /// Closed-cube membership; coordinates past `dim` must be zero.
    pub fn contains(&self, p: &Point) -> bool {
        p.0[..self.dim]
            .iter()
            .all(|c| *c >= -self.half_side && *c <= self.half_side)
            && p.0[self.dim..].iter().all(|c| *c == 0.0)
    }

    fn wrap_coord(&self, c: f64) -> f64 {
        let side = self.side();
        let mut w = (c + self.half_side).rem_euclid(side) - self.half_side;
        // rem_euclid can return `side` itself after rounding
        if w >= self.half_side {
            w -= side;
        }
        w
    }

    /// Maps a point into `[-n, n)^d` on a periodic window; identity on free windows.
    pub fn wrap(&self, p: Point) -> Point {
        if !self.is_periodic() {
            return p;
        }
        let mut out = p;
        for c in out.0[..self.dim].iter_mut() {
            *c = self.wrap_coord(*c);
        }
        out
    }

    /// Displacement `to - from` under the window metric (minimum image when periodic).
    pub fn displacement(&self, from: &Point, to: &Point) -> Point {
        let mut d = *to - *from;
        if self.is_periodic() {
            let side = self.side();
            for c in d.0[..self.dim].iter_mut() {
                *c -= side * (*c / side).round();
            }
        }
        d
    }

    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        self.displacement(a, b).norm()
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let mut p = [0.0; 3];
        for c in p[..self.dim].iter_mut() {
            *c = rng.random_range(-self.half_side..self.half_side);
        }
        Point(p)
    }
}

/// A bounded test region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Region {
    /// Half-open box `[lower, upper)`; only the first `dim` coordinates are used.
    Box { lower: Point, upper: Point },
    /// Closed ball under the window metric.
    Ball { center: Point, radius: f64 },
}

impl Region {
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Self {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for k in 0..dim {
            lo[k] = lower;
            hi[k] = upper;
        }
        Region::Box {
            lower: Point(lo),
            upper: Point(hi),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<(), GeometryError> {
        match self {
            Region::Box { lower, upper } => {
                for k in 0..dim {
                    if !(lower.0[k] < upper.0[k]) {
                        return Err(GeometryError::Region(format!(
                            "box is empty along axis {k}"
                        )));
                    }
                }
                Ok(())
            }
            Region::Ball { radius, .. } => {
                if radius.is_finite() && *radius > 0.0 {
                    Ok(())
                } else {
                    Err(GeometryError::Region(format!("ball radius {radius}")))
                }
            }
        }
    }

    pub fn volume(&self, dim: usize) -> f64 {
        match self {
            Region::Box { lower, upper } => (0..dim).map(|k| upper.0[k] - lower.0[k]).product(),
            Region::Ball { radius, .. } => unit_ball_volume(dim) * radius.powi(dim as i32),
        }
    }

    pub fn contains(&self, window: &Window, p: &Point) -> bool {
        match self {
            Region::Box { lower, upper } => {
                (0..window.dim()).all(|k| p.0[k] >= lower.0[k] && p.0[k] < upper.0[k])
            }
            Region::Ball { center, radius } => window.distance(center, p) <= *radius,
        }
    }

    pub fn contained_in(&self, window: &Window) -> bool {
        let n = window.half_side();
        match self {
            Region::Box { lower, upper } => {
                (0..window.dim()).all(|k| lower.0[k] >= -n && upper.0[k] <= n)
            }
            Region::Ball { center, radius } => {
                (0..window.dim()).all(|k| center.0[k] - radius >= -n && center.0[k] + radius <= n)
            }
        }
    }
}

pub fn unit_ball_volume(dim: usize) -> f64 {
    use std::f64::consts::PI;
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("unsupported dimension {dim}"),
    }
}
