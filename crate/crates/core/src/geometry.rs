//! Planar locations, rectangular domains and pairwise distances.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A point in the plane. Coordinates are projected, Euclidean units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub x: f64,
    pub y: f64,
}

impl Location {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Location) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Ordered, non-empty collection of locations. Index order defines identity.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationSet {
    points: Vec<Location>,
}

impl LocationSet {
    pub fn new(points: Vec<Location>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("location set must be non-empty".into()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "location {i} has non-finite coordinates"
            )));
        }
        Ok(Self { points })
    }

    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self> {
        Self::new(coords.iter().map(|&(x, y)| Location::new(x, y)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Location] {
        &self.points
    }

    pub fn get(&self, i: usize) -> Location {
        self.points[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Location> {
        self.points.iter()
    }

    pub fn into_vec(self) -> Vec<Location> {
        self.points
    }

    /// Concatenate two sets, `self` first.
    pub fn concat(&self, other: &[Location]) -> LocationSet {
        let mut points = self.points.clone();
        points.extend_from_slice(other);
        LocationSet { points }
    }

    pub fn subset(&self, indices: &[usize]) -> Result<LocationSet> {
        LocationSet::new(indices.iter().map(|&i| self.points[i]).collect())
    }

    /// Smallest axis-aligned rectangle containing every point.
    pub fn bounding_box(&self) -> Bounds {
        let mut b = Bounds {
            xmin: f64::INFINITY,
            xmax: f64::NEG_INFINITY,
            ymin: f64::INFINITY,
            ymax: f64::NEG_INFINITY,
        };
        for p in &self.points {
            b.xmin = b.xmin.min(p.x);
            b.xmax = b.xmax.max(p.x);
            b.ymin = b.ymin.min(p.y);
            b.ymax = b.ymax.max(p.y);
        }
        b
    }

    pub fn distance_matrix(&self) -> DistanceMatrix {
        distance_matrix(self)
    }
}

impl<'a> IntoIterator for &'a LocationSet {
    type Item = &'a Location;
    type IntoIter = std::slice::Iter<'a, Location>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Bounds {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Self> {
        let ok = [xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) && xmin < xmax && ymin < ymax;
        if !ok {
            return Err(Error::InvalidInput(format!(
                "invalid bounds [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Self { xmin, xmax, ymin, ymax })
    }

    pub fn unit_square() -> Self {
        Self { xmin: 0.0, xmax: 1.0, ymin: 0.0, ymax: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: &Location) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    /// Distance from `p` to the nearest edge; zero outside the rectangle.
    pub fn border_distance(&self, p: &Location) -> f64 {
        let d = (p.x - self.xmin)
            .min(self.xmax - p.x)
            .min(p.y - self.ymin)
            .min(self.ymax - p.y);
        d.max(0.0)
    }

    /// Grow the rectangle by `margin` on every side.
    pub fn expand(&self, margin: f64) -> Bounds {
        Bounds {
            xmin: self.xmin - margin,
            xmax: self.xmax + margin,
            ymin: self.ymin - margin,
            ymax: self.ymax + margin,
        }
    }
}

/// Symmetric matrix of Euclidean distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    inner: DMatrix<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }
}

pub fn distance_matrix(locs: &LocationSet) -> DistanceMatrix {
    let n = locs.len();
    let mut inner = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = locs.points[i].distance(&locs.points[j]);
            inner[(i, j)] = d;
            inner[(j, i)] = d;
        }
    }
    DistanceMatrix { inner }
}
