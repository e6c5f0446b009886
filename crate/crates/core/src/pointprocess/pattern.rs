use crate::error::{Error, Result};
use crate::geometry::{Bounds, Location};

/// Events inside a rectangular observation window. May be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    points: Vec<Location>,
    bounds: Bounds,
}

impl PointPattern {
    pub fn new(points: Vec<Location>, bounds: Bounds) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !bounds.contains(p)) {
            return Err(Error::InvalidInput(format!(
                "point {i} ({}, {}) lies outside the window",
                points[i].x, points[i].y
            )));
        }
        Ok(Self { points, bounds })
    }

    pub fn points(&self) -> &[Location] {
        &self.points
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Location> {
        self.points
    }
}
