//! Gridded intensity surfaces and kernel density estimation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{Bounds, Location};

/// Node layout of a rectangular grid. Nodes sit on the domain corners and are
/// evenly spaced, `nx × ny` in total, stored row-major (x fastest).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub bounds: Bounds,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(bounds: Bounds, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidInput(format!("grid needs at least 2x2 nodes, got {nx}x{ny}")));
        }
        Ok(Self { bounds, nx, ny })
    }

    pub fn dx(&self) -> f64 {
        self.bounds.width() / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        self.bounds.height() / (self.ny - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        if ix == self.nx - 1 {
            self.bounds.xmax
        } else {
            self.bounds.xmin + ix as f64 * self.dx()
        }
    }

    pub fn y(&self, iy: usize) -> f64 {
        if iy == self.ny - 1 {
            self.bounds.ymax
        } else {
            self.bounds.ymin + iy as f64 * self.dy()
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node locations in storage order.
    pub fn nodes(&self) -> Vec<Location> {
        let mut out = Vec::with_capacity(self.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push(Location::new(self.x(ix), self.y(iy)));
            }
        }
        out
    }
}

/// Nonnegative intensity (events per unit area) on a grid, bilinear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensitySurface {
    grid: GridSpec,
    values: Vec<f64>,
}

impl IntensitySurface {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput(format!("intensity node {i} is {}", values[i])));
        }
        let s = Self { grid, values };
        if !(s.integral() > 0.0) {
            return Err(Error::InvalidInput("intensity surface integrates to zero".into()));
        }
        Ok(s)
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&Location) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.nx + ix]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Bilinear interpolation; points outside the grid are clamped to its edge.
    pub fn evaluate(&self, p: &Location) -> f64 {
        let g = &self.grid;
        let fx = ((p.x - g.bounds.xmin) / g.dx()).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((p.y - g.bounds.ymin) / g.dy()).clamp(0.0, (g.ny - 1) as f64);
        let ix = (fx.floor() as usize).min(g.nx - 2);
        let iy = (fy.floor() as usize).min(g.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let v00 = self.node(ix, iy);
        let v10 = self.node(ix + 1, iy);
        let v01 = self.node(ix, iy + 1);
        let v11 = self.node(ix + 1, iy + 1);
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }

    /// Trapezoid-rule integral over the grid's bounds; exact for the bilinear surface.
    pub fn integral(&self) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for iy in 0..g.ny {
            let wy = if iy == 0 || iy == g.ny - 1 { 0.5 } else { 1.0 };
            for ix in 0..g.nx {
                let wx = if ix == 0 || ix == g.nx - 1 { 0.5 } else { 1.0 };
                acc += wx * wy * self.node(ix, iy);
            }
        }
        acc * g.dx() * g.dy()
    }

    /// Node-wise map into a new surface on the same grid.
    pub fn map_nodes(&self, f: impl Fn(&Location, f64) -> f64) -> Result<Self> {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(p, &v)| f(p, v))
            .collect();
        Self::new(self.grid, values)
    }
}

/// Per-axis Gaussian kernel standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KdeBandwidth {
    /// `n^(-1/6) × axis standard deviation` on each axis.
    Scott,
    /// Same bandwidth on both axes.
    Fixed(f64),
    PerAxis(f64, f64),
}

impl KdeBandwidth {
    pub fn resolve(&self, points: &[Location], bounds: &Bounds) -> Result<(f64, f64)> {
        let (hx, hy) = match *self {
            KdeBandwidth::Scott => scott_bandwidth(points, bounds),
            KdeBandwidth::Fixed(b) => (b, b),
            KdeBandwidth::PerAxis(bx, by) => (bx, by),
        };
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
            return Err(Error::InvalidInput(format!("bandwidth must be positive, got ({hx}, {hy})")));
        }
        Ok((hx, hy))
    }
}

fn axis_sd(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = v.clone().count();
    if n < 2 {
        return 0.0;
    }
    let mean = v.clone().sum::<f64>() / n as f64;
    (v.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Scott's rule per axis. A degenerate axis (fewer than two points, or all
/// coordinates equal) uses the standard deviation of a uniform spread over the
/// domain instead.
pub fn scott_bandwidth(points: &[Location], bounds: &Bounds) -> (f64, f64) {
    let n = points.len().max(1) as f64;
    let factor = n.powf(-1.0 / 6.0);
    let sx = axis_sd(points.iter().map(|p| p.x));
    let sy = axis_sd(points.iter().map(|p| p.y));
    let sx = if sx > 0.0 { sx } else { bounds.width() / 12f64.sqrt() };
    let sy = if sy > 0.0 { sy } else { bounds.height() / 12f64.sqrt() };
    (factor * sx, factor * sy)
}

#[inline]
fn std_normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

// Kernel with reflection about both ends of [lo, hi].
fn reflected_kernel(x: f64, xi: f64, h: f64, lo: f64, hi: f64) -> f64 {
    (std_normal_pdf((x - xi) / h) + std_normal_pdf((x - (2.0 * lo - xi)) / h) + std_normal_pdf((x - (2.0 * hi - xi)) / h))
        / h
}

/// Gaussian product-kernel intensity estimate with boundary reflection. Each
/// point contributes unit mass, so the surface integrates to roughly the
/// number of points.
pub fn kde_intensity(points: &[Location], grid: &GridSpec, bandwidth: KdeBandwidth) -> Result<IntensitySurface> {
    if points.is_empty() {
        return Err(Error::InvalidInput("kernel density needs at least one point".into()));
    }
    let b = grid.bounds;
    let (hx, hy) = bandwidth.resolve(points, &b)?;
    let n = points.len();
    let kx = DMatrix::from_fn(n, grid.nx, |i, ix| reflected_kernel(grid.x(ix), points[i].x, hx, b.xmin, b.xmax));
    let ky = DMatrix::from_fn(grid.ny, n, |iy, i| reflected_kernel(grid.y(iy), points[i].y, hy, b.ymin, b.ymax));
    let dens = ky * kx; // ny × nx
    let mut values = Vec::with_capacity(grid.len());
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            values.push(dens[(iy, ix)]);
        }
    }
    IntensitySurface::new(*grid, values)
}
