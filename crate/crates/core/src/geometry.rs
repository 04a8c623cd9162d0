//! Axis-parallel cubes and functions sampled at the cell centers of a uniform grid.
//!
//! Points are stored as `[f64; 2]`; in dimension one the second coordinate is
//! ignored and kept at zero.

use std::fmt;

use crate::{Error, Result};

pub type Point = [f64; 2];

/// Relative slack used when deciding whether a cube boundary sits on a grid line.
const ALIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cube {
    dim: usize,
    center: Point,
    side: f64,
}

impl Cube {
    pub fn new(dim: usize, center: Point, side: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidCube(format!("dim must be 1 or 2, got {dim}")));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::InvalidCube(format!(
                "side must be positive, got {side}"
            )));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidCube("center must be finite".into()));
        }
        let center = if dim == 1 { [center[0], 0.0] } else { center };
        Ok(Cube { dim, center, side })
    }

    /// The interval `[lo, hi)`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Cube::new(1, [(lo + hi) / 2.0, 0.0], hi - lo)
    }

    /// The square with lower-left corner `lo`.
    pub fn square(lo: Point, side: f64) -> Result<Self> {
        Cube::new(2, [lo[0] + side / 2.0, lo[1] + side / 2.0], side)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn measure(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.center[axis] - self.side / 2.0
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.center[axis] + self.side / 2.0
    }

    /// Half-open membership: `lo <= x < hi` on every axis.
    pub fn contains(&self, x: &Point) -> bool {
        (0..self.dim).all(|a| x[a] >= self.lo(a) && x[a] < self.hi(a))
    }

    /// Closed containment of `other`, with a relative slack for rounding.
    pub fn contains_cube(&self, other: &Cube) -> bool {
        let tol = ALIGN_TOL * self.side.max(other.side);
        (0..self.dim).all(|a| other.lo(a) >= self.lo(a) - tol && other.hi(a) <= self.hi(a) + tol)
    }

    /// True when the open interiors do not meet.
    pub fn disjoint(&self, other: &Cube) -> bool {
        let tol = ALIGN_TOL * self.side.max(other.side);
        (0..self.dim).any(|a| other.lo(a) >= self.hi(a) - tol || other.hi(a) <= self.lo(a) + tol)
    }

    /// Same side, center moved by `scale * h`.
    pub fn translate(&self, h: &Point, scale: f64) -> Cube {
        let mut center = self.center;
        for a in 0..self.dim {
            center[a] += scale * h[a];
        }
        Cube { center, ..*self }
    }

    /// Concentric cube with side `lambda * side`.
    pub fn dilate(&self, lambda: f64) -> Result<Cube> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dilation factor must be positive, got {lambda}"
            )));
        }
        Ok(Cube {
            side: self.side * lambda,
            ..*self
        })
    }

    /// Smallest cube with the same center containing both cubes.
    pub fn hull_with(&self, other: &Cube) -> Cube {
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for a in 0..self.dim {
            lo[a] = self.lo(a).min(other.lo(a));
            hi[a] = self.hi(a).max(other.hi(a));
        }
        let side = (0..self.dim).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        let mut center = [0.0; 2];
        for a in 0..self.dim {
            center[a] = lo[a] + side / 2.0;
        }
        Cube {
            dim: self.dim,
            center,
            side,
        }
    }
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 1 {
            write!(f, "[{},{})", self.lo(0), self.hi(0))
        } else {
            write!(
                f,
                "[{},{})x[{},{})",
                self.lo(0),
                self.hi(0),
                self.lo(1),
                self.hi(1)
            )
        }
    }
}

/// All dyadic subcubes of `root` down to `depth`, coarsest level first.
pub fn dyadic_family(root: &Cube, depth: usize) -> Vec<Cube> {
    let mut out = Vec::new();
    for k in 0..=depth {
        let m = 1usize << k;
        let side = root.side / m as f64;
        let ny = if root.dim == 2 { m } else { 1 };
        for j in 0..ny {
            for i in 0..m {
                let mut center = [root.lo(0) + (i as f64 + 0.5) * side, 0.0];
                if root.dim == 2 {
                    center[1] = root.lo(1) + (j as f64 + 0.5) * side;
                }
                out.push(Cube {
                    dim: root.dim,
                    center,
                    side,
                });
            }
        }
    }
    out
}

/// The family together with its translates by half a side along each nonempty
/// axis subset, keeping only translates that stay inside `root`.
pub fn with_half_shifts(family: &[Cube], root: &Cube) -> Vec<Cube> {
    let shifts: &[Point] = if root.dim == 1 {
        &[[0.5, 0.0]]
    } else {
        &[[0.5, 0.0], [0.0, 0.5], [0.5, 0.5]]
    };
    let mut out = family.to_vec();
    for q in family {
        for s in shifts {
            let t = q.translate(s, q.side);
            if root.contains_cube(&t) {
                out.push(t);
            }
        }
    }
    out
}

/// Index box `[lo, hi)` of grid cells, per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellBox {
    pub lo: [usize; 2],
    pub hi: [usize; 2],
}

impl CellBox {
    pub fn count(&self) -> usize {
        (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1])
    }

    /// Flat row-major indices (axis 0 fastest) on a grid with `n` cells per axis.
    pub fn indices(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (self.lo[1]..self.hi[1]).flat_map(move |j| (self.lo[0]..self.hi[0]).map(move |i| j * n + i))
    }
}

/// A function sampled at the cell centers of an `n`-per-axis grid over `domain`.
/// Samples are stored row-major with axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: Cube,
    n: usize,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: Cube, n: usize, samples: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!(
                "resolution must be at least 2, got {n}"
            )));
        }
        let len = n.pow(domain.dim as u32);
        if samples.len() != len {
            return Err(Error::InvalidGrid(format!(
                "expected {len} samples, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("sample {i} is not finite")));
        }
        Ok(GridFunction { domain, n, samples })
    }

    pub fn from_fn(domain: Cube, n: usize, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let len = if n < 2 { 0 } else { n.pow(domain.dim as u32) };
        let width = domain.side / n as f64;
        let samples = (0..len)
            .map(|k| f(&center_of(&domain, n, width, k)))
            .collect();
        GridFunction::new(domain, n, samples)
    }

    pub fn constant(domain: Cube, n: usize, c: f64) -> Result<Self> {
        GridFunction::from_fn(domain, n, |_| c)
    }

    /// Indicator of `q` sampled on the grid (membership of cell centers).
    pub fn indicator(domain: Cube, n: usize, q: &Cube) -> Result<Self> {
        GridFunction::from_fn(domain, n, |x| if q.contains(x) { 1.0 } else { 0.0 })
    }

    pub fn domain(&self) -> &Cube {
        &self.domain
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.domain.dim
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn cell_width(&self) -> f64 {
        self.domain.side / self.n as f64
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_width().powi(self.dim() as i32)
    }

    pub fn cell_diameter(&self) -> f64 {
        self.cell_width() * (self.dim() as f64).sqrt()
    }

    pub fn cell_center(&self, k: usize) -> Point {
        center_of(&self.domain, self.n, self.cell_width(), k)
    }

    pub fn centers(&self) -> Vec<Point> {
        (0..self.len()).map(|k| self.cell_center(k)).collect()
    }

    /// Midpoint rule: sum of samples times the cell measure.
    pub fn integrate(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.cell_measure()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.n == other.n && self.domain == other.domain
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(
            self.domain,
            self.n,
            self.samples.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch(
                "functions live on different grids".into(),
            ));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        GridFunction::new(self.domain, self.n, samples)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction {
            samples: self.samples.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    /// Cells whose centers lie in `q`. Errors if `q` leaves the domain or
    /// holds fewer than two cells per axis.
    pub fn cells_in(&self, q: &Cube) -> Result<CellBox> {
        if q.dim != self.dim() {
            return Err(Error::InvalidCube("cube and grid dimensions differ".into()));
        }
        if !self.domain.contains_cube(q) {
            return Err(Error::OutsideDomain {
                cube: q.to_string(),
                domain: self.domain.to_string(),
            });
        }
        let w = self.cell_width();
        let mut lo = [0usize, 0];
        let mut hi = [1usize, 1];
        for a in 0..self.dim() {
            let first = ((q.lo(a) - self.domain.lo(a)) / w - 0.5 - ALIGN_TOL)
                .ceil()
                .max(0.0) as usize;
            let end = ((q.hi(a) - self.domain.lo(a)) / w - 0.5 - ALIGN_TOL)
                .ceil()
                .max(0.0) as usize;
            lo[a] = first.min(self.n);
            hi[a] = end.min(self.n);
            if hi[a] < lo[a] + 2 {
                return Err(Error::Unresolvable(format!(
                    "{q} covers {} cells along axis {a} of a grid with width {w}",
                    hi[a].saturating_sub(lo[a])
                )));
            }
        }
        Ok(CellBox { lo, hi })
    }

    /// The sub-grid function on `q`; `q` must sit on grid lines.
    pub fn restrict(&self, q: &Cube) -> Result<GridFunction> {
        let cells = self.cells_in(q)?;
        let w = self.cell_width();
        let m = cells.hi[0] - cells.lo[0];
        for a in 0..self.dim() {
            let off = (q.lo(a) - self.domain.lo(a)) / w;
            let span = q.side / w;
            if (off - off.round()).abs() > 1e-6 || (span - m as f64).abs() > 1e-6 {
                return Err(Error::Unresolvable(format!(
                    "{q} is not aligned with the grid lines"
                )));
            }
        }
        let samples = cells.indices(self.n).map(|k| self.samples[k]).collect();
        GridFunction::new(*q, m, samples)
    }

    /// Value of the cell containing `x`, or `None` outside the closed domain.
    pub fn value_at(&self, x: &Point) -> Option<f64> {
        let w = self.cell_width();
        let mut idx = [0usize; 2];
        for a in 0..self.dim() {
            let t = (x[a] - self.domain.lo(a)) / w;
            if t < -ALIGN_TOL || t > self.n as f64 + ALIGN_TOL {
                return None;
            }
            idx[a] = (t.floor().max(0.0) as usize).min(self.n - 1);
        }
        Some(self.samples[idx[1] * self.n + idx[0]])
    }
}

fn center_of(domain: &Cube, n: usize, width: f64, k: usize) -> Point {
    let i = k % n;
    let x = domain.lo(0) + (i as f64 + 0.5) * width;
    if domain.dim == 1 {
        [x, 0.0]
    } else {
        [x, domain.lo(1) + ((k / n) as f64 + 0.5) * width]
    }
}

/// Euclidean distance in the first `dim` coordinates.
pub fn distance(dim: usize, x: &Point, y: &Point) -> f64 {
    if dim == 1 {
        (x[0] - y[0]).abs()
    } else {
        (x[0] - y[0]).hypot(x[1] - y[1])
    }
}
