//! Homogeneous kernels `Ω(x-y)/|x-y|^{n-α}`, the bilinear fractional integral,
//! and the oscillation functionals that decide whether a kernel admits the
//! commutator lower bound.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::geometry::{distance, Cube, GridFunction, Point};
use crate::{Error, Result};

/// Tolerance for the mean-zero and first-moment conditions, relative to `max|Ω|`.
pub const MOMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    Nearest,
}

/// A function on the unit sphere, extended to `ℝⁿ \ {0}` by degree-zero homogeneity.
#[derive(Debug, Clone, PartialEq)]
pub enum SphereSymbol {
    /// Values at `+1` and `-1`.
    OneDim { plus: f64, minus: f64 },
    /// Values at the angles `2πk/M`, `M >= 8`.
    TwoDim {
        table: Vec<f64>,
        interp: Interpolation,
    },
}

impl SphereSymbol {
    pub fn one_dim(plus: f64, minus: f64) -> Result<Self> {
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::InvalidKernel("symbol values must be finite".into()));
        }
        Ok(SphereSymbol::OneDim { plus, minus })
    }

    pub fn sign() -> Self {
        SphereSymbol::OneDim {
            plus: 1.0,
            minus: -1.0,
        }
    }

    pub fn two_dim(table: Vec<f64>, interp: Interpolation) -> Result<Self> {
        if table.len() < 8 {
            return Err(Error::InvalidKernel(format!(
                "angle table needs at least 8 entries, got {}",
                table.len()
            )));
        }
        if !table.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidKernel("symbol values must be finite".into()));
        }
        Ok(SphereSymbol::TwoDim { table, interp })
    }

    /// Tabulates `f(θ)` at `M` equispaced angles.
    pub fn from_angle_fn(m: usize, interp: Interpolation, f: impl Fn(f64) -> f64) -> Result<Self> {
        SphereSymbol::two_dim(
            (0..m).map(|k| f(2.0 * PI * k as f64 / m as f64)).collect(),
            interp,
        )
    }

    pub fn dim(&self) -> usize {
        match self {
            SphereSymbol::OneDim { .. } => 1,
            SphereSymbol::TwoDim { .. } => 2,
        }
    }

    /// `Ω(x/|x|)`; zero at the origin.
    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            SphereSymbol::OneDim { plus, minus } => {
                if x[0] > 0.0 {
                    *plus
                } else if x[0] < 0.0 {
                    *minus
                } else {
                    0.0
                }
            }
            SphereSymbol::TwoDim { .. } => {
                if x[0] == 0.0 && x[1] == 0.0 {
                    0.0
                } else {
                    self.eval_angle(x[1].atan2(x[0]))
                }
            }
        }
    }

    /// Value at the angle `θ` (dimension two; in dimension one `θ = 0` is `+1`
    /// and `θ = π` is `-1`).
    pub fn eval_angle(&self, theta: f64) -> f64 {
        match self {
            SphereSymbol::OneDim { .. } => self.eval(&[theta.cos(), 0.0]),
            SphereSymbol::TwoDim { table, interp } => {
                let m = table.len();
                let t = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * m as f64;
                match interp {
                    Interpolation::Nearest => table[(t.round() as usize) % m],
                    Interpolation::Linear => {
                        let k = (t.floor() as usize) % m;
                        let frac = t - t.floor();
                        table[k] + frac * (table[(k + 1) % m] - table[k])
                    }
                }
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            SphereSymbol::OneDim { plus, minus } => plus.abs().max(minus.abs()),
            SphereSymbol::TwoDim { table, .. } => table.iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }

    /// Lipschitz constant in the angle of the interpolated table; `None` for
    /// nearest-neighbor tables with a jump and for the two-point sphere.
    pub fn lipschitz_modulus(&self) -> Option<f64> {
        match self {
            SphereSymbol::TwoDim { table, interp } => {
                let m = table.len();
                let step = 2.0 * PI / m as f64;
                let jump = (0..m)
                    .map(|k| (table[(k + 1) % m] - table[k]).abs())
                    .fold(0.0, f64::max);
                match interp {
                    Interpolation::Linear => Some(jump / step),
                    Interpolation::Nearest if jump == 0.0 => Some(0.0),
                    Interpolation::Nearest => None,
                }
            }
            SphereSymbol::OneDim { .. } => None,
        }
    }
}

/// Mean of `Ω` over the sphere (trapezoid rule on the table in dimension two).
pub fn check_mean_zero(symbol: &SphereSymbol) -> f64 {
    match symbol {
        SphereSymbol::OneDim { plus, minus } => (plus + minus) / 2.0,
        SphereSymbol::TwoDim { table, .. } => table.iter().sum::<f64>() / table.len() as f64,
    }
}

/// Normalized first moments `avg Ω(x') x'_j`.
pub fn check_first_moments(symbol: &SphereSymbol) -> Point {
    match symbol {
        SphereSymbol::OneDim { plus, minus } => [(plus - minus) / 2.0, 0.0],
        SphereSymbol::TwoDim { table, .. } => {
            let m = table.len() as f64;
            let mut acc = [0.0; 2];
            for (k, v) in table.iter().enumerate() {
                let th = 2.0 * PI * k as f64 / m;
                acc[0] += v * th.cos();
                acc[1] += v * th.sin();
            }
            [acc[0] / m, acc[1] / m]
        }
    }
}

/// `r^e`, using integer powers when the exponent allows it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RadialPower {
    e: f64,
    int: Option<i32>,
}

impl RadialPower {
    pub(crate) fn new(e: f64) -> Self {
        let int = (e == e.round() && e.abs() < 64.0).then_some(e as i32);
        RadialPower { e, int }
    }

    #[inline]
    pub(crate) fn eval(&self, r: f64) -> f64 {
        match self.int {
            Some(i) => r.powi(i),
            None => r.powf(self.e),
        }
    }
}

/// `s^{e/2}` for a squared radius `s`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SquaredPower {
    half: f64,
    twice_int: Option<i32>,
}

impl SquaredPower {
    pub(crate) fn new(half: f64) -> Self {
        let t = 2.0 * half;
        SquaredPower {
            half,
            twice_int: (t == t.round() && t.abs() < 64.0).then_some(t as i32),
        }
    }

    #[inline]
    pub(crate) fn eval(&self, s: f64) -> f64 {
        match self.twice_int {
            Some(i) => s.sqrt().powi(i),
            None => s.powf(self.half),
        }
    }
}

/// `Ω` together with `α ∈ [-1, n)`, defining `T_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    symbol: SphereSymbol,
    alpha: f64,
}

impl KernelSpec {
    pub fn new(symbol: SphereSymbol, alpha: f64) -> Result<Self> {
        let n = symbol.dim() as f64;
        if !(alpha >= -1.0 && alpha < n) {
            return Err(Error::InvalidKernel(format!(
                "alpha {alpha} outside [-1, {n})"
            )));
        }
        let tol = MOMENT_TOL * symbol.max_abs().max(1.0);
        if alpha <= 0.0 && check_mean_zero(&symbol).abs() > tol {
            return Err(Error::InvalidKernel(
                "alpha <= 0 requires a mean-zero symbol".into(),
            ));
        }
        if alpha == -1.0 && check_first_moments(&symbol).iter().any(|m| m.abs() > tol) {
            return Err(Error::InvalidKernel(
                "alpha = -1 requires vanishing first moments".into(),
            ));
        }
        Ok(KernelSpec { symbol, alpha })
    }

    pub fn symbol(&self) -> &SphereSymbol {
        &self.symbol
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.symbol.dim()
    }

    pub(crate) fn radial(&self) -> RadialPower {
        RadialPower::new(self.alpha - self.dim() as f64)
    }

    /// `Ω(v)|v|^{α-n}`, zero at the origin.
    pub fn eval(&self, v: &Point) -> f64 {
        let r = distance(self.dim(), v, &[0.0; 2]);
        if r == 0.0 {
            return 0.0;
        }
        self.symbol.eval(v) * self.radial().eval(r)
    }
}

pub(crate) fn inside_closed(q: &Cube, x: &Point) -> bool {
    (0..q.dim()).all(|a| x[a] >= q.lo(a) && x[a] <= q.hi(a))
}

/// Nonzero cells of `f` as `(center, value * cell measure)`.
pub(crate) fn weighted_cells(f: &GridFunction) -> Vec<(Point, f64)> {
    let cell = f.cell_measure();
    (0..f.len())
        .filter(|&k| f.samples()[k] != 0.0)
        .map(|k| (f.cell_center(k), f.samples()[k] * cell))
        .collect()
}

/// Checks the truncation rule for evaluating a kernel of order `alpha` at `x`
/// against a source on `domain`.
pub(crate) fn check_truncation(
    alpha: f64,
    domain: &Cube,
    diameter: f64,
    x: &Point,
    exclusion: f64,
) -> Result<()> {
    if alpha <= 0.0 && inside_closed(domain, x) {
        if alpha == -1.0 {
            return Err(Error::HypersingularNearField);
        }
        if exclusion < diameter * (1.0 - 1e-12) {
            return Err(Error::PvUnderResolved {
                exclusion,
                diameter,
            });
        }
    }
    Ok(())
}

/// `T_α f` at each point by the midpoint rule over source cells farther than
/// `exclusion` from the point.
pub fn apply_t(
    k: &KernelSpec,
    f: &GridFunction,
    points: &[Point],
    exclusion: f64,
) -> Result<Vec<f64>> {
    if f.dim() != k.dim() {
        return Err(Error::InvalidParameter(
            "kernel and function dimensions differ".into(),
        ));
    }
    for x in points {
        check_truncation(k.alpha, f.domain(), f.cell_diameter(), x, exclusion)?;
    }
    let cells = weighted_cells(f);
    let radial = k.radial();
    let dim = k.dim();
    Ok(points
        .par_iter()
        .map(|x| {
            let mut acc = 0.0;
            for (y, fy) in &cells {
                let v = [x[0] - y[0], x[1] - y[1]];
                let r = distance(dim, &v, &[0.0; 2]);
                if r > exclusion {
                    acc += k.symbol.eval(&v) * radial.eval(r) * fy;
                }
            }
            acc
        })
        .collect())
}

/// An arc (or, in dimension one, a point) of the sphere on which `Ω` keeps
/// one sign and stays away from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    pub directions: Vec<Point>,
    pub central: Point,
    /// Angular half-width of the arc; zero in dimension one.
    pub half_width: f64,
    /// Signed bounds `lower <= Ω <= upper` on the cone, both of one sign.
    pub lower: f64,
    pub upper: f64,
}

impl Cone {
    /// `min |Ω|` on the cone.
    pub fn c_abs(&self) -> f64 {
        self.lower.abs().min(self.upper.abs())
    }

    /// `max |Ω|` on the cone.
    pub fn big_c_abs(&self) -> f64 {
        self.lower.abs().max(self.upper.abs())
    }

    /// Whether every `u + h` with `|u| <= radius` stays in the cone, for `h`
    /// along the central direction.
    pub fn admits(&self, dim: usize, h_norm: f64, radius: f64) -> bool {
        if dim == 1 {
            return h_norm > radius;
        }
        h_norm > radius
            && (self.half_width >= PI || (radius / h_norm).asin() <= self.half_width + 1e-12)
    }
}

/// Default threshold for cone detection as a fraction of `max|Ω|`.
pub const CONE_THRESHOLD: f64 = 0.5;

pub fn lower_upper_cone(symbol: &SphereSymbol) -> Option<Cone> {
    lower_upper_cone_with(symbol, CONE_THRESHOLD)
}

/// Longest arc of table nodes where `Ω` has one sign and `|Ω| >= fraction * max|Ω|`.
pub fn lower_upper_cone_with(symbol: &SphereSymbol, fraction: f64) -> Option<Cone> {
    let top = symbol.max_abs();
    if top == 0.0 {
        return None;
    }
    match symbol {
        SphereSymbol::OneDim { plus, minus } => {
            let (v, dir) = if plus.abs() >= minus.abs() {
                (*plus, [1.0, 0.0])
            } else {
                (*minus, [-1.0, 0.0])
            };
            Some(Cone {
                directions: vec![dir],
                central: dir,
                half_width: 0.0,
                lower: v,
                upper: v,
            })
        }
        SphereSymbol::TwoDim { table, .. } => {
            let m = table.len();
            let tau = fraction * top;
            let step = 2.0 * PI / m as f64;
            let mut best: Option<(usize, usize)> = None;
            for sign in [1.0, -1.0] {
                let good: Vec<bool> = table.iter().map(|v| sign * v >= tau && *v != 0.0).collect();
                if good.iter().all(|&g| g) {
                    best = Some((0, m));
                    break;
                }
                // Runs on the circle: start each run just after a bad node.
                for s in 0..m {
                    if !good[s] || good[(s + m - 1) % m] {
                        continue;
                    }
                    let len = (0..m).take_while(|&j| good[(s + j) % m]).count();
                    if best.is_none_or(|(_, l)| len > l) {
                        best = Some((s, len));
                    }
                }
            }
            let (start, len) = best?;
            let idx: Vec<usize> = (0..len).map(|j| (start + j) % m).collect();
            let values: Vec<f64> = idx.iter().map(|&k| table[k]).collect();
            let lower = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let upper = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let directions = idx
                .iter()
                .map(|&k| {
                    let th = k as f64 * step;
                    [th.cos(), th.sin()]
                })
                .collect();
            let (central, half_width) = if len == m {
                ([1.0, 0.0], PI)
            } else {
                let mid = (start as f64 + (len as f64 - 1.0) / 2.0) * step;
                ([mid.cos(), mid.sin()], (len as f64 - 1.0) / 2.0 * step)
            };
            Some(Cone {
                directions,
                central,
                half_width,
                lower,
                upper,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZMode {
    Linf,
    L1,
}

/// `‖∫_{Q₀} |Ω(x - y + h) - Ω(x + h)| dy‖_{Z(Q₀)}` on an `n0`-per-axis
/// midpoint grid over the unit cube `Q₀` centered at the origin.
pub fn kernel_oscillation(
    symbol: &SphereSymbol,
    h: &Point,
    z_mode: ZMode,
    n0: usize,
) -> Result<f64> {
    let dim = symbol.dim();
    let norm = distance(dim, h, &[0.0; 2]);
    let min = (dim as f64).sqrt();
    if norm <= min {
        return Err(Error::ShiftTooSmall { norm, min });
    }
    let q0 = Cube::new(dim, [0.0; 2], 1.0)?;
    let grid = GridFunction::constant(q0, n0.max(2), 0.0)?;
    let pts = grid.centers();
    let cell = grid.cell_measure();
    let inner: Vec<f64> = pts
        .par_iter()
        .map(|x| {
            let base = symbol.eval(&[x[0] + h[0], x[1] + h[1]]);
            pts.iter()
                .map(|y| (symbol.eval(&[x[0] - y[0] + h[0], x[1] - y[1] + h[1]]) - base).abs())
                .sum::<f64>()
                * cell
        })
        .collect();
    Ok(match z_mode {
        ZMode::Linf => inner.iter().cloned().fold(0.0, f64::max),
        ZMode::L1 => inner.iter().sum::<f64>() * cell,
    })
}

/// The constant `c` in `kernel_oscillation(Linf) <= c L / |h|` for `|h| >= 4`,
/// `L` the angular Lipschitz modulus: the angle between `x + h` and
/// `x - y + h` is at most `(π/2) · 2|y| / |x + h|`.
pub fn oscillation_cap_constant(dim: usize) -> f64 {
    let rn = (dim as f64).sqrt();
    PI / 2.0 * rn / (1.0 - rn / 8.0)
}

/// Points per half-width of the arc used by `lebesgue_point_modulus`.
const CAP_NODES: usize = 256;

/// Normalized average of `|Ω(z') - Ω(x')|` over the spherical cap of chordal
/// radius `r` around `x'`.
pub fn lebesgue_point_modulus(symbol: &SphereSymbol, direction: &Point, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cap radius must lie in (0, 1], got {r}"
        )));
    }
    match symbol {
        // Caps of radius below 2 on the two-point sphere are singletons.
        SphereSymbol::OneDim { .. } => Ok(0.0),
        SphereSymbol::TwoDim { .. } => {
            let th0 = direction[1].atan2(direction[0]);
            let base = symbol.eval_angle(th0);
            let half = 2.0 * (r / 2.0).asin();
            let m = 2 * CAP_NODES;
            let total: f64 = (0..m)
                .map(|k| {
                    let t = -half + (k as f64 + 0.5) * 2.0 * half / m as f64;
                    (symbol.eval_angle(th0 + t) - base).abs()
                })
                .sum();
            Ok(total / m as f64)
        }
    }
}

/// `min` over the directions of the `L¹` kernel oscillation at distance `d`.
pub fn directional_inf_oscillation(
    symbol: &SphereSymbol,
    d: f64,
    directions: &[Point],
    n0: usize,
) -> Result<f64> {
    let min = (symbol.dim() as f64).sqrt();
    if d <= min {
        return Err(Error::ShiftTooSmall { norm: d, min });
    }
    if directions.is_empty() {
        return Err(Error::InvalidParameter("direction set is empty".into()));
    }
    let mut best = f64::INFINITY;
    for u in directions {
        let len = distance(symbol.dim(), u, &[0.0; 2]);
        let h = [d * u[0] / len, d * u[1] / len];
        best = best.min(kernel_oscillation(symbol, &h, ZMode::L1, n0)?);
    }
    Ok(best)
}

/// The radial bilinear kernel `(|x-y₁|² + |x-y₂|²)^{(α-2n)/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearFractionalSpec {
    dim: usize,
    alpha: f64,
    /// Smoothness exponent of the kernel, informational.
    pub smoothness_delta: f64,
}

impl BilinearFractionalSpec {
    pub fn new(dim: usize, alpha: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!(
                "dim must be 1 or 2, got {dim}"
            )));
        }
        if !(alpha > 0.0 && alpha < 2.0 * dim as f64) {
            return Err(Error::InvalidKernel(format!(
                "bilinear alpha {alpha} outside (0, {})",
                2 * dim
            )));
        }
        Ok(BilinearFractionalSpec {
            dim,
            alpha,
            smoothness_delta: 1.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub(crate) fn power(&self) -> SquaredPower {
        SquaredPower::new((self.alpha - 2.0 * self.dim as f64) / 2.0)
    }

    pub fn eval(&self, x: &Point, y1: &Point, y2: &Point) -> f64 {
        let s = sq_dist(self.dim, x, y1) + sq_dist(self.dim, x, y2);
        if s == 0.0 {
            return 0.0;
        }
        self.power().eval(s)
    }
}

#[inline]
pub(crate) fn sq_dist(dim: usize, x: &Point, y: &Point) -> f64 {
    let d0 = x[0] - y[0];
    if dim == 1 {
        d0 * d0
    } else {
        let d1 = x[1] - y[1];
        d0 * d0 + d1 * d1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearOutput {
    pub values: Vec<f64>,
    /// Cell pairs dropped because both were within one cell diameter of the
    /// evaluation point, summed over all points.
    pub excluded_pairs: usize,
}

/// `I_{α,2}(f₁, f₂)` at each point, dropping cell pairs where both source
/// cells are within one cell diameter of the point.
pub fn apply_i2(
    spec: &BilinearFractionalSpec,
    f1: &GridFunction,
    f2: &GridFunction,
    points: &[Point],
) -> Result<BilinearOutput> {
    if f1.dim() != spec.dim || f2.dim() != spec.dim {
        return Err(Error::InvalidParameter(
            "bilinear spec and function dimensions differ".into(),
        ));
    }
    let c1 = weighted_cells(f1);
    let c2 = weighted_cells(f2);
    let (r1, r2) = (f1.cell_diameter(), f2.cell_diameter());
    let power = spec.power();
    let dim = spec.dim;
    let out: Vec<(f64, usize)> = points
        .par_iter()
        .map(|x| {
            let d2: Vec<f64> = c2.iter().map(|(y, _)| sq_dist(dim, x, y)).collect();
            let mut acc = 0.0;
            let mut skipped = 0;
            for (y1, w1) in &c1 {
                let s1 = sq_dist(dim, x, y1);
                let near1 = s1 < r1 * r1;
                let mut inner = 0.0;
                for ((_, w2), &s2) in c2.iter().zip(&d2) {
                    if near1 && s2 < r2 * r2 {
                        skipped += 1;
                        continue;
                    }
                    inner += power.eval(s1 + s2) * w2;
                }
                acc += inner * w1;
            }
            (acc, skipped)
        })
        .collect();
    Ok(BilinearOutput {
        values: out.iter().map(|o| o.0).collect(),
        excluded_pairs: out.iter().map(|o| o.1).sum(),
    })
}

/// `|h|^{2n-α} |Q|^{-α/n} sup_{x∈Q} ∬ |K(x,y,z) - K(x, c_Q - s h¹, z)| dy dz`
/// over `y ∈ Q - s h¹`, `z ∈ Q - s h²`, with `s = |Q|^{1/n}`.
pub fn bilinear_kernel_oscillation(
    spec: &BilinearFractionalSpec,
    h: &(Point, Point),
    q: &Cube,
    n0: usize,
) -> Result<f64> {
    let dim = spec.dim;
    let s = q.side();
    let c1 = q.translate(&h.0, -s);
    let c2 = q.translate(&h.1, -s);
    if !c1.disjoint(q) || !c2.disjoint(q) {
        return Err(Error::Overlap);
    }
    let n0 = n0.max(2);
    let gx = GridFunction::constant(*q, n0, 0.0)?;
    let g1 = GridFunction::constant(c1, n0, 0.0)?;
    let g2 = GridFunction::constant(c2, n0, 0.0)?;
    let (p1, p2) = (g1.centers(), g2.centers());
    let ystar = c1.center();
    let cell2 = g1.cell_measure() * g2.cell_measure();
    let power = spec.power();
    let sup = gx
        .centers()
        .par_iter()
        .map(|x| {
            let s_star = sq_dist(dim, x, &ystar);
            let mut acc = 0.0;
            for z in &p2 {
                let sz = sq_dist(dim, x, z);
                let k_star = power.eval(s_star + sz);
                for y in &p1 {
                    acc += (power.eval(sq_dist(dim, x, y) + sz) - k_star).abs();
                }
            }
            acc * cell2
        })
        .reduce(|| 0.0, f64::max);
    let n = dim as f64;
    let hn = (sq_dist(dim, &h.0, &[0.0; 2]) + sq_dist(dim, &h.1, &[0.0; 2])).sqrt();
    Ok(hn.powf(2.0 * n - spec.alpha) * q.measure().powf(-spec.alpha / n) * sup)
}
