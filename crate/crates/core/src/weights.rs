//! Weights, their integrals over cubes, and Muckenhoupt / doubling constants
//! estimated as maxima over finite cube families.

use crate::geometry::{distance, Cube, GridFunction, Point};
use crate::{Error, Result};

/// Midpoint sub-grid per axis for integrals of two-dimensional power weights.
const POWER_2D_SUBGRID: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    /// `|x - center|^exponent`, with `exponent > -dim`.
    Power {
        dim: usize,
        exponent: f64,
        center: Point,
    },
    /// Strictly positive samples on a grid.
    Sampled(GridFunction),
}

impl Weight {
    pub fn power(dim: usize, exponent: f64, center: Point) -> Result<Weight> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!(
                "dim must be 1 or 2, got {dim}"
            )));
        }
        if !(exponent > -(dim as f64)) || !exponent.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power weight exponent {exponent} is not locally integrable in dimension {dim}"
            )));
        }
        Ok(Weight::Power {
            dim,
            exponent,
            center,
        })
    }

    pub fn unit(dim: usize) -> Weight {
        Weight::Power {
            dim,
            exponent: 0.0,
            center: [0.0; 2],
        }
    }

    pub fn sampled(g: GridFunction) -> Result<Weight> {
        if let Some(i) = g.samples().iter().position(|&v| !(v > 0.0)) {
            return Err(Error::NonPositiveWeight(i));
        }
        Ok(Weight::Sampled(g))
    }

    pub fn dim(&self) -> usize {
        match self {
            Weight::Power { dim, .. } => *dim,
            Weight::Sampled(g) => g.dim(),
        }
    }

    /// Pointwise value; `None` outside the grid of a sampled weight.
    pub fn eval(&self, x: &Point) -> Option<f64> {
        match self {
            Weight::Power {
                dim,
                exponent,
                center,
            } => Some(power_value(*dim, *exponent, center, x)),
            Weight::Sampled(g) => g.value_at(x),
        }
    }

    /// The weight raised to the power `s`, which may produce a weight that is
    /// not locally integrable; integrals then report infinity.
    pub fn powf(&self, s: f64) -> Weight {
        match self {
            Weight::Power {
                dim,
                exponent,
                center,
            } => Weight::Power {
                dim: *dim,
                exponent: exponent * s,
                center: *center,
            },
            Weight::Sampled(g) => {
                Weight::Sampled(g.map(|v| v.powf(s)).expect("positive samples stay finite"))
            }
        }
    }

    /// `∫_q w`.
    pub fn integral(&self, q: &Cube) -> Result<f64> {
        self.power_integral(q, 1.0)
    }

    /// `∫_q w^s`. Power weights use the closed form in dimension one and a
    /// fixed midpoint sub-grid in dimension two; sampled weights use their cells.
    pub fn power_integral(&self, q: &Cube, s: f64) -> Result<f64> {
        match self {
            Weight::Power {
                dim,
                exponent,
                center,
            } => {
                let e = exponent * s;
                if *dim == 1 {
                    Ok(power_interval_integral(
                        q.lo(0) - center[0],
                        q.hi(0) - center[0],
                        e,
                    ))
                } else {
                    if e <= -2.0 && q.contains(center) {
                        return Ok(f64::INFINITY);
                    }
                    let sub = GridFunction::constant(*q, POWER_2D_SUBGRID, 0.0)?;
                    let total: f64 = (0..sub.len())
                        .map(|k| power_value(2, e, center, &sub.cell_center(k)))
                        .sum();
                    Ok(total * sub.cell_measure())
                }
            }
            Weight::Sampled(g) => {
                let cells = g.cells_in(q)?;
                let total: f64 = cells
                    .indices(g.resolution())
                    .map(|k| g.samples()[k].powf(s))
                    .sum();
                Ok(total * g.cell_measure())
            }
        }
    }

    /// `|q|^{-1} ∫_q w^s`.
    pub fn power_average(&self, q: &Cube, s: f64) -> Result<f64> {
        Ok(self.power_integral(q, s)? / q.measure())
    }

    /// `w`-mass of every cell of an `n`-per-axis grid over `domain`.
    pub fn cell_masses(&self, domain: &Cube, n: usize) -> Result<Vec<f64>> {
        let grid = GridFunction::constant(*domain, n, 0.0)?;
        let w = grid.cell_width();
        match self {
            Weight::Power {
                dim: 1,
                exponent,
                center,
            } => Ok((0..grid.len())
                .map(|k| {
                    let lo = grid.cell_center(k)[0] - w / 2.0 - center[0];
                    power_interval_integral(lo, lo + w, *exponent)
                })
                .collect()),
            Weight::Power {
                exponent, center, ..
            } => Ok((0..grid.len())
                .map(|k| {
                    power_value(2, *exponent, center, &grid.cell_center(k)) * grid.cell_measure()
                })
                .collect()),
            Weight::Sampled(g) if g.same_grid(&grid) => Ok(g
                .samples()
                .iter()
                .map(|v| v * grid.cell_measure())
                .collect()),
            Weight::Sampled(g) => {
                let ratio = w / g.cell_width();
                if (ratio - ratio.round()).abs() > 1e-6 || ratio.round() < 1.0 {
                    return Err(Error::GridMismatch(format!(
                        "weight grid width {} does not divide target width {w}",
                        g.cell_width()
                    )));
                }
                (0..grid.len())
                    .map(|k| {
                        let x = grid.cell_center(k);
                        let cell = Cube::new(grid.dim(), x, w)?;
                        block_integral(g, &cell)
                    })
                    .collect()
            }
        }
    }
}

fn power_value(dim: usize, exponent: f64, center: &Point, x: &Point) -> f64 {
    if exponent == 0.0 {
        return 1.0;
    }
    distance(dim, x, center).powf(exponent)
}

/// `∫_{u0}^{u1} |t|^e dt` in closed form; infinite when `e <= -1` and the
/// closed interval reaches the origin.
pub(crate) fn power_interval_integral(u0: f64, u1: f64, e: f64) -> f64 {
    if e <= -1.0 && u0 <= 0.0 && u1 >= 0.0 {
        return f64::INFINITY;
    }
    if e == -1.0 {
        // The interval avoids the origin, so it has one sign.
        return (u1.abs().ln() - u0.abs().ln()).abs();
    }
    let anti = |u: f64| u.signum() * u.abs().powf(e + 1.0) / (e + 1.0);
    anti(u1) - anti(u0)
}

/// Integral of a sampled weight over a cube whose edges sit on its grid lines;
/// a single cell is allowed.
fn block_integral(g: &GridFunction, q: &Cube) -> Result<f64> {
    let w = g.cell_width();
    let n = g.resolution();
    let mut lo = [0usize; 2];
    let mut hi = [1usize; 2];
    for a in 0..g.dim() {
        let s = (q.lo(a) - g.domain().lo(a)) / w;
        let e = (q.hi(a) - g.domain().lo(a)) / w;
        if s < -1e-6 || e > n as f64 + 1e-6 {
            return Err(Error::OutsideDomain {
                cube: q.to_string(),
                domain: g.domain().to_string(),
            });
        }
        lo[a] = s.round() as usize;
        hi[a] = e.round() as usize;
    }
    let mut total = 0.0;
    for j in lo[1]..hi[1] {
        for i in lo[0]..hi[0] {
            total += g.samples()[j * n + i];
        }
    }
    Ok(total * g.cell_measure())
}

/// `max_Q (avg_Q w)(avg_Q w^{1-p'})^{p-1}` over the family.
pub fn ap_constant(w: &Weight, p: f64, family: &[Cube]) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("A_p needs p > 1, got {p}")));
    }
    check_positive(w)?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let dual = -1.0 / (p - 1.0);
    let mut best: f64 = 0.0;
    for q in family {
        let a = w.power_average(q, 1.0)?;
        let b = w.power_average(q, dual)?;
        best = best.max(a * b.powf(p - 1.0));
    }
    Ok(best)
}

/// `max_Q (avg_Q w^q)^{1/q}(avg_Q w^{-p'})^{1/p'}` over the family.
pub fn apq_constant(w: &Weight, p: f64, q: f64, family: &[Cube]) -> Result<f64> {
    if !(p > 1.0 && p <= q && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "A_(p,q) needs 1 < p <= q < inf, got p={p}, q={q}"
        )));
    }
    check_positive(w)?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let pp = p / (p - 1.0);
    let mut best: f64 = 0.0;
    for c in family {
        let a = w.power_average(c, q)?.powf(1.0 / q);
        let b = w.power_average(c, -pp)?.powf(1.0 / pp);
        best = best.max(a * b);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingEstimate {
    /// `max w(2Q)/w(Q)` over the pairs that fit.
    pub constant: f64,
    pub pairs_used: usize,
    /// Pairs whose doubled cube leaves the sampled domain.
    pub pairs_skipped: usize,
    /// Size of the family the claim is scoped to.
    pub family_size: usize,
}

pub fn doubling_constant(w: &Weight, family: &[Cube]) -> Result<DoublingEstimate> {
    check_positive(w)?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut est = DoublingEstimate {
        constant: 0.0,
        pairs_used: 0,
        pairs_skipped: 0,
        family_size: family.len(),
    };
    for q in family {
        let big = q.dilate(2.0)?;
        if let Weight::Sampled(g) = w {
            if !g.domain().contains_cube(&big) {
                est.pairs_skipped += 1;
                continue;
            }
        }
        est.constant = est.constant.max(w.integral(&big)? / w.integral(q)?);
        est.pairs_used += 1;
    }
    Ok(est)
}

/// Pointwise `Π w_j^{e_j}`. Power weights sharing a center combine exponents;
/// anything else is multiplied on the common grid of the sampled factors.
pub fn product_weight(weights: &[Weight], exponents: &[f64]) -> Result<Weight> {
    if weights.len() != exponents.len() || weights.is_empty() {
        return Err(Error::InvalidParameter(
            "weights and exponents must be nonempty and of equal length".into(),
        ));
    }
    let dim = weights[0].dim();
    if weights.iter().any(|w| w.dim() != dim) {
        return Err(Error::InvalidParameter(
            "weights of different dimensions".into(),
        ));
    }
    if let Weight::Power { center: c0, .. } = &weights[0] {
        let same_center = weights
            .iter()
            .all(|w| matches!(w, Weight::Power { center, .. } if center == c0));
        if same_center {
            let exponent = weights
                .iter()
                .zip(exponents)
                .map(|(w, e)| match w {
                    Weight::Power { exponent, .. } => exponent * e,
                    Weight::Sampled(_) => unreachable!(),
                })
                .sum();
            return Weight::power(dim, exponent, *c0);
        }
    }
    let grid = weights
        .iter()
        .find_map(|w| match w {
            Weight::Sampled(g) => Some(g),
            Weight::Power { .. } => None,
        })
        .ok_or_else(|| {
            Error::GridMismatch("power weights with different centers have no common grid".into())
        })?;
    let mut samples = vec![1.0; grid.len()];
    for (w, &e) in weights.iter().zip(exponents) {
        match w {
            Weight::Sampled(g) if !g.same_grid(grid) => {
                return Err(Error::GridMismatch(
                    "sampled weights on different grids".into(),
                ));
            }
            Weight::Sampled(g) => samples
                .iter_mut()
                .zip(g.samples())
                .for_each(|(s, v)| *s *= v.powf(e)),
            Weight::Power { .. } => {
                for (k, s) in samples.iter_mut().enumerate() {
                    *s *= w.eval(&grid.cell_center(k)).unwrap_or(f64::NAN).powf(e);
                }
            }
        }
    }
    Weight::sampled(GridFunction::new(
        *grid.domain(),
        grid.resolution(),
        samples,
    )?)
}

/// Both sides of `|Q| ω(Q)^{1/p} ≲ λ(Q)^{1/p} ∫_Q (ω/λ)^{1/p}`.
pub fn bloom_inequality_check(
    omega: &Weight,
    lam: &Weight,
    p: f64,
    q: &Cube,
) -> Result<(f64, f64)> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("needs p > 1, got {p}")));
    }
    check_positive(omega)?;
    check_positive(lam)?;
    let ratio = product_weight(&[omega.clone(), lam.clone()], &[1.0 / p, -1.0 / p])?;
    let lhs = q.measure() * omega.integral(q)?.powf(1.0 / p);
    let rhs = lam.integral(q)?.powf(1.0 / p) * ratio.integral(q)?;
    Ok((lhs, rhs))
}

fn check_positive(w: &Weight) -> Result<()> {
    if let Weight::Sampled(g) = w {
        if let Some(i) = g.samples().iter().position(|&v| !(v > 0.0)) {
            return Err(Error::NonPositiveWeight(i));
        }
    }
    Ok(())
}
