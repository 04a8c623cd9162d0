//! Norms and oscillation functionals on grid functions.
//!
//! Weak and Lorentz quasinorms are computed from the decreasing rearrangement,
//! which for a grid function is a step function: the `dt/t` integral is taken
//! in closed form block by block.

use rayon::prelude::*;

use crate::geometry::{distance, Cube, GridFunction};
use crate::weights::Weight;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceSpec {
    Lebesgue {
        p: f64,
    },
    WeakLebesgue {
        p: f64,
    },
    Lorentz {
        p: f64,
        q: f64,
    },
    /// `sup_Q |Q|^{-λ/n} (avg_Q |f|^p)^{1/p}` with `-n/p <= λ < 0`.
    Morrey {
        p: f64,
        lambda: f64,
    },
    WeightedLebesgue {
        p: f64,
        weight: Weight,
    },
}

impl SpaceSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let exponent = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, inf], got {v}"
                )))
            }
        };
        match self {
            SpaceSpec::Lebesgue { p }
            | SpaceSpec::WeakLebesgue { p }
            | SpaceSpec::WeightedLebesgue { p, .. } => exponent("p", *p),
            SpaceSpec::Lorentz { p, q } => exponent("p", *p).and(exponent("q", *q)),
            SpaceSpec::Morrey { p, lambda } => {
                exponent("p", *p)?;
                let n = dim as f64;
                if *lambda >= -n / p - 1e-12 && *lambda < 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "Morrey lambda {lambda} outside [-{n}/{p}, 0)"
                    )))
                }
            }
        }
    }

    pub fn p(&self) -> f64 {
        match self {
            SpaceSpec::Lebesgue { p }
            | SpaceSpec::WeakLebesgue { p }
            | SpaceSpec::Lorentz { p, .. }
            | SpaceSpec::Morrey { p, .. }
            | SpaceSpec::WeightedLebesgue { p, .. } => *p,
        }
    }

    /// A constant `K` with `‖f + g‖ <= K (‖f‖ + ‖g‖)`.
    pub fn quasi_triangle_constant(&self) -> f64 {
        let concave = |r: f64| {
            if r < 1.0 {
                2f64.powf(1.0 / r - 1.0)
            } else {
                1.0
            }
        };
        match self {
            SpaceSpec::Lebesgue { p }
            | SpaceSpec::Morrey { p, .. }
            | SpaceSpec::WeightedLebesgue { p, .. } => concave(*p),
            SpaceSpec::WeakLebesgue { p } => 2f64.powf(1.0 / p),
            // (f + g)*(t) <= f*(t/2) + g*(t/2), then the triangle constant of L^q(dt/t).
            SpaceSpec::Lorentz { p, q } => 2f64.powf(1.0 / p) * concave(*q),
        }
    }
}

/// `|Q|`, `|Q|^{1+β/n}`, `w(Q)^{1+β/n}` or `w(Q)`.
#[derive(Debug, Clone, PartialEq)]
pub enum MuFunctional {
    LebesgueMeasure,
    LipBeta(f64),
    WeightedLip(f64, Weight),
    Weighted(Weight),
}

impl MuFunctional {
    pub fn eval(&self, q: &Cube) -> Result<f64> {
        let n = q.dim() as f64;
        let v = match self {
            MuFunctional::LebesgueMeasure => q.measure(),
            MuFunctional::LipBeta(beta) => q.measure().powf(1.0 + beta / n),
            MuFunctional::WeightedLip(beta, w) => w.integral(q)?.powf(1.0 + beta / n),
            MuFunctional::Weighted(w) => w.integral(q)?,
        };
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!(
                "mu({q}) = {v} is not a positive real"
            )))
        }
    }
}

/// Step-function form of `f*`: blocks of equal value, values nonincreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangedProfile {
    blocks: Vec<(f64, f64)>,
}

impl RearrangedProfile {
    /// `(value, measure)` pairs.
    pub fn blocks(&self) -> &[(f64, f64)] {
        &self.blocks
    }

    pub fn total_measure(&self) -> f64 {
        self.blocks.iter().map(|b| b.1).sum()
    }

    /// `f*(t)`, zero beyond the total measure.
    pub fn value_at(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, m) in &self.blocks {
            acc += m;
            if t < acc {
                return v;
            }
        }
        0.0
    }

    /// `sup_t t^{1/p} f*(t)`.
    fn weak(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        let mut best: f64 = 0.0;
        for &(v, m) in &self.blocks {
            acc += m;
            best = best.max(v * acc.powf(1.0 / p));
        }
        best
    }

    fn sup(&self) -> f64 {
        self.blocks.first().map_or(0.0, |b| b.0)
    }

    fn lorentz(&self, p: f64, q: f64) -> f64 {
        if q.is_infinite() {
            return if p.is_infinite() {
                self.sup()
            } else {
                self.weak(p)
            };
        }
        if p.is_infinite() {
            return if self.sup() > 0.0 { f64::INFINITY } else { 0.0 };
        }
        let r = q / p;
        let mut prev: f64 = 0.0;
        let mut total = 0.0;
        for &(v, m) in &self.blocks {
            let next = prev + m;
            if v > 0.0 {
                total += v.powf(q) * (next.powf(r) - prev.powf(r)) / r;
            }
            prev = next;
        }
        total.powf(1.0 / q)
    }
}

pub fn decreasing_rearrangement(f: &GridFunction) -> RearrangedProfile {
    let mut values: Vec<f64> = f.samples().iter().map(|v| v.abs()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let cell = f.cell_measure();
    let mut blocks: Vec<(f64, f64)> = Vec::new();
    for v in values {
        match blocks.last_mut() {
            Some(last) if last.0 == v => last.1 += cell,
            _ => blocks.push((v, cell)),
        }
    }
    RearrangedProfile { blocks }
}

pub fn norm(f: &GridFunction, spec: &SpaceSpec, cube_family: Option<&[Cube]>) -> Result<f64> {
    spec.validate(f.dim())?;
    match spec {
        SpaceSpec::Lebesgue { p } => Ok(lebesgue(
            f.samples().iter().map(|v| (v.abs(), f.cell_measure())),
            *p,
        )),
        SpaceSpec::WeightedLebesgue { p, weight } => {
            let masses = weight.cell_masses(f.domain(), f.resolution())?;
            Ok(lebesgue(
                f.samples().iter().map(|v| v.abs()).zip(masses),
                *p,
            ))
        }
        SpaceSpec::WeakLebesgue { p } => {
            let prof = decreasing_rearrangement(f);
            Ok(if p.is_infinite() {
                prof.sup()
            } else {
                prof.weak(*p)
            })
        }
        SpaceSpec::Lorentz { p, q } => Ok(decreasing_rearrangement(f).lorentz(*p, *q)),
        SpaceSpec::Morrey { p, lambda } => {
            let family = match cube_family {
                Some(fam) if !fam.is_empty() => fam,
                _ => return Err(Error::CubeFamilyRequired),
            };
            let n = f.dim() as f64;
            let mut best: f64 = 0.0;
            for q in family {
                let cells = f.cells_in(q)?;
                let local = cells
                    .indices(f.resolution())
                    .map(|k| (f.samples()[k].abs(), 1.0 / cells.count() as f64));
                best = best.max(q.measure().powf(-lambda / n) * lebesgue(local, *p));
            }
            Ok(best)
        }
    }
}

/// `(Σ v^p m)^{1/p}`, or the max of `v` over positive masses when `p = ∞`.
fn lebesgue(values: impl Iterator<Item = (f64, f64)>, p: f64) -> f64 {
    if p.is_infinite() {
        return values
            .filter(|&(_, m)| m > 0.0)
            .map(|(v, _)| v)
            .fold(0.0, f64::max);
    }
    let total: f64 = values
        .map(|(v, m)| if v == 0.0 { 0.0 } else { v.powf(p) * m })
        .sum();
    total.powf(1.0 / p)
}

/// `avg_Q |b - b_Q|` with discrete averages over the cells centered in `Q`.
pub fn mean_oscillation(b: &GridFunction, q: &Cube) -> Result<f64> {
    let cells = b.cells_in(q)?;
    let n = b.resolution();
    let count = cells.count() as f64;
    let mean = cells.indices(n).map(|k| b.samples()[k]).sum::<f64>() / count;
    Ok(cells
        .indices(n)
        .map(|k| (b.samples()[k] - mean).abs())
        .sum::<f64>()
        / count)
}

/// `max_Q μ(Q)^{-1} ∫_Q |b - b_Q|` over the family.
pub fn bmo_mu_norm(b: &GridFunction, mu: &MuFunctional, family: &[Cube]) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let values: Vec<f64> = family
        .par_iter()
        .map(|q| Ok(mean_oscillation(b, q)? * q.measure() / mu.eval(q)?))
        .collect::<Result<_>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Largest number of sample points per axis used by `lipschitz_seminorm`.
pub const LIPSCHITZ_POINTS_1D: usize = 2048;
pub const LIPSCHITZ_POINTS_2D: usize = 45;

/// `max |b(x) - b(y)| / |x - y|^β` over pairs of cell centers taken with a
/// uniform stride, at most 2048 points in dimension one and 45 per axis in
/// dimension two.
pub fn lipschitz_seminorm(b: &GridFunction, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    let n = b.resolution();
    let cap = if b.dim() == 1 {
        LIPSCHITZ_POINTS_1D
    } else {
        LIPSCHITZ_POINTS_2D
    };
    let stride = n.div_ceil(cap);
    let axis: Vec<usize> = (0..n).step_by(stride).collect();
    let idx: Vec<usize> = if b.dim() == 1 {
        axis.clone()
    } else {
        axis.iter()
            .flat_map(|&j| axis.iter().map(move |&i| j * n + i))
            .collect()
    };
    let pts: Vec<_> = idx
        .iter()
        .map(|&k| (b.cell_center(k), b.samples()[k]))
        .collect();
    let best = pts
        .par_iter()
        .enumerate()
        .map(|(a, (x, bx))| {
            pts[a + 1..]
                .iter()
                .map(|(y, by)| (bx - by).abs() / distance(b.dim(), x, y).powf(beta))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// `Φ(t) = t (1 + log⁺ t)`.
pub fn orlicz_phi(t: f64) -> f64 {
    t * (1.0 + t.ln().max(0.0))
}

/// `(ω({|g| > λ}), ∫ Φ(|f|/λ) ω)`.
pub fn orlicz_weak_ratio(
    g: &GridFunction,
    f: &GridFunction,
    lambda: f64,
    omega: &Weight,
) -> Result<(f64, f64)> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let mg = omega.cell_masses(g.domain(), g.resolution())?;
    let lhs = g
        .samples()
        .iter()
        .zip(&mg)
        .filter(|(v, _)| v.abs() > lambda)
        .fold(0.0, |acc, (_, m)| acc + m);
    let mf = omega.cell_masses(f.domain(), f.resolution())?;
    let rhs = f
        .samples()
        .iter()
        .zip(&mf)
        .map(|(v, m)| orlicz_phi(v.abs() / lambda) * m)
        .sum();
    Ok((lhs, rhs))
}
