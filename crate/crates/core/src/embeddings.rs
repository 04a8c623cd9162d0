//! Product embeddings `L^{1,1} · L^{p,q} ⊂ L^{p̃,q̃}` and `M^{p,λ} · L¹ ⊂ M^{p̃,λ̃}`,
//! and the indicator norms they rest on.

use crate::geometry::{dyadic_family, Cube, GridFunction};
use crate::spaces::{norm, SpaceSpec};
use crate::{Error, Result};

/// Grid resolution per axis for `indicator_norm_check`.
pub const INDICATOR_RESOLUTION: usize = 1 << 10;

/// `1/r̃ = 1 + 1/r`.
pub fn tilde_exponent(r: f64) -> f64 {
    1.0 / (1.0 + 1.0 / r)
}

/// The constant in `‖fg‖_{p̃,q̃} <= C ‖f‖_{1,1} ‖g‖_{p,q}`. From
/// `(fg)*(t) <= f*(t/2) g*(t/2)` and Hölder in `L^q(dt/t)` with exponents
/// `1/q̃` and `q/q̃`, `C = 2^{1+1/p}` for every `q`.
pub fn lorentz_product_constant(p: f64) -> f64 {
    2f64.powf(1.0 + 1.0 / p)
}

/// Hölder on each cube gives the Morrey product bound with constant one.
pub const MORREY_PRODUCT_CONSTANT: f64 = 1.0;

pub fn lorentz_product_check(
    f: &GridFunction,
    g: &GridFunction,
    p: f64,
    q: f64,
) -> Result<(f64, f64)> {
    let fg = f.zip_with(g, |a, b| a * b)?;
    let lhs = norm(
        &fg,
        &SpaceSpec::Lorentz {
            p: tilde_exponent(p),
            q: tilde_exponent(q),
        },
        None,
    )?;
    let rhs = norm(f, &SpaceSpec::Lorentz { p: 1.0, q: 1.0 }, None)?
        * norm(g, &SpaceSpec::Lorentz { p, q }, None)?;
    Ok((lhs, rhs))
}

pub fn morrey_product_check(
    f: &GridFunction,
    g: &GridFunction,
    p: f64,
    lam: f64,
    family: &[Cube],
) -> Result<(f64, f64)> {
    let n = f.dim() as f64;
    let outer = SpaceSpec::Morrey { p, lambda: lam };
    outer.validate(f.dim())?;
    let inner = SpaceSpec::Morrey {
        p: tilde_exponent(p),
        lambda: lam - n,
    };
    let fg = f.zip_with(g, |a, b| a * b)?;
    let lhs = norm(&fg, &inner, Some(family))?;
    let rhs = norm(f, &outer, Some(family))? * norm(g, &SpaceSpec::Lebesgue { p: 1.0 }, None)?;
    Ok((lhs, rhs))
}

/// `‖χ_Q‖` computed on a `2^10`-per-axis grid over `Q`, against the closed
/// form: `|Q|^{1/p}` (Lebesgue, weak), `(p/q)^{1/q}|Q|^{1/p}` (Lorentz),
/// `|Q|^{-λ/n}` (Morrey, over the dyadic family of `Q` to depth 3).
pub fn indicator_norm_check(spec: &SpaceSpec, q: &Cube) -> Result<(f64, f64)> {
    let n = q.dim() as f64;
    let chi = GridFunction::constant(*q, INDICATOR_RESOLUTION, 1.0)?;
    let m = q.measure();
    match spec {
        SpaceSpec::Lebesgue { p } | SpaceSpec::WeakLebesgue { p } => {
            Ok((norm(&chi, spec, None)?, m.powf(1.0 / p)))
        }
        SpaceSpec::Lorentz { p, q: r } => {
            let c = if r.is_infinite() {
                1.0
            } else {
                (p / r).powf(1.0 / r)
            };
            Ok((norm(&chi, spec, None)?, c * m.powf(1.0 / p)))
        }
        SpaceSpec::Morrey { lambda, .. } => {
            let family = dyadic_family(q, 3);
            Ok((norm(&chi, spec, Some(&family))?, m.powf(-lambda / n)))
        }
        SpaceSpec::WeightedLebesgue { .. } => Err(Error::InvalidParameter(
            "indicator_norm_check covers unweighted spaces only".into(),
        )),
    }
}
