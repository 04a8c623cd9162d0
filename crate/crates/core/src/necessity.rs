//! Lower bounds for BMO-type norms from commutator norms.
//!
//! For a cube `Q₁` the test pair is `φ = (sgn(b - b_{Q₁}) - avg sgn) χ_{Q₁}` and
//! `ψ = χ_{Q₁}`. Shifting `Q₁` by `ρh` along a cone where `Ω` keeps one sign
//! gives a cube `Q` on which
//!
//! `|Q₁|^{α/n - 1} ∫_{Q₁} |b - b_{Q₁}| <= C̃ (|[b,T]φ(x)| + |[b,T]ψ(x)|)`
//!
//! for every `x ∈ Q`. The kernel bounds on the shifted configuration are exact
//! interval computations: with `x - y = ρ(h + u)`, `|u| <= √n`,
//! `c ρ^{α-n}(|h| + √n)^{α-n} <= K(x - y) <= C ρ^{α-n}(|h| - √n)^{α-n}`.

use rayon::prelude::*;

use crate::commutators::{
    bilinear_commutator_apply, commutator_apply, CommutatorKernel, CommutatorTask,
};
use crate::geometry::{distance, dyadic_family, Cube, GridFunction, Point};
use crate::operators::{
    bilinear_kernel_oscillation, directional_inf_oscillation, kernel_oscillation, lower_upper_cone,
    BilinearFractionalSpec, Cone, KernelSpec, ZMode,
};
use crate::spaces::{norm, MuFunctional, SpaceSpec};
use crate::{Error, Result};

/// Quadrature resolution per axis for the oscillation functionals used by the
/// shift search.
pub const SHIFT_SEARCH_N0_1D: usize = 64;
pub const SHIFT_SEARCH_N0_2D: usize = 24;
pub const SHIFT_SEARCH_N0_BILINEAR: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct TestPair {
    /// `φ` on the grid of `Q₁`.
    pub phi: GridFunction,
    /// `ψ = χ_{Q₁}` on the grid of `Q₁`.
    pub psi: GridFunction,
    pub base_cube: Cube,
    /// `b_{Q₁}`.
    pub b_mean: f64,
}

/// `sgn` with `sgn(0) = 0`.
fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn build_test_pair(b: &GridFunction, q1: &Cube) -> Result<TestPair> {
    let local = b.restrict(q1)?;
    let count = local.len() as f64;
    let b_mean = local.samples().iter().sum::<f64>() / count;
    let signs: Vec<f64> = local.samples().iter().map(|&v| sgn(v - b_mean)).collect();
    let avg = signs.iter().sum::<f64>() / count;
    let phi = GridFunction::new(
        *q1,
        local.resolution(),
        signs.iter().map(|s| s - avg).collect(),
    )?;
    let psi = GridFunction::constant(*q1, local.resolution(), 1.0)?;
    Ok(TestPair {
        phi,
        psi,
        base_cube: *q1,
        b_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shift {
    Linear(Point),
    /// `(h¹, h²)`.
    Bilinear(Point, Point),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftCertificate {
    pub dim: usize,
    pub h: Shift,
    pub cone: Cone,
    /// Lower bound of the main term, `c ((|h|-r)/(|h|+r))^{e}` with
    /// `r = √n` (`√(2n)` bilinear) and `e = n - α` (`2n - α`).
    pub a1: f64,
    /// Quasi-triangle constant of absolute values.
    pub a2: f64,
    /// `c (|h|/(|h|+r))^{e}`.
    pub a3: f64,
    /// `C (|h|/(|h|-r))^{e}`.
    pub a4: f64,
    /// The scale-free bound on the error-to-main-term ratio at the chosen shift.
    pub xi_proxy: f64,
    /// `min{A₁/(2A₄), 1}`, the ratio the argument can absorb.
    pub xi_bound: f64,
    /// `2|h|^{e}/A₁`.
    pub c_tilde: f64,
    /// `λ = 2(|h| + √n)` with `Q₁ ⊂ λQ`.
    pub lambda_containment: f64,
    pub z_mode: ZMode,
    /// Quadrature resolution of the oscillation estimate.
    pub n0: usize,
}

impl ShiftCertificate {
    pub fn h_norm(&self) -> f64 {
        match self.h {
            Shift::Linear(h) => distance(self.dim, &h, &[0.0; 2]),
            Shift::Bilinear(a, b) => {
                let (x, y) = (
                    distance(self.dim, &a, &[0.0; 2]),
                    distance(self.dim, &b, &[0.0; 2]),
                );
                x.hypot(y)
            }
        }
    }

    /// `Q = Q₁ + ρh`, or `Q₁ + ρh^i` for the bilinear slot `i`.
    pub fn shifted_cube(&self, q1: &Cube, slot: usize) -> Cube {
        match self.h {
            Shift::Linear(h) => q1.translate(&h, q1.side()),
            Shift::Bilinear(a, b) => q1.translate(if slot == 2 { &b } else { &a }, q1.side()),
        }
    }

    /// For the bilinear slot `i`, the support cube `Q - ρh^j` of the other argument.
    pub fn companion_cube(&self, q1: &Cube, slot: usize) -> Option<Cube> {
        match self.h {
            Shift::Linear(_) => None,
            Shift::Bilinear(a, b) => {
                let q = self.shifted_cube(q1, slot);
                Some(q.translate(if slot == 2 { &a } else { &b }, -q1.side()))
            }
        }
    }
}

struct Constants {
    a1: f64,
    a3: f64,
    a4: f64,
    c_tilde: f64,
}

fn chain_constants(t: f64, r: f64, e: f64, c: f64, big_c: f64) -> Constants {
    let a1 = c * ((t - r) / (t + r)).powf(e);
    Constants {
        a1,
        a3: c * (t / (t + r)).powf(e),
        a4: big_c * (t / (t - r)).powf(e),
        c_tilde: 2.0 * t.powf(e) / a1,
    }
}

/// Candidate magnitudes `2, 4, 8, ...` up to `h_max`.
fn dyadic_magnitudes(start: f64, h_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = start;
    while t <= h_max * (1.0 + 1e-12) {
        out.push(t);
        t *= 2.0;
    }
    out
}

pub fn find_shift(kernel: &KernelSpec, eps_xi: f64, h_max: f64) -> Result<ShiftCertificate> {
    let n0 = if kernel.dim() == 1 {
        SHIFT_SEARCH_N0_1D
    } else {
        SHIFT_SEARCH_N0_2D
    };
    find_shift_with(kernel, eps_xi, h_max, n0)
}

/// Scans `|h| ∈ {2, 4, 8, ...}` along the central direction of the cone and
/// returns the first shift whose proxy `(1/A₃)(1/|h| + osc/c_Ω)` is at most
/// `eps_xi`. When the sup-norm oscillation is too large at some `|h|`, the
/// `L¹` oscillation minimized over admissible cone directions is tried at the
/// same `|h|`.
pub fn find_shift_with(
    kernel: &KernelSpec,
    eps_xi: f64,
    h_max: f64,
    n0: usize,
) -> Result<ShiftCertificate> {
    if !(eps_xi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps_xi must be positive, got {eps_xi}"
        )));
    }
    let cone = lower_upper_cone(kernel.symbol()).ok_or(Error::KernelFailsCone)?;
    let dim = kernel.dim();
    let n = dim as f64;
    let r = n.sqrt();
    let e = n - kernel.alpha();
    let (c, big_c) = (cone.c_abs(), cone.big_c_abs());
    let mut best_proxy = f64::INFINITY;
    for t in dyadic_magnitudes(2.0, h_max) {
        if t <= r || !cone.admits(dim, t, r) {
            continue;
        }
        let k = chain_constants(t, r, e, c, big_c);
        let h = [t * cone.central[0], t * cone.central[1]];
        let osc = kernel_oscillation(kernel.symbol(), &h, ZMode::Linf, n0)?;
        let mut proxy = (1.0 / t + osc / c) / k.a3;
        let mut chosen = (h, ZMode::Linf);
        if proxy > eps_xi && 1.0 / (t * k.a3) < eps_xi {
            // Directions whose whole (√n/|h|)-neighborhood stays in the arc.
            let slack = cone.half_width - (r / t).asin();
            let c_angle = cone.central[1].atan2(cone.central[0]);
            let dirs: Vec<Point> = cone
                .directions
                .iter()
                .filter(|u| {
                    let d = (u[1].atan2(u[0]) - c_angle + std::f64::consts::PI)
                        .rem_euclid(2.0 * std::f64::consts::PI)
                        - std::f64::consts::PI;
                    dim == 1 || d.abs() <= slack + 1e-12
                })
                .cloned()
                .collect();
            let mut best = (f64::INFINITY, cone.central);
            for u in &dirs {
                let v =
                    directional_inf_oscillation(kernel.symbol(), t, std::slice::from_ref(u), n0)?;
                if v < best.0 {
                    best = (v, *u);
                }
            }
            let p1 = (1.0 / t + best.0 / c) / k.a3;
            if p1 < proxy {
                proxy = p1;
                chosen = ([t * best.1[0], t * best.1[1]], ZMode::L1);
            }
        }
        best_proxy = best_proxy.min(proxy);
        if proxy <= eps_xi {
            return Ok(ShiftCertificate {
                dim,
                h: Shift::Linear(chosen.0),
                cone,
                a1: k.a1,
                a2: 1.0,
                a3: k.a3,
                a4: k.a4,
                xi_proxy: proxy,
                xi_bound: (k.a1 / (2.0 * k.a4)).min(1.0),
                c_tilde: k.c_tilde,
                lambda_containment: 2.0 * (t + r),
                z_mode: chosen.1,
                n0,
            });
        }
    }
    Err(Error::OscillationDecayNotObserved { h_max, best_proxy })
}

/// Shift search for the bilinear kernel. Candidates are `h = k(2e₁, e₁)`,
/// `k = 2, 4, 8, ...`, so that `|h| ∼ |h¹|` and both companion cubes are
/// grid-aligned and disjoint from the shifted cube. The proxy is
/// `2 · bilinear_kernel_oscillation / A₃` on the unit cube.
pub fn find_bilinear_shift(
    spec: &BilinearFractionalSpec,
    eps_xi: f64,
    h_max: f64,
) -> Result<ShiftCertificate> {
    if !(eps_xi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps_xi must be positive, got {eps_xi}"
        )));
    }
    let dim = spec.dim();
    let n = dim as f64;
    let r = (2.0 * n).sqrt();
    let e = 2.0 * n - spec.alpha();
    let q0 = Cube::new(dim, [0.0; 2], 1.0)?;
    let mut best_proxy = f64::INFINITY;
    let mut k = 2.0;
    while k * 5f64.sqrt() <= h_max * (1.0 + 1e-12) {
        let (h1, h2) = ([2.0 * k, 0.0], [k, 0.0]);
        let t = k * 5f64.sqrt();
        let c = chain_constants(t, r, e, 1.0, 1.0);
        let osc = bilinear_kernel_oscillation(spec, &(h1, h2), &q0, SHIFT_SEARCH_N0_BILINEAR)?;
        let proxy = 2.0 * osc / c.a3;
        best_proxy = best_proxy.min(proxy);
        if proxy <= eps_xi {
            let dir = [2.0 / 5f64.sqrt(), 1.0 / 5f64.sqrt()];
            return Ok(ShiftCertificate {
                dim,
                h: Shift::Bilinear(h1, h2),
                cone: Cone {
                    directions: vec![dir],
                    central: dir,
                    half_width: 0.0,
                    lower: 1.0,
                    upper: 1.0,
                },
                a1: c.a1,
                a2: 1.0,
                a3: c.a3,
                a4: c.a4,
                xi_proxy: proxy,
                xi_bound: (c.a1 / (2.0 * c.a4)).min(1.0),
                c_tilde: c.c_tilde,
                lambda_containment: 2.0 * (t + n.sqrt()),
                z_mode: ZMode::Linf,
                n0: SHIFT_SEARCH_N0_BILINEAR,
            });
        }
        k *= 2.0;
    }
    Err(Error::OscillationDecayNotObserved { h_max, best_proxy })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub point: Point,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateOutcome {
    pub pair: TestPair,
    /// The cube `Q` where the inequality is checked.
    pub shifted: Cube,
    /// `|Q₁|^{α/n-1} ∫_{Q₁} |b - b_{Q₁}|`.
    pub lhs: f64,
    /// Grid over `Q` at the resolution of `b`; its cell centers are the checked points.
    pub window: GridFunction,
    pub comm_phi: Vec<f64>,
    pub comm_psi: Vec<f64>,
    pub violations: Vec<Violation>,
    /// Largest observed ratio `|∫b̃K| |∫Kφ| / (|∫K| |∫b̃Kφ|)` over the checked points.
    pub max_xi: f64,
    pub exclusion: f64,
}

/// Grid over `q` at the cell width of `b`, after checking `b` covers it.
fn window_on(b: &GridFunction, q: &Cube) -> Result<GridFunction> {
    if !b.domain().contains_cube(q) {
        return Err(Error::EscapesGrid {
            required: b.domain().hull_with(q).to_string(),
        });
    }
    let m = ((q.side() / b.cell_width()).round() as usize).max(2);
    GridFunction::constant(*q, m, 0.0)
}

fn lhs_of(b: &GridFunction, q1: &Cube, alpha: f64, pair: &TestPair) -> Result<f64> {
    let local = b.restrict(q1)?;
    let total: f64 = local
        .samples()
        .iter()
        .map(|v| (v - pair.b_mean).abs())
        .sum::<f64>()
        * local.cell_measure();
    let n = q1.dim() as f64;
    Ok(q1.measure().powf(alpha / n - 1.0) * total)
}

fn violation_tol(b: &GridFunction, q1: &Cube, alpha: f64) -> f64 {
    let scale = b.samples().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    1e-12 * scale.max(f64::MIN_POSITIVE) * q1.measure().powf(alpha / q1.dim() as f64)
}

pub fn pointwise_certificate(
    b: &GridFunction,
    q1: &Cube,
    kernel: &KernelSpec,
    cert: &ShiftCertificate,
) -> Result<CertificateOutcome> {
    if !matches!(cert.h, Shift::Linear(_)) || cert.dim != kernel.dim() {
        return Err(Error::InvalidParameter(
            "certificate does not match a linear kernel of this dimension".into(),
        ));
    }
    let pair = build_test_pair(b, q1)?;
    let q = cert.shifted_cube(q1, 1);
    let window = window_on(b, &q)?;
    let points = window.centers();
    let task = CommutatorTask::linear(b.clone(), kernel.clone());
    let cp = commutator_apply(&task, &pair.phi, &points)?;
    let cs = commutator_apply(&task, &pair.psi, &points)?;
    let lhs = lhs_of(b, q1, kernel.alpha(), &pair)?;
    let tol = violation_tol(b, q1, kernel.alpha());
    let violations = points
        .iter()
        .zip(cp.values.iter().zip(&cs.values))
        .filter_map(|(x, (p, s))| {
            let rhs = cert.c_tilde * (p.abs() + s.abs());
            (lhs > rhs + tol).then_some(Violation {
                point: *x,
                lhs,
                rhs,
            })
        })
        .collect();
    let max_xi = observed_xi(b, kernel, &pair, &points);
    Ok(CertificateOutcome {
        pair,
        shifted: q,
        lhs,
        window,
        comm_phi: cp.values,
        comm_psi: cs.values,
        violations,
        max_xi,
        exclusion: cp.exclusion,
    })
}

fn observed_xi(b: &GridFunction, kernel: &KernelSpec, pair: &TestPair, points: &[Point]) -> f64 {
    let local = b
        .restrict(&pair.base_cube)
        .expect("restricted when the pair was built");
    let cells: Vec<(Point, f64, f64)> = (0..local.len())
        .map(|j| {
            (
                local.cell_center(j),
                local.samples()[j] - pair.b_mean,
                pair.phi.samples()[j],
            )
        })
        .collect();
    points
        .par_iter()
        .map(|x| {
            let (mut k0, mut kb, mut kp, mut kbp) = (0.0, 0.0, 0.0, 0.0);
            for (y, bt, ph) in &cells {
                let kv = kernel.eval(&[x[0] - y[0], x[1] - y[1]]);
                k0 += kv;
                kb += kv * bt;
                kp += kv * ph;
                kbp += kv * bt * ph;
            }
            if kbp == 0.0 || k0 == 0.0 {
                0.0
            } else {
                (kb * kp / (k0 * kbp)).abs()
            }
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearCertificateOutcome {
    pub pair: TestPair,
    /// Indicator of the companion cube `Q - ρh^j`.
    pub companion: GridFunction,
    pub shifted: Cube,
    pub lhs: f64,
    pub window: GridFunction,
    pub comm_phi: Vec<f64>,
    pub comm_psi: Vec<f64>,
    pub violations: Vec<Violation>,
}

/// The bilinear pointwise inequality for slot `i`: `b` acts on the argument
/// supported on `Q₁`, the other argument is `χ_{Q - ρh^j}`, and `Q = Q₁ + ρh^i`.
pub fn bilinear_pointwise_certificate(
    b: &GridFunction,
    q1: &Cube,
    spec: &BilinearFractionalSpec,
    cert: &ShiftCertificate,
    slot: usize,
) -> Result<BilinearCertificateOutcome> {
    if slot != 1 && slot != 2 {
        return Err(Error::InvalidSlot(slot));
    }
    if !matches!(cert.h, Shift::Bilinear(..)) || cert.dim != spec.dim() {
        return Err(Error::InvalidParameter(
            "certificate does not match a bilinear kernel of this dimension".into(),
        ));
    }
    let pair = build_test_pair(b, q1)?;
    let q = cert.shifted_cube(q1, slot);
    let other = cert.companion_cube(q1, slot).expect("bilinear shift");
    if !other.disjoint(&q) || !q1.disjoint(&q) {
        return Err(Error::Overlap);
    }
    let window = window_on(b, &q)?;
    let points = window.centers();
    let companion = GridFunction::constant(other, pair.psi.resolution(), 1.0)?;
    let task = CommutatorTask::bilinear(b.clone(), *spec, slot);
    let run = |f: &GridFunction| {
        if slot == 1 {
            bilinear_commutator_apply(&task, f, &companion, &points)
        } else {
            bilinear_commutator_apply(&task, &companion, f, &points)
        }
    };
    let cp = run(&pair.phi)?.values;
    let cs = run(&pair.psi)?.values;
    let lhs = lhs_of(b, q1, spec.alpha(), &pair)?;
    let tol = violation_tol(b, q1, spec.alpha());
    let violations = points
        .iter()
        .zip(cp.iter().zip(&cs))
        .filter_map(|(x, (p, s))| {
            let rhs = cert.c_tilde * (p.abs() + s.abs());
            (lhs > rhs + tol).then_some(Violation {
                point: *x,
                lhs,
                rhs,
            })
        })
        .collect();
    Ok(BilinearCertificateOutcome {
        pair,
        companion,
        shifted: q,
        lhs,
        window,
        comm_phi: cp,
        comm_psi: cs,
        violations,
    })
}

/// Where commutator outputs are evaluated for norm estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputWindow {
    pub cube: Cube,
    pub resolution: usize,
}

/// Depth of the dyadic family used for Morrey norms of a grid with `m` cells
/// per axis: at most three levels, and never below two cells per axis.
pub fn morrey_family(cube: &Cube, m: usize) -> Vec<Cube> {
    let max_depth = (m as f64).log2().floor() as usize;
    dyadic_family(cube, max_depth.saturating_sub(1).min(3))
}

pub fn space_norm(f: &GridFunction, spec: &SpaceSpec) -> Result<f64> {
    match spec {
        SpaceSpec::Morrey { .. } => norm(f, spec, Some(&morrey_family(f.domain(), f.resolution()))),
        _ => norm(f, spec, None),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    /// `max ‖[b,T]f‖_Y / ‖f‖_X` over the probes used.
    pub value: f64,
    pub used: usize,
    /// Probes with zero `X` norm, skipped.
    pub skipped_zero_norm: usize,
}

/// Empirical lower bound on the operator norm of the commutator, with outputs
/// evaluated on `window`.
pub fn operator_norm_probe(
    task: &CommutatorTask,
    x: &SpaceSpec,
    y: &SpaceSpec,
    probes: &[GridFunction],
    window: &OutputWindow,
) -> Result<ProbeResult> {
    let out_grid = GridFunction::constant(window.cube, window.resolution, 0.0)?;
    let points = out_grid.centers();
    let mut res = ProbeResult {
        value: 0.0,
        used: 0,
        skipped_zero_norm: 0,
    };
    for f in probes {
        let xn = space_norm(f, x)?;
        if xn == 0.0 {
            res.skipped_zero_norm += 1;
            continue;
        }
        let out = commutator_apply(task, f, &points)?;
        let g = GridFunction::new(window.cube, window.resolution, out.values)?;
        res.value = res.value.max(space_norm(&g, y)? / xn);
        res.used += 1;
    }
    Ok(res)
}

/// Bilinear analogue: `max ‖[b,I]_i(f₁,f₂)‖_Y / (‖f₁‖_{X₁} ‖f₂‖_{X₂})`.
pub fn bilinear_operator_norm_probe(
    task: &CommutatorTask,
    x1: &SpaceSpec,
    x2: &SpaceSpec,
    y: &SpaceSpec,
    probes: &[(GridFunction, GridFunction)],
    window: &OutputWindow,
) -> Result<ProbeResult> {
    let out_grid = GridFunction::constant(window.cube, window.resolution, 0.0)?;
    let points = out_grid.centers();
    let mut res = ProbeResult {
        value: 0.0,
        used: 0,
        skipped_zero_norm: 0,
    };
    for (f1, f2) in probes {
        let xn = space_norm(f1, x1)? * space_norm(f2, x2)?;
        if xn == 0.0 {
            res.skipped_zero_norm += 1;
            continue;
        }
        let out = bilinear_commutator_apply(task, f1, f2, &points)?;
        let g = GridFunction::new(window.cube, window.resolution, out.values)?;
        res.value = res.value.max(space_norm(&g, y)? / xn);
        res.used += 1;
    }
    Ok(res)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeRecord {
    pub cube: Cube,
    pub shifted: Cube,
    /// `μ(Q₁)^{-1} ∫_{Q₁} |b - b_{Q₁}|`.
    pub b_value: f64,
    /// `C̃ K_Y (‖[b,T]φ χ_Q‖_Y + ‖[b,T]ψ χ_Q‖_Y) |Q₁|^{1-α/n} / (μ(Q₁) ‖χ_Q‖_Y)`.
    pub certified_bound: f64,
    /// `3 C̃ K_Y ‖χ_{Q₁}‖_X |Q₁|^{1-α/n} / (μ(Q₁) ‖χ_Q‖_Y)`: `b_value <= factor · ‖[b,T]‖`.
    pub factor: f64,
    pub norm_phi: f64,
    pub norm_psi: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub records: Vec<CubeRecord>,
    /// `max b_value`: a lower estimate of `‖b‖_{BMO_μ}` over the usable cubes.
    pub aggregate: f64,
    /// `max certified_bound`.
    pub certified_aggregate: f64,
    /// Largest test-pair ratio `‖[b,T]f χ_Q‖_Y / ‖f‖_X`, a lower bound on the operator norm.
    pub operator_norm_proxy: f64,
    /// `max factor` over the records.
    pub constant_chain: f64,
    /// Cubes whose shifted window leaves the grid of `b`.
    pub skipped_cubes: usize,
    pub total_violations: usize,
    pub h_norm: f64,
    pub exclusion: f64,
}

impl LowerBoundReport {
    /// `aggregate <= constant_chain · max(probe, internal proxy)`.
    pub fn consistent_with(&self, probe: f64) -> bool {
        self.aggregate <= self.constant_chain * probe.max(self.operator_norm_proxy) * (1.0 + 1e-9)
    }

    pub fn chain_holds(&self) -> bool {
        self.consistent_with(0.0)
    }
}

struct PerCube {
    b_value: f64,
    bound_terms: (f64, f64),
    chi_q_y: f64,
    chi_q1_x: f64,
    ratios: (f64, f64),
    violations: usize,
    shifted: Cube,
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    family: &[Cube],
    per_cube: Vec<Option<PerCube>>,
    cert: &ShiftCertificate,
    alpha: f64,
    k_y: f64,
    x_scale: f64,
    exclusion: f64,
    mu: &MuFunctional,
) -> Result<LowerBoundReport> {
    let mut rep = LowerBoundReport {
        records: Vec::new(),
        aggregate: 0.0,
        certified_aggregate: 0.0,
        operator_norm_proxy: 0.0,
        constant_chain: 0.0,
        skipped_cubes: 0,
        total_violations: 0,
        h_norm: cert.h_norm(),
        exclusion,
    };
    for (q1, pc) in family.iter().zip(per_cube) {
        let Some(pc) = pc else {
            rep.skipped_cubes += 1;
            continue;
        };
        let n = q1.dim() as f64;
        let m = mu.eval(q1)?;
        let scale = q1.measure().powf(1.0 - alpha / n) / (m * pc.chi_q_y);
        let certified_bound = cert.c_tilde * k_y * (pc.bound_terms.0 + pc.bound_terms.1) * scale;
        let factor = x_scale * cert.c_tilde * k_y * pc.chi_q1_x * scale;
        rep.aggregate = rep.aggregate.max(pc.b_value);
        rep.certified_aggregate = rep.certified_aggregate.max(certified_bound);
        rep.operator_norm_proxy = rep.operator_norm_proxy.max(pc.ratios.0).max(pc.ratios.1);
        rep.constant_chain = rep.constant_chain.max(factor);
        rep.total_violations += pc.violations;
        rep.records.push(CubeRecord {
            cube: *q1,
            shifted: pc.shifted,
            b_value: pc.b_value,
            certified_bound,
            factor,
            norm_phi: pc.bound_terms.0,
            norm_psi: pc.bound_terms.1,
            violations: pc.violations,
        });
    }
    Ok(rep)
}

fn escapes(e: &Error) -> bool {
    matches!(e, Error::EscapesGrid { .. } | Error::OutsideDomain { .. })
}

/// Runs the pointwise certificate on every cube of the family and turns it
/// into the norm chain `B <= certified_bound <= factor · ‖[b,T]‖_{X→Y}`.
pub fn bmo_lower_bound(
    b: &GridFunction,
    task: &CommutatorTask,
    x: &SpaceSpec,
    y: &SpaceSpec,
    mu: &MuFunctional,
    family: &[Cube],
    cert: &ShiftCertificate,
) -> Result<LowerBoundReport> {
    let CommutatorKernel::Linear(kernel) = &task.kernel else {
        return Err(Error::InvalidParameter(
            "use bilinear_bmo_lower_bound for bilinear kernels".into(),
        ));
    };
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut exclusion = 0.0;
    let mut per_cube = Vec::with_capacity(family.len());
    for q1 in family {
        let out = match pointwise_certificate(b, q1, kernel, cert) {
            Ok(o) => o,
            Err(e) if escapes(&e) => {
                per_cube.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        exclusion = out.exclusion;
        let w = &out.window;
        let on_window = |v: &[f64]| GridFunction::new(*w.domain(), w.resolution(), v.to_vec());
        let np = space_norm(&on_window(&out.comm_phi)?, y)?;
        let ns = space_norm(&on_window(&out.comm_psi)?, y)?;
        let chi_q_y = space_norm(&w.map(|_| 1.0)?, y)?;
        let chi_q1_x = space_norm(&out.pair.psi, x)?;
        let phi_x = space_norm(&out.pair.phi, x)?;
        let b_value = crate::spaces::mean_oscillation(b, q1)? * q1.measure() / mu.eval(q1)?;
        per_cube.push(Some(PerCube {
            b_value,
            bound_terms: (np, ns),
            chi_q_y,
            chi_q1_x,
            ratios: (if phi_x > 0.0 { np / phi_x } else { 0.0 }, ns / chi_q1_x),
            violations: out.violations.len(),
            shifted: out.shifted,
        }));
    }
    assemble(
        family,
        per_cube,
        cert,
        kernel.alpha(),
        y.quasi_triangle_constant(),
        3.0,
        exclusion,
        mu,
    )
}

/// Bilinear analogue for slot `i` with `X₁ × X₂ → Y`; the companion argument
/// is `χ_{Q - ρh^j}`.
#[allow(clippy::too_many_arguments)]
pub fn bilinear_bmo_lower_bound(
    b: &GridFunction,
    spec: &BilinearFractionalSpec,
    slot: usize,
    x1: &SpaceSpec,
    x2: &SpaceSpec,
    y: &SpaceSpec,
    mu: &MuFunctional,
    family: &[Cube],
    cert: &ShiftCertificate,
) -> Result<LowerBoundReport> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let (x_own, x_other) = if slot == 2 { (x2, x1) } else { (x1, x2) };
    let mut per_cube = Vec::with_capacity(family.len());
    for q1 in family {
        let out = match bilinear_pointwise_certificate(b, q1, spec, cert, slot) {
            Ok(o) => o,
            Err(e) if escapes(&e) => {
                per_cube.push(None);
                continue;
            }
            Err(e) => return Err(e),
        };
        let w = &out.window;
        let on_window = |v: &[f64]| GridFunction::new(*w.domain(), w.resolution(), v.to_vec());
        let np = space_norm(&on_window(&out.comm_phi)?, y)?;
        let ns = space_norm(&on_window(&out.comm_psi)?, y)?;
        let chi_q_y = space_norm(&w.map(|_| 1.0)?, y)?;
        let other = space_norm(&out.companion, x_other)?;
        let chi_q1_x = space_norm(&out.pair.psi, x_own)? * other;
        let phi_x = space_norm(&out.pair.phi, x_own)? * other;
        let b_value = crate::spaces::mean_oscillation(b, q1)? * q1.measure() / mu.eval(q1)?;
        per_cube.push(Some(PerCube {
            b_value,
            bound_terms: (np, ns),
            chi_q_y,
            chi_q1_x,
            ratios: (if phi_x > 0.0 { np / phi_x } else { 0.0 }, ns / chi_q1_x),
            violations: out.violations.len(),
            shifted: out.shifted,
        }));
    }
    assemble(
        family,
        per_cube,
        cert,
        spec.alpha(),
        y.quasi_triangle_constant(),
        3.0,
        0.0,
        mu,
    )
}
