//! Scenario pipelines. Each one builds `b`, the kernel and the spaces from a
//! validated config and records what it computes as report rows; a failing
//! module call ends the pipeline with an error row naming the stage.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use workbench::commutators::{commutator_apply, CommutatorTask};
use workbench::embeddings::{
    indicator_norm_check, lorentz_product_check, lorentz_product_constant, morrey_product_check,
    MORREY_PRODUCT_CONSTANT,
};
use workbench::geometry::{dyadic_family, with_half_shifts, Cube, GridFunction};
use workbench::necessity::{
    bilinear_bmo_lower_bound, bilinear_operator_norm_probe, bmo_lower_bound, find_bilinear_shift,
    find_shift, operator_norm_probe, pointwise_certificate, LowerBoundReport, OutputWindow,
    ShiftCertificate, SHIFT_SEARCH_N0_1D, SHIFT_SEARCH_N0_2D,
};
use workbench::operators::{
    check_first_moments, check_mean_zero, kernel_oscillation, lower_upper_cone,
    BilinearFractionalSpec, KernelSpec, ZMode,
};
use workbench::spaces::{
    bmo_mu_norm, lipschitz_seminorm, norm, orlicz_weak_ratio, MuFunctional, SpaceSpec,
};
use workbench::weights::{ap_constant, bloom_inequality_check, Weight};
use workbench::Error;

use crate::config::{random_steps, Resolved, ScenarioConfig, ScenarioId, WeightSelector};
use crate::report::ReportRow;
use crate::HarnessError;

/// Random pairs per product check in the embeddings scenario.
pub const EMBEDDING_PAIRS: usize = 200;
/// Exponents `k` of the level grid `λ = 2^k · median|[b,T]f|`.
pub const LAMBDA_EXPONENTS: std::ops::RangeInclusive<i32> = -6..=6;
/// Deepest dyadic level used for probe functions.
const PROBE_DEPTH_1D: usize = 4;
const PROBE_DEPTH_2D: usize = 2;
/// Cells per axis of the output window used by operator-norm probes.
const WINDOW_CAP_1D: usize = 1024;
const WINDOW_CAP_2D: usize = 32;
/// Cells per axis of each bilinear probe function.
const BILINEAR_PROBE_1D: usize = 64;
const BILINEAR_PROBE_2D: usize = 8;

struct StageError {
    stage: &'static str,
    error: Error,
}

trait AtStage<T> {
    fn at(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T> AtStage<T> for workbench::Result<T> {
    fn at(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

type Staged = Result<(), StageError>;

struct Rows {
    scenario: String,
    resolution: usize,
    seed: u64,
    rows: Vec<ReportRow>,
}

impl Rows {
    fn new(scenario: &str, cfg: &ScenarioConfig) -> Self {
        Rows {
            scenario: scenario.to_string(),
            resolution: cfg.resolution,
            seed: cfg.seed,
            rows: Vec::new(),
        }
    }

    fn push(
        &mut self,
        item: impl Into<String>,
        quantity: impl Into<String>,
        value: f64,
        notes: impl Into<String>,
    ) {
        self.rows.push(ReportRow {
            scenario: self.scenario.clone(),
            item: item.into(),
            quantity: quantity.into(),
            value,
            resolution: self.resolution,
            seed: self.seed,
            notes: notes.into(),
        });
    }

    fn finish(mut self, outcome: Staged) -> Vec<ReportRow> {
        if let Err(e) = outcome {
            self.push(
                format!("stage:{}", e.stage),
                "error",
                f64::NAN,
                e.error.to_string(),
            );
        }
        self.rows
    }
}

/// `num/den`, or zero flagged as degenerate when either side vanishes.
fn headline(rows: &mut Rows, item: &str, quantity: &str, num: f64, den: f64) {
    if num == 0.0 || den == 0.0 {
        rows.push(item, quantity, 0.0, "degenerate");
    } else {
        rows.push(item, quantity, num / den, "");
    }
}

fn flag(v: bool) -> f64 {
    if v {
        1.0
    } else {
        0.0
    }
}

fn run_rows(
    label: &str,
    cfg: &ScenarioConfig,
    body: impl FnOnce(&mut Rows) -> Staged,
) -> Vec<ReportRow> {
    let mut rows = Rows::new(label, cfg);
    let outcome = body(&mut rows);
    rows.finish(outcome)
}

/// Runs the scenario named in the config. Config errors are returned;
/// numerical failures end the row list with an error row.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<ReportRow>, HarnessError> {
    let r = cfg.validate()?;
    let setup = match cfg.scenario {
        ScenarioId::Cor4_2 => Some(linear_setup_cor4_2(cfg, &r)?),
        ScenarioId::Cor4_8 => Some(linear_setup_cor4_8(cfg, &r)?),
        ScenarioId::Cor4_15 => Some(LinearSetup {
            kernel: cfg.kernel_spec()?,
            x: SpaceSpec::Lebesgue { p: r.p },
            y: SpaceSpec::Lebesgue { p: r.p },
            extra_y: vec![("weak", SpaceSpec::WeakLebesgue { p: r.p })],
            mu: MuFunctional::LipBeta(1.0),
        }),
        ScenarioId::Cor4_17 => Some(linear_setup_cor4_17(cfg, &r)?),
        ScenarioId::Cor4_19 => Some(LinearSetup {
            kernel: cfg.kernel_spec()?,
            x: SpaceSpec::Morrey {
                p: r.p,
                lambda: r.lambda,
            },
            y: SpaceSpec::Morrey {
                p: r.q,
                lambda: r.nu,
            },
            extra_y: Vec::new(),
            mu: MuFunctional::LipBeta(r.beta),
        }),
        ScenarioId::Cor4_21 => Some(LinearSetup {
            kernel: cfg.kernel_spec()?,
            x: SpaceSpec::Morrey {
                p: r.p,
                lambda: r.lambda,
            },
            y: SpaceSpec::Morrey {
                p: r.p,
                lambda: r.lambda,
            },
            extra_y: Vec::new(),
            mu: MuFunctional::LipBeta(r.beta),
        }),
        _ => None,
    };
    let label = cfg.scenario.as_str();
    let rows = match cfg.scenario {
        ScenarioId::Cor4_7 => {
            let kernel = cfg.kernel_spec()?;
            let omega = cfg.weight(&cfg.weights.omega)?;
            run_rows(label, cfg, |rows| {
                weak_type_pipeline(rows, cfg, &kernel, &omega)
            })
        }
        ScenarioId::Cor4_12 => {
            let spec = BilinearFractionalSpec::new(cfg.dim, cfg.kernel.alpha)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            run_rows(label, cfg, |rows| bilinear_pipeline(rows, cfg, &spec, &r))
        }
        ScenarioId::KernelAdmit => {
            let kernel = cfg.kernel_spec()?;
            run_rows(label, cfg, |rows| kernel_admit_pipeline(rows, cfg, &kernel))
        }
        ScenarioId::Embeddings => run_rows(label, cfg, |rows| embeddings_pipeline(rows, cfg, &r)),
        _ => {
            let setup = setup.expect("norm-equivalence scenario");
            run_rows(label, cfg, |rows| {
                if cfg.scenario == ScenarioId::Cor4_17 {
                    rows.push("forward_direction", "status", 0.0, "probed, not certified");
                }
                linear_pipeline(rows, cfg, &setup)?;
                if cfg.scenario == ScenarioId::Cor4_8 {
                    bloom_rows(rows, cfg, &r)?;
                }
                Ok(())
            })
        }
    };
    Ok(rows)
}

struct LinearSetup {
    kernel: KernelSpec,
    x: SpaceSpec,
    y: SpaceSpec,
    /// Further target spaces for the probe, named by suffix.
    extra_y: Vec<(&'static str, SpaceSpec)>,
    mu: MuFunctional,
}

fn linear_setup_cor4_2(cfg: &ScenarioConfig, r: &Resolved) -> Result<LinearSetup, HarnessError> {
    Ok(LinearSetup {
        kernel: cfg.kernel_spec()?,
        x: SpaceSpec::Lebesgue { p: r.p },
        y: SpaceSpec::Lebesgue { p: r.q },
        extra_y: vec![("weak", SpaceSpec::WeakLebesgue { p: r.q })],
        mu: MuFunctional::LebesgueMeasure,
    })
}

/// `L^p(w)`, which for the unit weight is plain `L^p`.
fn weighted_lebesgue(p: f64, sel: &WeightSelector, w: Weight) -> SpaceSpec {
    match sel {
        WeightSelector::Unit => SpaceSpec::Lebesgue { p },
        WeightSelector::Power { .. } => SpaceSpec::WeightedLebesgue { p, weight: w },
    }
}

fn power_exponent(sel: &WeightSelector) -> f64 {
    match sel {
        WeightSelector::Unit => 0.0,
        WeightSelector::Power { exponent } => *exponent,
    }
}

fn linear_setup_cor4_8(cfg: &ScenarioConfig, r: &Resolved) -> Result<LinearSetup, HarnessError> {
    let (ws, ls) = (&cfg.weights.omega, &cfg.weights.lambda);
    let omega = cfg.weight(ws)?;
    let lam = cfg.weight(ls)?;
    // μ = (ω/λ)^{1/p}; two unit weights give the Lebesgue measure.
    let mu_exp = (power_exponent(ws) - power_exponent(ls)) / r.p;
    let mu = if matches!((ws, ls), (WeightSelector::Unit, WeightSelector::Unit)) {
        MuFunctional::LebesgueMeasure
    } else {
        MuFunctional::Weighted(cfg.weight(&WeightSelector::Power { exponent: mu_exp })?)
    };
    Ok(LinearSetup {
        kernel: cfg.kernel_spec()?,
        x: weighted_lebesgue(r.p, ws, omega),
        y: weighted_lebesgue(r.p, ls, lam),
        extra_y: Vec::new(),
        mu,
    })
}

fn linear_setup_cor4_17(cfg: &ScenarioConfig, r: &Resolved) -> Result<LinearSetup, HarnessError> {
    let ws = &cfg.weights.omega;
    let omega = cfg.weight(ws)?;
    let n = cfg.dim as f64;
    // Target weight ω^{1-(1-α/n)q}.
    let s = 1.0 - (1.0 - cfg.kernel.alpha / n) * r.q;
    let target_sel = match ws {
        WeightSelector::Unit => WeightSelector::Unit,
        WeightSelector::Power { exponent } => WeightSelector::Power {
            exponent: exponent * s,
        },
    };
    let target = cfg.weight(&target_sel)?;
    let mu = match ws {
        WeightSelector::Unit => MuFunctional::LipBeta(r.beta),
        WeightSelector::Power { .. } => MuFunctional::WeightedLip(r.beta, omega.clone()),
    };
    Ok(LinearSetup {
        kernel: cfg.kernel_spec()?,
        x: weighted_lebesgue(r.p, ws, omega),
        y: weighted_lebesgue(r.q, &target_sel, target),
        extra_y: Vec::new(),
        mu,
    })
}

fn window_of(cfg: &ScenarioConfig) -> OutputWindow {
    let cap = if cfg.dim == 1 {
        WINDOW_CAP_1D
    } else {
        WINDOW_CAP_2D
    };
    OutputWindow {
        cube: cfg.root(),
        resolution: cfg.resolution.min(cap),
    }
}

/// Cells per axis of `q` at the cell width of a grid over `root` with `n` cells.
fn cells_for(q: &Cube, root: &Cube, n: usize) -> usize {
    ((n as f64 * q.side() / root.side()).round() as usize).max(2)
}

/// `+1` on the lower half of `q` along the first axis, `-1` on the upper half.
fn haar(q: &Cube, m: usize) -> workbench::Result<GridFunction> {
    let mid = q.center()[0];
    GridFunction::from_fn(*q, m, |x| if x[0] < mid { 1.0 } else { -1.0 })
}

/// Indicators and Haar functions of the dyadic cubes of the root, at the cell
/// width of `b`.
fn linear_probes(cfg: &ScenarioConfig) -> workbench::Result<Vec<GridFunction>> {
    let root = cfg.root();
    let depth = cfg.depth.min(if cfg.dim == 1 {
        PROBE_DEPTH_1D
    } else {
        PROBE_DEPTH_2D
    });
    let mut out = Vec::new();
    for q in dyadic_family(&root, depth) {
        let m = cells_for(&q, &root, cfg.resolution);
        out.push(GridFunction::constant(q, m, 1.0)?);
        out.push(haar(&q, m)?);
    }
    Ok(out)
}

fn shift_rows(rows: &mut Rows, cert: &ShiftCertificate) {
    let note = format!("h={:?}; z_mode={:?}; n0={}", cert.h, cert.z_mode, cert.n0);
    rows.push("shift", "h_norm", cert.h_norm(), note);
    rows.push("shift", "c_tilde", cert.c_tilde, "");
    rows.push("shift", "a1", cert.a1, "");
    rows.push("shift", "a3", cert.a3, "");
    rows.push("shift", "a4", cert.a4, "");
    rows.push("shift", "xi_proxy", cert.xi_proxy, "");
    rows.push("shift", "xi_bound", cert.xi_bound, "");
}

fn lower_bound_rows(rows: &mut Rows, prefix: &str, rep: &LowerBoundReport) {
    let item = format!("{prefix}lower_bound");
    let note = format!("h_norm={}; exclusion={}", rep.h_norm, rep.exclusion);
    rows.push(&item, "aggregate", rep.aggregate, note);
    rows.push(&item, "certified_aggregate", rep.certified_aggregate, "");
    rows.push(
        &item,
        "operator_norm_proxy",
        rep.operator_norm_proxy,
        "largest test-pair ratio",
    );
    rows.push(&item, "constant_chain", rep.constant_chain, "");
    rows.push(&item, "chain_holds", flag(rep.chain_holds()), "");
    rows.push(&item, "violations", rep.total_violations as f64, "");
    rows.push(
        &item,
        "skipped_cubes",
        rep.skipped_cubes as f64,
        "shifted window leaves the grid of b",
    );
    for rec in &rep.records {
        let cube = format!("{prefix}cube:{}", rec.cube);
        rows.push(
            &cube,
            "b_value",
            rec.b_value,
            format!("shifted={}", rec.shifted),
        );
        rows.push(
            &cube,
            "certified_bound",
            rec.certified_bound,
            format!("violations={}", rec.violations),
        );
    }
}

fn linear_pipeline(rows: &mut Rows, cfg: &ScenarioConfig, s: &LinearSetup) -> Staged {
    let b = cfg.build_b().expect("validated config");
    let root = cfg.root();
    let family = dyadic_family(&root, cfg.depth);
    let direct = bmo_mu_norm(&b, &s.mu, &with_half_shifts(&family, &root)).at("bmo_mu_norm")?;
    rows.push(
        "b",
        "bmo_mu_direct",
        direct,
        "dyadic family with half-step translates",
    );
    let cert = find_shift(&s.kernel, cfg.eps_xi, cfg.h_max).at("find_shift")?;
    shift_rows(rows, &cert);
    let task = CommutatorTask::linear(b.clone(), s.kernel.clone());
    let rep =
        bmo_lower_bound(&b, &task, &s.x, &s.y, &s.mu, &family, &cert).at("bmo_lower_bound")?;
    lower_bound_rows(rows, "", &rep);
    let probes = linear_probes(cfg).at("probes")?;
    let window = window_of(cfg);
    let note = |used: usize, skipped: usize| {
        format!(
            "probes={used}; zero_norm={skipped}; window={} cells={}",
            window.cube, window.resolution
        )
    };
    let probe =
        operator_norm_probe(&task, &s.x, &s.y, &probes, &window).at("operator_norm_probe")?;
    rows.push(
        "probe",
        "operator_norm",
        probe.value,
        note(probe.used, probe.skipped_zero_norm),
    );
    for (name, y) in &s.extra_y {
        let extra =
            operator_norm_probe(&task, &s.x, y, &probes, &window).at("operator_norm_probe")?;
        rows.push(
            "probe",
            format!("operator_norm_{name}"),
            extra.value,
            note(extra.used, extra.skipped_zero_norm),
        );
    }
    headline(
        rows,
        "headline",
        "lower_over_probe",
        rep.aggregate,
        probe.value,
    );
    headline(rows, "headline", "lower_over_direct", rep.aggregate, direct);
    Ok(())
}

fn bloom_rows(rows: &mut Rows, cfg: &ScenarioConfig, r: &Resolved) -> Staged {
    let omega = cfg.weight(&cfg.weights.omega).expect("validated config");
    let lam = cfg.weight(&cfg.weights.lambda).expect("validated config");
    let family = dyadic_family(&cfg.root(), cfg.depth.min(6));
    rows.push(
        "omega",
        "ap_constant",
        ap_constant(&omega, r.p, &family).at("ap_constant")?,
        "",
    );
    rows.push(
        "lambda",
        "ap_constant",
        ap_constant(&lam, r.p, &family).at("ap_constant")?,
        "",
    );
    let mut worst: f64 = 0.0;
    for q in &family {
        let (lhs, rhs) =
            bloom_inequality_check(&omega, &lam, r.p, q).at("bloom_inequality_check")?;
        worst = worst.max(lhs / rhs);
    }
    rows.push(
        "bloom",
        "max_ratio",
        worst,
        format!("cubes={}", family.len()),
    );
    Ok(())
}

/// Bilinear probes `(f, χ_root)` with `f` an indicator or Haar function of a
/// dyadic cube, on coarse grids.
fn bilinear_probes(cfg: &ScenarioConfig) -> workbench::Result<Vec<(GridFunction, GridFunction)>> {
    let root = cfg.root();
    let m = if cfg.dim == 1 {
        BILINEAR_PROBE_1D
    } else {
        BILINEAR_PROBE_2D
    }
    .min(cfg.resolution);
    let depth = cfg.depth.min(if cfg.dim == 1 { 3 } else { 1 });
    let other = GridFunction::constant(root, m, 1.0)?;
    let mut out = Vec::new();
    for q in dyadic_family(&root, depth) {
        out.push((GridFunction::constant(q, m, 1.0)?, other.clone()));
        out.push((haar(&q, m)?, other.clone()));
    }
    Ok(out)
}

fn bilinear_pipeline(
    rows: &mut Rows,
    cfg: &ScenarioConfig,
    spec: &BilinearFractionalSpec,
    r: &Resolved,
) -> Staged {
    let b = cfg.build_b().expect("validated config");
    let root = cfg.root();
    let family = dyadic_family(&root, cfg.depth);
    let mu = MuFunctional::LebesgueMeasure;
    let direct = bmo_mu_norm(&b, &mu, &with_half_shifts(&family, &root)).at("bmo_mu_norm")?;
    rows.push(
        "b",
        "bmo_mu_direct",
        direct,
        "dyadic family with half-step translates",
    );
    let cert = find_bilinear_shift(spec, cfg.eps_xi, cfg.h_max).at("find_bilinear_shift")?;
    shift_rows(rows, &cert);
    let (x, y) = (
        SpaceSpec::Lebesgue { p: r.p },
        SpaceSpec::Lebesgue { p: r.q },
    );
    let probes = bilinear_probes(cfg).at("probes")?;
    let cap = if cfg.dim == 1 {
        2 * BILINEAR_PROBE_1D
    } else {
        2 * BILINEAR_PROBE_2D
    };
    let window = OutputWindow {
        cube: root,
        resolution: cfg.resolution.min(cap),
    };
    for slot in [1, 2] {
        let prefix = format!("slot{slot}:");
        let rep = bilinear_bmo_lower_bound(&b, spec, slot, &x, &x, &y, &mu, &family, &cert)
            .at("bilinear_bmo_lower_bound")?;
        lower_bound_rows(rows, &prefix, &rep);
        let task = CommutatorTask::bilinear(b.clone(), *spec, slot);
        let probe = bilinear_operator_norm_probe(&task, &x, &x, &y, &probes, &window)
            .at("bilinear_operator_norm_probe")?;
        rows.push(
            format!("{prefix}probe"),
            "operator_norm",
            probe.value,
            format!("probes={}", probe.used),
        );
        headline(
            rows,
            &format!("{prefix}headline"),
            "lower_over_probe",
            rep.aggregate,
            probe.value,
        );
        headline(
            rows,
            &format!("{prefix}headline"),
            "lower_over_direct",
            rep.aggregate,
            direct,
        );
    }
    Ok(())
}

fn median_abs(v: &[f64]) -> f64 {
    let mut a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    a.sort_by(f64::total_cmp);
    a[a.len() / 2]
}

/// Level-set sweep of `ω({|[b,T]f| > λ}) <= A ∫Φ(|f|/λ)ω` for an indicator and
/// a Haar function, over `λ = 2^k · median|[b,T]f|`.
fn weak_type_pipeline(
    rows: &mut Rows,
    cfg: &ScenarioConfig,
    kernel: &KernelSpec,
    omega: &Weight,
) -> Staged {
    let b = cfg.build_b().expect("validated config");
    let root = cfg.root();
    let family = dyadic_family(&root, cfg.depth);
    let direct = bmo_mu_norm(
        &b,
        &MuFunctional::LebesgueMeasure,
        &with_half_shifts(&family, &root),
    )
    .at("bmo_mu_norm")?;
    rows.push(
        "b",
        "bmo_mu_direct",
        direct,
        "dyadic family with half-step translates",
    );
    let out_n = (cfg.resolution / 16).max(2);
    let out_grid = GridFunction::constant(root, out_n, 0.0).at("output grid")?;
    let points = out_grid.centers();
    let half = Cube::new(cfg.dim, [0.25; 2], 0.5).at("probes")?;
    let inputs = [
        (
            "indicator",
            GridFunction::constant(half, cells_for(&half, &root, cfg.resolution), 1.0)
                .at("probes")?,
        ),
        ("haar", haar(&root, cfg.resolution).at("probes")?),
    ];
    let task = CommutatorTask::linear(b, kernel.clone());
    let mut sweep_constant: f64 = 0.0;
    for (name, f) in &inputs {
        let out = commutator_apply(&task, f, &points).at("commutator_apply")?;
        let g = GridFunction::new(root, out_n, out.values).at("commutator_apply")?;
        let med = median_abs(g.samples());
        if med == 0.0 {
            rows.push(format!("f={name}"), "median_abs_output", 0.0, "degenerate");
            continue;
        }
        rows.push(
            format!("f={name}"),
            "median_abs_output",
            med,
            format!("output cells={out_n}; exclusion={}", out.exclusion),
        );
        let mut c: f64 = 0.0;
        for k in LAMBDA_EXPONENTS {
            let lambda = 2f64.powi(k) * med;
            let (lhs, rhs) = orlicz_weak_ratio(&g, f, lambda, omega).at("orlicz_weak_ratio")?;
            let item = format!("f={name};k={k}");
            rows.push(&item, "lambda", lambda, "");
            rows.push(&item, "lhs", lhs, "");
            rows.push(&item, "rhs", rhs, "");
            let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
            rows.push(&item, "ratio", ratio, "");
            c = c.max(ratio);
        }
        rows.push(format!("f={name}"), "sweep_constant", c, "");
        sweep_constant = sweep_constant.max(c);
    }
    rows.push(
        "headline",
        "sweep_constant",
        sweep_constant,
        "max lhs/rhs over inputs and levels",
    );
    Ok(())
}

fn kernel_admit_pipeline(rows: &mut Rows, cfg: &ScenarioConfig, kernel: &KernelSpec) -> Staged {
    let s = kernel.symbol();
    let dim = cfg.dim;
    rows.push("symbol", "mean", check_mean_zero(s), "");
    let m = check_first_moments(s);
    rows.push("symbol", "first_moment_1", m[0], "");
    if dim == 2 {
        rows.push("symbol", "first_moment_2", m[1], "");
    }
    if let Some(l) = s.lipschitz_modulus() {
        rows.push("symbol", "lipschitz_modulus", l, "");
    }
    let cone = lower_upper_cone(s);
    let central = match &cone {
        Some(c) => {
            rows.push("cone", "c_abs", c.c_abs(), "");
            rows.push("cone", "big_c_abs", c.big_c_abs(), "");
            rows.push(
                "cone",
                "half_width",
                c.half_width,
                format!("central={:?}", c.central),
            );
            c.central
        }
        None => {
            rows.push(
                "cone",
                "present",
                0.0,
                "no arc where the symbol keeps one sign",
            );
            [1.0, 0.0]
        }
    };
    let n0 = if dim == 1 {
        SHIFT_SEARCH_N0_1D
    } else {
        SHIFT_SEARCH_N0_2D
    };
    let mut t = 2.0;
    while t <= cfg.h_max {
        if t > (dim as f64).sqrt() {
            let h = [t * central[0], t * central[1]];
            let osc = kernel_oscillation(s, &h, ZMode::Linf, n0).at("kernel_oscillation")?;
            let item = format!("h={t}");
            rows.push(&item, "oscillation_linf", osc, format!("n0={n0}"));
            rows.push(&item, "oscillation_times_h", osc * t, "");
        }
        t *= 2.0;
    }
    match find_shift(kernel, cfg.eps_xi, cfg.h_max) {
        Ok(cert) => {
            shift_rows(rows, &cert);
            rows.push("headline", "admissible", 1.0, "admissible");
        }
        Err(e @ (Error::KernelFailsCone | Error::OscillationDecayNotObserved { .. })) => {
            rows.push(
                "headline",
                "admissible",
                0.0,
                format!("not admissible: {e}"),
            );
        }
        Err(e) => {
            return Err(StageError {
                stage: "find_shift",
                error: e,
            })
        }
    }
    Ok(())
}

fn embeddings_pipeline(rows: &mut Rows, cfg: &ScenarioConfig, r: &Resolved) -> Staged {
    let dim = cfg.dim;
    let m = if dim == 1 {
        cfg.resolution
    } else {
        cfg.resolution.min(64)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let unit = Cube::new(dim, [0.5; 2], 1.0).at("domain")?;
    let family = dyadic_family(&unit, cfg.depth.min(5).min((m as f64).log2() as usize - 1));
    let c_lorentz = lorentz_product_constant(r.p);
    let (mut worst_l, mut worst_m) = (0.0f64, 0.0f64);
    let (mut exceed_l, mut exceed_m) = (0usize, 0usize);
    for _ in 0..EMBEDDING_PAIRS {
        let (f, g) = (
            random_steps(&mut rng, dim, m),
            random_steps(&mut rng, dim, m),
        );
        let (lhs, rhs) = lorentz_product_check(&f, &g, r.p, r.q).at("lorentz_product_check")?;
        if rhs > 0.0 {
            worst_l = worst_l.max(lhs / (c_lorentz * rhs));
        }
        exceed_l += usize::from(lhs > c_lorentz * rhs * (1.0 + 1e-12));
        let (lhs, rhs) =
            morrey_product_check(&f, &g, r.p, r.lambda, &family).at("morrey_product_check")?;
        if rhs > 0.0 {
            worst_m = worst_m.max(lhs / (MORREY_PRODUCT_CONSTANT * rhs));
        }
        exceed_m += usize::from(lhs > MORREY_PRODUCT_CONSTANT * rhs * (1.0 + 1e-12));
    }
    let note = format!("pairs={EMBEDDING_PAIRS}; p={}; q={}", r.p, r.q);
    rows.push("lorentz_product", "constant", c_lorentz, &note);
    rows.push("lorentz_product", "max_lhs_over_bound", worst_l, &note);
    rows.push("lorentz_product", "exceedances", exceed_l as f64, &note);
    let note = format!("pairs={EMBEDDING_PAIRS}; p={}; lambda={}", r.p, r.lambda);
    rows.push("morrey_product", "constant", MORREY_PRODUCT_CONSTANT, &note);
    rows.push("morrey_product", "max_lhs_over_bound", worst_m, &note);
    rows.push("morrey_product", "exceedances", exceed_m as f64, &note);

    let specs = [
        ("lebesgue", SpaceSpec::Lebesgue { p: r.p }, true),
        ("weak", SpaceSpec::WeakLebesgue { p: r.p }, false),
        ("lorentz", SpaceSpec::Lorentz { p: r.p, q: r.q }, false),
        (
            "morrey",
            SpaceSpec::Morrey {
                p: r.p,
                lambda: r.lambda,
            },
            true,
        ),
    ];
    let (mut worst_exact, mut worst_other) = (0.0f64, 0.0f64);
    for side in [0.5, 1.0, 4.0] {
        let q = Cube::new(dim, [side / 2.0; 2], side).at("indicator cube")?;
        for (name, spec, exact) in &specs {
            let (computed, expected) = indicator_norm_check(spec, &q).at("indicator_norm_check")?;
            let rel = (computed / expected - 1.0).abs();
            rows.push(
                format!("indicator:{name};side={side}"),
                "relative_error",
                rel,
                format!("computed={computed}"),
            );
            if *exact {
                worst_exact = worst_exact.max(rel);
            } else {
                worst_other = worst_other.max(rel);
            }
        }
    }
    rows.push(
        "headline",
        "product_exceedances",
        (exceed_l + exceed_m) as f64,
        "",
    );
    rows.push(
        "headline",
        "indicator_exact_max_rel_error",
        worst_exact,
        "Lebesgue and Morrey",
    );
    rows.push(
        "headline",
        "indicator_max_rel_error",
        worst_other,
        "weak and Lorentz",
    );
    Ok(())
}

/// Norms of `b`: Lebesgue and weak `L^p` (default `p = 2`), `BMO`, and with
/// `beta` the `Lip_β` quantities both ways.
pub fn run_norms(cfg: &ScenarioConfig) -> Result<Vec<ReportRow>, HarnessError> {
    cfg.validate_grid()?;
    let p = cfg.p.unwrap_or(2.0);
    Ok(run_rows("norms", cfg, |rows| {
        let b = cfg.build_b().expect("validated config");
        let root = cfg.root();
        let family = with_half_shifts(&dyadic_family(&root, cfg.depth), &root);
        rows.push(
            "b",
            "lebesgue",
            norm(&b, &SpaceSpec::Lebesgue { p }, None).at("norm")?,
            format!("p={p}"),
        );
        rows.push(
            "b",
            "weak_lebesgue",
            norm(&b, &SpaceSpec::WeakLebesgue { p }, None).at("norm")?,
            format!("p={p}"),
        );
        rows.push(
            "b",
            "bmo",
            bmo_mu_norm(&b, &MuFunctional::LebesgueMeasure, &family).at("bmo_mu_norm")?,
            "",
        );
        if let Some(beta) = cfg.beta {
            let v = bmo_mu_norm(&b, &MuFunctional::LipBeta(beta), &family).at("bmo_mu_norm")?;
            rows.push("b", "lip_beta_bmo", v, format!("beta={beta}"));
            rows.push(
                "b",
                "lipschitz_seminorm",
                lipschitz_seminorm(&b, beta).at("lipschitz_seminorm")?,
                format!("beta={beta}"),
            );
        }
        Ok(())
    }))
}

/// The shift search and the pointwise certificate on every dyadic cube whose
/// shifted window stays on the grid of `b`.
pub fn run_certify(cfg: &ScenarioConfig) -> Result<Vec<ReportRow>, HarnessError> {
    cfg.validate_grid()?;
    let kernel = cfg.kernel_spec()?;
    Ok(run_rows("certify", cfg, |rows| {
        let b = cfg.build_b().expect("validated config");
        let cert = find_shift(&kernel, cfg.eps_xi, cfg.h_max).at("find_shift")?;
        shift_rows(rows, &cert);
        let (mut skipped, mut violations) = (0usize, 0usize);
        for q1 in dyadic_family(&cfg.root(), cfg.depth) {
            let out = match pointwise_certificate(&b, &q1, &kernel, &cert) {
                Ok(o) => o,
                Err(Error::EscapesGrid { .. } | Error::OutsideDomain { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => {
                    return Err(StageError {
                        stage: "pointwise_certificate",
                        error: e,
                    })
                }
            };
            let min_rhs = out
                .comm_phi
                .iter()
                .zip(&out.comm_psi)
                .map(|(a, s)| cert.c_tilde * (a.abs() + s.abs()))
                .fold(f64::INFINITY, f64::min);
            let item = format!("cube:{}", q1);
            rows.push(&item, "lhs", out.lhs, format!("shifted={}", out.shifted));
            rows.push(
                &item,
                "min_rhs",
                min_rhs,
                format!("exclusion={}", out.exclusion),
            );
            rows.push(&item, "max_xi", out.max_xi, "");
            rows.push(&item, "violations", out.violations.len() as f64, "");
            violations += out.violations.len();
        }
        rows.push("certificate", "skipped_cubes", skipped as f64, "");
        rows.push("certificate", "violations", violations as f64, "");
        Ok(())
    }))
}

/// The kernel admissibility sweep.
pub fn run_oscillation(cfg: &ScenarioConfig) -> Result<Vec<ReportRow>, HarnessError> {
    cfg.validate_grid()?;
    let kernel = cfg.kernel_spec()?;
    Ok(run_rows("oscillation", cfg, |rows| {
        kernel_admit_pipeline(rows, cfg, &kernel)
    }))
}

/// Operator-norm probe of `[b, T_α]` from `L^p` to `L^q`, `1/q = 1/p - α/n`.
pub fn run_probe(cfg: &ScenarioConfig) -> Result<Vec<ReportRow>, HarnessError> {
    cfg.validate_grid()?;
    let kernel = cfg.kernel_spec()?;
    let p = cfg.p.unwrap_or(2.0);
    let inv = 1.0 / p - cfg.kernel.alpha / cfg.dim as f64;
    if !(p > 1.0 && inv > 0.0) {
        return Err(HarnessError::Config(format!(
            "probe needs p > 1 and 1/p - alpha/n > 0, got p = {p}"
        )));
    }
    Ok(run_rows("probe", cfg, |rows| {
        let b = cfg.build_b().expect("validated config");
        let task = CommutatorTask::linear(b, kernel);
        let probes = linear_probes(cfg).at("probes")?;
        let window = window_of(cfg);
        let (x, y) = (
            SpaceSpec::Lebesgue { p },
            SpaceSpec::Lebesgue { p: 1.0 / inv },
        );
        let res = operator_norm_probe(&task, &x, &y, &probes, &window).at("operator_norm_probe")?;
        rows.push(
            "probe",
            "operator_norm",
            res.value,
            format!("p={p}; q={}; probes={}", 1.0 / inv, res.used),
        );
        Ok(())
    }))
}
