//! The acceptance criteria, each at its stated tolerance and runtime budget.
//! Prints one pass/fail line per criterion and exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use harness::config::{SymbolSelector, WeightSelector};
use harness::{run_scenario, write_report, ReportRow, ScenarioConfig, ScenarioId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use workbench::commutators::{
    bilinear_commutator_apply, commutator_apply, CommutatorForm, CommutatorTask,
};
use workbench::geometry::{dyadic_family, Cube, GridFunction, Point};
use workbench::necessity::{
    bilinear_pointwise_certificate, build_test_pair, find_bilinear_shift, find_shift,
    pointwise_certificate, Shift,
};
use workbench::operators::{
    kernel_oscillation, lower_upper_cone, oscillation_cap_constant, BilinearFractionalSpec,
    Interpolation, KernelSpec, SphereSymbol, ZMode,
};
use workbench::weights::{ap_constant, bloom_inequality_check, Weight};

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn interval(a: f64, b: f64) -> Cube {
    Cube::interval(a, b).unwrap()
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn value(rows: &[ReportRow], item: &str, quantity: &str) -> Result<f64, String> {
    rows.iter()
        .find(|r| r.item == item && r.quantity == quantity)
        .map(|r| r.value)
        .ok_or_else(|| format!("missing row {item}/{quantity}"))
}

fn scenario(cfg: &ScenarioConfig) -> Result<Vec<ReportRow>, String> {
    let rows = run_scenario(cfg).map_err(|e| e.to_string())?;
    match rows.iter().find(|r| r.is_error()) {
        Some(r) => Err(format!("{}: {}", r.item, r.notes)),
        None => Ok(rows),
    }
}

/// Piecewise constant on `[lo, hi]` with random breakpoints and values.
fn random_piecewise(rng: &mut ChaCha8Rng, dom: Cube, n: usize) -> GridFunction {
    let pieces = rng.gen_range(1..=12usize);
    let mut cuts: Vec<f64> = (1..pieces)
        .map(|_| rng.gen_range(dom.lo(0)..dom.hi(0)))
        .collect();
    cuts.sort_by(f64::total_cmp);
    let values: Vec<f64> = (0..pieces).map(|_| rng.gen_range(-3.0..3.0)).collect();
    GridFunction::from_fn(dom, n, |x| values[cuts.partition_point(|&c| c <= x[0])]).unwrap()
}

/// A random dyadic subcube of `[0, 1]` of side `2^{-k}`, `k <= max_level`.
fn random_dyadic(rng: &mut ChaCha8Rng, max_level: u32) -> Cube {
    let k = rng.gen_range(0..=max_level);
    let m = 1u32 << k;
    let i = rng.gen_range(0..m);
    let s = 1.0 / m as f64;
    interval(i as f64 * s, (i + 1) as f64 * s)
}

fn c1_test_pairs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 1024;
    let w = 1.0 / n as f64;
    let mut worst: f64 = 0.0;
    for trial in 0..500 {
        let samples: Vec<f64> = if trial % 2 == 0 {
            (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect()
        } else {
            // Few distinct values, so that b = b_Q₁ happens on some cells.
            (0..n).map(|_| rng.gen_range(-2..=2) as f64).collect()
        };
        let b = GridFunction::new(interval(0.0, 1.0), n, samples).unwrap();
        let lo = rng.gen_range(0..n - 2);
        let len = rng.gen_range(2..=n - lo);
        let q1 = interval(lo as f64 * w, (lo + len) as f64 * w);
        let pair = build_test_pair(&b, &q1).map_err(|e| e.to_string())?;
        let local = b.restrict(&q1).unwrap();
        let (mut dot, mut abs) = (0.0, 0.0);
        for (bv, p) in local.samples().iter().zip(pair.phi.samples()) {
            check(
                p.abs() <= 2.0,
                format!("trial {trial}: |phi| = {} > 2", p.abs()),
            )?;
            let d = bv - pair.b_mean;
            check(
                d * p >= 0.0,
                format!("trial {trial}: (b - b_Q1) phi = {} < 0", d * p),
            )?;
            dot += d * p * local.cell_measure();
            abs += d.abs() * local.cell_measure();
        }
        check(
            pair.psi.samples().iter().all(|&s| s == 1.0),
            format!("trial {trial}: psi is not the indicator"),
        )?;
        check(
            pair.phi.domain() == &q1,
            format!("trial {trial}: phi not supported on Q1"),
        )?;
        let rel = if abs == 0.0 {
            dot.abs()
        } else {
            (dot - abs).abs() / abs
        };
        worst = worst.max(rel);
        check(
            rel <= 1e-10,
            format!("trial {trial}: integral identity off by {rel:e}"),
        )?;
    }
    Ok(format!(
        "500 pairs, worst relative integral error {worst:.1e}"
    ))
}

fn hilbert() -> KernelSpec {
    KernelSpec::new(SphereSymbol::sign(), 0.0).unwrap()
}

fn c2_certificate() -> Outcome {
    let kernel = hilbert();
    let cert = find_shift(&kernel, 0.5, 64.0).map_err(|e| e.to_string())?;
    let t = cert.h_norm();
    let explicit = 2.0 * t.powf(1.0 - kernel.alpha()) / cert.a1;
    check(
        cert.c_tilde == explicit,
        format!(
            "C~ {} differs from 2|h|^(n-alpha)/A1 = {explicit}",
            cert.c_tilde
        ),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dom = interval(0.0, 8.0);
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for _ in 0..100 {
        let b = random_piecewise(&mut rng, dom, 4096);
        let q1 = random_dyadic(&mut rng, 3);
        let out = pointwise_certificate(&b, &q1, &kernel, &cert).map_err(|e| e.to_string())?;
        violations += out.violations.len();
        if out.lhs > 1e-9 {
            let rhs = out
                .comm_phi
                .iter()
                .zip(&out.comm_psi)
                .map(|(p, s)| cert.c_tilde * (p.abs() + s.abs()));
            min_margin = min_margin.min(rhs.fold(f64::INFINITY, f64::min) / out.lhs);
        }
    }
    check(violations == 0, format!("{violations} violations"))?;
    Ok(format!(
        "100 symbols, |h| = {t}, C~ = {:.4}, min rhs/lhs {min_margin:.3}",
        cert.c_tilde
    ))
}

fn c3_bilinear_certificate() -> Outcome {
    let spec = BilinearFractionalSpec::new(1, 1.0).unwrap();
    let cert = find_bilinear_shift(&spec, 0.5, 64.0).map_err(|e| e.to_string())?;
    let Shift::Bilinear(h1, _) = cert.h else {
        return Err("bilinear shift expected".into());
    };
    // Room for Q₁ ⊂ [0, 1] moved by |h¹| sides either way.
    let reach = h1[0].abs().ceil() + 2.0;
    let dom = interval(-reach, reach);
    let n = (2.0 * reach) as usize * 128;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    for _ in 0..30 {
        let b = random_piecewise(&mut rng, dom, n);
        let q1 = random_dyadic(&mut rng, 2);
        for slot in [1, 2] {
            let out = bilinear_pointwise_certificate(&b, &q1, &spec, &cert, slot)
                .map_err(|e| e.to_string())?;
            violations += out.violations.len();
        }
    }
    check(violations == 0, format!("{violations} violations"))?;
    Ok(format!(
        "30 symbols x 2 slots, h = {:?}, C~ = {:.3}",
        cert.h, cert.c_tilde
    ))
}

fn c4_oscillation_nullity() -> Outcome {
    for h in [2.0, 4.0, 8.0, 16.0] {
        let v = kernel_oscillation(&SphereSymbol::sign(), &[h, 0.0], ZMode::Linf, 64)
            .map_err(|e| e.to_string())?;
        check(v == 0.0, format!("oscillation {v:e} at |h| = {h}"))?;
    }
    Ok("exactly 0 at |h| = 2, 4, 8, 16".into())
}

fn c5_oscillation_decay() -> Outcome {
    let s = SphereSymbol::from_angle_fn(64, Interpolation::Linear, f64::cos).unwrap();
    let cone = lower_upper_cone(&s).ok_or("cos has no admissible cone")?;
    let lip = s
        .lipschitz_modulus()
        .ok_or("linear table must be Lipschitz")?;
    // Fixed before any oscillation is measured.
    let cap = oscillation_cap_constant(2) * lip;
    let osc = |t: f64| {
        kernel_oscillation(
            &s,
            &[t * cone.central[0], t * cone.central[1]],
            ZMode::Linf,
            32,
        )
    };
    let (o16, o32) = (
        osc(16.0).map_err(|e| e.to_string())?,
        osc(32.0).map_err(|e| e.to_string())?,
    );
    check(o16 > 0.0, "oscillation at 16 vanished")?;
    check(
        o32 <= 0.6 * o16,
        format!("ratio {:.3} above 0.6", o32 / o16),
    )?;
    for (t, o) in [(16.0, o16), (32.0, o32)] {
        check(
            o <= cap / t,
            format!("|h| = {t}: {o:e} above C/|h| with C = {cap:.3}"),
        )?;
    }
    Ok(format!(
        "osc32/osc16 = {:.3}, C = {cap:.3}, |h| osc(32) = {:.3}",
        o32 / o16,
        32.0 * o32
    ))
}

fn log_config(n: usize, depth: usize) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(ScenarioId::Cor4_2, 1, n, depth);
    c.p = Some(2.0);
    c.symbol = SymbolSelector::LogAbs;
    c
}

fn c6_lower_bound_consistency() -> Outcome {
    let mut ratios = Vec::new();
    for n in [1 << 14, 1 << 15] {
        let rows = scenario(&log_config(n, 8))?;
        let agg = value(&rows, "lower_bound", "aggregate")?;
        let direct = value(&rows, "b", "bmo_mu_direct")?;
        check(
            agg > 0.0 && direct > 0.0,
            format!("N = {n}: nonpositive values {agg}, {direct}"),
        )?;
        check(
            agg <= direct,
            format!("N = {n}: aggregate {agg} above direct {direct}"),
        )?;
        check(
            value(&rows, "lower_bound", "chain_holds")? == 1.0,
            format!("N = {n}: constant chain fails"),
        )?;
        check(
            value(&rows, "lower_bound", "violations")? == 0.0,
            format!("N = {n}: certificate violations"),
        )?;
        ratios.push(agg / direct);
    }
    let drift = (ratios[1] / ratios[0] - 1.0).abs();
    check(
        drift < 0.25,
        format!("ratio drifts by {drift:.3} under N -> 2N"),
    )?;
    Ok(format!(
        "aggregate/direct = {:.4} -> {:.4}",
        ratios[0], ratios[1]
    ))
}

fn c7_two_sided() -> Outcome {
    let mut seen = Vec::new();
    for n in [1 << 12, 1 << 13] {
        let rows = scenario(&log_config(n, 6))?;
        let probe = value(&rows, "probe", "operator_norm")?;
        check(
            probe > 0.0 && probe.is_finite(),
            format!("N = {n}: probe {probe}"),
        )?;
        let ratio = value(&rows, "lower_bound", "aggregate")? / probe;
        check(
            (1e-3..=1e3).contains(&ratio),
            format!("N = {n}: ratio {ratio:e} outside [1e-3, 1e3]"),
        )?;
        seen.push((probe, ratio));
    }
    Ok(format!(
        "probe {:.3} / {:.3}, lower/probe {:.4} / {:.4}",
        seen[0].0, seen[1].0, seen[0].1, seen[1].1
    ))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn c8_nullity_and_linearity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dom = interval(-2.0, 4.0);
    let src = interval(0.0, 1.0);
    let rand_f = |rng: &mut ChaCha8Rng, m: usize| {
        GridFunction::new(src, m, (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    };
    let pts: Vec<Point> = (0..40).map(|i| [-1.9 + 0.145 * i as f64, 0.0]).collect();
    let fractional = KernelSpec::new(SphereSymbol::one_dim(1.0, 0.4).unwrap(), 0.5).unwrap();
    let c = 7.25;
    let constant = GridFunction::constant(dom, 384, c).unwrap();
    let f = rand_f(&mut rng, 64);
    // Nullity: both forms of the linear commutator, and the bilinear one.
    for form in [CommutatorForm::CombinedKernel, CommutatorForm::Decomposed] {
        let task = CommutatorTask::linear(constant.clone(), fractional.clone()).with_form(form);
        let out = commutator_apply(&task, &f, &pts).map_err(|e| e.to_string())?;
        let tf = workbench::operators::apply_t(&fractional, &f, &pts, out.exclusion)
            .map_err(|e| e.to_string())?;
        let scale = c * max_abs(&tf);
        check(
            max_abs(&out.values) <= 1e-12 * scale,
            format!("{form:?}: {:e} vs scale {scale:e}", max_abs(&out.values)),
        )?;
    }
    let spec = BilinearFractionalSpec::new(1, 1.0).unwrap();
    let g = rand_f(&mut rng, 32);
    let f32_ = rand_f(&mut rng, 32);
    let bil_pts: Vec<Point> = (0..20).map(|i| [-1.9 + 0.29 * i as f64, 0.0]).collect();
    let plain =
        workbench::operators::apply_i2(&spec, &f32_, &g, &bil_pts).map_err(|e| e.to_string())?;
    for slot in [1, 2] {
        let task = CommutatorTask::bilinear(constant.clone(), spec, slot);
        let out =
            bilinear_commutator_apply(&task, &f32_, &g, &bil_pts).map_err(|e| e.to_string())?;
        let scale = c * max_abs(&plain.values);
        check(
            max_abs(&out.values) <= 1e-12 * scale,
            format!("bilinear slot {slot}: {:e}", max_abs(&out.values)),
        )?;
    }
    // Superposition in f with a varying symbol.
    let b = GridFunction::from_fn(dom, 384, |x| (3.0 * x[0]).sin() + x[0] * x[0]).unwrap();
    let (f1, f2, s) = (rand_f(&mut rng, 64), rand_f(&mut rng, 64), -1.75);
    let combo = f1.zip_with(&f2, |a, b| s * a + b).unwrap();
    let mut worst: f64 = 0.0;
    for kernel in [hilbert(), fractional.clone()] {
        let task = CommutatorTask::linear(b.clone(), kernel);
        let run = |f: &GridFunction| {
            commutator_apply(&task, f, &pts)
                .map(|o| o.values)
                .map_err(|e| e.to_string())
        };
        let (a, c1, c2) = (run(&combo)?, run(&f1)?, run(&f2)?);
        let scale = max_abs(&c1).max(max_abs(&c2)) * (1.0 + s.abs());
        let err = a
            .iter()
            .zip(c1.iter().zip(&c2))
            .map(|(a, (x, y))| (a - (s * x + y)).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err / scale);
    }
    let (g1, g2) = (rand_f(&mut rng, 32), rand_f(&mut rng, 32));
    let gsum = g1.zip_with(&g2, |a, b| s * a + b).unwrap();
    for slot in [1, 2] {
        let task = CommutatorTask::bilinear(b.clone(), spec, slot);
        let run = |x: &GridFunction, y: &GridFunction| {
            bilinear_commutator_apply(&task, x, y, &bil_pts)
                .map(|o| o.values)
                .map_err(|e| e.to_string())
        };
        for (a, c1, c2) in [
            (run(&gsum, &g)?, run(&g1, &g)?, run(&g2, &g)?),
            (run(&g, &gsum)?, run(&g, &g1)?, run(&g, &g2)?),
        ] {
            let scale = max_abs(&c1).max(max_abs(&c2)) * (1.0 + s.abs());
            let err = a
                .iter()
                .zip(c1.iter().zip(&c2))
                .map(|(a, (x, y))| (a - (s * x + y)).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err / scale);
        }
    }
    check(worst <= 1e-12, format!("superposition error {worst:e}"))?;
    Ok(format!(
        "constant symbol within 1e-12 of scale; superposition error {worst:.1e}"
    ))
}

fn c9_closed_form() -> Outcome {
    let b = GridFunction::from_fn(interval(0.0, 4.0), 4 * 4096, |x| x[0]).unwrap();
    let f = GridFunction::constant(interval(0.0, 1.0), 4096, 1.0).unwrap();
    let out = commutator_apply(&CommutatorTask::linear(b, hilbert()), &f, &[[2.0, 0.0]])
        .map_err(|e| e.to_string())?;
    let v = out.values[0];
    check((v - 1.0).abs() < 1e-3, format!("value {v}"))?;
    Ok(format!("value {v:.12}"))
}

fn c10_products() -> Outcome {
    let sets: [(usize, f64, Option<f64>, f64); 3] = [
        (1, 2.0, Some(1.0), -0.25),
        (1, 3.0, None, -1.0 / 3.0),
        (2, 2.0, Some(2.0), -0.5),
    ];
    let mut notes = Vec::new();
    for (dim, p, q, lambda) in sets {
        let mut c = ScenarioConfig::new(ScenarioId::Embeddings, dim, 1024, 5);
        c.p = Some(p);
        c.q = q;
        c.lambda = Some(lambda);
        c.seed = 10;
        let rows = scenario(&c)?;
        let tag = format!(
            "dim {dim} p {p} q {:?} lambda {lambda:.3}",
            q.unwrap_or(f64::INFINITY)
        );
        check(
            value(&rows, "headline", "product_exceedances")? == 0.0,
            format!("{tag}: product exceedances"),
        )?;
        let pairs = rows.iter().filter(|r| r.quantity == "exceedances").count();
        check(
            pairs == 2,
            format!("{tag}: expected Lorentz and Morrey checks"),
        )?;
        let other = value(&rows, "headline", "indicator_max_rel_error")?;
        let exact = value(&rows, "headline", "indicator_exact_max_rel_error")?;
        check(other <= 0.02, format!("{tag}: indicator error {other}"))?;
        check(
            exact <= 1e-12,
            format!("{tag}: exact-case indicator error {exact:e}"),
        )?;
        notes.push(format!(
            "{:.3}",
            value(&rows, "lorentz_product", "max_lhs_over_bound")?
        ));
    }
    Ok(format!(
        "3 parameter sets x 200 pairs, 0 exceedances; max Lorentz lhs/(C rhs) {}",
        notes.join(", ")
    ))
}

fn c11_weights() -> Outcome {
    let root = interval(-1.0, 1.0);
    let family = dyadic_family(&root, 6);
    let unit = ap_constant(&Weight::unit(1), 2.0, &family).map_err(|e| e.to_string())?;
    check(unit == 1.0, format!("A_2(1) = {unit}"))?;
    // On [0, r] and [-r, r]: avg |x|^{-1/2} = 2 r^{-1/2}, avg |x|^{1/2} = (2/3) r^{1/2}.
    let oracle = 4.0 / 3.0;
    let w = Weight::power(1, -0.5, [0.0; 2]).unwrap();
    let closed = ap_constant(&w, 2.0, &family).map_err(|e| e.to_string())?;
    check(
        (closed / oracle - 1.0).abs() < 1e-12,
        format!("closed-form A_2 {closed}"),
    )?;
    let sampled =
        Weight::sampled(GridFunction::from_fn(root, 1 << 14, |x| x[0].abs().powf(-0.5)).unwrap())
            .unwrap();
    let est = ap_constant(&sampled, 2.0, &family).map_err(|e| e.to_string())?;
    check(
        est.is_finite() && (est / oracle - 1.0).abs() < 0.05,
        format!("sampled A_2 {est} vs {oracle}"),
    )?;
    let mut worst: f64 = 0.0;
    for q in &family {
        let (lhs, rhs) =
            bloom_inequality_check(&w, &Weight::unit(1), 2.0, q).map_err(|e| e.to_string())?;
        worst = worst.max(lhs / rhs);
    }
    check(
        worst.is_finite() && worst <= 1.1,
        format!("Bloom ratio {worst}"),
    )?;
    Ok(format!(
        "A_2(1) = 1, A_2 sampled {est:.4} vs 4/3, Bloom max ratio {worst:.4}"
    ))
}

fn weak_config(n: usize) -> ScenarioConfig {
    let mut c = ScenarioConfig::new(ScenarioId::Cor4_7, 1, n, 6);
    c.weights.omega = WeightSelector::Power { exponent: -0.5 };
    c.symbol = SymbolSelector::LogAbs;
    c
}

fn c12_orlicz() -> Outcome {
    let mut consts = Vec::new();
    for n in [1 << 14, 1 << 15] {
        let rows = scenario(&weak_config(n))?;
        let c = value(&rows, "headline", "sweep_constant")?;
        let levels = rows.iter().filter(|r| r.quantity == "lambda").count();
        check(
            levels == 26,
            format!("N = {n}: {levels} levels, expected 13 per input"),
        )?;
        for r in rows.iter().filter(|r| r.quantity == "lhs") {
            let rhs = value(&rows, &r.item, "rhs")?;
            check(
                r.value <= c * rhs * (1.0 + 1e-12),
                format!("N = {n}, {}: lhs above C rhs", r.item),
            )?;
        }
        consts.push(c);
    }
    let change = (consts[1] / consts[0] - 1.0).abs();
    check(
        change < 0.5,
        format!("C changes by {change:.3} under N -> 2N"),
    )?;
    Ok(format!("C = {:.4} -> {:.4}", consts[0], consts[1]))
}

fn c13_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("bmo-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_bmo-bench");
    let configs = [
        r#"{"scenario":"cor4_2","resolution":2048,"depth":5,"p":2.0,"symbol":{"kind":"random","seed":13,"pieces":7},"seed":13}"#,
        r#"{"scenario":"cor4_12","resolution":512,"depth":3,"kernel":{"alpha":0.5},"p":3.0,"symbol":{"kind":"random","seed":5,"pieces":6},"seed":5}"#,
        r#"{"scenario":"embeddings","resolution":256,"depth":4,"p":2.0,"q":1.0,"lambda":-0.25,"seed":99}"#,
    ];
    let mut bytes = 0;
    for (i, body) in configs.iter().enumerate() {
        let cfg = dir.join(format!("c{i}.json"));
        std::fs::write(&cfg, body).map_err(|e| e.to_string())?;
        let id = ScenarioConfig::from_json(body)
            .map_err(|e| e.to_string())?
            .scenario
            .as_str();
        let mut outs = Vec::new();
        for k in 0..2 {
            let out = dir.join(format!("c{i}-{k}.csv"));
            let st = Command::new(bin)
                .args(["scenario", "--id", id, "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            check(st.success(), format!("{id}: exit {st}"))?;
            outs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        check(
            outs[0] == outs[1],
            format!("{id}: CSV differs between runs"),
        )?;
        // The library path writes the same bytes as the binary.
        let mut lib = Vec::new();
        write_report(
            &run_scenario(&ScenarioConfig::from_json(body).unwrap()).unwrap(),
            &mut lib,
        )
        .unwrap();
        check(
            lib == outs[0],
            format!("{id}: library and CLI output differ"),
        )?;
        bytes += outs[0].len();
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(format!(
        "3 scenarios byte-identical across runs ({bytes} bytes)"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("test pair invariants", 10, c1_test_pairs),
        ("linear pointwise certificate", 60, c2_certificate),
        (
            "bilinear pointwise certificate",
            120,
            c3_bilinear_certificate,
        ),
        (
            "exact kernel-oscillation nullity",
            1,
            c4_oscillation_nullity,
        ),
        ("oscillation decay rate", 30, c5_oscillation_decay),
        ("lower-bound consistency", 120, c6_lower_bound_consistency),
        ("two-sided sanity", 120, c7_two_sided),
        (
            "commutator nullity and linearity",
            5,
            c8_nullity_and_linearity,
        ),
        ("closed-form commutator value", 1, c9_closed_form),
        ("product embeddings and indicator norms", 60, c10_products),
        ("weights", 30, c11_weights),
        ("Orlicz weak-type sweep", 120, c12_orlicz),
        ("determinism", 120, c13_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let over = took > Duration::from_secs(*budget);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {status}  {name} [{:.2}s / {budget}s]: {detail}",
            i + 1,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of 13 criteria passed", 13 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
