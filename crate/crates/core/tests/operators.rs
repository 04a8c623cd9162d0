use std::f64::consts::PI;

use proptest::prelude::*;
use workbench::geometry::{Cube, GridFunction, Point};
use workbench::operators::*;
use workbench::Error;

fn interval(a: f64, b: f64) -> Cube {
    Cube::interval(a, b).unwrap()
}

fn cos_symbol(m: usize) -> SphereSymbol {
    SphereSymbol::from_angle_fn(m, Interpolation::Linear, f64::cos).unwrap()
}

fn hilbert() -> KernelSpec {
    KernelSpec::new(SphereSymbol::sign(), 0.0).unwrap()
}

#[test]
fn mean_zero_examples() {
    assert_eq!(check_mean_zero(&SphereSymbol::sign()), 0.0);
    assert_eq!(
        check_mean_zero(&SphereSymbol::one_dim(1.0, 1.0).unwrap()),
        1.0
    );
    let one = SphereSymbol::from_angle_fn(32, Interpolation::Linear, |_| 1.0).unwrap();
    assert!((check_mean_zero(&one) - 1.0).abs() < 1e-15);
    assert!(check_mean_zero(&cos_symbol(64)).abs() < 1e-12);
}

#[test]
fn first_moment_examples() {
    assert_eq!(
        check_first_moments(&SphereSymbol::one_dim(1.0, 1.0).unwrap()),
        [0.0, 0.0]
    );
    assert_eq!(check_first_moments(&SphereSymbol::sign())[0], 1.0);
    let c2 = SphereSymbol::from_angle_fn(64, Interpolation::Linear, |t| (2.0 * t).cos()).unwrap();
    let m = check_first_moments(&c2);
    assert!(m[0].abs() < 1e-12 && m[1].abs() < 1e-12);
    // cos θ has first moment (1/2, 0).
    let m = check_first_moments(&cos_symbol(64));
    assert!((m[0] - 0.5).abs() < 1e-12 && m[1].abs() < 1e-12);
}

#[test]
fn kernel_spec_validation() {
    assert!(KernelSpec::new(SphereSymbol::one_dim(1.0, 1.0).unwrap(), 0.0).is_err());
    assert!(KernelSpec::new(SphereSymbol::one_dim(1.0, 1.0).unwrap(), 0.5).is_ok());
    assert!(KernelSpec::new(SphereSymbol::sign(), 1.0).is_err());
    assert!(KernelSpec::new(SphereSymbol::sign(), -1.0).is_err());
    let c2 = SphereSymbol::from_angle_fn(64, Interpolation::Linear, |t| (2.0 * t).cos()).unwrap();
    assert!(KernelSpec::new(c2, -1.0).is_ok());
    assert!(KernelSpec::new(cos_symbol(64), 2.0).is_err());
    assert!(SphereSymbol::two_dim(vec![1.0; 7], Interpolation::Linear).is_err());
}

#[test]
fn hilbert_kernel_on_indicator() {
    // ∫₀¹ dy / (2 - y) = log 2.
    let f = GridFunction::constant(interval(0.0, 1.0), 4096, 1.0).unwrap();
    let v = apply_t(&hilbert(), &f, &[[2.0, 0.0]], 0.0).unwrap();
    assert!((v[0] - 2f64.ln()).abs() < 1e-3);
}

#[test]
fn zero_symbol_gives_zero() {
    let k = KernelSpec::new(SphereSymbol::one_dim(0.0, 0.0).unwrap(), 0.0).unwrap();
    let f = GridFunction::from_fn(interval(0.0, 1.0), 64, |x| x[0].sin() + 2.0).unwrap();
    let pts = [[2.0, 0.0], [-3.0, 0.0], [0.3, 0.0]];
    assert!(apply_t(&k, &f, &pts, 1.0 / 64.0)
        .unwrap()
        .iter()
        .all(|&v| v == 0.0));
}

#[test]
fn far_field_taylor_oracle() {
    let rho = 1.0;
    for (dim, alpha) in [(1, 0.5), (2, 1.0), (2, 0.25)] {
        let (symbol, q) = if dim == 1 {
            (SphereSymbol::one_dim(1.0, 2.0).unwrap(), interval(0.0, rho))
        } else {
            (
                SphereSymbol::from_angle_fn(64, Interpolation::Linear, |t| 2.0 + t.sin()).unwrap(),
                Cube::square([0.0, 0.0], rho).unwrap(),
            )
        };
        let k = KernelSpec::new(symbol.clone(), alpha).unwrap();
        let f = GridFunction::constant(q, 64, 1.0).unwrap();
        let c = q.center();
        for d in [16.0, 40.0] {
            let dir: Point = if dim == 1 { [-1.0, 0.0] } else { [0.6, 0.8] };
            let x = [c[0] + d * dir[0], c[1] + d * dir[1]];
            let v = apply_t(&k, &f, &[x], 0.0).unwrap()[0];
            let expect = q.measure() * symbol.eval(&dir) * d.powf(alpha - dim as f64);
            assert!(
                (v / expect - 1.0).abs() <= 2.0 * rho / d,
                "dim {dim} d {d}: {v} vs {expect}"
            );
        }
    }
}

#[test]
fn truncation_rules() {
    let f = GridFunction::constant(interval(0.0, 1.0), 64, 1.0).unwrap();
    let inside = [[0.5, 0.0]];
    let r = apply_t(&hilbert(), &f, &inside, 0.001);
    assert!(matches!(r, Err(Error::PvUnderResolved { .. })));
    assert!(apply_t(&hilbert(), &f, &inside, 1.0 / 64.0).is_ok());
    let frac = KernelSpec::new(SphereSymbol::one_dim(1.0, 1.0).unwrap(), 0.5).unwrap();
    assert!(apply_t(&frac, &f, &inside, 0.0).is_ok());
    let c2 = SphereSymbol::from_angle_fn(64, Interpolation::Linear, |t| (2.0 * t).cos()).unwrap();
    let hyper = KernelSpec::new(c2, -1.0).unwrap();
    let g = GridFunction::constant(Cube::square([0.0, 0.0], 1.0).unwrap(), 16, 1.0).unwrap();
    assert_eq!(
        apply_t(&hyper, &g, &[[0.5, 0.5]], 1.0),
        Err(Error::HypersingularNearField)
    );
    assert!(apply_t(&hyper, &g, &[[3.0, 0.5]], 0.0).is_ok());
}

#[test]
fn principal_value_of_symmetric_source_vanishes_at_center() {
    let f = GridFunction::constant(interval(-1.0, 1.0), 128, 1.0).unwrap();
    let v = apply_t(&hilbert(), &f, &[[0.0, 0.0]], f.cell_diameter()).unwrap()[0];
    assert!(v.abs() < 1e-12);
}

#[test]
fn cone_examples() {
    let c = lower_upper_cone(&SphereSymbol::sign()).unwrap();
    assert_eq!(c.directions, vec![[1.0, 0.0]]);
    assert_eq!((c.c_abs(), c.big_c_abs()), (1.0, 1.0));
    assert!(lower_upper_cone(&SphereSymbol::one_dim(0.0, 0.0).unwrap()).is_none());
    let zero = SphereSymbol::from_angle_fn(16, Interpolation::Linear, |_| 0.0).unwrap();
    assert!(lower_upper_cone(&zero).is_none());

    let m = 360;
    let step = 2.0 * PI / m as f64;
    let c = lower_upper_cone(&cos_symbol(m)).unwrap();
    assert!((c.half_width - PI / 3.0).abs() <= step);
    assert!(c.lower >= 0.5 && c.lower - 0.5 <= step);
    assert!((c.upper - 1.0).abs() < 1e-12);
    assert!((c.central[0] - 1.0).abs() < 1e-12 && c.central[1].abs() < 1e-12);
}

#[test]
fn cone_finds_negative_lobe() {
    let s = SphereSymbol::from_angle_fn(64, Interpolation::Linear, |t| {
        if t.sin() > 0.0 {
            -2.0 * t.sin()
        } else {
            -0.5 * t.sin()
        }
    })
    .unwrap();
    let c = lower_upper_cone(&s).unwrap();
    assert!(c.upper < 0.0);
    assert!((c.big_c_abs() - 2.0).abs() < 1e-12);
    assert!(c.directions.iter().all(|d| s.eval(d) <= -1.0));
}

#[test]
fn oscillation_of_constant_is_zero() {
    let one = SphereSymbol::from_angle_fn(16, Interpolation::Linear, |_| 3.0).unwrap();
    assert_eq!(
        kernel_oscillation(&one, &[3.0, 0.0], ZMode::Linf, 16).unwrap(),
        0.0
    );
    let c1 = SphereSymbol::one_dim(2.0, 2.0).unwrap();
    assert_eq!(
        kernel_oscillation(&c1, &[2.0, 0.0], ZMode::L1, 64).unwrap(),
        0.0
    );
}

#[test]
fn sign_oscillation_is_exactly_zero() {
    for h in [2.0, 4.0, 8.0, 16.0] {
        for mode in [ZMode::Linf, ZMode::L1] {
            assert_eq!(
                kernel_oscillation(&SphereSymbol::sign(), &[h, 0.0], mode, 128).unwrap(),
                0.0
            );
        }
    }
    assert!(matches!(
        kernel_oscillation(&SphereSymbol::sign(), &[1.0, 0.0], ZMode::Linf, 8),
        Err(Error::ShiftTooSmall { .. })
    ));
}

#[test]
fn cosine_oscillation_halves() {
    let s = cos_symbol(64);
    let a = kernel_oscillation(&s, &[16.0, 0.0], ZMode::Linf, 48).unwrap();
    let b = kernel_oscillation(&s, &[32.0, 0.0], ZMode::Linf, 48).unwrap();
    let r = b / a;
    assert!((0.375..=0.625).contains(&r), "{r}");
}

#[test]
fn lebesgue_point_examples() {
    let one = SphereSymbol::from_angle_fn(16, Interpolation::Linear, |_| 1.0).unwrap();
    assert_eq!(lebesgue_point_modulus(&one, &[1.0, 0.0], 0.5).unwrap(), 0.0);
    assert_eq!(
        lebesgue_point_modulus(&SphereSymbol::sign(), &[1.0, 0.0], 1.0).unwrap(),
        0.0
    );
    let s = cos_symbol(256);
    for r in [0.05, 0.2, 0.5, 1.0] {
        let v = lebesgue_point_modulus(&s, &[1.0, 0.0], r).unwrap();
        assert!(v <= r, "r={r}: {v}");
    }
    assert!(lebesgue_point_modulus(&s, &[1.0, 0.0], 1.5).is_err());
}

#[test]
fn directional_inf_examples() {
    let one = SphereSymbol::from_angle_fn(16, Interpolation::Linear, |_| 1.0).unwrap();
    assert_eq!(
        directional_inf_oscillation(&one, 3.0, &[[1.0, 0.0], [0.0, 1.0]], 8).unwrap(),
        0.0
    );
    for d in [2.0, 5.0] {
        assert_eq!(
            directional_inf_oscillation(&SphereSymbol::sign(), d, &[[1.0, 0.0]], 64).unwrap(),
            0.0
        );
    }
    // A sawtooth with its only jump at θ = 0, probed on an arc around θ = π.
    let saw = SphereSymbol::from_angle_fn(256, Interpolation::Nearest, |t| t / PI - 1.0).unwrap();
    let arc: Vec<Point> = (0..9)
        .map(|k| PI / 2.0 + k as f64 * PI / 8.0)
        .map(|t| [t.cos(), t.sin()])
        .collect();
    let near = directional_inf_oscillation(&saw, 8.0, &arc, 24).unwrap();
    let far = directional_inf_oscillation(&saw, 32.0, &arc, 24).unwrap();
    assert!(far < near, "{far} vs {near}");
    assert!(directional_inf_oscillation(&saw, 8.0, &[], 24).is_err());
}

#[test]
fn bilinear_with_zero_factor() {
    let spec = BilinearFractionalSpec::new(1, 1.0).unwrap();
    let f1 = GridFunction::constant(interval(0.0, 1.0), 64, 1.0).unwrap();
    let f2 = GridFunction::constant(interval(0.0, 1.0), 64, 0.0).unwrap();
    let out = apply_i2(&spec, &f1, &f2, &[[4.0, 0.0], [0.5, 0.0]]).unwrap();
    assert_eq!(out.values, vec![0.0, 0.0]);
}

#[test]
fn bilinear_interval_oracle() {
    // With y₁, y₂ ∈ [0,1] and x = 4, the kernel lies in [(2·16)^{-1/2}, (2·9)^{-1/2}].
    let spec = BilinearFractionalSpec::new(1, 1.0).unwrap();
    let f = GridFunction::constant(interval(0.0, 1.0), 128, 1.0).unwrap();
    let out = apply_i2(&spec, &f, &f, &[[4.0, 0.0]]).unwrap();
    let v = out.values[0];
    assert!(v >= 1.0 / 32f64.sqrt() && v <= 1.0 / 18f64.sqrt(), "{v}");
    assert_eq!(out.excluded_pairs, 0);
}

#[test]
fn bilinear_is_symmetric_and_reports_diagonal() {
    let spec = BilinearFractionalSpec::new(1, 0.7).unwrap();
    let q = interval(0.0, 1.0);
    let f1 = GridFunction::from_fn(q, 32, |x| 1.0 + x[0]).unwrap();
    let f2 = GridFunction::from_fn(q, 32, |x| (3.0 * x[0]).cos()).unwrap();
    let pts = [[0.5, 0.0], [2.0, 0.0], [-1.5, 0.0]];
    let a = apply_i2(&spec, &f1, &f2, &pts).unwrap();
    let b = apply_i2(&spec, &f2, &f1, &pts).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
    }
    assert!(a.excluded_pairs > 0);
}

#[test]
fn bilinear_spec_validation() {
    assert!(BilinearFractionalSpec::new(1, 0.0).is_err());
    assert!(BilinearFractionalSpec::new(1, 2.0).is_err());
    assert!(BilinearFractionalSpec::new(2, 3.5).is_ok());
    assert!(BilinearFractionalSpec::new(3, 1.0).is_err());
}

#[test]
fn bilinear_oscillation_decays() {
    let q = interval(0.0, 1.0);
    for alpha in [1.0, 1.8] {
        let spec = BilinearFractionalSpec::new(1, alpha).unwrap();
        let a = bilinear_kernel_oscillation(&spec, &([8.0, 0.0], [8.0, 0.0]), &q, 24).unwrap();
        let b = bilinear_kernel_oscillation(&spec, &([16.0, 0.0], [16.0, 0.0]), &q, 24).unwrap();
        assert!(a / b >= 1.5, "alpha {alpha}: {a} -> {b}");
    }
    let spec = BilinearFractionalSpec::new(1, 1.0).unwrap();
    let r = bilinear_kernel_oscillation(&spec, &([0.0, 0.0], [4.0, 0.0]), &q, 8);
    assert_eq!(r, Err(Error::Overlap));
}

#[test]
fn cap_constant_is_positive() {
    assert!(oscillation_cap_constant(1) > 0.0);
    assert!(oscillation_cap_constant(2) > oscillation_cap_constant(1));
}

fn table() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn apply_t_is_linear(a in prop::collection::vec(-3.0..3.0f64, 32), b in prop::collection::vec(-3.0..3.0f64, 32),
                         s in -2.0..2.0f64, t in -2.0..2.0f64, x in 1.5..6.0f64) {
        let q = interval(0.0, 1.0);
        // A positive symbol, so T|f| bounds the rounding scale.
        let k = KernelSpec::new(SphereSymbol::one_dim(1.0, 0.3).unwrap(), 0.4).unwrap();
        let f = GridFunction::new(q, 32, a).unwrap();
        let g = GridFunction::new(q, 32, b).unwrap();
        let comb = f.zip_with(&g, |u, v| s * u + t * v).unwrap();
        let pts = [[x, 0.0], [-x, 0.0], [0.4, 0.0]];
        let lhs = apply_t(&k, &comb, &pts, 0.0).unwrap();
        let tf = apply_t(&k, &f, &pts, 0.0).unwrap();
        let tg = apply_t(&k, &g, &pts, 0.0).unwrap();
        let scale = apply_t(&k, &f.map(f64::abs).unwrap(), &pts, 0.0).unwrap().iter()
            .zip(apply_t(&k, &g.map(f64::abs).unwrap(), &pts, 0.0).unwrap())
            .map(|(u, v)| (s.abs() * u + t.abs() * v).max(1e-300)).collect::<Vec<_>>();
        for i in 0..3 {
            prop_assert!((lhs[i] - (s * tf[i] + t * tg[i])).abs() <= 1e-12 * scale[i]);
        }
    }

    #[test]
    fn symbol_is_degree_zero(v in table(), x in -5.0..5.0f64, y in -5.0..5.0f64) {
        prop_assume!(x.abs() + y.abs() > 1e-6);
        let s = SphereSymbol::two_dim(v, Interpolation::Linear).unwrap();
        // Scaling by 8 is exact in floating point; by 7 it moves the angle by an ulp.
        prop_assert_eq!(s.eval(&[x, y]), s.eval(&[8.0 * x, 8.0 * y]));
        prop_assert!((s.eval(&[x, y]) - s.eval(&[7.0 * x, 7.0 * y])).abs() <= 1e-13);
        let one = SphereSymbol::one_dim(0.3, -1.1).unwrap();
        prop_assert_eq!(one.eval(&[x, 0.0]), one.eval(&[7.0 * x, 0.0]));
    }

    #[test]
    fn far_field_decay_rate(alpha in 0.05..0.95f64, d in 16.0..200.0f64, plus in 0.5..2.0f64) {
        let k = KernelSpec::new(SphereSymbol::one_dim(plus, 1.0).unwrap(), alpha).unwrap();
        let f = GridFunction::constant(interval(0.0, 1.0), 32, 1.0).unwrap();
        let c = 0.5;
        let v = apply_t(&k, &f, &[[c + d, 0.0], [c + 2.0 * d, 0.0]], 0.0).unwrap();
        let expect = 2f64.powf(alpha - 1.0);
        prop_assert!((v[1] / v[0] / expect - 1.0).abs() <= 0.1);
    }

    #[test]
    fn l1_below_linf(v in table(), hx in -8.0..8.0f64, hy in -8.0..8.0f64) {
        prop_assume!(hx.hypot(hy) > 2.0);
        let s = SphereSymbol::two_dim(v, Interpolation::Linear).unwrap();
        let l1 = kernel_oscillation(&s, &[hx, hy], ZMode::L1, 10).unwrap();
        let linf = kernel_oscillation(&s, &[hx, hy], ZMode::Linf, 10).unwrap();
        prop_assert!(l1 <= linf * (1.0 + 1e-12));
    }

    #[test]
    fn oscillation_respects_lipschitz_cap(v in table(), h in 4.0..40.0f64, theta in 0.0..(2.0 * PI)) {
        let s = SphereSymbol::two_dim(v, Interpolation::Linear).unwrap();
        let l = s.lipschitz_modulus().unwrap();
        let osc = kernel_oscillation(&s, &[h * theta.cos(), h * theta.sin()], ZMode::Linf, 10).unwrap();
        prop_assert!(osc <= oscillation_cap_constant(2) * l / h * (1.0 + 1e-12));
    }

    #[test]
    fn bilinear_within_kernel_bounds(x in 2.5..12.0f64, alpha in 0.2..1.8f64) {
        let spec = BilinearFractionalSpec::new(1, alpha).unwrap();
        let f = GridFunction::constant(interval(0.0, 1.0), 48, 1.0).unwrap();
        let v = apply_i2(&spec, &f, &f, &[[x, 0.0], [-x + 1.0, 0.0]]).unwrap().values;
        let lo = (2.0 * x * x).powf((alpha - 2.0) / 2.0);
        let hi = (2.0 * (x - 1.0) * (x - 1.0)).powf((alpha - 2.0) / 2.0);
        for val in v {
            prop_assert!(val >= lo * (1.0 - 1e-12) && val <= hi * (1.0 + 1e-12));
        }
    }
}
