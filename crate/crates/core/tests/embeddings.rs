use proptest::prelude::*;
use workbench::embeddings::*;
use workbench::geometry::{dyadic_family, Cube, GridFunction};
use workbench::spaces::SpaceSpec;
use workbench::weights::Weight;

fn interval(a: f64, b: f64) -> Cube {
    Cube::interval(a, b).unwrap()
}

#[test]
fn tilde_exponents() {
    assert_eq!(tilde_exponent(1.0), 0.5);
    assert!((tilde_exponent(2.0) - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(tilde_exponent(f64::INFINITY), 1.0);
}

#[test]
fn lorentz_product_with_zero() {
    let q = interval(0.0, 2.0);
    let f = GridFunction::from_fn(q, 64, |x| 1.0 + x[0]).unwrap();
    let z = GridFunction::constant(q, 64, 0.0).unwrap();
    assert_eq!(
        lorentz_product_check(&f, &z, 2.0, f64::INFINITY).unwrap().0,
        0.0
    );
}

#[test]
fn lorentz_product_of_indicators() {
    for side in [0.5, 1.0, 4.0] {
        let q = interval(0.0, side);
        let chi = GridFunction::constant(q, 128, 1.0).unwrap();
        for (p, r) in [(2.0, f64::INFINITY), (2.0, 2.0), (4.0, 1.0)] {
            let (lhs, rhs) = lorentz_product_check(&chi, &chi, p, r).unwrap();
            let m = q.measure();
            let rl = lhs / m.powf(1.0 + 1.0 / p);
            let rr = rhs / (m * m.powf(1.0 / p));
            assert!(
                (0.25..=4.0).contains(&rl) && (0.25..=4.0).contains(&rr),
                "side {side} p {p} q {r}"
            );
        }
    }
}

#[test]
fn morrey_product_examples() {
    let q = interval(0.0, 4.0);
    let fam = dyadic_family(&q, 3);
    let chi = GridFunction::constant(q, 64, 1.0).unwrap();
    let z = GridFunction::constant(q, 64, 0.0).unwrap();
    assert_eq!(
        morrey_product_check(&chi, &z, 2.0, -0.5, &fam).unwrap().0,
        0.0
    );
    let (lhs, rhs) = morrey_product_check(&chi, &chi, 2.0, -0.5, &fam).unwrap();
    let exact = q.measure() * q.measure().powf(0.5);
    assert!((lhs - exact).abs() < 1e-12 * exact);
    assert!(lhs <= MORREY_PRODUCT_CONSTANT * rhs * (1.0 + 1e-12));
    assert!(morrey_product_check(&chi, &chi, 2.0, -0.75, &fam).is_err());
    assert!(morrey_product_check(&chi, &chi, 2.0, 0.0, &fam).is_err());
}

#[test]
fn indicator_norm_examples() {
    let (c, e) =
        indicator_norm_check(&SpaceSpec::Lebesgue { p: 2.0 }, &interval(0.0, 4.0)).unwrap();
    assert!((c - 2.0).abs() < 1e-12 && e == 2.0);
    let (c, e) =
        indicator_norm_check(&SpaceSpec::Lorentz { p: 2.0, q: 1.0 }, &interval(0.0, 1.0)).unwrap();
    assert!((0.25..=4.0).contains(&(c / 1.0)));
    assert!((c - e).abs() < 1e-12);
    let (c, e) = indicator_norm_check(
        &SpaceSpec::Morrey {
            p: 2.0,
            lambda: -0.5,
        },
        &interval(0.0, 1.0),
    )
    .unwrap();
    assert!((c - 1.0).abs() < 1e-12 && (e - 1.0).abs() < 1e-12);
    let (c, e) = indicator_norm_check(
        &SpaceSpec::WeakLebesgue { p: 3.0 },
        &Cube::square([0.0, 0.0], 2.0).unwrap(),
    )
    .unwrap();
    assert!((c / e - 1.0).abs() < 0.02);
    let weighted = SpaceSpec::WeightedLebesgue {
        p: 2.0,
        weight: Weight::unit(1),
    };
    assert!(indicator_norm_check(&weighted, &interval(0.0, 1.0)).is_err());
}

#[test]
fn indicator_ratio_is_dilation_invariant() {
    let specs = [
        SpaceSpec::Lebesgue { p: 1.5 },
        SpaceSpec::WeakLebesgue { p: 2.0 },
        SpaceSpec::Lorentz { p: 2.0, q: 1.0 },
        SpaceSpec::Lorentz {
            p: 3.0,
            q: f64::INFINITY,
        },
        SpaceSpec::Morrey {
            p: 2.0,
            lambda: -0.25,
        },
    ];
    for q in [interval(0.0, 1.0), Cube::square([1.0, 1.0], 0.5).unwrap()] {
        let big = q.dilate(8.0).unwrap();
        for spec in &specs {
            let (c0, e0) = indicator_norm_check(spec, &q).unwrap();
            let (c1, e1) = indicator_norm_check(spec, &big).unwrap();
            assert!(((c1 / e1) / (c0 / e0) - 1.0).abs() < 0.02, "{spec:?}");
        }
    }
}

fn step(v: &[f64], n: usize) -> GridFunction {
    let m = v.len();
    GridFunction::from_fn(interval(0.0, 1.0), n, |x| {
        v[((x[0] * m as f64) as usize).min(m - 1)]
    })
    .unwrap()
}

fn step_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), -4.0..4.0f64], 1..12)
}

proptest! {
    #[test]
    fn lorentz_product_bound(a in step_values(), b in step_values(), q in prop::sample::select(vec![1.0, 2.0, f64::INFINITY])) {
        let (f, g) = (step(&a, 128), step(&b, 128));
        let (lhs, rhs) = lorentz_product_check(&f, &g, 2.0, q).unwrap();
        prop_assert!(lhs <= lorentz_product_constant(2.0) * rhs * (1.0 + 1e-12));
    }

    #[test]
    fn morrey_product_bound(a in step_values(), b in step_values()) {
        let (f, g) = (step(&a, 128), step(&b, 128));
        let fam = dyadic_family(&interval(0.0, 1.0), 5);
        let (lhs, rhs) = morrey_product_check(&f, &g, 2.0, -0.5, &fam).unwrap();
        prop_assert!(lhs <= MORREY_PRODUCT_CONSTANT * rhs * (1.0 + 1e-12));
    }
}
