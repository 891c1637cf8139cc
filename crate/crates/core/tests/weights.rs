use proptest::prelude::*;
use quasiuniform::spaces::SpaceDescriptor;
use quasiuniform::weights::{DensityField, WeightRecord, WeightSpec};

fn density_weight() -> WeightSpec {
    let s2 = SpaceDescriptor::sphere(2);
    let field = DensityField::from_expr("1 + 0.5*x3", &s2, false).unwrap();
    WeightSpec::density(field, 4.0, 2.0).unwrap()
}

#[test]
fn density_weight_is_symmetric_and_within_its_floor_and_sup() {
    let s2 = SpaceDescriptor::sphere(2);
    for w in [
        WeightSpec::unit(),
        WeightSpec::constant(2.5).unwrap(),
        density_weight(),
    ] {
        let (eta, kappa) = w.floor(&s2).unwrap();
        let sup = w.sup_norm().unwrap();
        assert!(eta > 0.0 && kappa > 0.0 && sup >= eta);
        let pts = s2.sample_measure(20_000, 5);
        for pair in pts.chunks_exact(2) {
            let (x, y) = (&pair[0], &pair[1]);
            let wxy = w.eval(x, y);
            assert_eq!(wxy, w.eval(y, x));
            assert!(
                wxy >= eta * (1.0 - 1e-12) && wxy <= sup * (1.0 + 1e-12),
                "{wxy} not in [{eta}, {sup}]"
            );
        }
    }
}

#[test]
fn density_factor_matches_closed_form() {
    let w = density_weight();
    // f = sigma^(-s / 2d) = sigma^(-1) at s = 4, d = 2
    for z in [-1.0, -0.3, 0.0, 0.7, 1.0] {
        let x = [(1.0f64 - z * z).sqrt(), 0.0, z];
        assert!((w.factor(&x) - 1.0 / (1.0 + 0.5 * z)).abs() < 1e-14);
    }
    // sup w = max f^2 = 1 / 0.5^2, from density bounds widened by 1e-9
    assert!((w.sup_norm().unwrap() - 4.0).abs() < 1e-7);
}

#[test]
fn unit_density_normalized_is_the_unit_weight() {
    for space in [
        SpaceDescriptor::sphere(2),
        SpaceDescriptor::circle(),
        SpaceDescriptor::cube(2),
    ] {
        let field = DensityField::from_expr("1", &space, true).unwrap();
        let w = WeightSpec::density(field, 4.0, space.intrinsic_dim()).unwrap();
        let unit = WeightSpec::unit();
        let pts = space.sample_measure(200, 9);
        for pair in pts.chunks_exact(2) {
            assert!((w.eval(&pair[0], &pair[1]) - unit.eval(&pair[0], &pair[1])).abs() < 1e-9);
        }
    }
}

#[test]
fn invalid_weights_are_rejected() {
    assert!(WeightSpec::constant(0.0).is_err());
    assert!(WeightSpec::constant(f64::NAN).is_err());
    let s2 = SpaceDescriptor::sphere(2);
    assert!(DensityField::from_expr("x3", &s2, false)
        .and_then(|f| WeightSpec::density(f, 4.0, 2.0))
        .is_err());
    assert!(DensityField::from_expr("1 + ", &s2, false).is_err());
}

#[test]
fn weight_records_round_trip() {
    let s2 = SpaceDescriptor::sphere(2);
    for text in [
        "const:1",
        "const:2.5",
        "density:1 + 0.5*x3:s=4:d=2",
        "density:2 + x1:s=6:d=2:normalized",
    ] {
        let rec: WeightRecord = text.parse().unwrap();
        let w = rec.build(&s2).unwrap();
        assert_eq!(w.record().unwrap(), rec);
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(serde_json::from_str::<WeightRecord>(&json).unwrap(), rec);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factor_gradient_matches_finite_differences(seed in 0u64..10_000) {
        let s2 = SpaceDescriptor::sphere(2);
        let w = density_weight();
        let x = s2.sample_measure(1, seed).pop().unwrap();
        let g = w.factor_gradient(x.coords()).unwrap();
        let t = s2.tangent_project(x.coords(), &[0.3, -0.2, 0.9]);
        let h = 1e-6;
        let step = |sign: f64| {
            let y: Vec<f64> = x.coords().iter().zip(&t).map(|(a, b)| a + sign * h * b).collect();
            w.factor(s2.retract(&y).unwrap().coords())
        };
        let fd = (step(1.0) - step(-1.0)) / (2.0 * h);
        let an: f64 = g.iter().zip(&t).map(|(a, b)| a * b).sum();
        prop_assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()));
    }
}
