use proptest::prelude::*;
use quasiuniform::bounds::{
    beta, beta0, epsilon0, mesh_ratio_limsup, sphere_c0, sphere_c2, verify_inequalities,
    BoundError, BoundInputs, Measurement, Verdict,
};
use quasiuniform::spaces::{gamma_d, SpaceDescriptor};
use quasiuniform::weights::{DensityField, WeightSpec};

fn spaces() -> Vec<SpaceDescriptor> {
    vec![
        SpaceDescriptor::sphere(2),
        SpaceDescriptor::sphere(3),
        SpaceDescriptor::circle(),
        SpaceDescriptor::cube(2),
        SpaceDescriptor::cap(2, 0.0).unwrap(),
    ]
}

#[test]
fn constants_are_positive_and_in_range() {
    for space in spaces() {
        let alpha = space.intrinsic_dim();
        for s in [alpha + 0.5, 2.0 * alpha, 4.0 * alpha] {
            let k = BoundInputs::for_space(&space, s, &WeightSpec::unit())
                .unwrap()
                .constants()
                .unwrap();
            for (name, v, _) in k.table() {
                assert!(v > 0.0 && v.is_finite(), "{space}, s = {s}: {name} = {v}");
            }
            assert!(k.theta0 > 0.0 && k.theta0 < 1.0);
            assert!(k.epsilon0 > 0.0 && k.epsilon0 < 0.5);
            assert!(
                k.mesh_ratio_limsup >= 2.0 * (1.0 - 1e-6),
                "{space}: {}",
                k.mesh_ratio_limsup
            );
            assert!(k.n0 >= 2);
        }
    }
}

#[test]
fn density_weight_constants() {
    let s2 = SpaceDescriptor::sphere(2);
    let w = WeightSpec::density(
        DensityField::from_expr("1 + 0.5*x3", &s2, false).unwrap(),
        4.0,
        2.0,
    )
    .unwrap();
    let inputs = BoundInputs::for_space(&s2, 4.0, &w).unwrap();
    assert!(!inputs.constant_weight);
    // density bounds are widened by a relative 1e-9
    assert!((inputs.w_sup - 4.0).abs() < 1e-7, "{}", inputs.w_sup);
    let k = inputs.constants().unwrap();
    assert!(k.big_c1 > 0.0 && k.c5 > 0.0);
}

#[test]
fn c2_increases_toward_its_limit() {
    for d in [2usize, 3, 4] {
        let limit = (d as f64 / gamma_d(d)).powf(1.0 / d as f64);
        let values: Vec<f64> = [3.0, 4.0, 8.0, 16.0, 64.0]
            .iter()
            .filter(|&&s| s > d as f64)
            .map(|&s| sphere_c2(d, s).unwrap())
            .collect();
        assert!(
            values.windows(2).all(|w| w[1] > w[0]),
            "d = {d}: {values:?}"
        );
        assert!(values.iter().all(|&v| v < limit));
        assert!(sphere_c2(d, 1e6).unwrap() > limit * (1.0 - 1e-4));
        assert!((sphere_c0(d).unwrap() - gamma_d(d) / d as f64).abs() < 1e-15);
    }
}

#[test]
fn limsup_on_spheres() {
    for d in [2usize, 3] {
        let s = SpaceDescriptor::sphere(d);
        let p = s.regularity_profile(&[2.0]).unwrap();
        let v = mesh_ratio_limsup(d as f64, 1.0, 1.0, p.upper_zero, p.lower_zero).unwrap();
        assert!(v >= 2.0 * (1.0 - 1e-6), "d = {d}: {v}");
    }
}

#[test]
fn small_exponents_violate_the_hypothesis() {
    let s2 = SpaceDescriptor::sphere(2);
    let err = BoundInputs::for_space(&s2, 1.5, &WeightSpec::unit())
        .unwrap()
        .constants()
        .unwrap_err();
    assert!(matches!(err, BoundError::Hypothesis(_)));
    assert!(epsilon0(2.0, 2.0).is_err());
    assert!(sphere_c2(2, 2.0).is_err());
}

#[test]
fn verdicts_follow_the_measurements() {
    let s2 = SpaceDescriptor::sphere(2);
    let inputs = BoundInputs::for_space(&s2, 4.0, &WeightSpec::unit()).unwrap();
    let good = Measurement {
        n: 100,
        delta: 0.34,
        rho_hat: 0.2,
        h: 0.01,
        log_energy: Some(12.0),
    };
    let clumped = Measurement {
        delta: 0.01,
        log_energy: Some(-1.0),
        ..good
    };
    let report = verify_inequalities(&[good, clumped], &inputs).unwrap();
    assert!(report.rows[0].all_pass());
    assert_eq!(report.rows[1].separation, Verdict::Fail);
    assert_eq!(report.rows[1].energy, Verdict::Fail);
    assert_eq!(report.failures().len(), 1);
    let tiny = Measurement { n: 2, ..good };
    let r = verify_inequalities(&[tiny], &inputs).unwrap();
    assert_eq!(r.rows[0].energy, Verdict::Skipped);
}

proptest! {
    #[test]
    fn beta0_is_the_minimum_of_beta(s in 2.2f64..40.0, w in 0.1f64..10.0) {
        let alpha = 2.0;
        let c2 = sphere_c2(2, s).unwrap();
        let b0 = beta0(s, alpha, w, c2).unwrap();
        let e0 = epsilon0(s, alpha).unwrap();
        prop_assert!((beta(e0, s, alpha, w, c2).unwrap() - b0).abs() <= 1e-10 * b0);
        for k in 1..500 {
            let eps = k as f64 * 1e-3;
            prop_assert!(beta(eps, s, alpha, w, c2).unwrap() >= b0 * (1.0 - 1e-12));
        }
    }
}
