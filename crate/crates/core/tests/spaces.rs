use proptest::prelude::*;
use quasiuniform::spaces::{distance, SpaceDescriptor};

fn spaces() -> Vec<SpaceDescriptor> {
    vec![
        SpaceDescriptor::sphere(1),
        SpaceDescriptor::sphere(2),
        SpaceDescriptor::sphere(3),
        SpaceDescriptor::circle(),
        SpaceDescriptor::cube(2),
        SpaceDescriptor::cube(3),
        SpaceDescriptor::torus(2.0, 0.5).unwrap(),
        SpaceDescriptor::cap(2, 0.3).unwrap(),
    ]
}

fn any_space() -> impl Strategy<Value = SpaceDescriptor> {
    prop::sample::select(spaces())
}

#[test]
fn distance_is_a_metric_on_sampled_triples() {
    for space in spaces() {
        let pts = space.sample_measure(3000, 17);
        for t in pts.chunks_exact(3) {
            let (a, b, c) = (&t[0], &t[1], &t[2]);
            let ab = distance(a, b).unwrap();
            let ba = distance(b, a).unwrap();
            let ac = distance(a, c).unwrap();
            let cb = distance(c, b).unwrap();
            assert_eq!(ab, ba, "{space}");
            assert!(ab <= ac + cb + 1e-12, "{space}: {ab} > {ac} + {cb}");
            assert_eq!(distance(a, a).unwrap(), 0.0);
            assert!(ab <= space.diameter() * (1.0 + 1e-12));
        }
    }
}

#[test]
fn distance_rejects_mixed_spaces() {
    let a = SpaceDescriptor::sphere(2).sample_measure(1, 0);
    let b = SpaceDescriptor::cube(3).sample_measure(1, 0);
    assert!(distance(&a[0], &b[0]).is_err());
}

#[test]
fn ball_of_diameter_is_whole_space() {
    for space in spaces() {
        let center = space.sample_measure(1, 3).pop().unwrap();
        let m = space.ball_measure(space.diameter(), Some(&center)).unwrap();
        assert!(
            (m - space.measure_total()).abs() <= 1e-9 * space.measure_total(),
            "{space}: {m}"
        );
    }
}

#[test]
fn non_homogeneous_balls_need_a_center() {
    assert!(SpaceDescriptor::cube(2).ball_measure(0.3, None).is_err());
    assert!(SpaceDescriptor::sphere(2).ball_measure(0.3, None).is_ok());
    assert!(SpaceDescriptor::sphere(2).ball_measure(-1.0, None).is_err());
}

#[test]
fn ball_masses_respect_the_global_upper_constant() {
    let exact = [
        SpaceDescriptor::sphere(1),
        SpaceDescriptor::sphere(2),
        SpaceDescriptor::sphere(3),
        SpaceDescriptor::circle(),
        SpaceDescriptor::cube(2),
    ];
    for space in exact {
        let diam = space.diameter();
        let profile = space.regularity_profile(&[diam]).unwrap();
        let alpha = space.intrinsic_dim();
        let centers = space.sample_measure(5, 11);
        for k in 1..=100 {
            let r = diam * k as f64 / 100.0;
            for c in &centers {
                let m = space.ball_measure(r, Some(c)).unwrap();
                assert!(
                    m / r.powf(alpha) <= profile.upper_global * (1.0 + 1e-6),
                    "{space}: r = {r}, ratio {}",
                    m / r.powf(alpha)
                );
                assert!(m / r.powf(alpha) >= 1.0 / profile.lower_global * (1.0 - 1e-6));
            }
        }
    }
}

#[test]
fn local_tables_are_nondecreasing() {
    for space in spaces() {
        let diam = space.diameter();
        let radii: Vec<f64> = (1..=8).map(|k| diam * k as f64 / 8.0).collect();
        let p = space.regularity_profile(&radii).unwrap();
        for w in p.upper_local.windows(2).chain(p.lower_local.windows(2)) {
            assert!(w[1] >= w[0], "{space}: {w:?}");
        }
        assert!(p.upper_local.last().unwrap() <= &(p.upper_global * (1.0 + 1e-12)));
        assert!(p.upper_at(radii[2]) >= p.upper_at(radii[1]));
    }
}

#[test]
fn sphere_constants_are_closed_form() {
    let p = SpaceDescriptor::sphere(2)
        .regularity_profile(&[2.0])
        .unwrap();
    assert!((p.upper_global - 0.25).abs() < 1e-12);
    assert!((p.lower_global - 4.0).abs() < 1e-9);
}

#[test]
fn descriptors_parse_and_print() {
    for space in spaces() {
        let text = space.to_string();
        assert_eq!(text.parse::<SpaceDescriptor>().unwrap(), space);
        let json = serde_json::to_string(&space).unwrap();
        assert_eq!(
            serde_json::from_str::<SpaceDescriptor>(&json).unwrap(),
            space
        );
    }
    assert!("sphere".parse::<SpaceDescriptor>().is_err());
    assert!("torus:0.5:2".parse::<SpaceDescriptor>().is_err());
    assert!("cap:2:1.5".parse::<SpaceDescriptor>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn retraction_lands_on_the_space_and_is_idempotent(
        space in any_space(),
        raw in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        let x = &raw[..space.ambient_dim()];
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-6);
        let p = space.retract(x).unwrap();
        prop_assert!(space.surface_residual(p.coords()).unwrap() <= 1e-12);
        let q = space.retract(p.coords()).unwrap();
        for (a, b) in p.coords().iter().zip(q.coords()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn tangent_projection_is_idempotent(space in any_space(), seed in 0u64..1000, g in prop::collection::vec(-1.0f64..1.0, 4)) {
        let p = space.sample_measure(1, seed).pop().unwrap();
        let g = &g[..space.ambient_dim()];
        let t = space.tangent_project(p.coords(), g);
        let tt = space.tangent_project(p.coords(), &t);
        for (a, b) in t.iter().zip(&tt) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn samples_lie_on_the_space(space in any_space(), seed in 0u64..1000) {
        for p in space.sample_measure(20, seed) {
            prop_assert!(space.surface_residual(p.coords()).unwrap() <= 1e-12);
        }
    }
}
