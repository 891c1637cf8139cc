use proptest::prelude::*;
use quasiuniform::energy::{energy_gradient, total_energy, EnergyMode, WeightGradient};
use quasiuniform::optimize::{
    initial_configuration, minimize_energy, minimize_from, s_sweep_best_packing, InitStrategy,
    OptimConfig, StopReason,
};
use quasiuniform::quality::{separation, SeparationMethod};
use quasiuniform::spaces::SpaceDescriptor;
use quasiuniform::weights::WeightSpec;

fn quick(seed: u64) -> OptimConfig {
    OptimConfig {
        restarts: 1,
        seed,
        max_iters: 3000,
        record_trace: true,
        ..OptimConfig::default()
    }
}

#[test]
fn solutions_stay_on_the_space() {
    let spaces = [
        SpaceDescriptor::sphere(2),
        SpaceDescriptor::circle(),
        SpaceDescriptor::cube(2),
        SpaceDescriptor::torus(2.0, 0.5).unwrap(),
        SpaceDescriptor::cap(2, 0.2).unwrap(),
    ];
    for space in spaces {
        let s = space.intrinsic_dim() + 2.0;
        let (config, res) = minimize_energy(&space, 24, s, &WeightSpec::unit(), &quick(1)).unwrap();
        for p in config.points() {
            assert!(
                space.surface_residual(p.coords()).unwrap() <= 1e-12,
                "{space}"
            );
        }
        assert!(res.final_log_energy.is_finite());
    }
}

#[test]
fn descent_is_monotone() {
    let s2 = SpaceDescriptor::sphere(2);
    let (_, res) = minimize_energy(&s2, 40, 4.0, &WeightSpec::unit(), &quick(2)).unwrap();
    let trace = res.trace.unwrap();
    assert_eq!(trace.len(), res.iterations + 1);
    assert!(trace.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn converged_solutions_have_small_gradient() {
    let s2 = SpaceDescriptor::sphere(2);
    let w = WeightSpec::unit();
    for (n, seed) in [(10, 3), (30, 4), (60, 5)] {
        let cfg = quick(seed);
        let (config, res) = minimize_energy(&s2, n, 4.0, &w, &cfg).unwrap();
        match res.stop_reason {
            StopReason::GradTolerance => {
                assert!(res.grad_norm <= cfg.grad_tolerance);
                // recompute the stopping measure from the public gradient
                let e = total_energy(&config, 4.0, &w, EnergyMode::Plain)
                    .unwrap()
                    .value;
                let g = energy_gradient(&config, 4.0, &w, WeightGradient::Full).unwrap();
                let gmax = g
                    .iter()
                    .map(|gi| gi.iter().map(|v| v * v).sum::<f64>().sqrt())
                    .fold(0.0, f64::max);
                let (delta, _) = separation(config.points(), SeparationMethod::Brute).unwrap();
                let rel = gmax / e * delta * n as f64 / 4.0;
                assert!(rel <= cfg.grad_tolerance * 1.01, "N = {n}: {rel}");
            }
            StopReason::MaxIters => assert!(!res.converged()),
            StopReason::LineSearchStall => assert!(res.converged()),
        }
    }
}

#[test]
fn max_iters_is_reported() {
    let s2 = SpaceDescriptor::sphere(2);
    let cfg = OptimConfig {
        max_iters: 3,
        ..quick(0)
    };
    let (_, res) = minimize_energy(&s2, 50, 4.0, &WeightSpec::unit(), &cfg).unwrap();
    assert_eq!(res.stop_reason, StopReason::MaxIters);
    assert!(!res.converged());
    assert_eq!(res.iterations, 3);
}

#[test]
fn known_optima() {
    let s2 = SpaceDescriptor::sphere(2);
    let w = WeightSpec::unit();
    // antipodal pair, regular tetrahedron, regular octahedron
    for (n, delta, energy) in [
        (2, 2.0, 2.0 / 2f64.powi(4)),
        (4, (8.0f64 / 3.0).sqrt(), 12.0 * (3.0f64 / 8.0).powi(2)),
    ] {
        let (config, res) = minimize_energy(&s2, n, 4.0, &w, &quick(7)).unwrap();
        let (d, _) = separation(config.points(), SeparationMethod::Brute).unwrap();
        assert!((d - delta).abs() < 1e-6, "N = {n}: {d}");
        assert!((res.final_energy - energy).abs() < 1e-9 * energy);
    }
    let (config, _) = minimize_energy(&s2, 6, 4.0, &w, &quick(8)).unwrap();
    let (d, _) = separation(config.points(), SeparationMethod::Brute).unwrap();
    assert!((d - 2f64.sqrt()).abs() < 1e-6);
}

#[test]
fn sweeps_do_not_drift_on_small_spheres() {
    let s2 = SpaceDescriptor::sphere(2);
    for n in [3usize, 4, 8] {
        let sweep = s_sweep_best_packing(
            &s2,
            n,
            &[8.0, 16.0, 32.0, 64.0, 128.0],
            &WeightSpec::unit(),
            &quick(n as u64),
            None,
        )
        .unwrap();
        let d = sweep.deltas();
        assert!(d.windows(2).all(|w| w[1] >= 0.8 * w[0]), "N = {n}: {d:?}");
        assert!(!sweep.any_drift());
        assert!(sweep.steps.iter().all(|st| st.bracket_ok));
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let s2 = SpaceDescriptor::sphere(2);
    let w = WeightSpec::unit();
    let bad = OptimConfig {
        shrink: 1.5,
        ..OptimConfig::default()
    };
    assert!(minimize_energy(&s2, 10, 4.0, &w, &bad).is_err());
    assert!(minimize_energy(&s2, 10, 0.0, &w, &OptimConfig::default()).is_err());
    assert!(s_sweep_best_packing(&s2, 4, &[8.0, 4.0], &w, &OptimConfig::default(), None).is_err());
    assert!(s_sweep_best_packing(&s2, 4, &[], &w, &OptimConfig::default(), None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn minimization_is_deterministic_and_never_worse_than_the_start(seed in 0u64..1000, n in 5usize..30) {
        let s2 = SpaceDescriptor::sphere(2);
        let w = WeightSpec::unit();
        let cfg = OptimConfig { strategy: InitStrategy::Random, max_iters: 200, ..quick(seed) };
        let start = initial_configuration(&s2, n, seed, InitStrategy::Random).unwrap();
        let e0 = total_energy(&start, 4.0, &w, EnergyMode::Plain).unwrap().log_energy();
        let (a, ra) = minimize_from(&start, 4.0, &w, &cfg).unwrap();
        let (b, rb) = minimize_from(&start, 4.0, &w, &cfg).unwrap();
        prop_assert_eq!(a.points(), b.points());
        prop_assert_eq!(ra, rb.clone());
        prop_assert!(rb.final_log_energy <= e0);
    }
}
