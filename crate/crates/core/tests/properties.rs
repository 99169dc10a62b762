use std::f64::consts::TAU;

use betapoly::geometry::{
    polygon_area, polygon_objective, polygon_perimeter, umax, umax_bruteforce, DiskPoint,
    PolygonChain,
};
use betapoly::kernels::{analyze_kernel, compute_i, kernel_for, FiniteDifference};
use betapoly::limits::{closed_form_i, extremal_value, law_for};
use betapoly::montecarlo::{run_trials, SimConfig};
use betapoly::sampler::{sample_batch, BetaParams, SeedPolicy};
use betapoly::Objective;
use proptest::prelude::*;

fn objective() -> impl Strategy<Value = Objective> {
    prop_oneof![Just(Objective::Perimeter), Just(Objective::Area)]
}

fn beta() -> impl Strategy<Value = f64> {
    prop_oneof![Just(-0.5), Just(0.0), Just(2.0)]
}

fn cloud(beta: f64, count: usize, seed: u64) -> Vec<DiskPoint<f64>> {
    sample_batch(BetaParams::new(beta).unwrap(), count, SeedPolicy::new(seed), 0).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dp_matches_enumeration(
        obj in objective(),
        n in 3usize..=5,
        beta in beta(),
        extra in 0usize..=7,
        seed in any::<u64>(),
    ) {
        let pts = cloud(beta, n + extra, seed);
        let fast = umax(&pts, n, obj).unwrap();
        let slow = umax_bruteforce(&pts, n, obj).unwrap();
        prop_assert!(rel_close(fast.value, slow.value, 1e-9), "{} vs {}", fast.value, slow.value);
    }

    #[test]
    fn more_vertices_never_hurt(obj in objective(), n in 3usize..=6, seed in any::<u64>()) {
        let pts = cloud(0.0, 15, seed);
        let small = umax(&pts, n, obj).unwrap().value;
        let large = umax(&pts, n + 1, obj).unwrap().value;
        prop_assert!(large >= small);
    }

    #[test]
    fn bounded_by_regular_polygon(
        obj in objective(),
        n in 3usize..=8,
        beta in -0.9f64..3.0,
        seed in any::<u64>(),
    ) {
        let pts = cloud(beta, 60, seed);
        let best = umax(&pts, n, obj).unwrap();
        prop_assert!(best.value <= extremal_value(obj, n).unwrap() + 1e-9);
    }

    #[test]
    fn reported_vertices_reproduce_value(obj in objective(), n in 2usize..=6, seed in any::<u64>()) {
        prop_assume!(obj == Objective::Perimeter || n >= 3);
        let pts = cloud(1.0, 40, seed);
        let best = umax(&pts, n, obj).unwrap();
        prop_assert_eq!(best.vertex_indices.len(), best.vertex_count);
        prop_assert!(best.vertex_count <= n);
        let chain = PolygonChain::from_ccw(best.vertex_indices.clone());
        let again = polygon_objective(&chain, &pts, obj);
        prop_assert!((again - best.value).abs() <= 1e-12 * best.value.abs().max(1.0));
    }

    #[test]
    fn rotation_leaves_value_unchanged(
        obj in objective(),
        n in 3usize..=5,
        angle in -10.0f64..10.0,
        seed in any::<u64>(),
    ) {
        let pts = cloud(0.0, 30, seed);
        let turned: Vec<_> = pts.iter().map(|p| p.rotated(angle)).collect();
        let a = umax(&pts, n, obj).unwrap().value;
        let b = umax(&turned, n, obj).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn polar_kernel_matches_cartesian_polygon(
        obj in objective(),
        n in 3usize..=7,
        radii in prop::collection::vec(0.05f64..1.0, 7),
        angles in prop::collection::vec(0.0f64..TAU, 6),
        rot in 0.0f64..TAU,
    ) {
        let radii = &radii[..n];
        let angles = &angles[..n - 1];
        let kernel = kernel_for::<f64>(obj, n).unwrap();
        let polar = kernel.evaluate(angles, radii);

        // same points, first one at angle `rot`, as a star polygon in angular order
        let mut pts: Vec<(f64, DiskPoint<f64>)> = std::iter::once((0.0, radii[0]))
            .chain(angles.iter().copied().zip(radii[1..].iter().copied()))
            .map(|(a, r)| (a, DiskPoint::new(r * (a + rot).cos(), r * (a + rot).sin())))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let points: Vec<DiskPoint<f64>> = pts.into_iter().map(|(_, p)| p).collect();
        let chain = PolygonChain::from_ccw((0..n).collect());
        let cartesian = match obj {
            Objective::Perimeter => polygon_perimeter(&chain, &points),
            Objective::Area => polygon_area(&chain, &points),
        };
        prop_assert!((polar - cartesian).abs() < 1e-10, "{polar} vs {cartesian}");
    }

    #[test]
    fn kernel_ignores_labelling(
        obj in objective(),
        n in 3usize..=6,
        radii in prop::collection::vec(0.05f64..1.0, 6),
        angles in prop::collection::vec(0.0f64..TAU, 6),
        swap in 0usize..5,
    ) {
        let kernel = kernel_for::<f64>(obj, n).unwrap();
        let radii = radii[..n].to_vec();
        let mut abs_angles = angles[..n].to_vec();
        let value = |abs: &[f64], r: &[f64]| {
            let rel: Vec<f64> = abs[1..].iter().map(|a| a - abs[0]).collect();
            kernel.evaluate(&rel, r)
        };
        let base = value(&abs_angles, &radii);
        let j = 1 + swap % (n - 1);
        let mut r2 = radii.clone();
        abs_angles.swap(0, j);
        r2.swap(0, j);
        prop_assert!((value(&abs_angles, &r2) - base).abs() < 1e-12);
        abs_angles.reverse();
        r2.reverse();
        prop_assert!((value(&abs_angles, &r2) - base).abs() < 1e-12);
    }

    #[test]
    fn regular_polygon_is_not_beaten_nearby(
        obj in objective(),
        n in 3usize..=6,
        jitter in prop::collection::vec(-0.3f64..0.3, 6),
        shrink in prop::collection::vec(0.0f64..0.3, 6),
    ) {
        let kernel = kernel_for::<f64>(obj, n).unwrap();
        let angles: Vec<f64> = (1..n).map(|k| TAU * k as f64 / n as f64 + jitter[k]).collect();
        let radii: Vec<f64> = shrink[..n].iter().map(|s| 1.0 - s).collect();
        prop_assert!(kernel.evaluate(&angles, &radii) <= kernel.max_value() + 1e-9);
    }
}

#[test]
fn hundred_perturbations_stay_below_max() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for obj in [Objective::Perimeter, Objective::Area] {
        for n in 3..=6 {
            let kernel = kernel_for::<f64>(obj, n).unwrap();
            for _ in 0..100 {
                let angles: Vec<f64> =
                    (1..n).map(|k| TAU * k as f64 / n as f64 + rng.random_range(-0.5..0.5)).collect();
                let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..=1.0)).collect();
                assert!(kernel.evaluate(&angles, &radii) <= kernel.max_value() + 1e-9);
            }
        }
    }
}

// With the radial partials taken from the kernel itself, compute_i equals the
// closed-form factor divided by 2^{n(β+1)}: the closed form is written with
// half the radial derivative of the kernel.
#[test]
fn numeric_i_tracks_closed_form_up_to_radial_scaling() {
    for obj in [Objective::Perimeter, Objective::Area] {
        for n in 3..=6 {
            let spec = kernel_for::<f64>(obj, n).unwrap();
            let analyses = analyze_kernel(&spec, &FiniteDifference::default()).unwrap();
            for beta in [-0.5, 0.0, 1.5] {
                let numeric = compute_i(&spec, &analyses, beta).unwrap();
                let closed = closed_form_i(obj, n, beta).unwrap();
                let scale = 2f64.powf(n as f64 * (beta + 1.0));
                assert!(
                    rel_close(numeric * scale, closed, 1e-3),
                    "{obj} n={n} beta={beta}: {numeric} * {scale} vs {closed}"
                );
            }
        }
    }
}

#[test]
fn recorded_statistic_matches_enumeration() {
    let config = SimConfig {
        objective: Objective::Area,
        n: 3,
        beta: 0.5,
        sample_sizes: vec![8, 12],
        trials: 10,
        master_seed: 99,
        record_timing: false,
    };
    let records = run_trials(&config).unwrap();
    assert_eq!(records.len(), 20);
    let params = BetaParams::new(config.beta).unwrap();
    for rec in &records {
        let size_index = config.sample_sizes.iter().position(|&s| s == rec.sample_size).unwrap();
        let pts = sample_batch(
            params,
            rec.sample_size,
            SeedPolicy::new(config.master_seed),
            betapoly::montecarlo::trial_stream(size_index, rec.trial_index),
        )
        .unwrap();
        let brute = umax_bruteforce(&pts, config.n, config.objective).unwrap();
        assert_eq!(brute.value, rec.h);
        assert!(rec.t >= 0.0);
    }
}

#[test]
fn limit_law_constants_are_consistent() {
    for obj in [Objective::Perimeter, Objective::Area] {
        for n in 3..=8 {
            for beta in [-0.9, 0.0, 2.5] {
                let law = law_for(obj, n, beta).unwrap();
                assert!((law.a * law.c - n as f64).abs() < 1e-14);
                assert!((law.b - law.k_n * law.i).abs() <= 1e-15 * law.b);
                let mut prev = 0.0;
                for k in 0..200 {
                    let v = law.cdf(k as f64 * 0.05);
                    assert!((0.0..1.0).contains(&v) || (v == 1.0 && k > 0));
                    assert!(v >= prev);
                    prev = v;
                }
            }
        }
    }
    assert!((extremal_value(Objective::Perimeter, 3).unwrap() - 3.0 * 3f64.sqrt()).abs() < 1e-14);
    assert!((extremal_value(Objective::Area, 6).unwrap() - 1.5 * 3f64.sqrt()).abs() < 1e-14);
}
