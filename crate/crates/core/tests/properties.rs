use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;

use antenna_tuner::capacity::{mimo_ofdm_capacity, normalize_csi, SnrLinear};
use antenna_tuner::channel::{make_scene_with, synthesize_csi, CsiTensor, Scenario, SceneParams};
use antenna_tuner::environment::{parse_trace, simulated_env, write_trace, CsiTrace};
use antenna_tuner::geometry::OrientationConfig;
use antenna_tuner::harness::{parse_experiment_config, ExperimentConfig};
use antenna_tuner::optimizer::{
    gp_fit, run_optimizer, GpHyperparams, SobolState, Strategy as SearchStrategy, StrategyParams,
};

fn arb_orientation() -> impl Strategy<Value = OrientationConfig> {
    (0.0..TAU, 0.0..=PI, 0.0..TAU, 0.0..=PI)
        .prop_map(|(y1, r1, y2, r2)| OrientationConfig::new([(y1, r1), (y2, r2)]).unwrap())
}

fn arb_csi(max_m: usize) -> impl Strategy<Value = CsiTensor> {
    (1..=max_m, 1usize..=3, 1usize..=3).prop_flat_map(|(m, nr, nt)| arb_csi_shaped(m, nr, nt))
}

fn arb_csi_shaped(m: usize, nr: usize, nt: usize) -> impl Strategy<Value = CsiTensor> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), m * nr * nt).prop_map(move |v| {
        let entries = v
            .into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect();
        CsiTensor::new(m, nr, nt, entries).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn capacity_is_nonnegative_and_grows_with_snr(csi in arb_csi(8), db in -20.0..40.0f64) {
        let lo = mimo_ofdm_capacity(&csi, SnrLinear::from_db(db).unwrap()).unwrap();
        let hi = mimo_ofdm_capacity(&csi, SnrLinear::from_db(db + 3.0).unwrap()).unwrap();
        prop_assert!(lo.bits_per_s_per_hz() >= 0.0);
        prop_assert!(hi.bits_per_s_per_hz() >= lo.bits_per_s_per_hz() - 1e-12);
    }

    #[test]
    fn normalization_is_idempotent_and_scale_free(csi in arb_csi(6), scale in 0.01..100.0f64) {
        prop_assume!(csi.mean_power() > 1e-9);
        let n = normalize_csi(&csi).unwrap();
        let (m, nr, nt) = n.shape();
        let frob = n.entries().iter().map(|e| e.norm_sqr()).sum::<f64>() / m as f64;
        prop_assert!((frob - (nr * nt) as f64).abs() < 1e-9);
        let twice = normalize_csi(&n).unwrap();
        let scaled = normalize_csi(&csi.scaled(scale)).unwrap();
        for ((a, b), c) in n.entries().iter().zip(twice.entries()).zip(scaled.entries()) {
            prop_assert!((a - b).norm() < 1e-12);
            prop_assert!((a - c).norm() < 1e-9);
        }
    }

    #[test]
    fn synthesized_csi_is_finite_and_deterministic(seed in 0u64..50, o in arb_orientation()) {
        let params = SceneParams { num_subcarriers: 4, ..SceneParams::default() };
        let scene = make_scene_with(Scenario::S, seed, &params).unwrap();
        let a = synthesize_csi(&scene, &o).unwrap();
        prop_assert!(a.is_finite());
        prop_assert_eq!(a.shape(), (4, 2, 2));
        prop_assert_eq!(a, synthesize_csi(&scene, &o).unwrap());
    }

    #[test]
    fn gp_variance_stays_within_prior(
        xs in prop::collection::vec(arb_orientation(), 1..8),
        ys in prop::collection::vec(0.0..12.0f64, 8),
        q in arb_orientation(),
    ) {
        let ys = &ys[..xs.len()];
        let model = gp_fit(&xs, ys, &GpHyperparams::default_for(4)).unwrap();
        let (mean, var) = model.predict(&q).unwrap();
        let (_, scale) = model.standardization();
        prop_assert!(mean.is_finite());
        prop_assert!(var >= 0.0);
        prop_assert!(var <= scale * scale * model.hyper().signal_variance * (1.0 + 1e-12));
    }

    #[test]
    fn sobol_points_lie_in_unit_cube_and_resume(dim in 1usize..=8, skip in 0u64..500) {
        let mut full = SobolState::new(dim).unwrap();
        for _ in 0..skip {
            full.next_point().unwrap();
        }
        let mut resumed = SobolState::starting_at(dim, skip).unwrap();
        for _ in 0..16 {
            let p = full.next_point().unwrap();
            prop_assert!(p.iter().all(|x| (0.0..1.0).contains(x)));
            prop_assert_eq!(p, resumed.next_point().unwrap());
        }
    }

    #[test]
    fn trace_roundtrip_is_exact(
        tensors in (1usize..=3, 1usize..=3)
            .prop_flat_map(|(m, nt)| prop::collection::vec(arb_csi_shaped(m, 2, nt), 1..4)),
        angles in prop::collection::vec((0u32..360, 0u32..=180), 4),
        snr_db in -10.0..40.0f64,
    ) {
        let grid: Vec<_> = tensors
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let o = OrientationConfig::from_degrees([
                    (angles[i].0 as f64, angles[i].1 as f64),
                    (i as f64, 0.0),
                ])
                .unwrap();
                (o, t)
            })
            .collect();
        let trace = CsiTrace::new(grid, snr_db, "prop").unwrap();
        let back = parse_trace(&write_trace(&trace)).unwrap();
        prop_assert_eq!(back.grid, trace.grid);
        prop_assert_eq!(back.snr_db, trace.snr_db);
    }

    #[test]
    fn config_roundtrips(
        budget in 8usize..500,
        replications in 1usize..100,
        seed in any::<u64>(),
        beta in 0.0..20.0f64,
        snr_db in -10.0..40.0f64,
    ) {
        let c = ExperimentConfig { budget, replications, base_seed: seed, beta, snr_db, ..ExperimentConfig::default() };
        prop_assert_eq!(parse_experiment_config(&c.to_kv_string()).unwrap(), c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn best_so_far_is_running_max(which in 0usize..3, budget in 1usize..20, seed in any::<u64>()) {
        let params = SceneParams { num_subcarriers: 4, ..SceneParams::default() };
        let scene = make_scene_with(Scenario::V, 2, &params).unwrap();
        let mut env = simulated_env(scene, SnrLinear::from_db(20.0).unwrap(), 316.0, 2, seed).unwrap();
        let strategy = SearchStrategy::ALL[which];
        let sp = StrategyParams { candidates: 64, n_init: budget.min(8), ..StrategyParams::default_for(4) };
        let t = run_optimizer(strategy, &mut env, budget, &sp, seed).unwrap();
        prop_assert_eq!(t.len(), budget);
        let mut best = f64::NEG_INFINITY;
        for (s, b) in t.samples.iter().zip(&t.best_so_far) {
            best = best.max(s.capacity.bits_per_s_per_hz());
            prop_assert_eq!(best, *b);
        }
        for (i, s) in t.samples.iter().enumerate() {
            prop_assert_eq!(s.trial, i + 1);
        }
    }
}
