use std::fs;
use std::path::PathBuf;

use antenna_tuner::capacity::SnrLinear;
use antenna_tuner::channel::{make_scene_with, Scenario, Scene, SceneParams};
use antenna_tuner::environment::{
    grid_points, parse_trace, simulated_env, trace_env, write_trace, CsiTrace, Environment,
};
use antenna_tuner::geometry::OrientationConfig;
use antenna_tuner::harness::{parse_experiment_config, read_convergence_csv};

/// Seed files named `reject_*` are malformed on purpose.
fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fuzz/corpus")
        .join(target);
    let mut seeds: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    seeds.sort();
    seeds.retain(|(name, _)| !name.rsplit('/').next().unwrap().starts_with("reject_"));
    assert!(!seeds.is_empty(), "no seeds in {}", dir.display());
    seeds
}

fn rejects(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fuzz/corpus")
        .join(target);
    fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            p.file_name()
                .unwrap()
                .to_str()
                .unwrap()
                .starts_with("reject_")
        })
        .map(|p| fs::read_to_string(p).unwrap())
        .collect()
}

#[test]
fn replayed_trace_matches_simulator() {
    let params = SceneParams {
        num_subcarriers: 8,
        ..SceneParams::default()
    };
    let scene = make_scene_with(Scenario::S, 6, &params).unwrap();
    let env = simulated_env(scene, SnrLinear::from_db(20.0).unwrap(), 316.0, 1, 0).unwrap();
    let points = grid_points(&env.domain(), 60.0, 1_000_000).unwrap();
    let grid: Vec<_> = points
        .into_iter()
        .map(|o| {
            let csi = env.csi(&o).unwrap();
            (o, csi)
        })
        .collect();
    let trace = CsiTrace::new(grid, 20.0, "sim").unwrap();
    let mut replay = trace_env(parse_trace(&write_trace(&trace)).unwrap()).unwrap();

    for (o, _) in &trace.grid {
        let sim = env.ground_truth(o).unwrap().bits_per_s_per_hz();
        let rep = replay.evaluate(o).unwrap().capacity.bits_per_s_per_hz();
        assert!((sim - rep).abs() < 1e-9, "{sim} vs {rep}");
    }
    // Off-grid queries snap to the nearest recorded orientation.
    let near = OrientationConfig::from_degrees([(62.0, 58.0), (178.0, 121.0)]).unwrap();
    let snapped = OrientationConfig::from_degrees([(60.0, 60.0), (180.0, 120.0)]).unwrap();
    assert_eq!(
        replay.evaluate(&near).unwrap().capacity,
        replay.evaluate(&snapped).unwrap().capacity
    );
}

#[test]
fn fuzz_seeds_roundtrip() {
    for (name, text) in corpus("csi_trace") {
        let trace = parse_trace(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_trace(&write_trace(&trace)).unwrap().grid, trace.grid);
    }
    for (name, text) in corpus("experiment_config") {
        let c = parse_experiment_config(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_experiment_config(&c.to_kv_string()).unwrap(), c);
    }
    for (name, text) in corpus("scene_kv") {
        let s = Scene::from_kv_str(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(Scene::from_kv_str(&s.to_kv_string()).unwrap(), s);
    }
    for (name, text) in corpus("convergence_csv") {
        read_convergence_csv(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for text in rejects("csi_trace") {
        assert!(parse_trace(&text).is_err());
    }
    for text in rejects("experiment_config") {
        assert!(parse_experiment_config(&text).is_err());
    }
    for text in rejects("convergence_csv") {
        assert!(read_convergence_csv(&text).is_err());
    }
}

#[test]
fn reference_config_is_the_default() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/reference.conf");
    let text = fs::read_to_string(path).unwrap();
    let config = parse_experiment_config(&text).unwrap();
    assert_eq!(config, antenna_tuner::harness::ExperimentConfig::default());
    assert_eq!(config.to_kv_string(), text);
}
