use std::path::PathBuf;

use crate::capacity::SnrLinear;
use crate::channel::{make_scene_with, Scenario, Scene, SceneParams};
use crate::environment::{
    simulated_env, SimulatedEnv, DEFAULT_NOISE_FLOOR_DBM, DEFAULT_ORACLE_CAP,
};
use crate::error::{ConfigError, Result};
use crate::kv::{KvDocument, KvWriter};
use crate::optimizer::{GpHyperparams, Strategy, StrategyParams};

/// Everything needed to reproduce a comparison run. Angles and SNRs are in
/// degrees and dB, as in the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub scene_seed: u64,
    pub scene: SceneParams,
    pub snr_db: f64,
    pub measurement_snr_db: f64,
    pub n_snapshots: usize,
    pub noise_floor_dbm: f64,
    pub bandwidth_hz: f64,
    pub budget: usize,
    pub replications: usize,
    pub strategies: Vec<Strategy>,
    pub base_seed: u64,
    pub beta: f64,
    pub n_init: usize,
    /// One per search dimension (yaw1, roll1, yaw2, roll2).
    pub length_scales_deg: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub jitter: f64,
    pub learn_length_scales: bool,
    pub candidates: usize,
    /// Servo step; 0 disables quantization.
    pub quantization_deg: f64,
    pub oracle: bool,
    pub oracle_step_deg: f64,
    pub oracle_cap: u64,
    pub out_dir: PathBuf,
    pub svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let dims = 4;
        let hyper = GpHyperparams::default_for(dims);
        ExperimentConfig {
            scenario: Scenario::V,
            scene_seed: 1,
            scene: SceneParams::default(),
            snr_db: 20.0,
            measurement_snr_db: 25.0,
            n_snapshots: 10,
            noise_floor_dbm: DEFAULT_NOISE_FLOOR_DBM,
            bandwidth_hz: 20e6,
            budget: 50,
            replications: 10,
            strategies: Strategy::ALL.to_vec(),
            base_seed: 42,
            beta: 4.0,
            n_init: 8,
            length_scales_deg: hyper.length_scales.iter().map(|l| l.to_degrees()).collect(),
            signal_variance: hyper.signal_variance,
            noise_variance: hyper.noise_variance,
            jitter: hyper.jitter,
            learn_length_scales: false,
            candidates: 4096,
            quantization_deg: 1.0,
            oracle: false,
            oracle_step_deg: 15.0,
            oracle_cap: DEFAULT_ORACLE_CAP,
            out_dir: PathBuf::from("results"),
            svg: true,
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.into(),
    }
}

fn parse_strategies(key: &str, raw: &str) -> std::result::Result<Vec<Strategy>, ConfigError> {
    let mut out = Vec::new();
    for name in raw.split(',') {
        let s: Strategy = name.parse().map_err(|_| ConfigError::TypeMismatch {
            key: key.into(),
            expected: "a list drawn from bayesopt, random, sobol",
            found: raw.to_string(),
        })?;
        if out.contains(&s) {
            return Err(invalid(key, format!("`{s}` listed twice")));
        }
        out.push(s);
    }
    Ok(out)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = KvDocument::parse(text)?;
        let mut c = ExperimentConfig::default();
        const COUNT: &str = "a nonnegative integer";

        if let Some(v) = doc.take_str("scenario") {
            c.scenario = v.parse().map_err(|_| ConfigError::TypeMismatch {
                key: "scenario".into(),
                expected: "V or S",
                found: v,
            })?;
        }
        if let Some(v) = doc.take("scene_seed", COUNT)? {
            c.scene_seed = v;
        }
        if let Some(v) = doc.take("num_subcarriers", COUNT)? {
            c.scene.num_subcarriers = v;
        }
        if let Some(v) = doc.take_f64("subcarrier_spacing_hz")? {
            c.scene.subcarrier_spacing_hz = v;
        }
        if let Some(v) = doc.take_f64("carrier_freq_hz")? {
            c.scene.carrier_freq_hz = v;
        }
        if let Some(v) = doc.take("num_scatterers", COUNT)? {
            c.scene.num_scatterers = v;
        }
        if let Some(v) = doc.take_f64("los_k_factor_db")? {
            c.scene.los_k_factor_db = v;
        }
        if let Some(v) = doc.take_f64("separation_m")? {
            c.scene.separation_m = v;
        }
        if let Some(v) = doc.take_f64("antenna_spacing_m")? {
            c.scene.antenna_spacing_m = v;
        }
        if let Some(v) = doc.take_f64("antenna_height_m")? {
            c.scene.antenna_height_m = v;
        }
        if let Some(v) = doc.take_f64("snr_db")? {
            c.snr_db = v;
        }
        if let Some(v) = doc.take_f64("measurement_snr_db")? {
            c.measurement_snr_db = v;
        }
        if let Some(v) = doc.take("n_snapshots", COUNT)? {
            c.n_snapshots = v;
        }
        if let Some(v) = doc.take_f64("noise_floor_dbm")? {
            c.noise_floor_dbm = v;
        }
        if let Some(v) = doc.take_f64("bandwidth_hz")? {
            c.bandwidth_hz = v;
        }
        if let Some(v) = doc.take("budget", COUNT)? {
            c.budget = v;
        }
        if let Some(v) = doc.take("replications", COUNT)? {
            c.replications = v;
        }
        if let Some(v) = doc.take_str("strategies") {
            c.strategies = parse_strategies("strategies", &v)?;
        }
        if let Some(v) = doc.take("base_seed", COUNT)? {
            c.base_seed = v;
        }
        if let Some(v) = doc.take_f64("beta")? {
            c.beta = v;
        }
        if let Some(v) = doc.take("n_init", COUNT)? {
            c.n_init = v;
        }
        if let Some(v) = doc.take_f64_list("length_scales_deg")? {
            c.length_scales_deg = v;
        }
        if let Some(v) = doc.take_f64("signal_variance")? {
            c.signal_variance = v;
        }
        if let Some(v) = doc.take_f64("noise_variance")? {
            c.noise_variance = v;
        }
        if let Some(v) = doc.take_f64("jitter")? {
            c.jitter = v;
        }
        if let Some(v) = doc.take_bool("learn_length_scales")? {
            c.learn_length_scales = v;
        }
        if let Some(v) = doc.take("candidates", COUNT)? {
            c.candidates = v;
        }
        if let Some(v) = doc.take_f64("quantization_deg")? {
            c.quantization_deg = v;
        }
        if let Some(v) = doc.take_bool("oracle")? {
            c.oracle = v;
        }
        if let Some(v) = doc.take_f64("oracle_step_deg")? {
            c.oracle_step_deg = v;
        }
        if let Some(v) = doc.take("oracle_cap", COUNT)? {
            c.oracle_cap = v;
        }
        if let Some(v) = doc.take_str("out_dir") {
            c.out_dir = PathBuf::from(v);
        }
        if let Some(v) = doc.take_bool("svg")? {
            c.svg = v;
        }
        doc.finish()?;
        c.validate()?;
        Ok(c)
    }

    /// Checks every invariant, naming the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.budget < 1 {
            return Err(invalid("budget", "must be at least 1"));
        }
        if self.replications < 1 {
            return Err(invalid("replications", "must be at least 1"));
        }
        if self.strategies.is_empty() {
            return Err(invalid("strategies", "must name at least one strategy"));
        }
        if self.strategies.contains(&Strategy::BayesOpt) {
            if self.n_init < 1 {
                return Err(invalid("n_init", "must be at least 1"));
            }
            if self.budget < self.n_init {
                return Err(invalid(
                    "budget",
                    format!(
                        "must be at least n_init ({}) when bayesopt runs",
                        self.n_init
                    ),
                ));
            }
        }
        if self.n_snapshots < 1 {
            return Err(invalid("n_snapshots", "must be at least 1"));
        }
        if self.scene.num_subcarriers < 1 {
            return Err(invalid("num_subcarriers", "must be at least 1"));
        }
        let positive = [
            ("subcarrier_spacing_hz", self.scene.subcarrier_spacing_hz),
            ("carrier_freq_hz", self.scene.carrier_freq_hz),
            ("separation_m", self.scene.separation_m),
            ("bandwidth_hz", self.bandwidth_hz),
            ("beta", self.beta),
            ("signal_variance", self.signal_variance),
            ("oracle_step_deg", self.oracle_step_deg),
        ];
        for (key, v) in positive {
            if !(v > 0.0) {
                return Err(invalid(key, "must be positive"));
            }
        }
        let nonnegative = [
            ("antenna_spacing_m", self.scene.antenna_spacing_m),
            ("noise_variance", self.noise_variance),
            ("jitter", self.jitter),
            ("quantization_deg", self.quantization_deg),
        ];
        for (key, v) in nonnegative {
            if !(v >= 0.0) {
                return Err(invalid(key, "must be nonnegative"));
            }
        }
        if self.quantization_deg > 90.0 {
            return Err(invalid("quantization_deg", "must not exceed 90"));
        }
        if self.length_scales_deg.len() != 4 {
            return Err(invalid("length_scales_deg", "expected four values"));
        }
        if self.length_scales_deg.iter().any(|l| !(*l > 0.0)) {
            return Err(invalid("length_scales_deg", "values must be positive"));
        }
        if self.candidates < 1 || self.candidates > 1 << 20 {
            return Err(invalid("candidates", "must be between 1 and 1048576"));
        }
        if self.oracle_cap < 1 {
            return Err(invalid("oracle_cap", "must be at least 1"));
        }
        if self.out_dir.as_os_str().is_empty() {
            return Err(invalid("out_dir", "must not be empty"));
        }
        Ok(())
    }

    /// Full document; `parse(to_kv_string())` reproduces `self`.
    pub fn to_kv_string(&self) -> String {
        let names: Vec<&str> = self.strategies.iter().map(|s| s.name()).collect();
        let mut w = KvWriter::new();
        w.comment("scene")
            .entry("scenario", self.scenario)
            .entry("scene_seed", self.scene_seed)
            .entry("num_subcarriers", self.scene.num_subcarriers)
            .entry("subcarrier_spacing_hz", self.scene.subcarrier_spacing_hz)
            .entry("carrier_freq_hz", self.scene.carrier_freq_hz)
            .entry("num_scatterers", self.scene.num_scatterers)
            .entry("los_k_factor_db", self.scene.los_k_factor_db)
            .entry("separation_m", self.scene.separation_m)
            .entry("antenna_spacing_m", self.scene.antenna_spacing_m)
            .entry("antenna_height_m", self.scene.antenna_height_m)
            .comment("measurement")
            .entry("snr_db", self.snr_db)
            .entry("measurement_snr_db", self.measurement_snr_db)
            .entry("n_snapshots", self.n_snapshots)
            .entry("noise_floor_dbm", self.noise_floor_dbm)
            .entry("bandwidth_hz", self.bandwidth_hz)
            .comment("experiment")
            .entry("budget", self.budget)
            .entry("replications", self.replications)
            .entry("strategies", names.join(", "))
            .entry("base_seed", self.base_seed)
            .comment("optimizer")
            .entry("beta", self.beta)
            .entry("n_init", self.n_init)
            .list("length_scales_deg", &self.length_scales_deg)
            .entry("signal_variance", self.signal_variance)
            .entry("noise_variance", self.noise_variance)
            .entry("jitter", self.jitter)
            .entry("learn_length_scales", self.learn_length_scales)
            .entry("candidates", self.candidates)
            .entry("quantization_deg", self.quantization_deg)
            .comment("outputs")
            .entry("oracle", self.oracle)
            .entry("oracle_step_deg", self.oracle_step_deg)
            .entry("oracle_cap", self.oracle_cap)
            .entry("out_dir", self.out_dir.display())
            .entry("svg", self.svg);
        w.finish()
    }

    pub fn strategy_params(&self) -> StrategyParams {
        StrategyParams {
            n_init: self.n_init,
            beta: self.beta,
            hyper: GpHyperparams {
                length_scales: self
                    .length_scales_deg
                    .iter()
                    .map(|l| l.to_radians())
                    .collect(),
                signal_variance: self.signal_variance,
                noise_variance: self.noise_variance,
                jitter: self.jitter,
            },
            candidates: self.candidates,
            quantization: (self.quantization_deg > 0.0).then(|| self.quantization_deg.to_radians()),
            learn_length_scales: self.learn_length_scales,
        }
    }

    pub fn build_scene(&self) -> Result<Scene> {
        make_scene_with(self.scenario, self.scene_seed, &self.scene)
    }

    /// Simulator for this config, seeded with `seed`.
    pub fn build_env(&self, seed: u64) -> Result<SimulatedEnv> {
        let env = simulated_env(
            self.build_scene()?,
            SnrLinear::from_db(self.snr_db)?,
            10f64.powf(self.measurement_snr_db / 10.0),
            self.n_snapshots,
            seed,
        )?;
        Ok(env.with_noise_floor(self.noise_floor_dbm))
    }
}

pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    ExperimentConfig::parse(text)
}
