use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::environment::{grid_oracle, Environment, OracleResult, SimulatedEnv, TraceEnv};
use crate::error::Result;
use crate::optimizer::{run_optimizer, OptimizationTrace, Strategy};

/// An environment that can hand out independent copies for parallel
/// replications.
pub trait ReplicableEnv: Environment + Send + Sync {
    /// Copy with its noise stream keyed by `seed`.
    fn replica(&self, seed: u64) -> Self
    where
        Self: Sized;
}

impl ReplicableEnv for SimulatedEnv {
    fn replica(&self, seed: u64) -> Self {
        self.reseeded(seed)
    }
}

impl ReplicableEnv for TraceEnv {
    fn replica(&self, _seed: u64) -> Self {
        self.clone()
    }
}

/// 64-bit FNV-1a.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `base ⊕ splitmix64(fnv1a("label/replication"))`.
///
/// Strategy labels hash independently, so adding or removing a strategy
/// leaves the other strategies' streams untouched.
pub fn derive_seed(base: u64, label: &str, replication: usize) -> u64 {
    base ^ splitmix64(fnv1a(format!("{label}/{replication}").as_bytes()))
}

/// Measurement-noise seed for a replication, shared by all strategies so that
/// replications are paired.
pub fn environment_seed(base: u64, replication: usize) -> u64 {
    derive_seed(base, "environment", replication)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategySummary {
    pub strategy: Strategy,
    /// Per-trial mean of best-so-far across replications, bits/s/Hz.
    pub mean: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
}

impl StrategySummary {
    /// Normal-approximation 95% interval, `mean ± 1.96·sd/√n`.
    pub fn from_traces<'a>(
        strategy: Strategy,
        traces: impl IntoIterator<Item = &'a OptimizationTrace>,
    ) -> StrategySummary {
        let curves: Vec<&[f64]> = traces
            .into_iter()
            .map(|t| t.best_so_far.as_slice())
            .collect();
        let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
        let n = curves.len() as f64;
        let mut mean = Vec::with_capacity(len);
        let mut ci_low = Vec::with_capacity(len);
        let mut ci_high = Vec::with_capacity(len);
        for t in 0..len {
            let m = curves.iter().map(|c| c[t]).sum::<f64>() / n;
            let half = if curves.len() > 1 {
                let var = curves.iter().map(|c| (c[t] - m).powi(2)).sum::<f64>() / (n - 1.0);
                1.96 * (var / n).sqrt()
            } else {
                0.0
            };
            mean.push(m);
            ci_low.push(m - half);
            ci_high.push(m + half);
        }
        StrategySummary {
            strategy,
            mean,
            ci_low,
            ci_high,
        }
    }

    /// Mean best-so-far after `trial` evaluations (1-based).
    pub fn mean_at(&self, trial: usize) -> Option<f64> {
        trial.checked_sub(1).and_then(|i| self.mean.get(i)).copied()
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub strategy: Strategy,
    /// 0-based.
    pub replication: usize,
    pub trace: OptimizationTrace,
}

#[derive(Debug, Clone)]
pub struct ComparisonResult {
    pub config: ExperimentConfig,
    /// Grouped by strategy in config order, then by replication.
    pub runs: Vec<RunRecord>,
    pub summaries: Vec<StrategySummary>,
    pub oracle: Option<OracleResult>,
    pub environment: String,
}

impl ComparisonResult {
    pub fn summary(&self, strategy: Strategy) -> Option<&StrategySummary> {
        self.summaries.iter().find(|s| s.strategy == strategy)
    }

    pub fn traces(&self, strategy: Strategy) -> impl Iterator<Item = &OptimizationTrace> {
        self.runs
            .iter()
            .filter(move |r| r.strategy == strategy)
            .map(|r| &r.trace)
    }
}

/// Runs every (strategy, replication) pair of `config` against replicas of
/// `env`. Output is independent of thread count.
pub fn compare_on<E: ReplicableEnv>(
    config: &ExperimentConfig,
    env: &E,
) -> Result<ComparisonResult> {
    config.validate()?;
    let params = config.strategy_params();
    let jobs: Vec<(Strategy, usize)> = config
        .strategies
        .iter()
        .flat_map(|s| (0..config.replications).map(move |r| (*s, r)))
        .collect();
    let runs = jobs
        .into_par_iter()
        .map(|(strategy, replication)| {
            let mut replica = env.replica(environment_seed(config.base_seed, replication));
            let seed = derive_seed(config.base_seed, strategy.name(), replication);
            let trace = run_optimizer(strategy, &mut replica, config.budget, &params, seed)?;
            Ok(RunRecord {
                strategy,
                replication,
                trace,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summaries = config
        .strategies
        .iter()
        .map(|s| {
            StrategySummary::from_traces(
                *s,
                runs.iter().filter(|r| r.strategy == *s).map(|r| &r.trace),
            )
        })
        .collect();
    let oracle = if config.oracle {
        Some(grid_oracle(env, config.oracle_step_deg, config.oracle_cap)?)
    } else {
        None
    };
    Ok(ComparisonResult {
        config: config.clone(),
        runs,
        summaries,
        oracle,
        environment: env.metadata(),
    })
}

/// Builds the simulated scene of `config` and runs the comparison without
/// writing anything.
pub fn compute_comparison(config: &ExperimentConfig) -> Result<ComparisonResult> {
    config.validate()?;
    let env = config.build_env(config.base_seed)?;
    compare_on(config, &env)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_depend_on_label_and_replication() {
        let a = derive_seed(42, "bayesopt", 0);
        assert_eq!(a, derive_seed(42, "bayesopt", 0));
        assert_ne!(a, derive_seed(42, "bayesopt", 1));
        assert_ne!(a, derive_seed(42, "random", 0));
        assert_ne!(a, derive_seed(43, "bayesopt", 0));
        assert_eq!(fnv1a(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a(b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn summary_interval() {
        let mk = |v: Vec<f64>| OptimizationTrace {
            strategy: Strategy::Random,
            seed: 0,
            samples: Vec::new(),
            best_so_far: v,
        };
        let traces = [mk(vec![1.0, 2.0]), mk(vec![3.0, 4.0])];
        let s = StrategySummary::from_traces(Strategy::Random, &traces);
        assert_eq!(s.mean, vec![2.0, 3.0]);
        let half = 1.96 * (2.0f64 / 2.0).sqrt();
        assert!((s.ci_high[0] - 2.0 - half).abs() < 1e-12);
        assert!((2.0 - s.ci_low[0] - half).abs() < 1e-12);
        assert_eq!(s.mean_at(2), Some(3.0));
        assert_eq!(s.mean_at(0), None);
        let one = StrategySummary::from_traces(Strategy::Random, &traces[..1]);
        assert_eq!(one.ci_low, one.mean);
    }

    #[test]
    fn counts_and_order() {
        let config = ExperimentConfig {
            budget: 9,
            replications: 3,
            candidates: 64,
            scene: crate::channel::SceneParams {
                num_subcarriers: 8,
                ..Default::default()
            },
            ..ExperimentConfig::default()
        };
        let r = compute_comparison(&config).unwrap();
        assert_eq!(r.runs.len(), 9);
        assert!(r.runs.iter().all(|run| run.trace.len() == 9));
        let order: Vec<(Strategy, usize)> =
            r.runs.iter().map(|x| (x.strategy, x.replication)).collect();
        assert_eq!(order[0], (Strategy::BayesOpt, 0));
        assert_eq!(order[3], (Strategy::Random, 0));
        assert_eq!(order[8], (Strategy::Sobol, 2));
        assert_eq!(r.summaries.len(), 3);
    }
}
