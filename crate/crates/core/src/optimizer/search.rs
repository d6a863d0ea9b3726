use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::acquisition::propose_next;
use super::gp::{gp_fit, gp_fit_with_length_scale_search, GpHyperparams};
use super::sobol::SobolState;
use crate::capacity::CapacityValue;
use crate::environment::Environment;
use crate::error::{ConfigError, Error, Result};
use crate::geometry::{DimKind, OrientationConfig, SearchDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    BayesOpt,
    Random,
    Sobol,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::BayesOpt, Strategy::Random, Strategy::Sobol];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::BayesOpt => "bayesopt",
            Strategy::Random => "random",
            Strategy::Sobol => "sobol",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s.trim())
            .ok_or_else(|| Error::domain(format!("unknown strategy `{}`", s.trim())))
    }
}

/// Settings shared by the search strategies. Angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyParams {
    /// Sobol warm-up evaluations before the first GP fit (counted in the budget).
    pub n_init: usize,
    pub beta: f64,
    pub hyper: GpHyperparams,
    /// Candidates scored per acquisition step.
    pub candidates: usize,
    /// Servo resolution applied to every evaluated orientation.
    pub quantization: Option<f64>,
    /// Re-select length scales by marginal likelihood at every fit.
    pub learn_length_scales: bool,
}

impl StrategyParams {
    pub fn default_for(dims: usize) -> Self {
        StrategyParams {
            n_init: 8,
            beta: 4.0,
            hyper: GpHyperparams::default_for(dims),
            candidates: 4096,
            quantization: Some(1f64.to_radians()),
            learn_length_scales: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    /// 1-based.
    pub trial: usize,
    pub orientation: OrientationConfig,
    pub capacity: CapacityValue,
}

/// Ordered evaluation history with its running maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub strategy: Strategy,
    pub seed: u64,
    pub samples: Vec<TraceSample>,
    /// Running maximum of sample capacities, bits/s/Hz.
    pub best_so_far: Vec<f64>,
}

impl OptimizationTrace {
    fn new(strategy: Strategy, seed: u64, budget: usize) -> Self {
        OptimizationTrace {
            strategy,
            seed,
            samples: Vec::with_capacity(budget),
            best_so_far: Vec::with_capacity(budget),
        }
    }

    fn push(&mut self, orientation: OrientationConfig, capacity: CapacityValue) {
        let c = capacity.bits_per_s_per_hz();
        let best = self.best_so_far.last().map_or(c, |b| b.max(c));
        self.samples.push(TraceSample {
            trial: self.samples.len() + 1,
            orientation,
            capacity,
        });
        self.best_so_far.push(best);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample holding the final best value (earliest on ties).
    pub fn best(&self) -> Option<&TraceSample> {
        let target = *self.best_so_far.last()?;
        self.samples
            .iter()
            .find(|s| s.capacity.bits_per_s_per_hz() == target)
    }
}

/// Affine map of a unit point onto the domain, then yaw wrap and roll clamp.
pub fn scale_to_domain(u: &[f64], domain: &SearchDomain) -> Result<OrientationConfig> {
    if u.len() != domain.dims() {
        return Err(Error::domain(format!(
            "unit point has {} coordinates, domain has {}",
            u.len(),
            domain.dims()
        )));
    }
    let mut flat = Vec::with_capacity(u.len());
    for (x, b) in u.iter().zip(domain.bounds()) {
        if !(0.0..1.0).contains(x) {
            return Err(Error::domain(format!("unit coordinate {x} outside [0, 1)")));
        }
        if !(b.low < b.high) {
            return Err(Error::domain("domain bounds must satisfy low < high"));
        }
        let v = b.low + x * (b.high - b.low);
        flat.push(match b.kind {
            DimKind::Yaw => v,
            DimKind::Roll => v.min(b.high),
        });
    }
    OrientationConfig::from_flat(&flat)
}

fn place(u: &[f64], domain: &SearchDomain, params: &StrategyParams) -> Result<OrientationConfig> {
    let o = scale_to_domain(u, domain)?;
    match params.quantization {
        Some(step) => o.quantized(step),
        None => Ok(o),
    }
}

/// Runs one strategy for exactly `budget` evaluations.
///
/// * `Random` draws i.i.d. uniform points from a ChaCha8 stream seeded by `seed`.
/// * `Sobol` walks the unscrambled sequence from its first nonzero point; it
///   ignores `seed`.
/// * `BayesOpt` spends `n_init` trials on that same Sobol prefix, then fits
///   the GP and picks the UCB maximizer over a fresh candidate set each
///   trial. Candidate set `t` is the Sobol block starting at index
///   `t · candidates`, shifted by a seeded random rotation.
pub fn run_optimizer<E: Environment + ?Sized>(
    strategy: Strategy,
    env: &mut E,
    budget: usize,
    params: &StrategyParams,
    seed: u64,
) -> Result<OptimizationTrace> {
    if budget == 0 {
        return Err(ConfigError::Invalid {
            key: "budget".into(),
            reason: "must be at least 1".into(),
        }
        .into());
    }
    let domain = env.domain();
    let dims = domain.dims();
    let mut trace = OptimizationTrace::new(strategy, seed, budget);
    let mut evaluate = |o: OrientationConfig, trace: &mut OptimizationTrace| -> Result<()> {
        let sample = env.evaluate(&o)?;
        trace.push(o, sample.capacity);
        Ok(())
    };

    match strategy {
        Strategy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..budget {
                let u: Vec<f64> = (0..dims).map(|_| rng.random::<f64>()).collect();
                evaluate(place(&u, &domain, params)?, &mut trace)?;
            }
        }
        Strategy::Sobol => {
            let mut sobol = SobolState::new(dims)?;
            for _ in 0..budget {
                let u = sobol
                    .next_point()
                    .ok_or_else(|| Error::domain("Sobol sequence exhausted"))?;
                evaluate(place(&u, &domain, params)?, &mut trace)?;
            }
        }
        Strategy::BayesOpt => {
            if params.n_init == 0 {
                return Err(ConfigError::Invalid {
                    key: "n_init".into(),
                    reason: "must be at least 1".into(),
                }
                .into());
            }
            if budget < params.n_init {
                return Err(ConfigError::Invalid {
                    key: "budget".into(),
                    reason: format!("budget {budget} is below n_init {}", params.n_init),
                }
                .into());
            }
            if params.candidates == 0 {
                return Err(ConfigError::Invalid {
                    key: "candidates".into(),
                    reason: "must be at least 1".into(),
                }
                .into());
            }
            params.hyper.validate(dims)?;
            let mut warmup = SobolState::new(dims)?;
            for _ in 0..params.n_init {
                let u = warmup
                    .next_point()
                    .ok_or_else(|| Error::domain("Sobol sequence exhausted"))?;
                evaluate(place(&u, &domain, params)?, &mut trace)?;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for t in 0..(budget - params.n_init) {
                let x: Vec<OrientationConfig> = trace
                    .samples
                    .iter()
                    .map(|s| s.orientation.clone())
                    .collect();
                let y: Vec<f64> = trace
                    .samples
                    .iter()
                    .map(|s| s.capacity.bits_per_s_per_hz())
                    .collect();
                let model = if params.learn_length_scales {
                    gp_fit_with_length_scale_search(&x, &y, &params.hyper)?
                } else {
                    gp_fit(&x, &y, &params.hyper)?
                };
                let shift: Vec<f64> = (0..dims).map(|_| rng.random::<f64>()).collect();
                let candidates = candidate_set(&domain, params, t as u64, &shift)?;
                let next = propose_next(&model, &candidates, params.beta, params.quantization)?;
                evaluate(next, &mut trace)?;
            }
        }
    }
    Ok(trace)
}

fn candidate_set(
    domain: &SearchDomain,
    params: &StrategyParams,
    iteration: u64,
    shift: &[f64],
) -> Result<Vec<OrientationConfig>> {
    let count = params.candidates as u64;
    let start = iteration
        .checked_mul(count)
        .filter(|s| s + count < (1u64 << 32))
        .ok_or_else(|| Error::domain("candidate offsets exceed the Sobol sequence"))?;
    let mut sobol = SobolState::starting_at(domain.dims(), start)?;
    (0..count)
        .map(|_| {
            let raw = sobol
                .next_point()
                .ok_or_else(|| Error::domain("Sobol sequence exhausted"))?;
            let u: Vec<f64> = raw
                .iter()
                .zip(shift)
                .map(|(x, s)| {
                    let v = (x + s).fract();
                    if v >= 1.0 {
                        0.0
                    } else {
                        v
                    }
                })
                .collect();
            scale_to_domain(&u, domain)
        })
        .collect()
}
