//! Search strategies: GP-UCB Bayesian optimization and the uniform-random and
//! Sobol baselines, all spending a fixed evaluation budget on an
//! [`Environment`](crate::environment::Environment).

pub mod acquisition;
pub mod gp;
pub mod search;
pub mod sobol;

pub use acquisition::{best_candidate, propose_next, ucb_score};
pub use gp::{
    gp_fit, gp_fit_with_length_scale_search, gp_predict, kernel_matrix, se_kernel, GpHyperparams,
    GpModel,
};
pub use search::{
    run_optimizer, scale_to_domain, OptimizationTrace, Strategy, StrategyParams, TraceSample,
};
pub use sobol::{SobolState, MAX_DIMENSION};
