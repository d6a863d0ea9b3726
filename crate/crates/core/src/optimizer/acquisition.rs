use rayon::prelude::*;

use super::gp::GpModel;
use crate::error::{Error, Result};
use crate::geometry::OrientationConfig;

/// Variance this far below zero is treated as rounding and clamped.
const VARIANCE_CLAMP: f64 = 1e-10;

/// Upper confidence bound `mean + √β · √variance`.
pub fn ucb_score(mean: f64, variance: f64, beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::domain("beta must be nonnegative"));
    }
    if variance < -VARIANCE_CLAMP || variance.is_nan() {
        return Err(Error::domain(format!("negative variance {variance}")));
    }
    Ok(mean + beta.sqrt() * variance.max(0.0).sqrt())
}

/// Index of the candidate with the highest UCB score (lowest index on ties).
/// Scores are computed on the standardized posterior, which ranks candidates
/// the same way as scores in target units.
pub fn best_candidate(
    model: &GpModel,
    candidates: &[OrientationConfig],
    beta: f64,
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::domain("no candidates to score"));
    }
    for c in candidates {
        model.predict_standardized(c)?;
    }
    let scores = candidates
        .par_iter()
        .map(|c| {
            let (m, v) = model.predict_standardized_unchecked(c);
            ucb_score(m, v, beta)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    Ok(best)
}

/// The UCB-maximizing candidate, snapped to `quantization` radians when given.
pub fn propose_next(
    model: &GpModel,
    candidates: &[OrientationConfig],
    beta: f64,
    quantization: Option<f64>,
) -> Result<OrientationConfig> {
    let chosen = &candidates[best_candidate(model, candidates, beta)?];
    match quantization {
        Some(step) => chosen.quantized(step),
        None => Ok(chosen.clone()),
    }
}
