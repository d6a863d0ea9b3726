//! Gaussian-process surrogate over orientation space.
//!
//! Squared-exponential kernel on the yaw-wrapped distance, targets z-scored
//! before fitting. Predictions come back in the caller's units.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{config_distance, distance_sq_unchecked, OrientationConfig};

/// Kernel and likelihood settings. Length scales are radians, one per search
/// dimension; variances refer to standardized targets.
#[derive(Debug, Clone, PartialEq)]
pub struct GpHyperparams {
    pub length_scales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub jitter: f64,
}

impl GpHyperparams {
    /// 0.5 rad length scales, unit signal variance, 0.01 noise, 1e-8 jitter.
    pub fn default_for(dims: usize) -> Self {
        GpHyperparams {
            length_scales: vec![0.5; dims],
            signal_variance: 1.0,
            noise_variance: 0.01,
            jitter: 1e-8,
        }
    }

    pub fn validate(&self, dims: usize) -> Result<()> {
        if self.length_scales.len() != dims {
            return Err(Error::domain(format!(
                "expected {dims} length scales, got {}",
                self.length_scales.len()
            )));
        }
        if self
            .length_scales
            .iter()
            .any(|l| !(l.is_finite() && *l > 0.0))
        {
            return Err(Error::domain("length scales must be positive"));
        }
        if !(self.signal_variance.is_finite() && self.signal_variance > 0.0) {
            return Err(Error::domain("signal variance must be positive"));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(Error::domain("noise variance must be nonnegative"));
        }
        if !(self.jitter.is_finite() && self.jitter >= 0.0) {
            return Err(Error::domain("jitter must be nonnegative"));
        }
        Ok(())
    }
}

/// `signal_variance · exp(−½ · d²)` with `d` the length-scaled, yaw-wrapped
/// distance.
pub fn se_kernel(
    a: &OrientationConfig,
    b: &OrientationConfig,
    hyper: &GpHyperparams,
) -> Result<f64> {
    let d = config_distance(a, b, &hyper.length_scales)?;
    Ok(hyper.signal_variance * (-0.5 * d * d).exp())
}

fn kernel_unchecked(a: &OrientationConfig, b: &OrientationConfig, hyper: &GpHyperparams) -> f64 {
    hyper.signal_variance * (-0.5 * distance_sq_unchecked(a, b, &hyper.length_scales)).exp()
}

/// Symmetric kernel matrix, row-major.
pub fn kernel_matrix(inputs: &[OrientationConfig], hyper: &GpHyperparams) -> Vec<f64> {
    let n = inputs.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = hyper.signal_variance;
        for j in 0..i {
            let v = kernel_unchecked(&inputs[i], &inputs[j], hyper);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Lower Cholesky factor of a row-major SPD matrix, or `None` on a
/// non-positive pivot.
fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for p in 0..j {
            d -= l[j * n + p] * l[j * n + p];
        }
        if !(d > 0.0 && d.is_finite()) {
            return None;
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for p in 0..j {
                s -= l[i * n + p] * l[j * n + p];
            }
            l[i * n + j] = s / ljj;
        }
    }
    Some(l)
}

/// Solves `L x = b` in place.
fn forward_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * n + p] * b[p];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solves `Lᵀ x = b` in place.
fn backward_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for p in (i + 1)..n {
            s -= l[p * n + i] * b[p];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Fitted surrogate.
#[derive(Debug, Clone)]
pub struct GpModel {
    inputs: Vec<OrientationConfig>,
    targets: Vec<f64>,
    y_mean: f64,
    y_scale: f64,
    hyper: GpHyperparams,
    jitter_used: f64,
    chol: Vec<f64>,
    alpha: Vec<f64>,
}

const JITTER_DECADES: i32 = 3;

/// Fits the GP. On factorization failure the jitter is raised one decade at a
/// time, at most three times (starting from 1e-10 when the configured jitter is
/// zero).
pub fn gp_fit(x: &[OrientationConfig], y: &[f64], hyper: &GpHyperparams) -> Result<GpModel> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::domain(format!(
            "need matching nonempty inputs and targets, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("targets must be finite"));
    }
    let dims = x[0].dims();
    if x.iter().any(|c| c.dims() != dims) {
        return Err(Error::domain("inputs must share one antenna count"));
    }
    hyper.validate(dims)?;

    let n = x.len();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n as f64;
    let y_scale = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    let z: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_scale).collect();

    let base = kernel_matrix(x, hyper);
    let mut jitter = hyper.jitter;
    let mut attempt = 0;
    let chol = loop {
        let mut k = base.clone();
        for i in 0..n {
            k[i * n + i] += hyper.noise_variance + jitter;
        }
        if let Some(l) = cholesky(&k, n) {
            break l;
        }
        if attempt == JITTER_DECADES {
            return Err(Error::Conditioning { max_jitter: jitter });
        }
        attempt += 1;
        jitter = if jitter > 0.0 { jitter * 10.0 } else { 1e-10 };
    };

    let mut alpha = z;
    forward_solve(&chol, n, &mut alpha);
    backward_solve(&chol, n, &mut alpha);

    Ok(GpModel {
        inputs: x.to_vec(),
        targets: y.to_vec(),
        y_mean,
        y_scale,
        hyper: hyper.clone(),
        jitter_used: jitter,
        chol,
        alpha,
    })
}

impl GpModel {
    /// A model with no observations: predicts the prior everywhere.
    pub fn prior(hyper: &GpHyperparams) -> Self {
        GpModel {
            inputs: Vec::new(),
            targets: Vec::new(),
            y_mean: 0.0,
            y_scale: 1.0,
            hyper: hyper.clone(),
            jitter_used: hyper.jitter,
            chol: Vec::new(),
            alpha: Vec::new(),
        }
    }

    pub fn inputs(&self) -> &[OrientationConfig] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn hyper(&self) -> &GpHyperparams {
        &self.hyper
    }

    /// Jitter actually added to the diagonal after any escalation.
    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// Lower-triangular factor of `K + (noise + jitter)·I`, row-major.
    pub fn chol_factor(&self) -> &[f64] {
        &self.chol
    }

    /// `(K + (noise + jitter)·I)⁻¹ z` for the standardized targets `z`.
    pub fn weights(&self) -> &[f64] {
        &self.alpha
    }

    pub fn standardization(&self) -> (f64, f64) {
        (self.y_mean, self.y_scale)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn check_query(&self, x: &OrientationConfig) -> Result<()> {
        if x.dims() != self.hyper.length_scales.len() {
            return Err(Error::domain(format!(
                "query has {} dimensions, model expects {}",
                x.dims(),
                self.hyper.length_scales.len()
            )));
        }
        Ok(())
    }

    /// Posterior mean and variance in standardized units.
    pub fn predict_standardized(&self, x: &OrientationConfig) -> Result<(f64, f64)> {
        self.check_query(x)?;
        Ok(self.predict_standardized_unchecked(x))
    }

    pub(crate) fn predict_standardized_unchecked(&self, x: &OrientationConfig) -> (f64, f64) {
        let n = self.inputs.len();
        if n == 0 {
            return (0.0, self.hyper.signal_variance);
        }
        let mut v: Vec<f64> = self
            .inputs
            .iter()
            .map(|xi| kernel_unchecked(xi, x, &self.hyper))
            .collect();
        let mean = v.iter().zip(&self.alpha).map(|(k, a)| k * a).sum::<f64>();
        forward_solve(&self.chol, n, &mut v);
        let var = self.hyper.signal_variance - v.iter().map(|x| x * x).sum::<f64>();
        (mean, var.max(0.0))
    }

    /// Posterior mean and variance in target units.
    pub fn predict(&self, x: &OrientationConfig) -> Result<(f64, f64)> {
        let (m, v) = self.predict_standardized(x)?;
        Ok((
            self.y_mean + self.y_scale * m,
            self.y_scale * self.y_scale * v,
        ))
    }

    /// Log marginal likelihood of the standardized targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.inputs.len();
        if n == 0 {
            return 0.0;
        }
        let fit: f64 = self
            .targets
            .iter()
            .map(|y| (y - self.y_mean) / self.y_scale)
            .zip(&self.alpha)
            .map(|(z, a)| z * a)
            .sum();
        let log_det: f64 = (0..n).map(|i| self.chol[i * n + i].ln()).sum();
        -0.5 * fit - log_det - 0.5 * n as f64 * (2.0 * PI).ln()
    }
}

/// Free-function form of [`GpModel::predict`].
pub fn gp_predict(model: &GpModel, x: &OrientationConfig) -> Result<(f64, f64)> {
    model.predict(x)
}

/// Fits with every combination of {½, 1, 2} × each base length scale and
/// keeps the one with the highest log marginal likelihood (first wins ties).
pub fn gp_fit_with_length_scale_search(
    x: &[OrientationConfig],
    y: &[f64],
    hyper: &GpHyperparams,
) -> Result<GpModel> {
    const FACTORS: [f64; 3] = [0.5, 1.0, 2.0];
    let dims = hyper.length_scales.len();
    let combos = 3usize.pow(dims as u32);
    let mut best: Option<(f64, GpModel)> = None;
    for c in 0..combos {
        let mut h = hyper.clone();
        let mut code = c;
        for l in h.length_scales.iter_mut() {
            *l *= FACTORS[code % 3];
            code /= 3;
        }
        let model = match gp_fit(x, y, &h) {
            Ok(m) => m,
            Err(Error::Conditioning { .. }) => continue,
            Err(e) => return Err(e),
        };
        let lml = model.log_marginal_likelihood();
        if best.as_ref().is_none_or(|(b, _)| lml > *b) {
            best = Some((lml, model));
        }
    }
    best.map(|(_, m)| m).ok_or(Error::Conditioning {
        max_jitter: hyper.jitter,
    })
}
