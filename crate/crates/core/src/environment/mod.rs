//! Evaluation boundary between search strategies and channels.
//!
//! An [`Environment`] takes an RX orientation, measures, and returns a
//! capacity. Two backends exist: a live simulator over a [`Scene`] and a
//! replay of recorded CSI. [`grid_oracle`] brute-forces either one.

mod oracle;
mod trace;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::capacity::{rssi_scored_capacity, CapacityValue, SnrLinear};
use crate::channel::{noisy_snapshot, ChannelBasis, CsiTensor, Scene};
use crate::error::{Error, Result};
use crate::geometry::{OrientationConfig, SearchDomain};

pub use oracle::{grid_axis_values, grid_oracle, grid_points, OracleResult, DEFAULT_ORACLE_CAP};
pub use trace::{load_trace, parse_trace, trace_env, write_trace, CsiTrace, TraceEnv};

/// Noise floor used when converting received power to SNR.
pub const DEFAULT_NOISE_FLOOR_DBM: f64 = -94.0;

/// One scored measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitySample {
    pub orientation: OrientationConfig,
    pub capacity: CapacityValue,
    pub snapshots_used: usize,
    pub snr: SnrLinear,
    pub trial_tag: Option<String>,
}

/// "Set orientation → measure → score".
pub trait Environment {
    /// Measures at `orientation`. May be noisy and may advance internal state.
    fn evaluate(&mut self, orientation: &OrientationConfig) -> Result<CapacitySample>;

    /// Noise-free capacity at `orientation`, for oracles and tests.
    fn ground_truth(&self, orientation: &OrientationConfig) -> Result<CapacityValue>;

    fn domain(&self) -> SearchDomain;

    fn metadata(&self) -> String;
}

impl<E: Environment + ?Sized> Environment for &mut E {
    fn evaluate(&mut self, orientation: &OrientationConfig) -> Result<CapacitySample> {
        (**self).evaluate(orientation)
    }

    fn ground_truth(&self, orientation: &OrientationConfig) -> Result<CapacityValue> {
        (**self).ground_truth(orientation)
    }

    fn domain(&self) -> SearchDomain {
        (**self).domain()
    }

    fn metadata(&self) -> String {
        (**self).metadata()
    }
}

/// Scores a capture, treating a capture with no received power as zero
/// capacity.
pub(crate) fn score_capture(
    snapshots: &[CsiTensor],
    reference_snr: SnrLinear,
    noise_floor_dbm: f64,
) -> Result<(CapacityValue, SnrLinear)> {
    match rssi_scored_capacity(snapshots, reference_snr, noise_floor_dbm) {
        Err(Error::Degenerate(_)) => {
            Ok((CapacityValue::new(0.0)?, SnrLinear::new(f64::MIN_POSITIVE)?))
        }
        other => other,
    }
}

/// Live simulator backend.
///
/// `reference_snr` is the SNR of a co-polarized LoS link at the nominal
/// separation; the SNR used for scoring follows the received power of each
/// capture, as it would when derived from RSSI.
#[derive(Debug, Clone)]
pub struct SimulatedEnv {
    scene: Arc<Scene>,
    basis: Arc<ChannelBasis>,
    reference_snr: SnrLinear,
    measurement_snr: f64,
    n_snapshots: usize,
    noise_floor_dbm: f64,
    seed: u64,
    rng: ChaCha8Rng,
}

pub fn simulated_env(
    scene: Scene,
    snr: SnrLinear,
    measurement_snr: f64,
    n_snapshots: usize,
    seed: u64,
) -> Result<SimulatedEnv> {
    if n_snapshots == 0 {
        return Err(Error::domain("n_snapshots must be at least 1"));
    }
    if !(measurement_snr.is_finite() && measurement_snr > 0.0) {
        return Err(Error::domain("measurement SNR must be positive"));
    }
    let basis = ChannelBasis::new(&scene)?;
    Ok(SimulatedEnv {
        scene: Arc::new(scene),
        basis: Arc::new(basis),
        reference_snr: snr,
        measurement_snr,
        n_snapshots,
        noise_floor_dbm: DEFAULT_NOISE_FLOOR_DBM,
        seed,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

impl SimulatedEnv {
    /// Same scene and settings, fresh noise stream. Shares the precomputed
    /// channel basis.
    pub fn reseeded(&self, seed: u64) -> SimulatedEnv {
        SimulatedEnv {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            ..self.clone()
        }
    }

    pub fn with_noise_floor(self, noise_floor_dbm: f64) -> SimulatedEnv {
        SimulatedEnv {
            noise_floor_dbm,
            ..self
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn reference_snr(&self) -> SnrLinear {
        self.reference_snr
    }

    /// Noiseless CSI at an orientation.
    pub fn csi(&self, orientation: &OrientationConfig) -> Result<CsiTensor> {
        self.basis.csi(orientation)
    }
}

impl Environment for SimulatedEnv {
    fn evaluate(&mut self, orientation: &OrientationConfig) -> Result<CapacitySample> {
        let clean = self.basis.csi(orientation)?;
        let snapshots = (0..self.n_snapshots)
            .map(|_| noisy_snapshot(&clean, self.measurement_snr, &mut self.rng))
            .collect::<Result<Vec<_>>>()?;
        let (capacity, snr) = score_capture(&snapshots, self.reference_snr, self.noise_floor_dbm)?;
        Ok(CapacitySample {
            orientation: orientation.clone(),
            capacity,
            snapshots_used: self.n_snapshots,
            snr,
            trial_tag: None,
        })
    }

    fn ground_truth(&self, orientation: &OrientationConfig) -> Result<CapacityValue> {
        let clean = self.basis.csi(orientation)?;
        Ok(score_capture(&[clean], self.reference_snr, self.noise_floor_dbm)?.0)
    }

    fn domain(&self) -> SearchDomain {
        SearchDomain::full(self.basis.num_rx())
    }

    fn metadata(&self) -> String {
        format!(
            "simulated: {} TX, {} RX, {} scatterers, reference SNR {:.1} dB, measurement SNR {:.1} dB, {} snapshots, seed {}",
            self.scene.num_tx(),
            self.scene.num_rx(),
            self.scene.scatterers.len(),
            self.reference_snr.to_db(),
            10.0 * self.measurement_snr.log10(),
            self.n_snapshots,
            self.seed
        )
    }
}
