//! Geometric single-bounce channel simulator.
//!
//! A scene holds fixed TX dipoles, RX antenna positions and a set of point
//! scatterers. For a given RX orientation the per-subcarrier channel is the sum
//! of the line-of-sight ray and one ray per scatterer, each weighted by a
//! free-space amplitude, a delay phase and a short-dipole polarization
//! coupling. Scattered rays leak part of their energy into an
//! orientation-independent term controlled by the scatterer's depolarization.
//!
//! Amplitudes are expressed relative to a co-polarized LoS link at the nominal
//! TX–RX separation, so a perfectly aligned pure-LoS entry has magnitude close
//! to one. The scatterer statistics (room box, reflectivity and depolarization
//! ranges) are modelling choices, not measurements.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ConfigError, Error, Result};
use crate::geometry::{self, Axis3, OrientationConfig, Vec3};
use crate::kv::{KvDocument, KvWriter};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Coupling magnitude of the depolarized (orientation-independent) share of a
/// scattered ray.
const LEAK_COUPLING: f64 = 1.0;

/// TX antenna configuration under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Both TX elements vertical.
    V,
    /// Both TX elements tilted 45° in the plane facing the receiver, parallel.
    S,
}

impl Scenario {
    pub fn tx_axis(self) -> Axis3 {
        match self {
            Scenario::V => Axis3::VERTICAL,
            Scenario::S => Axis3 {
                x: 0.0,
                y: FRAC_1_SQRT_2,
                z: FRAC_1_SQRT_2,
            },
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::V => "V",
            Scenario::S => "S",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "V" | "v" => Ok(Scenario::V),
            "S" | "s" => Ok(Scenario::S),
            other => Err(Error::domain(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Knobs for [`make_scene_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub num_subcarriers: usize,
    pub subcarrier_spacing_hz: f64,
    pub carrier_freq_hz: f64,
    pub num_scatterers: usize,
    /// LoS to scattered power ratio, in dB.
    pub los_k_factor_db: f64,
    /// Distance between the TX and RX array centers, meters.
    pub separation_m: f64,
    /// Element spacing within each array, meters.
    pub antenna_spacing_m: f64,
    pub antenna_height_m: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            num_subcarriers: 56,
            subcarrier_spacing_hz: 312.5e3,
            carrier_freq_hz: 5.18e9,
            num_scatterers: 12,
            los_k_factor_db: 6.0,
            separation_m: 2.0,
            antenna_spacing_m: 0.06,
            antenna_height_m: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TxAntenna {
    pub position: Vec3,
    pub axis: Axis3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scatterer {
    pub position: Vec3,
    pub reflectivity: Complex64,
    /// Share of the re-radiated field that ignores polarization, in [0, 1].
    pub depolarization: f64,
}

/// Immutable propagation environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub tx_antennas: Vec<TxAntenna>,
    pub rx_positions: Vec<Vec3>,
    pub scatterers: Vec<Scatterer>,
    pub carrier_freq: f64,
    pub subcarrier_spacing: f64,
    pub num_subcarriers: usize,
    /// Linear Rician K-factor, referenced to unit-magnitude reflectivities.
    pub los_k_factor: f64,
}

// Scatterers are drawn uniformly inside this box (meters) and kept at least
// MIN_CLEARANCE from every antenna.
const ROOM_MIN: Vec3 = [-1.5, -2.5, 0.0];
const ROOM_MAX: Vec3 = [3.5, 2.5, 2.7];
const MIN_CLEARANCE: f64 = 0.5;

pub fn make_scene(scenario: Scenario, seed: u64) -> Scene {
    make_scene_with(scenario, seed, &SceneParams::default())
        .expect("default scene parameters are valid")
}

/// TX array at x = 0, RX array at x = separation, both elements offset along y
/// and facing each other. Scatterers come from a ChaCha8 stream seeded with
/// `seed`.
pub fn make_scene_with(scenario: Scenario, seed: u64, params: &SceneParams) -> Result<Scene> {
    let half = params.antenna_spacing_m / 2.0;
    let h = params.antenna_height_m;
    let d = params.separation_m;
    let axis = scenario.tx_axis();
    let tx_antennas = vec![
        TxAntenna {
            position: [0.0, -half, h],
            axis,
        },
        TxAntenna {
            position: [0.0, half, h],
            axis,
        },
    ];
    let rx_positions = vec![[d, -half, h], [d, half, h]];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scatterers = Vec::with_capacity(params.num_scatterers);
    while scatterers.len() < params.num_scatterers {
        let position: Vec3 = std::array::from_fn(|a| rng.random_range(ROOM_MIN[a]..ROOM_MAX[a]));
        let clear = tx_antennas
            .iter()
            .map(|t| t.position)
            .chain(rx_positions.iter().copied())
            .all(|p| geometry::norm(&geometry::sub(&position, &p)) >= MIN_CLEARANCE);
        if !clear {
            continue;
        }
        let magnitude: f64 = rng.random_range(0.7..1.0);
        let phase: f64 = rng.random_range(0.0..TAU);
        let depolarization: f64 = rng.random_range(0.7..1.0);
        scatterers.push(Scatterer {
            position,
            reflectivity: Complex64::from_polar(magnitude, phase),
            depolarization,
        });
    }

    let scene = Scene {
        tx_antennas,
        rx_positions,
        scatterers,
        carrier_freq: params.carrier_freq_hz,
        subcarrier_spacing: params.subcarrier_spacing_hz,
        num_subcarriers: params.num_subcarriers,
        los_k_factor: 10f64.powf(params.los_k_factor_db / 10.0),
    };
    scene.validate()?;
    Ok(scene)
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if self.num_subcarriers == 0 {
            return Err(Error::domain("scene needs at least one subcarrier"));
        }
        if !(self.carrier_freq.is_finite() && self.carrier_freq > 0.0) {
            return Err(Error::domain("carrier frequency must be positive"));
        }
        if !(self.subcarrier_spacing.is_finite() && self.subcarrier_spacing >= 0.0) {
            return Err(Error::domain("subcarrier spacing must be nonnegative"));
        }
        if !(self.los_k_factor.is_finite() && self.los_k_factor > 0.0) {
            return Err(Error::domain("K-factor must be positive and finite"));
        }
        if self.tx_antennas.is_empty() || self.rx_positions.is_empty() {
            return Err(Error::domain("scene needs TX and RX antennas"));
        }
        for tx in &self.tx_antennas {
            if (tx.axis.norm() - 1.0).abs() > 1e-6 {
                return Err(Error::domain("TX axis must be a unit vector"));
            }
            for rx in &self.rx_positions {
                if !(geometry::norm(&geometry::sub(rx, &tx.position)) > 0.0) {
                    return Err(Error::domain("TX and RX antennas must not be co-located"));
                }
            }
        }
        for (n, s) in self.scatterers.iter().enumerate() {
            if !(s.reflectivity.norm() <= 1.0 + 1e-12) {
                return Err(Error::domain(format!("scatterer {n}: |reflectivity| > 1")));
            }
            if !(0.0..=1.0).contains(&s.depolarization) {
                return Err(Error::domain(format!(
                    "scatterer {n}: depolarization outside [0, 1]"
                )));
            }
            let touching = self
                .tx_antennas
                .iter()
                .map(|t| &t.position)
                .chain(&self.rx_positions)
                .any(|p| !(geometry::norm(&geometry::sub(&s.position, p)) > 0.0));
            if touching {
                return Err(Error::domain(format!(
                    "scatterer {n} coincides with an antenna"
                )));
            }
        }
        Ok(())
    }

    pub fn num_tx(&self) -> usize {
        self.tx_antennas.len()
    }

    pub fn num_rx(&self) -> usize {
        self.rx_positions.len()
    }

    /// Frequency of subcarrier `k`, centered on the carrier.
    pub fn subcarrier_freq(&self, k: usize) -> f64 {
        self.carrier_freq
            + (k as f64 - (self.num_subcarriers as f64 - 1.0) / 2.0) * self.subcarrier_spacing
    }

    fn tx_center(&self) -> Vec3 {
        centroid(self.tx_antennas.iter().map(|t| t.position))
    }

    fn rx_center(&self) -> Vec3 {
        centroid(self.rx_positions.iter().copied())
    }

    /// Center-to-center TX–RX distance, the reference for all amplitudes.
    pub fn reference_distance(&self) -> f64 {
        geometry::norm(&geometry::sub(&self.rx_center(), &self.tx_center()))
    }

    /// Common gain on scattered rays: chosen from geometry alone so that
    /// unit-reflectivity scatterers with unit coupling carry 1/K of the LoS
    /// power between the array centers.
    fn scatter_gain(&self) -> f64 {
        let tc = self.tx_center();
        let rc = self.rx_center();
        let d_ref = self.reference_distance();
        let power: f64 = self
            .scatterers
            .iter()
            .map(|s| {
                let d1 = geometry::norm(&geometry::sub(&s.position, &tc));
                let d2 = geometry::norm(&geometry::sub(&rc, &s.position));
                (d_ref * d_ref / (d1 * d2)).powi(2)
            })
            .sum();
        if power > 0.0 {
            (1.0 / (self.los_k_factor * power)).sqrt()
        } else {
            0.0
        }
    }

    /// Ray list for one (rx, tx) antenna pair.
    fn rays(&self, rx: usize, tx: usize, gain: f64) -> Vec<Ray> {
        let t = &self.tx_antennas[tx];
        let r = self.rx_positions[rx];
        let u_tx = t.axis.to_array();
        let d_ref = self.reference_distance();

        let los = geometry::sub(&r, &t.position);
        let d = geometry::norm(&los);
        let k = geometry::scale(&los, 1.0 / d);
        let mut rays = vec![Ray {
            amplitude: Complex64::new(d_ref / d, 0.0),
            path_len: d,
            polarized: geometry::transverse(&u_tx, &k),
            depolarization: 0.0,
        }];

        for s in &self.scatterers {
            let leg1 = geometry::sub(&s.position, &t.position);
            let leg2 = geometry::sub(&r, &s.position);
            let d1 = geometry::norm(&leg1);
            let d2 = geometry::norm(&leg2);
            let k1 = geometry::scale(&leg1, 1.0 / d1);
            let k2 = geometry::scale(&leg2, 1.0 / d2);
            // Field at the scatterer is transverse to k1; it re-radiates
            // transverse to k2.
            let e1 = geometry::transverse(&u_tx, &k1);
            rays.push(Ray {
                amplitude: s.reflectivity * (gain * d_ref * d_ref / (d1 * d2)),
                path_len: d1 + d2,
                polarized: geometry::transverse(&e1, &k2),
                depolarization: s.depolarization,
            });
        }
        rays
    }
}

fn centroid(points: impl Iterator<Item = Vec3>) -> Vec3 {
    let mut sum = [0.0; 3];
    let mut n = 0usize;
    for p in points {
        for a in 0..3 {
            sum[a] += p[a];
        }
        n += 1;
    }
    geometry::scale(&sum, 1.0 / n as f64)
}

struct Ray {
    amplitude: Complex64,
    path_len: f64,
    /// Polarized coupling is `u_rx · polarized`.
    polarized: Vec3,
    depolarization: f64,
}

impl Ray {
    fn coupling(&self, u_rx: &Vec3) -> f64 {
        (1.0 - self.depolarization) * geometry::dot(u_rx, &self.polarized)
            + self.depolarization * LEAK_COUPLING
    }
}

/// Per-subcarrier complex channel matrices, stored subcarrier-major then
/// row-major: entry `(k, rx, tx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiTensor {
    m: usize,
    nr: usize,
    nt: usize,
    entries: Vec<Complex64>,
}

impl CsiTensor {
    pub fn new(m: usize, nr: usize, nt: usize, entries: Vec<Complex64>) -> Result<Self> {
        if m == 0 || nr == 0 || nt == 0 {
            return Err(Error::domain("CSI dimensions must be positive"));
        }
        if entries.len() != m * nr * nt {
            return Err(Error::domain(format!(
                "CSI shape ({m}, {nr}, {nt}) needs {} entries, got {}",
                m * nr * nt,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::domain("CSI entries must be finite"));
        }
        Ok(CsiTensor { m, nr, nt, entries })
    }

    pub fn zeros(m: usize, nr: usize, nt: usize) -> Self {
        CsiTensor {
            m,
            nr,
            nt,
            entries: vec![Complex64::new(0.0, 0.0); m * nr * nt],
        }
    }

    pub fn num_subcarriers(&self) -> usize {
        self.m
    }

    pub fn num_rx(&self) -> usize {
        self.nr
    }

    pub fn num_tx(&self) -> usize {
        self.nt
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.m, self.nr, self.nt)
    }

    pub fn get(&self, k: usize, rx: usize, tx: usize) -> Complex64 {
        self.entries[self.index(k, rx, tx)]
    }

    pub fn set(&mut self, k: usize, rx: usize, tx: usize, value: Complex64) {
        let i = self.index(k, rx, tx);
        self.entries[i] = value;
    }

    fn index(&self, k: usize, rx: usize, tx: usize) -> usize {
        assert!(
            k < self.m && rx < self.nr && tx < self.nt,
            "CSI index out of range"
        );
        (k * self.nr + rx) * self.nt + tx
    }

    /// Row-major `nr × nt` matrix of subcarrier `k`.
    pub fn subcarrier(&self, k: usize) -> &[Complex64] {
        let len = self.nr * self.nt;
        &self.entries[k * len..(k + 1) * len]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Mean of |h|² over every entry.
    pub fn mean_power(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.entries.len() as f64
    }

    pub fn scaled(&self, factor: f64) -> CsiTensor {
        CsiTensor {
            entries: self.entries.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.is_finite())
    }
}

fn check_rx_count(scene: &Scene, rx: &OrientationConfig) -> Result<()> {
    if rx.len() != scene.num_rx() {
        return Err(Error::domain(format!(
            "scene has {} RX antennas but orientation has {}",
            scene.num_rx(),
            rx.len()
        )));
    }
    Ok(())
}

/// Sums every ray for every (subcarrier, rx, tx) entry directly.
pub fn synthesize_csi(scene: &Scene, rx_orientations: &OrientationConfig) -> Result<CsiTensor> {
    check_rx_count(scene, rx_orientations)?;
    let (m, nr, nt) = (scene.num_subcarriers, scene.num_rx(), scene.num_tx());
    let gain = scene.scatter_gain();
    let axes: Vec<Vec3> = rx_orientations
        .axes()
        .iter()
        .map(|a| a.to_array())
        .collect();
    let mut csi = CsiTensor::zeros(m, nr, nt);
    for (i, u_rx) in axes.iter().enumerate() {
        for j in 0..nt {
            for ray in scene.rays(i, j, gain) {
                let weight = ray.amplitude * ray.coupling(u_rx);
                let delay = ray.path_len / SPEED_OF_LIGHT;
                for k in 0..m {
                    let phase = -TAU * scene.subcarrier_freq(k) * delay;
                    let h = csi.get(k, i, j) + weight * Complex64::from_polar(1.0, phase);
                    csi.set(k, i, j, h);
                }
            }
        }
    }
    Ok(csi)
}

/// Precomputed linear form of a scene's channel. Every entry is affine in the
/// RX axis, `H_k[i][j] = u_i · X_kij + Y_kij`, so evaluating a new orientation
/// costs O(M·N_r·N_t) regardless of the number of rays.
#[derive(Debug, Clone)]
pub struct ChannelBasis {
    m: usize,
    nr: usize,
    nt: usize,
    polarized: Vec<[Complex64; 3]>,
    leak: Vec<Complex64>,
}

impl ChannelBasis {
    pub fn new(scene: &Scene) -> Result<Self> {
        scene.validate()?;
        let (m, nr, nt) = (scene.num_subcarriers, scene.num_rx(), scene.num_tx());
        let gain = scene.scatter_gain();
        let zero = Complex64::new(0.0, 0.0);
        let mut polarized = vec![[zero; 3]; m * nr * nt];
        let mut leak = vec![zero; m * nr * nt];
        for i in 0..nr {
            for j in 0..nt {
                for ray in scene.rays(i, j, gain) {
                    let delay = ray.path_len / SPEED_OF_LIGHT;
                    let start = Complex64::from_polar(1.0, -TAU * scene.subcarrier_freq(0) * delay);
                    let step = Complex64::from_polar(1.0, -TAU * scene.subcarrier_spacing * delay);
                    let pol_w = ray.amplitude * (1.0 - ray.depolarization);
                    let leak_w = ray.amplitude * (ray.depolarization * LEAK_COUPLING);
                    let mut phasor = start;
                    for k in 0..m {
                        let idx = (k * nr + i) * nt + j;
                        for (acc, p) in polarized[idx].iter_mut().zip(&ray.polarized) {
                            *acc += pol_w * phasor * p;
                        }
                        leak[idx] += leak_w * phasor;
                        phasor *= step;
                    }
                }
            }
        }
        Ok(ChannelBasis {
            m,
            nr,
            nt,
            polarized,
            leak,
        })
    }

    pub fn num_rx(&self) -> usize {
        self.nr
    }

    pub fn csi(&self, rx_orientations: &OrientationConfig) -> Result<CsiTensor> {
        if rx_orientations.len() != self.nr {
            return Err(Error::domain(format!(
                "scene has {} RX antennas but orientation has {}",
                self.nr,
                rx_orientations.len()
            )));
        }
        let axes: Vec<Vec3> = rx_orientations
            .axes()
            .iter()
            .map(|a| a.to_array())
            .collect();
        let entries = self
            .polarized
            .iter()
            .zip(&self.leak)
            .enumerate()
            .map(|(idx, (x, y))| {
                let u = &axes[(idx / self.nt) % self.nr];
                x[0] * u[0] + x[1] * u[1] + x[2] * u[2] + y
            })
            .collect();
        Ok(CsiTensor {
            m: self.m,
            nr: self.nr,
            nt: self.nt,
            entries,
        })
    }
}

/// Adds i.i.d. circularly-symmetric complex Gaussian noise with per-entry
/// variance `mean(|h|²) / measurement_snr`.
pub fn noisy_snapshot<R: Rng + ?Sized>(
    csi: &CsiTensor,
    measurement_snr: f64,
    rng: &mut R,
) -> Result<CsiTensor> {
    if !(measurement_snr.is_finite() && measurement_snr > 0.0) {
        return Err(Error::domain("measurement SNR must be positive and finite"));
    }
    let sigma = (csi.mean_power() / measurement_snr / 2.0).sqrt();
    let entries = csi
        .entries
        .iter()
        .map(|h| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            h + Complex64::new(re, im) * sigma
        })
        .collect();
    Ok(CsiTensor {
        entries,
        ..csi.clone()
    })
}

// ---- key = value serialization ----

fn vec3_string(v: &Vec3) -> String {
    format!("{}, {}, {}", v[0], v[1], v[2])
}

fn take_vec3(doc: &mut KvDocument, key: &str) -> std::result::Result<Vec3, ConfigError> {
    let v = doc
        .take_f64_list(key)?
        .ok_or_else(|| ConfigError::Missing { key: key.into() })?;
    <[f64; 3]>::try_from(v.as_slice()).map_err(|_| ConfigError::Invalid {
        key: key.into(),
        reason: "expected three components".into(),
    })
}

fn take_required<T>(
    value: std::result::Result<Option<T>, ConfigError>,
    key: &str,
) -> std::result::Result<T, ConfigError> {
    value?.ok_or_else(|| ConfigError::Missing { key: key.into() })
}

impl Scene {
    /// Writes the scene as a flat `key = value` document.
    pub fn to_kv_string(&self) -> String {
        let mut w = KvWriter::new();
        w.comment("scene")
            .entry("carrier_freq_hz", self.carrier_freq)
            .entry("subcarrier_spacing_hz", self.subcarrier_spacing)
            .entry("num_subcarriers", self.num_subcarriers)
            .entry("los_k_factor", self.los_k_factor)
            .entry("num_tx", self.num_tx())
            .entry("num_rx", self.num_rx())
            .entry("num_scatterers", self.scatterers.len());
        for (n, t) in self.tx_antennas.iter().enumerate() {
            w.entry(&format!("tx.{n}.position"), vec3_string(&t.position));
            w.entry(&format!("tx.{n}.axis"), vec3_string(&t.axis.to_array()));
        }
        for (n, p) in self.rx_positions.iter().enumerate() {
            w.entry(&format!("rx.{n}.position"), vec3_string(p));
        }
        for (n, s) in self.scatterers.iter().enumerate() {
            w.entry(&format!("scatterer.{n}.position"), vec3_string(&s.position));
            w.entry(
                &format!("scatterer.{n}.reflectivity"),
                format!("{}, {}", s.reflectivity.re, s.reflectivity.im),
            );
            w.entry(&format!("scatterer.{n}.depolarization"), s.depolarization);
        }
        w.finish()
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut doc = KvDocument::parse(text)?;
        let scene = Self::from_kv(&mut doc)?;
        doc.finish()?;
        scene.validate()?;
        Ok(scene)
    }

    fn from_kv(doc: &mut KvDocument) -> std::result::Result<Scene, ConfigError> {
        let carrier_freq = take_required(doc.take_f64("carrier_freq_hz"), "carrier_freq_hz")?;
        let subcarrier_spacing = take_required(
            doc.take_f64("subcarrier_spacing_hz"),
            "subcarrier_spacing_hz",
        )?;
        let num_subcarriers = take_required(
            doc.take::<usize>("num_subcarriers", "a nonnegative integer"),
            "num_subcarriers",
        )?;
        let los_k_factor = take_required(doc.take_f64("los_k_factor"), "los_k_factor")?;
        let mut count = |key: &str| -> std::result::Result<usize, ConfigError> {
            let n = take_required(doc.take::<usize>(key, "a nonnegative integer"), key)?;
            if n > 100_000 {
                return Err(ConfigError::Invalid {
                    key: key.into(),
                    reason: "count too large".into(),
                });
            }
            Ok(n)
        };
        let num_tx = count("num_tx")?;
        let num_rx = count("num_rx")?;
        let num_scatterers = count("num_scatterers")?;

        let mut tx_antennas = Vec::with_capacity(num_tx);
        for n in 0..num_tx {
            let position = take_vec3(doc, &format!("tx.{n}.position"))?;
            let key = format!("tx.{n}.axis");
            let axis = take_vec3(doc, &key)?;
            let axis = Axis3::new(axis[0], axis[1], axis[2]).map_err(|e| ConfigError::Invalid {
                key,
                reason: e.to_string(),
            })?;
            tx_antennas.push(TxAntenna { position, axis });
        }
        let rx_positions = (0..num_rx)
            .map(|n| take_vec3(doc, &format!("rx.{n}.position")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut scatterers = Vec::with_capacity(num_scatterers);
        for n in 0..num_scatterers {
            let position = take_vec3(doc, &format!("scatterer.{n}.position"))?;
            let key = format!("scatterer.{n}.reflectivity");
            let refl = take_required(doc.take_f64_list(&key), &key)?;
            let [re, im] =
                <[f64; 2]>::try_from(refl.as_slice()).map_err(|_| ConfigError::Invalid {
                    key: key.clone(),
                    reason: "expected `re, im`".into(),
                })?;
            let key = format!("scatterer.{n}.depolarization");
            let depolarization = take_required(doc.take_f64(&key), &key)?;
            scatterers.push(Scatterer {
                position,
                reflectivity: Complex64::new(re, im),
                depolarization,
            });
        }
        Ok(Scene {
            tx_antennas,
            rx_positions,
            scatterers,
            carrier_freq,
            subcarrier_spacing,
            num_subcarriers,
            los_k_factor,
        })
    }
}

/// Angle, in radians, between an RX pose's axis and a TX axis, ignoring sign.
pub fn misalignment(rx_axis: &Axis3, tx_axis: &Axis3) -> f64 {
    rx_axis.unoriented_angle(tx_axis)
}
