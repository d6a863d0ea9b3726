//! MIMO-OFDM capacity scoring.
//!
//! Capacity is the subcarrier average of
//! `log2 det(I + (snr / N_t) · H_k · H_kᴴ)` with equal power per TX antenna.
//! CSI is normalized so that `(1/M) Σ_k ‖H_k‖²_F = N_t · N_r`, which makes
//! `snr` the average per-receive-antenna SNR.

use num_complex::Complex64;

use crate::channel::CsiTensor;
use crate::error::{Error, Result};

/// Linear power ratio, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SnrLinear(f64);

impl SnrLinear {
    pub fn new(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::domain(format!(
                "SNR must be positive and finite, got {value}"
            )));
        }
        Ok(SnrLinear(value))
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(10f64.powf(db / 10.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// Spectral efficiency in bits/s/Hz; finite and nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CapacityValue(f64);

impl CapacityValue {
    pub fn new(bits_per_s_per_hz: f64) -> Result<Self> {
        if !(bits_per_s_per_hz.is_finite() && bits_per_s_per_hz >= 0.0) {
            return Err(Error::domain(format!(
                "capacity must be finite and nonnegative, got {bits_per_s_per_hz}"
            )));
        }
        Ok(CapacityValue(bits_per_s_per_hz))
    }

    pub fn bits_per_s_per_hz(self) -> f64 {
        self.0
    }
}

/// Scales the tensor by one real factor so that `(1/M) Σ_k ‖H_k‖²_F = N_t·N_r`.
pub fn normalize_csi(csi: &CsiTensor) -> Result<CsiTensor> {
    if !csi.is_finite() {
        return Err(Error::domain("CSI contains non-finite entries"));
    }
    let power = csi.mean_power();
    if power == 0.0 {
        return Err(Error::Degenerate(
            "cannot normalize an all-zero CSI tensor".into(),
        ));
    }
    Ok(csi.scaled(power.sqrt().recip()))
}

/// log2 det of a Hermitian positive-definite matrix (row-major `n × n`) via an
/// in-place Cholesky factorization. Non-positive pivots are an error.
pub fn log2_det_hpd(a: &mut [Complex64], n: usize) -> Result<f64> {
    debug_assert_eq!(a.len(), n * n);
    let mut log_det = 0.0;
    for j in 0..n {
        let mut pivot = a[j * n + j].re;
        for p in 0..j {
            pivot -= a[j * n + p].norm_sqr();
        }
        if !(pivot > 0.0 && pivot.is_finite()) {
            return Err(Error::domain(format!(
                "matrix is not Hermitian positive definite (pivot {pivot} at {j})"
            )));
        }
        let l_jj = pivot.sqrt();
        a[j * n + j] = Complex64::new(l_jj, 0.0);
        log_det += pivot.log2();
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for p in 0..j {
                s -= a[i * n + p] * a[j * n + p].conj();
            }
            a[i * n + j] = s / l_jj;
        }
    }
    Ok(log_det)
}

/// Average over subcarriers of `log2 det(I + (snr/N_t) H_k H_kᴴ)`.
///
/// The CSI is used as given; see [`average_capacity`] for the normalized
/// pipeline.
pub fn mimo_ofdm_capacity(csi: &CsiTensor, snr: SnrLinear) -> Result<CapacityValue> {
    if !csi.is_finite() {
        return Err(Error::domain("CSI contains non-finite entries"));
    }
    let (m, nr, nt) = csi.shape();
    let rho = snr.value() / nt as f64;
    let mut gram = vec![Complex64::new(0.0, 0.0); nr * nr];
    let mut total = 0.0;
    for k in 0..m {
        let h = csi.subcarrier(k);
        // Lower triangle of I + rho·H·Hᴴ is all the factorization reads.
        for i in 0..nr {
            for j in 0..=i {
                let mut s = Complex64::new(0.0, 0.0);
                for t in 0..nt {
                    s += h[i * nt + t] * h[j * nt + t].conj();
                }
                let mut v = s * rho;
                if i == j {
                    v = Complex64::new(1.0 + v.re, 0.0);
                }
                gram[i * nr + j] = v;
            }
        }
        total += log2_det_hpd(&mut gram, nr)?;
    }
    CapacityValue::new((total / m as f64).max(0.0))
}

/// `10^((rssi − noise_floor) / 10)`.
pub fn snr_from_rssi(rssi_dbm: f64, noise_floor_dbm: f64) -> Result<SnrLinear> {
    if !rssi_dbm.is_finite() || !noise_floor_dbm.is_finite() {
        return Err(Error::domain("RSSI and noise floor must be finite"));
    }
    SnrLinear::new(10f64.powf((rssi_dbm - noise_floor_dbm) / 10.0))
}

/// Throughput in bits per second for a given channel bandwidth.
pub fn capacity_to_throughput(c: CapacityValue, bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
        return Err(Error::domain("bandwidth must be positive"));
    }
    Ok(c.bits_per_s_per_hz() * bandwidth_hz)
}

/// Normalizes each snapshot, scores it, and returns the mean score.
pub fn average_capacity(snapshots: &[CsiTensor], snr: SnrLinear) -> Result<CapacityValue> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::domain("need at least one snapshot"))?;
    if snapshots.iter().any(|s| s.shape() != first.shape()) {
        return Err(Error::domain("snapshots must share one shape"));
    }
    let mut sum = 0.0;
    for s in snapshots {
        sum += mimo_ofdm_capacity(&normalize_csi(s)?, snr)?.bits_per_s_per_hz();
    }
    CapacityValue::new(sum / snapshots.len() as f64)
}

/// Received power of a CSI capture, in dBm, when unit mean entry power
/// corresponds to `reference_rssi_dbm`.
pub fn rssi_dbm(snapshots: &[CsiTensor], reference_rssi_dbm: f64) -> Result<f64> {
    if snapshots.is_empty() {
        return Err(Error::domain("need at least one snapshot"));
    }
    let power = snapshots.iter().map(CsiTensor::mean_power).sum::<f64>() / snapshots.len() as f64;
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Degenerate(
            "capture carries no received power".into(),
        ));
    }
    Ok(reference_rssi_dbm + 10.0 * power.log10())
}

/// Scores a capture the way the device does: the average SNR comes from the
/// capture's RSSI against the noise floor, then the normalized snapshots are
/// scored at that SNR and averaged.
///
/// `reference_snr` is the SNR a unit-power channel would see, so the result
/// equals the un-normalized capacity of each snapshot at `reference_snr`
/// scaled by the capture's relative power.
pub fn rssi_scored_capacity(
    snapshots: &[CsiTensor],
    reference_snr: SnrLinear,
    noise_floor_dbm: f64,
) -> Result<(CapacityValue, SnrLinear)> {
    let rssi = rssi_dbm(snapshots, noise_floor_dbm + reference_snr.to_db())?;
    let snr = snr_from_rssi(rssi, noise_floor_dbm)?;
    Ok((average_capacity(snapshots, snr)?, snr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_csi(rng: &mut ChaCha8Rng, m: usize, nr: usize, nt: usize) -> CsiTensor {
        let entries = (0..m * nr * nt)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        CsiTensor::new(m, nr, nt, entries).unwrap()
    }

    #[test]
    fn siso_unit_channel() {
        let csi = CsiTensor::new(1, 1, 1, vec![c(1.0, 0.0)]).unwrap();
        let cap = mimo_ofdm_capacity(&csi, SnrLinear::new(1.0).unwrap()).unwrap();
        assert!((cap.bits_per_s_per_hz() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_channel() {
        let csi = CsiTensor::new(
            1,
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let cap = mimo_ofdm_capacity(&csi, SnrLinear::new(2.0).unwrap()).unwrap();
        assert!((cap.bits_per_s_per_hz() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn normalization_examples() {
        let single = CsiTensor::new(1, 1, 1, vec![c(2.0, 0.0)]).unwrap();
        assert_eq!(normalize_csi(&single).unwrap().get(0, 0, 0), c(1.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let raw = random_csi(&mut rng, 8, 2, 2);
        let n = normalize_csi(&raw).unwrap();
        let frob: f64 = n.entries().iter().map(|z| z.norm_sqr()).sum::<f64>() / 8.0;
        assert!((frob - 4.0).abs() < 1e-12);
        let again = normalize_csi(&n).unwrap();
        for (a, b) in n.entries().iter().zip(again.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
        let scaled = normalize_csi(&raw.scaled(7.3)).unwrap();
        for (a, b) in n.entries().iter().zip(scaled.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_tensor_is_degenerate() {
        let z = CsiTensor::zeros(4, 2, 2);
        assert!(matches!(normalize_csi(&z), Err(Error::Degenerate(_))));
    }

    #[test]
    fn rssi_conversion() {
        assert!((snr_from_rssi(-64.0, -94.0).unwrap().value() - 1000.0).abs() < 1e-9);
        assert_eq!(snr_from_rssi(-94.0, -94.0).unwrap().value(), 1.0);
        assert!((snr_from_rssi(-84.0, -94.0).unwrap().value() - 10.0).abs() < 1e-12);
        assert!(snr_from_rssi(-100.0, -94.0).unwrap().value() < 1.0);
        assert!(snr_from_rssi(f64::NAN, -94.0).is_err());
    }

    #[test]
    fn throughput_conversion() {
        let bw = 20e6;
        let t = capacity_to_throughput(CapacityValue::new(3.5).unwrap(), bw).unwrap();
        assert!((t - 70e6).abs() < 1e-6);
        assert_eq!(
            capacity_to_throughput(CapacityValue::new(0.0).unwrap(), bw).unwrap(),
            0.0
        );
        assert_eq!(
            capacity_to_throughput(CapacityValue::new(1.0).unwrap(), bw).unwrap(),
            20e6
        );
        assert!(capacity_to_throughput(CapacityValue::new(1.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn averaging_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let snr = SnrLinear::new(31.0).unwrap();
        let snaps: Vec<_> = (0..3).map(|_| random_csi(&mut rng, 5, 2, 2)).collect();
        let single = |s: &CsiTensor| {
            mimo_ofdm_capacity(&normalize_csi(s).unwrap(), snr)
                .unwrap()
                .bits_per_s_per_hz()
        };
        let one = average_capacity(&snaps[..1], snr)
            .unwrap()
            .bits_per_s_per_hz();
        assert_eq!(one, single(&snaps[0]));
        let repeated = vec![snaps[1].clone(); 4];
        let rep = average_capacity(&repeated, snr)
            .unwrap()
            .bits_per_s_per_hz();
        assert!((rep - single(&snaps[1])).abs() < 1e-12);
        let hand = (single(&snaps[0]) + single(&snaps[1]) + single(&snaps[2])) / 3.0;
        let avg = average_capacity(&snaps, snr).unwrap().bits_per_s_per_hz();
        assert!((avg - hand).abs() < 1e-12);
        assert!(average_capacity(&[], snr).is_err());
        let mixed = vec![snaps[0].clone(), random_csi(&mut rng, 4, 2, 2)];
        assert!(average_capacity(&mixed, snr).is_err());
    }

    #[test]
    fn monotone_in_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let csi = normalize_csi(&random_csi(&mut rng, 16, 2, 2)).unwrap();
        let mut last = -1.0;
        for db in -10..=40 {
            let v = mimo_ofdm_capacity(&csi, SnrLinear::from_db(db as f64).unwrap())
                .unwrap()
                .bits_per_s_per_hz();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn siso_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let csi = random_csi(&mut rng, 12, 1, 1);
            let snr = rng.random_range(0.1..100.0);
            let direct = (0..12)
                .map(|k| (1.0 + snr * csi.get(k, 0, 0).norm_sqr()).log2())
                .sum::<f64>()
                / 12.0;
            let cap = mimo_ofdm_capacity(&csi, SnrLinear::new(snr).unwrap()).unwrap();
            assert!((cap.bits_per_s_per_hz() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn subcarrier_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let csi = random_csi(&mut rng, 10, 2, 2);
        let mut rev = CsiTensor::zeros(10, 2, 2);
        for k in 0..10 {
            for i in 0..2 {
                for j in 0..2 {
                    rev.set(9 - k, i, j, csi.get(k, i, j));
                }
            }
        }
        let snr = SnrLinear::new(50.0).unwrap();
        let a = mimo_ofdm_capacity(&csi, snr).unwrap().bits_per_s_per_hz();
        let b = mimo_ofdm_capacity(&rev, snr).unwrap().bits_per_s_per_hz();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn log_det_rejects_indefinite() {
        let mut a = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)];
        assert!(log2_det_hpd(&mut a, 2).is_err());
        let mut b = vec![c(4.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)];
        assert!((log2_det_hpd(&mut b, 2).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn rssi_scoring_matches_unnormalized_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let csi = random_csi(&mut rng, 6, 2, 2).scaled(0.4);
        let reference = SnrLinear::from_db(20.0).unwrap();
        let (cap, snr) =
            rssi_scored_capacity(std::slice::from_ref(&csi), reference, -94.0).unwrap();
        let direct = mimo_ofdm_capacity(&csi, reference).unwrap();
        assert!((cap.bits_per_s_per_hz() - direct.bits_per_s_per_hz()).abs() < 1e-9);
        assert!((snr.value() - 100.0 * csi.mean_power()).abs() < 1e-9);
    }

    #[test]
    fn non_finite_rejected() {
        assert!(SnrLinear::new(0.0).is_err());
        assert!(CapacityValue::new(-1.0).is_err());
        assert!(CapacityValue::new(f64::INFINITY).is_err());
    }
}
