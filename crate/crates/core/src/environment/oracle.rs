use rayon::prelude::*;

use super::Environment;
use crate::capacity::CapacityValue;
use crate::error::{Error, Result};
use crate::geometry::{snap_degrees, DimKind, OrientationConfig, SearchDomain};

pub const DEFAULT_ORACLE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub best: OrientationConfig,
    pub value: CapacityValue,
    /// Every grid point with its noise-free capacity, first dimension slowest.
    pub landscape: Vec<(OrientationConfig, CapacityValue)>,
}

impl OracleResult {
    /// `(min, max)` capacity over the landscape.
    pub fn range(&self) -> (f64, f64) {
        self.landscape
            .iter()
            .map(|(_, c)| c.bits_per_s_per_hz())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                (lo.min(c), hi.max(c))
            })
    }

    pub fn spread(&self) -> f64 {
        let (lo, hi) = self.range();
        hi - lo
    }
}

/// Grid values in degrees along one dimension: `low, low + step, ...` up to
/// `high` (exclusive for yaw, inclusive for roll).
pub fn grid_axis_values(low_deg: f64, high_deg: f64, kind: DimKind, step_deg: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let v = snap_degrees(low_deg + i as f64 * step_deg);
        let inside = match kind {
            DimKind::Yaw => v < high_deg - 1e-9,
            DimKind::Roll => v <= high_deg + 1e-9,
        };
        if !inside {
            break;
        }
        out.push(v.min(high_deg));
        i += 1;
    }
    out
}

/// Cartesian angle grid over `domain` with spacing `step_deg`, first
/// dimension varying slowest.
pub fn grid_points(
    domain: &SearchDomain,
    step_deg: f64,
    cap: u64,
) -> Result<Vec<OrientationConfig>> {
    if !(step_deg.is_finite() && step_deg > 0.0) {
        return Err(Error::domain("grid step must be positive"));
    }
    let axes: Vec<Vec<f64>> = domain
        .bounds()
        .iter()
        .map(|b| {
            grid_axis_values(
                snap_degrees(b.low.to_degrees()),
                snap_degrees(b.high.to_degrees()),
                b.kind,
                step_deg,
            )
        })
        .collect();
    if let Some(d) = axes.iter().position(|a| a.len() < 2) {
        return Err(Error::domain(format!(
            "step {step_deg}° leaves fewer than two grid points on dimension {d}"
        )));
    }
    let total = axes
        .iter()
        .try_fold(1u64, |acc, a| acc.checked_mul(a.len() as u64))
        .unwrap_or(u64::MAX);
    if total > cap {
        return Err(Error::Budget {
            requested: total,
            cap,
        });
    }
    (0..total)
        .map(|flat| {
            let mut rem = flat;
            let mut angles = vec![0.0; axes.len()];
            for (d, axis) in axes.iter().enumerate().rev() {
                let n = axis.len() as u64;
                angles[d] = axis[(rem % n) as usize];
                rem /= n;
            }
            OrientationConfig::from_degrees(angles.chunks_exact(2).map(|c| (c[0], c[1])))
        })
        .collect()
}

/// Exhaustive evaluation of [`grid_points`] using the environment's
/// noise-free ground truth. Ties go to the earliest grid point.
pub fn grid_oracle<E>(env: &E, step_deg: f64, cap: u64) -> Result<OracleResult>
where
    E: Environment + Sync + ?Sized,
{
    let points = grid_points(&env.domain(), step_deg, cap)?;
    let landscape = points
        .into_par_iter()
        .map(|config| {
            let value = env.ground_truth(&config)?;
            Ok((config, value))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (i, (_, v)) in landscape.iter().enumerate() {
        if v.bits_per_s_per_hz() > landscape[best].1.bits_per_s_per_hz() {
            best = i;
        }
    }
    Ok(OracleResult {
        best: landscape[best].0.clone(),
        value: landscape[best].1,
        landscape,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::SnrLinear;
    use crate::environment::CapacitySample;
    use crate::geometry::wrap_difference;

    struct Constant;

    impl Environment for Constant {
        fn evaluate(&mut self, o: &OrientationConfig) -> Result<CapacitySample> {
            Ok(CapacitySample {
                orientation: o.clone(),
                capacity: self.ground_truth(o)?,
                snapshots_used: 1,
                snr: SnrLinear::new(1.0)?,
                trial_tag: None,
            })
        }
        fn ground_truth(&self, _: &OrientationConfig) -> Result<CapacityValue> {
            CapacityValue::new(3.25)
        }
        fn domain(&self) -> SearchDomain {
            SearchDomain::full(2)
        }
        fn metadata(&self) -> String {
            "constant".into()
        }
    }

    struct Bump {
        peak: [f64; 4],
    }

    impl Environment for Bump {
        fn evaluate(&mut self, o: &OrientationConfig) -> Result<CapacitySample> {
            Ok(CapacitySample {
                orientation: o.clone(),
                capacity: self.ground_truth(o)?,
                snapshots_used: 1,
                snr: SnrLinear::new(1.0)?,
                trial_tag: None,
            })
        }
        fn ground_truth(&self, o: &OrientationConfig) -> Result<CapacityValue> {
            let f = o.to_flat();
            let d2: f64 = (0..4)
                .map(|d| {
                    let diff = if d % 2 == 0 {
                        wrap_difference(f[d] - self.peak[d])
                    } else {
                        f[d] - self.peak[d]
                    };
                    diff * diff
                })
                .sum();
            CapacityValue::new(5.0 * (-d2).exp())
        }
        fn domain(&self) -> SearchDomain {
            SearchDomain::full(2)
        }
        fn metadata(&self) -> String {
            "bump".into()
        }
    }

    #[test]
    fn axis_values() {
        let yaw = grid_axis_values(0.0, 360.0, DimKind::Yaw, 15.0);
        assert_eq!(yaw.len(), 24);
        assert_eq!(*yaw.last().unwrap(), 345.0);
        let roll = grid_axis_values(0.0, 180.0, DimKind::Roll, 15.0);
        assert_eq!(roll.len(), 13);
        assert_eq!(*roll.last().unwrap(), 180.0);
    }

    #[test]
    fn flat_field_picks_first_point() {
        let r = grid_oracle(&Constant, 90.0, DEFAULT_ORACLE_CAP).unwrap();
        assert_eq!(r.value.bits_per_s_per_hz(), 3.25);
        assert_eq!(r.best.to_flat(), vec![0.0; 4]);
        assert_eq!(r.landscape.len(), (4 * 3) * (4 * 3));
    }

    #[test]
    fn bump_argmax_within_half_step() {
        let peak_deg = [123.0, 67.0, 301.0, 140.0];
        let env = Bump {
            peak: peak_deg.map(f64::to_radians),
        };
        let step = 10.0;
        let r = grid_oracle(&env, step, DEFAULT_ORACLE_CAP).unwrap();
        let best = r.best.to_degrees_flat();
        for d in 0..4 {
            let diff = if d % 2 == 0 {
                wrap_difference((best[d] - peak_deg[d]).to_radians()).to_degrees()
            } else {
                best[d] - peak_deg[d]
            };
            assert!(diff.abs() <= step / 2.0 + 1e-9, "dim {d}: {diff}");
        }
    }

    #[test]
    fn cap_and_step_errors() {
        assert!(matches!(
            grid_oracle(&Constant, 1.0, 1000),
            Err(Error::Budget { .. })
        ));
        assert!(grid_oracle(&Constant, 200.0, DEFAULT_ORACLE_CAP).is_err());
        assert!(grid_oracle(&Constant, 0.0, DEFAULT_ORACLE_CAP).is_err());
    }
}
