//! Antenna orientation parameterization and dipole polarization coupling.
//!
//! Each controllable antenna has two servo angles. Roll tilts the element away
//! from vertical (rotation about the body x axis), then yaw turns the tilt plane
//! about the world z axis. `roll = 0` is the vertical rest pose, and at that pose
//! every yaw gives the same axis (gimbal degeneracy, accepted as is).
//!
//! Angles are radians everywhere inside the crate; degrees only appear at file
//! and CLI boundaries.

use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::error::{Error, Result};

const AXIS_UNIT_TOL: f64 = 1e-6;

/// A real 3-vector (positions in meters, directions dimensionless).
pub type Vec3 = [f64; 3];

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Removes the component of `v` along the unit vector `k`.
pub(crate) fn transverse(v: &Vec3, k: &Vec3) -> Vec3 {
    let along = dot(v, k);
    [
        v[0] - along * k[0],
        v[1] - along * k[1],
        v[2] - along * k[2],
    ]
}

/// Unit direction of a dipole element. `u` and `-u` describe the same physical
/// element; the sign only shows up as a π phase in coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Axis3 {
    pub const VERTICAL: Axis3 = Axis3 {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Accepts an already-unit vector (within 1e-6).
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let axis = Axis3 { x, y, z };
        axis.check_unit()?;
        Ok(axis)
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn from_vector(v: Vec3) -> Result<Self> {
        let n = norm(&v);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::domain(
                "cannot normalize a zero or non-finite vector",
            ));
        }
        Ok(Axis3 {
            x: v[0] / n,
            y: v[1] / n,
            z: v[2] / n,
        })
    }

    pub fn to_array(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.to_array())
    }

    fn check_unit(&self) -> Result<()> {
        let n = self.norm();
        if !n.is_finite() || (n - 1.0).abs() > AXIS_UNIT_TOL {
            return Err(Error::domain(format!(
                "axis ({}, {}, {}) is not a unit vector (norm {n})",
                self.x, self.y, self.z
            )));
        }
        Ok(())
    }

    /// Angle between two unoriented axes, in radians within [0, π/2].
    pub fn unoriented_angle(&self, other: &Axis3) -> f64 {
        let c = dot(&self.to_array(), &other.to_array()).abs().min(1.0);
        c.acos()
    }
}

/// Dipole axis for a (yaw, roll) servo pose:
/// `(-sin(roll)·sin(yaw), sin(roll)·cos(yaw), cos(roll))`.
pub fn orientation_to_axis(yaw: f64, roll: f64) -> Result<Axis3> {
    if !yaw.is_finite() || !roll.is_finite() {
        return Err(Error::domain("yaw and roll must be finite"));
    }
    Ok(axis_unchecked(yaw, roll))
}

pub(crate) fn axis_unchecked(yaw: f64, roll: f64) -> Axis3 {
    let (sy, cy) = yaw.sin_cos();
    let (sr, cr) = roll.sin_cos();
    Axis3 {
        x: -sr * sy,
        y: sr * cy,
        z: cr,
    }
}

/// Short-dipole coupling between a transmitting and receiving element along
/// propagation direction `k_hat`: the dot product of the two axes' components
/// transverse to `k_hat`. Sign is kept (0 or π phase).
pub fn polarization_coupling(tx_axis: &Axis3, rx_axis: &Axis3, k_hat: &Axis3) -> Result<f64> {
    tx_axis.check_unit()?;
    rx_axis.check_unit()?;
    k_hat.check_unit()?;
    Ok(coupling_unchecked(
        &tx_axis.to_array(),
        &rx_axis.to_array(),
        &k_hat.to_array(),
    ))
}

pub(crate) fn coupling_unchecked(tx: &Vec3, rx: &Vec3, k: &Vec3) -> f64 {
    dot(&transverse(tx, k), &transverse(rx, k))
}

/// Wraps an angle into [0, 2π).
pub fn wrap_yaw(yaw: f64) -> f64 {
    let w = yaw.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Maps an angular difference into (−π, π].
pub fn wrap_difference(d: f64) -> f64 {
    let w = d.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Servo pose of one antenna, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPose {
    pub yaw: f64,
    pub roll: f64,
}

impl AntennaPose {
    pub fn axis(&self) -> Axis3 {
        axis_unchecked(self.yaw, self.roll)
    }
}

/// The decision variable: one (yaw, roll) pose per controllable antenna.
/// Yaw is kept in [0, 2π), roll in [0, π].
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationConfig {
    antennas: Vec<AntennaPose>,
}

impl OrientationConfig {
    /// Builds a configuration from (yaw, roll) pairs in radians, wrapping yaw
    /// and clamping roll.
    pub fn new(poses: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let antennas = poses
            .into_iter()
            .map(|(yaw, roll)| {
                if !yaw.is_finite() || !roll.is_finite() {
                    return Err(Error::domain("orientation angles must be finite"));
                }
                Ok(AntennaPose {
                    yaw: wrap_yaw(yaw),
                    roll: roll.clamp(0.0, PI),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if antennas.is_empty() {
            return Err(Error::domain("orientation needs at least one antenna"));
        }
        Ok(OrientationConfig { antennas })
    }

    /// Same as [`OrientationConfig::new`] with angles in degrees.
    pub fn from_degrees(poses: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::new(
            poses
                .into_iter()
                .map(|(y, r)| (y.to_radians(), r.to_radians())),
        )
    }

    /// Interleaved `[yaw1, roll1, yaw2, roll2, ...]` in radians.
    pub fn from_flat(values: &[f64]) -> Result<Self> {
        if !values.len().is_multiple_of(2) {
            return Err(Error::domain(format!(
                "flat orientation needs an even number of values, got {}",
                values.len()
            )));
        }
        Self::new(values.chunks_exact(2).map(|c| (c[0], c[1])))
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.antennas.iter().flat_map(|p| [p.yaw, p.roll]).collect()
    }

    /// Interleaved angles in degrees. Values within 1e-9° of an integer are
    /// snapped to it, so whole-degree poses survive a text round trip exactly.
    pub fn to_degrees_flat(&self) -> Vec<f64> {
        self.to_flat()
            .into_iter()
            .map(|r| snap_degrees(r.to_degrees()))
            .collect()
    }

    pub fn antennas(&self) -> &[AntennaPose] {
        &self.antennas
    }

    pub fn len(&self) -> usize {
        self.antennas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.antennas.is_empty()
    }

    /// Number of search dimensions (two per antenna).
    pub fn dims(&self) -> usize {
        2 * self.antennas.len()
    }

    pub fn axes(&self) -> Vec<Axis3> {
        self.antennas.iter().map(AntennaPose::axis).collect()
    }

    /// Snaps every angle to a multiple of `step` radians (servo resolution).
    pub fn quantized(&self, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::domain("quantization step must be positive"));
        }
        let step_deg = step.to_degrees();
        Self::new(self.antennas.iter().map(|p| {
            let q = |a: f64| {
                let deg = snap_degrees((a.to_degrees() / step_deg).round() * step_deg);
                deg.to_radians()
            };
            (q(p.yaw), q(p.roll))
        }))
    }
}

impl fmt::Display for OrientationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.antennas.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(
                f,
                "[yaw {:.1}° roll {:.1}°]",
                p.yaw.to_degrees(),
                p.roll.to_degrees()
            )?;
        }
        Ok(())
    }
}

pub(crate) fn snap_degrees(deg: f64) -> f64 {
    let r = deg.round();
    if (deg - r).abs() < 1e-9 {
        r
    } else {
        deg
    }
}

/// Weighted distance between two configurations. Yaw differences wrap into
/// (−π, π]; roll differences are plain. `length_scales` has one entry per
/// dimension, in the interleaved yaw/roll order.
pub fn config_distance(
    a: &OrientationConfig,
    b: &OrientationConfig,
    length_scales: &[f64],
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::domain(format!(
            "antenna count mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if length_scales.len() != a.dims() {
        return Err(Error::domain(format!(
            "expected {} length scales, got {}",
            a.dims(),
            length_scales.len()
        )));
    }
    if length_scales.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::domain("length scales must be positive and finite"));
    }
    Ok(distance_sq_unchecked(a, b, length_scales).sqrt())
}

pub(crate) fn distance_sq_unchecked(
    a: &OrientationConfig,
    b: &OrientationConfig,
    length_scales: &[f64],
) -> f64 {
    a.antennas
        .iter()
        .zip(&b.antennas)
        .zip(length_scales.chunks_exact(2))
        .map(|((pa, pb), ls)| {
            let dy = wrap_difference(pa.yaw - pb.yaw) / ls[0];
            let dr = (pa.roll - pb.roll) / ls[1];
            dy * dy + dr * dr
        })
        .sum()
}

/// Kind of a search dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimKind {
    /// Periodic, half-open `[low, high)`.
    Yaw,
    /// Bounded, closed `[low, high]`.
    Roll,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimBounds {
    pub low: f64,
    pub high: f64,
    pub kind: DimKind,
}

/// Per-dimension bounds of the orientation search space, interleaved yaw/roll.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchDomain {
    bounds: Vec<DimBounds>,
}

impl SearchDomain {
    /// Full servo travel: yaw over [0, 2π), roll over [0, π] for each antenna.
    pub fn full(antennas: usize) -> Self {
        let bounds = (0..antennas)
            .flat_map(|_| {
                [
                    DimBounds {
                        low: 0.0,
                        high: TAU,
                        kind: DimKind::Yaw,
                    },
                    DimBounds {
                        low: 0.0,
                        high: PI,
                        kind: DimKind::Roll,
                    },
                ]
            })
            .collect();
        SearchDomain { bounds }
    }

    pub fn new(bounds: Vec<DimBounds>) -> Result<Self> {
        if bounds.is_empty() || !bounds.len().is_multiple_of(2) {
            return Err(Error::domain("domain needs a yaw/roll pair per antenna"));
        }
        for (i, b) in bounds.iter().enumerate() {
            let expected = if i % 2 == 0 {
                DimKind::Yaw
            } else {
                DimKind::Roll
            };
            if b.kind != expected {
                return Err(Error::domain(format!("dimension {i} must be {expected:?}")));
            }
            if !(b.low.is_finite() && b.high.is_finite() && b.low < b.high) {
                return Err(Error::domain(format!(
                    "dimension {i}: bounds must satisfy low < high"
                )));
            }
        }
        Ok(SearchDomain { bounds })
    }

    pub fn bounds(&self) -> &[DimBounds] {
        &self.bounds
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    pub fn antennas(&self) -> usize {
        self.bounds.len() / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_axis(a: Axis3, expected: Vec3, tol: f64) {
        let v = a.to_array();
        for d in 0..3 {
            assert!((v[d] - expected[d]).abs() < tol, "{v:?} vs {expected:?}");
        }
    }

    /// Rz(yaw)·Rx applied to the z unit vector, written out as explicit
    /// rotation matrices. Roll tilts z toward +y.
    fn rotation_oracle(yaw: f64, roll: f64) -> Vec3 {
        let rx = [
            [1.0, 0.0, 0.0],
            [0.0, roll.cos(), roll.sin()],
            [0.0, -roll.sin(), roll.cos()],
        ];
        let rz = [
            [yaw.cos(), -yaw.sin(), 0.0],
            [yaw.sin(), yaw.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ];
        let z = [0.0, 0.0, 1.0];
        let mul =
            |m: &[[f64; 3]; 3], v: &Vec3| -> Vec3 { [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)] };
        mul(&rz, &mul(&rx, &z))
    }

    #[test]
    fn rest_pose_is_vertical() {
        assert_axis(
            orientation_to_axis(0.0, 0.0).unwrap(),
            [0.0, 0.0, 1.0],
            1e-15,
        );
        assert_axis(
            orientation_to_axis(1.234, 0.0).unwrap(),
            [0.0, 0.0, 1.0],
            1e-15,
        );
    }

    #[test]
    fn quarter_turns_match_rotation_oracle() {
        let a = orientation_to_axis(PI / 2.0, PI / 2.0).unwrap();
        assert_axis(a, [-1.0, 0.0, 0.0], 1e-12);
        assert_axis(a, rotation_oracle(PI / 2.0, PI / 2.0), 1e-12);
        for (y, r) in [(0.3, 0.7), (4.0, 2.9), (6.1, 0.01)] {
            assert_axis(
                orientation_to_axis(y, r).unwrap(),
                rotation_oracle(y, r),
                1e-12,
            );
        }
    }

    #[test]
    fn non_finite_angles_rejected() {
        assert!(orientation_to_axis(f64::NAN, 0.0).is_err());
        assert!(orientation_to_axis(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn unit_norm_on_one_degree_grid() {
        for yd in 0..360 {
            for rd in 0..=180 {
                let a = orientation_to_axis((yd as f64).to_radians(), (rd as f64).to_radians())
                    .unwrap();
                assert!((a.norm() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn coupling_examples() {
        let z = Axis3::VERTICAL;
        let x = Axis3::new(1.0, 0.0, 0.0).unwrap();
        let y = Axis3::new(0.0, 1.0, 0.0).unwrap();
        assert!((polarization_coupling(&z, &z, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!(polarization_coupling(&z, &y, &x).unwrap().abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let slant = Axis3::new(0.0, h, h).unwrap();
        // Transverse parts: (0,0,1) and (0,h,h); dot product h.
        assert!((polarization_coupling(&z, &slant, &x).unwrap() - h).abs() < 1e-12);
        // End-fire element has no transverse component.
        assert_eq!(polarization_coupling(&x, &z, &x).unwrap(), 0.0);
    }

    #[test]
    fn coupling_rejects_non_unit() {
        let bad = Axis3 {
            x: 0.0,
            y: 0.0,
            z: 1.1,
        };
        let x = Axis3::new(1.0, 0.0, 0.0).unwrap();
        assert!(polarization_coupling(&bad, &x, &x).is_err());
        assert!(Axis3::new(0.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn distance_examples() {
        let a = OrientationConfig::from_degrees([(350.0, 0.0)]).unwrap();
        let b = OrientationConfig::from_degrees([(10.0, 0.0)]).unwrap();
        let d = config_distance(&a, &b, &[1.0, 1.0]).unwrap();
        assert!((d - 20f64.to_radians()).abs() < 1e-12);
        assert!((d - 0.3491).abs() < 1e-4);
        assert_eq!(config_distance(&a, &a, &[1.0, 1.0]).unwrap(), 0.0);

        let p = OrientationConfig::new([(0.1, 0.2), (3.0, 1.5)]).unwrap();
        let q = OrientationConfig::new([(6.0, 0.4), (1.0, 2.5)]).unwrap();
        let ls = [0.5, 0.25, 2.0, 1.0];
        // Hand-computed: yaw diffs wrap 0.1-6.0 -> 0.1-6.0+2π, 3.0-1.0 = 2.0.
        let dy1 = 0.1 - 6.0 + TAU;
        let expected = ((dy1 / 0.5).powi(2)
            + (-0.2f64 / 0.25).powi(2)
            + (2.0f64 / 2.0).powi(2)
            + (-1.0f64 / 1.0).powi(2))
        .sqrt();
        assert!((config_distance(&p, &q, &ls).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn distance_errors() {
        let one = OrientationConfig::new([(0.0, 0.0)]).unwrap();
        let two = OrientationConfig::new([(0.0, 0.0), (0.0, 0.0)]).unwrap();
        assert!(config_distance(&one, &two, &[1.0, 1.0]).is_err());
        assert!(config_distance(&one, &one, &[1.0, 0.0]).is_err());
        assert!(config_distance(&one, &one, &[1.0]).is_err());
    }

    #[test]
    fn constructor_wraps_and_clamps() {
        let c = OrientationConfig::new([(-0.5, 4.0), (TAU + 1.0, -1.0)]).unwrap();
        let f = c.to_flat();
        assert!((f[0] - (TAU - 0.5)).abs() < 1e-12);
        assert_eq!(f[1], PI);
        assert!((f[2] - 1.0).abs() < 1e-12);
        assert_eq!(f[3], 0.0);
        assert!(OrientationConfig::new([(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn quantization_snaps_to_degree_grid() {
        let c = OrientationConfig::from_degrees([(359.7, 44.6), (12.2, 179.9)]).unwrap();
        let q = c.quantized(1f64.to_radians()).unwrap();
        assert_eq!(q.to_degrees_flat(), vec![0.0, 45.0, 12.0, 180.0]);
    }

    fn arb_config() -> impl Strategy<Value = OrientationConfig> {
        prop::collection::vec((0.0..TAU, 0.0..PI), 2)
            .prop_map(|v| OrientationConfig::new(v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn distance_is_pseudometric(a in arb_config(), b in arb_config(), c in arb_config()) {
            let ls = [0.5, 0.7, 1.3, 0.9];
            let ab = config_distance(&a, &b, &ls).unwrap();
            let ba = config_distance(&b, &a, &ls).unwrap();
            let bc = config_distance(&b, &c, &ls).unwrap();
            let ac = config_distance(&a, &c, &ls).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert_eq!(config_distance(&a, &a, &ls).unwrap(), 0.0);
            prop_assert!(ac <= ab + bc + 1e-12);
        }

        #[test]
        fn distance_invariant_to_full_turn(a in arb_config(), b in arb_config()) {
            let ls = [1.0; 4];
            let shift = |c: &OrientationConfig| {
                let mut f = c.to_flat();
                f[0] += TAU;
                f[2] += TAU;
                OrientationConfig::from_flat(&f).unwrap()
            };
            let d0 = config_distance(&a, &b, &ls).unwrap();
            let d1 = config_distance(&shift(&a), &shift(&b), &ls).unwrap();
            prop_assert!((d0 - d1).abs() < 1e-9);
        }

        #[test]
        fn coupling_symmetric_and_bounded(
            ty in 0.0..TAU, tr in 0.0..PI, ry in 0.0..TAU, rr in 0.0..PI,
            ky in 0.0..TAU, kr in 0.0..PI,
        ) {
            let t = orientation_to_axis(ty, tr).unwrap();
            let r = orientation_to_axis(ry, rr).unwrap();
            let k = orientation_to_axis(ky, kr).unwrap();
            let c = polarization_coupling(&t, &r, &k).unwrap();
            prop_assert!((c - polarization_coupling(&r, &t, &k).unwrap()).abs() < 1e-15);
            let neg = Axis3 { x: -r.x, y: -r.y, z: -r.z };
            prop_assert!((c + polarization_coupling(&t, &neg, &k).unwrap()).abs() < 1e-15);
            let et = norm(&transverse(&t.to_array(), &k.to_array()));
            let er = norm(&transverse(&r.to_array(), &k.to_array()));
            prop_assert!(c.abs() <= et * er + 1e-12);
            prop_assert!(c.abs() <= 1.0 + 1e-12);
        }
    }
}
