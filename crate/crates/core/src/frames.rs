//! Attitude kinematics in the local North-East-Down tangent plane, the
//! dead-reckoning position update and the horizontal positioning error.
//!
//! Rotations follow the ZYX (yaw, pitch, roll) convention: a body-frame
//! vector `v_b` is expressed in NED as `R(Θ) v_b` with
//! `R = Rz(ψ) Ry(θ) Rx(φ)`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pitch margin kept away from ±90° (5°).
pub const GIMBAL_MARGIN: f64 = 0.0873;

/// Largest admissible |pitch|.
pub const PITCH_LIMIT: f64 = FRAC_PI_2 - GIMBAL_MARGIN;

/// Sanity bound on relative body speeds for glider-class vehicles, m/s.
pub const MAX_BODY_SPEED: f64 = 5.0;

/// Wraps an angle to (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Signed shortest arc from `from` to `to`, in (-π, π].
pub fn angle_diff(to: f64, from: f64) -> f64 {
    wrap_angle(to - from)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    /// Roll and yaw are wrapped to (-π, π]; pitch is stored as given and
    /// checked by the operations that need it.
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self {
            phi: wrap_angle(phi),
            theta,
            psi: wrap_angle(psi),
        }
    }

    pub fn level() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn check_gimbal(&self) -> Result<()> {
        if !self.theta.is_finite() || self.theta.abs() >= PITCH_LIMIT {
            return Err(Error::GimbalProximity {
                theta: self.theta,
                limit: PITCH_LIMIT,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyVelocityRel {
    pub u_r: f64,
    pub v_r: f64,
    pub w_r: f64,
}

impl BodyVelocityRel {
    pub fn new(u_r: f64, v_r: f64, w_r: f64) -> Self {
        Self { u_r, v_r, w_r }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.u_r, self.v_r, self.w_r)
    }

    /// True when every component is finite and within [`MAX_BODY_SPEED`].
    pub fn is_plausible(&self) -> bool {
        [self.u_r, self.v_r, self.w_r]
            .iter()
            .all(|c| c.is_finite() && c.abs() <= MAX_BODY_SPEED)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NedPosition {
    pub north: f64,
    pub east: f64,
    pub down: f64,
}

impl NedPosition {
    pub fn new(north: f64, east: f64, down: f64) -> Self {
        Self { north, east, down }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.north, self.east, self.down)
    }

    pub fn horizontal_distance(&self, other: &NedPosition) -> f64 {
        (self.north - other.north).hypot(self.east - other.east)
    }
}

/// Absolute north and east positioning errors, metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PositionError {
    pub n_error: f64,
    pub e_error: f64,
}

impl PositionError {
    pub fn horizontal(&self) -> f64 {
        self.n_error.hypot(self.e_error)
    }
}

/// Skew-symmetric cross-product matrix: `skew(v) * y == v.cross(&y)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        0.0, -v.z, v.y, //
        v.z, 0.0, -v.x, //
        -v.y, v.x, 0.0,
    )
}

/// Rotation from body to NED, all nine entries of `Rz(ψ) Ry(θ) Rx(φ)`.
pub fn rot_body_to_ned(att: &EulerAngles) -> Result<Matrix3<f64>> {
    att.check_gimbal()?;
    Ok(rotation_unchecked(att))
}

pub(crate) fn rotation_unchecked(att: &EulerAngles) -> Matrix3<f64> {
    let (sphi, cphi) = att.phi.sin_cos();
    let (sth, cth) = att.theta.sin_cos();
    let (spsi, cpsi) = att.psi.sin_cos();
    Matrix3::new(
        cpsi * cth,
        -spsi * cphi + cpsi * sth * sphi,
        spsi * sphi + cpsi * cphi * sth,
        spsi * cth,
        cpsi * cphi + sphi * sth * spsi,
        -cpsi * sphi + sth * spsi * cphi,
        -sth,
        cth * sphi,
        cth * cphi,
    )
}

/// Maps body angular rates `[p, q, r]` to Euler angle rates.
pub fn euler_rate_matrix(att: &EulerAngles) -> Result<Matrix3<f64>> {
    att.check_gimbal()?;
    let (sphi, cphi) = att.phi.sin_cos();
    let cth = att.theta.cos();
    let tth = att.theta.tan();
    Ok(Matrix3::new(
        1.0,
        sphi * tth,
        cphi * tth,
        0.0,
        cphi,
        -sphi,
        0.0,
        sphi / cth,
        cphi / cth,
    ))
}

/// One forward-Euler dead-reckoning update: `χ + R(Θ) υ_r Δt`.
///
/// `att` and `vel` are the samples at the end of the step.
pub fn dr_step(
    chi: &NedPosition,
    att: &EulerAngles,
    vel: &BodyVelocityRel,
    dt: f64,
) -> Result<NedPosition> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("dead-reckoning step needs dt > 0, got {dt}")));
    }
    let inc = rot_body_to_ned(att)? * vel.as_vector() * dt;
    // a zero increment leaves the position bit-identical (no -0.0 + 0.0 surprises)
    let add = |x: f64, d: f64| if d == 0.0 { x } else { x + d };
    Ok(NedPosition {
        north: add(chi.north, inc.x),
        east: add(chi.east, inc.y),
        down: add(chi.down, inc.z),
    })
}

pub fn positioning_error(est: &NedPosition, truth: &NedPosition) -> PositionError {
    PositionError {
        n_error: (est.north - truth.north).abs(),
        e_error: (est.east - truth.east).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rx(a: f64) -> Matrix3<f64> {
        Matrix3::new(1.0, 0.0, 0.0, 0.0, a.cos(), -a.sin(), 0.0, a.sin(), a.cos())
    }
    fn ry(a: f64) -> Matrix3<f64> {
        Matrix3::new(a.cos(), 0.0, a.sin(), 0.0, 1.0, 0.0, -a.sin(), 0.0, a.cos())
    }
    fn rz(a: f64) -> Matrix3<f64> {
        Matrix3::new(a.cos(), -a.sin(), 0.0, a.sin(), a.cos(), 0.0, 0.0, 0.0, 1.0)
    }

    #[test]
    fn skew_examples() {
        assert_eq!(skew(&Vector3::zeros()), Matrix3::zeros());
        let s = skew(&Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(s * Vector3::new(4.0, 5.0, 6.0), Vector3::new(-3.0, 6.0, -3.0));
        let s = skew(&Vector3::new(0.1, -0.2, 0.3));
        assert_eq!(s + s.transpose(), Matrix3::zeros());
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(rot_body_to_ned(&EulerAngles::level()).unwrap(), Matrix3::identity());
        let r = rot_body_to_ned(&EulerAngles::new(0.0, 0.0, FRAC_PI_2)).unwrap();
        let east = r * Vector3::new(1.0, 0.0, 0.0);
        assert_abs_diff_eq!(east, Vector3::new(0.0, 1.0, 0.0), epsilon = 1e-15);

        let att = EulerAngles::new(0.1, 0.2, 0.3);
        let r = rot_body_to_ned(&att).unwrap();
        let composed = rz(0.3) * ry(0.2) * rx(0.1);
        assert_abs_diff_eq!(r, composed, epsilon = 1e-15);
        assert!((r.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gimbal_guard() {
        let near = EulerAngles::new(0.0, FRAC_PI_2 - 0.01, 0.0);
        assert!(matches!(rot_body_to_ned(&near), Err(Error::GimbalProximity { .. })));
        assert!(matches!(euler_rate_matrix(&near), Err(Error::GimbalProximity { .. })));
        let near = EulerAngles::new(0.0, -(FRAC_PI_2 - 0.01), 0.0);
        assert!(euler_rate_matrix(&near).is_err());
        assert!(euler_rate_matrix(&EulerAngles::new(0.0, PITCH_LIMIT - 1e-6, 0.0)).is_ok());
    }

    #[test]
    fn euler_rate_examples() {
        assert_eq!(euler_rate_matrix(&EulerAngles::new(0.0, 0.0, 1.0)).unwrap(), Matrix3::identity());
        let (phi, th) = (0.1_f64, 0.2_f64);
        let t = euler_rate_matrix(&EulerAngles::new(phi, th, 0.0)).unwrap();
        let expected = Matrix3::new(
            1.0,
            phi.sin() * th.tan(),
            phi.cos() * th.tan(),
            0.0,
            phi.cos(),
            -phi.sin(),
            0.0,
            phi.sin() / th.cos(),
            phi.cos() / th.cos(),
        );
        assert_abs_diff_eq!(t, expected, epsilon = 1e-15);
    }

    #[test]
    fn dr_step_examples() {
        let origin = NedPosition::default();
        let p = dr_step(&origin, &EulerAngles::level(), &BodyVelocityRel::new(1.0, 0.0, 0.0), 0.5).unwrap();
        assert_eq!(p, NedPosition::new(0.5, 0.0, 0.0));

        let p = dr_step(
            &origin,
            &EulerAngles::new(0.0, 0.0, FRAC_PI_2),
            &BodyVelocityRel::new(1.0, 0.0, 0.0),
            1.0,
        )
        .unwrap();
        assert_abs_diff_eq!(p.as_vector(), Vector3::new(0.0, 1.0, 0.0), epsilon = 1e-12);

        assert!(dr_step(&origin, &EulerAngles::level(), &BodyVelocityRel::default(), 0.0).is_err());
    }

    #[test]
    fn dr_straight_line() {
        let att = EulerAngles::new(0.05, -0.3, 2.0);
        let vel = BodyVelocityRel::new(0.8, 0.05, 0.03);
        let dt = 0.5;
        let start = NedPosition::new(10.0, -4.0, 20.0);
        let mut p = start;
        for _ in 0..100 {
            p = dr_step(&p, &att, &vel, dt).unwrap();
        }
        let closed = start.as_vector() + rot_body_to_ned(&att).unwrap() * vel.as_vector() * (100.0 * dt);
        for i in 0..3 {
            assert!((p.as_vector()[i] - closed[i]).abs() <= 1e-9 * closed[i].abs().max(1.0));
        }
    }

    #[test]
    fn positioning_error_examples() {
        let a = NedPosition::new(3.0, 4.0, 1.0);
        assert_eq!(positioning_error(&a, &a), PositionError::default());
        let e = positioning_error(&NedPosition::new(100.0, 50.0, 0.0), &NedPosition::new(90.0, 60.0, 0.0));
        assert_eq!(e, PositionError { n_error: 10.0, e_error: 10.0 });
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(angle_diff(-3.1, 3.1), 2.0 * PI - 6.2, epsilon = 1e-12);
    }

    fn attitude() -> impl Strategy<Value = EulerAngles> {
        (-PI..PI, -PITCH_LIMIT + 1e-9..PITCH_LIMIT - 1e-9, -PI..PI)
            .prop_map(|(a, b, c)| EulerAngles::new(a, b, c))
    }

    fn vec3() -> impl Strategy<Value = Vector3<f64>> {
        (-10.0..10.0, -10.0..10.0, -10.0..10.0).prop_map(|(a, b, c)| Vector3::new(a, b, c))
    }

    proptest! {
        #[test]
        fn rotation_is_proper_orthonormal(att in attitude()) {
            let r = rot_body_to_ned(&att).unwrap();
            let err = (r.transpose() * r - Matrix3::identity()).abs().max();
            prop_assert!(err < 1e-12);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn skew_is_cross_product(v in vec3(), y in vec3()) {
            let s = skew(&v);
            prop_assert!((s * y - v.cross(&y)).abs().max() < 1e-12);
            prop_assert_eq!(s + s.transpose(), Matrix3::zeros());
        }

        #[test]
        fn zero_velocity_keeps_position(att in attitude(), n in -1e4..1e4f64, e in -1e4..1e4f64, d in 0.0..1e3f64, dt in 0.01..10.0f64) {
            let chi = NedPosition::new(n, e, d);
            let next = dr_step(&chi, &att, &BodyVelocityRel::default(), dt).unwrap();
            prop_assert_eq!(next.north.to_bits(), n.to_bits());
            prop_assert_eq!(next.east.to_bits(), e.to_bits());
            prop_assert_eq!(next.down.to_bits(), d.to_bits());
        }

        #[test]
        fn positioning_error_symmetric(a in vec3(), b in vec3()) {
            let pa = NedPosition::new(a.x, a.y, a.z);
            let pb = NedPosition::new(b.x, b.y, b.z);
            prop_assert_eq!(positioning_error(&pa, &pb), positioning_error(&pb, &pa));
            let e = positioning_error(&pa, &pb);
            let same = pa.north == pb.north && pa.east == pb.east;
            prop_assert_eq!(e.n_error == 0.0 && e.e_error == 0.0, same);
        }
    }
}
