//! Pure geometric functions: cable lengths and direction angles, the
//! half-plane side selection, Cartesian-to-cable-rate inverse kinematics
//! and the braked-cable circular constraint.
//!
//! Angle convention: `alpha_i` is the angle (from +x) of the unit vector
//! pointing from the end effector away from anchor `i`, so a payload
//! velocity `v` produces the cable length rate `d_dot_i = v . (cos a_i,
//! sin a_i)` with positive rate meaning the cable pays out.

use crate::config::{Cable, MotorParams, RobotGeometry, Vec2};
use thiserror::Error;

/// Angle guard for near-collinear cable pairs.
pub const EPS_SINGULAR: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("degenerate geometry: payload coincides with the {0} anchor")]
    Degenerate(Cable),
    #[error("singular configuration: |sin(a1 - aj)| = {0:.2e} below threshold")]
    Singular(f64),
    #[error("motor speed limit exceeded: |{requested:.1}| rad/s > {limit:.1} rad/s")]
    SpeedLimit { requested: f64, limit: f64 },
}

/// Length and away-direction angle of one cable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableLine {
    pub length: f64,
    pub angle: f64,
}

/// Per-cable geometry at one payload position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CableGeom {
    pub top: CableLine,
    pub left: CableLine,
    pub right: CableLine,
}

impl CableGeom {
    pub fn get(&self, c: Cable) -> CableLine {
        match c {
            Cable::Top => self.top,
            Cable::Left => self.left,
            Cable::Right => self.right,
        }
    }
}

/// Which side motor participates in the manipulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveSide {
    Left,
    Right,
}

impl ActiveSide {
    pub fn cable(self) -> Cable {
        match self {
            ActiveSide::Left => Cable::Left,
            ActiveSide::Right => Cable::Right,
        }
    }

    pub fn other(self) -> Cable {
        match self {
            ActiveSide::Left => Cable::Right,
            ActiveSide::Right => Cable::Left,
        }
    }
}

/// Half-plane rule: the side motor in the payload's half of the vertical
/// through the top anchor is used; the tie resolves to Right.
pub fn active_side(p: Vec2, g: &RobotGeometry) -> ActiveSide {
    if p.x < g.anchor_top.x {
        ActiveSide::Left
    } else {
        ActiveSide::Right
    }
}

fn cable_line(p: Vec2, anchor: Vec2, which: Cable) -> Result<CableLine, KinematicsError> {
    let away = p - anchor;
    let length = away.norm();
    if length < 1e-12 {
        return Err(KinematicsError::Degenerate(which));
    }
    Ok(CableLine {
        length,
        angle: away.y.atan2(away.x),
    })
}

/// Lengths and away-direction angles of all three cables.
pub fn cable_geometry(p: Vec2, g: &RobotGeometry) -> Result<CableGeom, KinematicsError> {
    Ok(CableGeom {
        top: cable_line(p, g.anchor_top, Cable::Top)?,
        left: cable_line(p, g.anchor_left, Cable::Left)?,
        right: cable_line(p, g.anchor_right, Cable::Right)?,
    })
}

/// Cable length rates realizing the Cartesian velocity `v` for the two
/// controlled cables with away-angles `alpha_1` (top) and `alpha_j`
/// (active side). Positive rate pays out.
pub fn inverse_velocity(
    alpha_1: f64,
    alpha_j: f64,
    v: Vec2,
) -> Result<(f64, f64), KinematicsError> {
    let s = (alpha_1 - alpha_j).sin();
    if s.abs() <= EPS_SINGULAR {
        return Err(KinematicsError::Singular(s.abs()));
    }
    Ok((
        v.x * alpha_1.cos() + v.y * alpha_1.sin(),
        v.x * alpha_j.cos() + v.y * alpha_j.sin(),
    ))
}

/// Cartesian velocity from the two cable rates; the forward map used for
/// consistency checks and velocity reconstruction.
pub fn forward_velocity(
    alpha_1: f64,
    alpha_j: f64,
    d_dot_1: f64,
    d_dot_j: f64,
) -> Result<Vec2, KinematicsError> {
    let s = (alpha_1 - alpha_j).sin();
    if s.abs() <= EPS_SINGULAR {
        return Err(KinematicsError::Singular(s.abs()));
    }
    // Solve [cos a1 sin a1; cos aj sin aj] v = (d1, dj).
    let det = alpha_1.cos() * alpha_j.sin() - alpha_1.sin() * alpha_j.cos();
    Ok(Vec2::new(
        (d_dot_1 * alpha_j.sin() - alpha_1.sin() * d_dot_j) / det,
        (alpha_1.cos() * d_dot_j - d_dot_1 * alpha_j.cos()) / det,
    ))
}

/// Motor shaft speed for a cable rate; errors when past the motor limit
/// so the caller can time-scale the command.
pub fn cable_rate_to_motor_speed(d_dot: f64, params: &MotorParams) -> Result<f64, KinematicsError> {
    let speed = d_dot / params.cable_per_rad();
    if speed.abs() > params.max_motor_speed {
        return Err(KinematicsError::SpeedLimit {
            requested: speed,
            limit: params.max_motor_speed,
        });
    }
    Ok(speed)
}

/// State of the single-DoF circular constraint around the braked top
/// cable: radius, arc angle from straight-down (positive toward +x) and
/// the unit tangent of increasing angle.
pub fn constrained_arc_state(p: Vec2, g: &RobotGeometry) -> (f64, f64, Vec2) {
    let rel = p - g.anchor_top;
    let radius = rel.norm();
    let phi = rel.x.atan2(-rel.y);
    (radius, phi, Vec2::new(phi.cos(), phi.sin()))
}

/// Payload position on the top-anchor arc at angle `phi` and radius `r`.
pub fn arc_position(phi: f64, radius: f64, g: &RobotGeometry) -> Vec2 {
    g.anchor_top + Vec2::new(radius * phi.sin(), -radius * phi.cos())
}
