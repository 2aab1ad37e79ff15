//! Continuous control layer: Cartesian velocity control with half-plane
//! motor selection and a tension keeper, the braked-constraint drop
//! controller, the hold controller and the fine-positioning primitives.
//!
//! Each tick the active controller emits one `ActuatorCommand`; all
//! outputs are functions of the sensor frame, the phase and the config,
//! with the only internal state being the brake hysteresis latches and
//! a short velocity-estimation window.

use std::collections::VecDeque;

use thiserror::Error;

use crate::actuation::MotorMode;
use crate::config::{ScenarioConfig, Trio, Vec2};
use crate::kinematics::{active_side, cable_geometry, KinematicsError};
use crate::plant::SensorFrame;
use crate::supervisor::Phase;

/// Drop payout rate as a fraction of (v_lo + v_hi).
const DROP_PAYOUT_FRACTION: f64 = 0.6;
/// Measured top slack above which drop payout pauses. Tighter than the
/// hold tolerance: spinning the geared winch against a slack cable
/// burns friction power for nothing.
const DROP_SLACK_PAUSE: f64 = 0.002;
/// Measured slack below which the hold controller engages the arriving
/// side brake.
const HOLD_SLACK_TOL: f64 = 0.005;
/// Fine-swing duty cycle: the brake is applied above ENGAGE and
/// re-released below RELEASE, both as fractions of fine_speed. The band
/// sits above 1.0 because estimator lag and the brake switch delay both
/// shave speed off every application.
const FINE_ENGAGE_FRACTION: f64 = 0.9;
const FINE_RELEASE_FRACTION: f64 = 0.35;
/// Velocity estimation window, in camera samples.
const VEL_WINDOW: usize = 6;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Per-tick command: a mode per motor and an energize (release) flag
/// per brake.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorCommand {
    pub motors: Trio<MotorMode>,
    /// true = energize = release (normally-on brakes).
    pub energize: Trio<bool>,
    /// Set when a speed-limited command was uniformly scaled down.
    pub limited: bool,
}

impl ActuatorCommand {
    /// Everything unpowered, brakes engaged.
    pub fn idle() -> Self {
        ActuatorCommand {
            motors: Trio {
                top: MotorMode::Passive,
                left: MotorMode::Passive,
                right: MotorMode::Passive,
            },
            energize: Trio {
                top: false,
                left: false,
                right: false,
            },
            limited: false,
        }
    }
}

/// Finite-difference velocity estimate over a short window of distinct
/// camera samples.
#[derive(Debug, Default)]
pub struct VelocityEstimator {
    samples: VecDeque<(f64, Vec2)>,
}

impl VelocityEstimator {
    pub fn update(&mut self, frame: &SensorFrame) {
        match self.samples.back() {
            Some((t, _)) if *t == frame.position_sample_time => {}
            _ => {
                self.samples
                    .push_back((frame.position_sample_time, frame.position_measurement));
                while self.samples.len() > VEL_WINDOW {
                    self.samples.pop_front();
                }
            }
        }
    }

    pub fn velocity(&self) -> Option<Vec2> {
        let (t0, p0) = self.samples.front()?;
        let (t1, p1) = self.samples.back()?;
        if t1 - t0 < 1e-9 {
            return None;
        }
        Some((*p1 - *p0).scale(1.0 / (t1 - t0)))
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }
}

/// Cartesian velocity command: top and active-side winches track the
/// cable rates realizing `v_des`. With `drive_all` the inactive side is
/// velocity-driven at its own kinematic rate too (all three servos
/// live, as in point-to-point tracking); otherwise it holds keeper
/// current whenever the motion would slacken its cable, else spools
/// freely. All brakes are released. Speed-limit violations scale the
/// whole command down uniformly.
pub fn cartesian_velocity_cmd(
    v_des: Vec2,
    p_meas: Vec2,
    cfg: &ScenarioConfig,
    drive_all: bool,
    keeper: bool,
) -> Result<ActuatorCommand, ControlError> {
    let g = &cfg.geometry;
    let side = active_side(p_meas, g);
    let geom = cable_geometry(p_meas, g)?;
    let side_line = geom.get(side.cable());
    let (rate_top, rate_side) =
        crate::kinematics::inverse_velocity(geom.top.angle, side_line.angle, v_des)?;

    let inactive = side.other();
    let inactive_angle = geom.get(inactive).angle;
    let inactive_rate = v_des.x * inactive_angle.cos() + v_des.y * inactive_angle.sin();

    let top_params = &cfg.motors.top;
    let side_params = cfg.motors.get(side.cable());
    let inactive_params = cfg.motors.get(inactive);
    let speed_top = rate_top / top_params.cable_per_rad();
    let speed_side = rate_side / side_params.cable_per_rad();
    let speed_inactive = inactive_rate / inactive_params.cable_per_rad();
    let scale = [
        (top_params.max_motor_speed, speed_top),
        (side_params.max_motor_speed, speed_side),
        (
            inactive_params.max_motor_speed,
            if drive_all { speed_inactive } else { 0.0 },
        ),
    ]
    .iter()
    .map(|(limit, s)| if s.abs() > *limit { limit / s.abs() } else { 1.0 })
    .fold(1.0_f64, f64::min);

    let inactive_mode = if drive_all {
        MotorMode::Driven(speed_inactive * scale)
    } else if keeper && inactive_rate < 1e-9 {
        MotorMode::CurrentControlled(cfg.task.keeper_current)
    } else {
        MotorMode::Passive
    };

    let mut motors = Trio {
        top: MotorMode::Driven(speed_top * scale),
        left: inactive_mode,
        right: inactive_mode,
    };
    *motors.get_mut(side.cable()) = MotorMode::Driven(speed_side * scale);

    Ok(ActuatorCommand {
        motors,
        energize: Trio {
            top: true,
            left: true,
            right: true,
        },
        limited: scale < 1.0,
    })
}

/// Hybrid controller implementing the task phases: Cartesian lifting,
/// natural-dynamics swing on the braked top cable, brake-based hold,
/// bang-bang brake drop, and contact-guided fine positioning.
pub struct ProposedController {
    est: VelocityEstimator,
    last_phase: Phase,
    /// Hold: latched once the arriving-side brake was told to engage.
    hold_engaged: bool,
    /// Drop and fine-swing hysteresis: true = brake commanded engaged.
    brake_latch: bool,
}

impl ProposedController {
    pub fn new() -> Self {
        ProposedController {
            est: VelocityEstimator::default(),
            last_phase: Phase::Init,
            hold_engaged: false,
            brake_latch: false,
        }
    }

    pub fn command(
        &mut self,
        phase: Phase,
        frame: &SensorFrame,
        cfg: &ScenarioConfig,
    ) -> Result<ActuatorCommand, ControlError> {
        self.est.update(frame);
        if phase != self.last_phase {
            self.last_phase = phase;
            self.hold_engaged = false;
            // Drop starts with the side brake engaged (from the hold);
            // fine swing starts released.
            self.brake_latch = matches!(phase, Phase::Drop);
        }
        let task = &cfg.task;
        match phase {
            Phase::Init | Phase::Done | Phase::Fault => Ok(ActuatorCommand::idle()),
            Phase::Lifting => {
                cartesian_velocity_cmd(Vec2::new(0.0, task.lift_speed), frame.position_measurement, cfg, false, true)
            }
            Phase::Swing => {
                // Top: brake engages, zero-velocity servo covers the
                // switch delay at zero current. Departing side spools
                // freely; arriving side takes up slack on keeper
                // current.
                let mut cmd = ActuatorCommand::idle();
                cmd.motors.top = MotorMode::Driven(0.0);
                cmd.motors.right = MotorMode::CurrentControlled(task.keeper_current);
                cmd.energize.left = true;
                cmd.energize.right = true;
                Ok(cmd)
            }
            Phase::Hold => {
                let mut cmd = ActuatorCommand::idle();
                cmd.motors.top = MotorMode::Driven(0.0);
                cmd.energize.left = true;
                if !self.hold_engaged {
                    let dist =
                        (frame.position_measurement - cfg.geometry.anchor_right).norm();
                    let slack = frame.encoder_lengths.right - dist;
                    if slack < HOLD_SLACK_TOL {
                        self.hold_engaged = true;
                    }
                }
                if self.hold_engaged {
                    cmd.motors.right = MotorMode::Passive;
                    cmd.energize.right = false;
                } else {
                    cmd.motors.right = MotorMode::CurrentControlled(task.keeper_current);
                    cmd.energize.right = true;
                }
                Ok(cmd)
            }
            Phase::Drop => {
                let mut cmd = ActuatorCommand::idle();
                // Winch friction blocks back-driving, so the top motor
                // actively pays out inside the hysteresis band. Payout
                // pauses whenever the cable already hangs slack, so the
                // spool tracks the descent instead of running ahead of it.
                let top_dist = (frame.position_measurement - cfg.geometry.anchor_top).norm();
                let top_slack = frame.encoder_lengths.top - top_dist;
                let payout = if top_slack > DROP_SLACK_PAUSE {
                    0.0
                } else {
                    DROP_PAYOUT_FRACTION * (task.drop_v_lo + task.drop_v_hi)
                };
                cmd.motors.top = MotorMode::Driven(payout / cfg.motors.top.cable_per_rad());
                cmd.energize.top = true;
                cmd.energize.left = true;
                let descent = self.est.velocity().map(|v| -v.y).unwrap_or(0.0);
                if descent > task.drop_v_hi {
                    self.brake_latch = true;
                } else if descent < task.drop_v_lo {
                    self.brake_latch = false;
                }
                cmd.energize.right = !self.brake_latch;
                Ok(cmd)
            }
            // Lift up and toward the neighbor: the leftward bias
            // shortens the top radius so the following swing arc meets
            // the neighbor face clearly above the ground.
            Phase::FineLift => cartesian_velocity_cmd(
                Vec2::new(-task.fine_speed, task.fine_speed),
                frame.position_measurement,
                cfg,
                false,
                false,
            ),
            Phase::FineSwing => {
                // Gravity swings the payload toward the neighbor; the
                // arriving-side brake is duty-cycled to cap the speed.
                let mut cmd = ActuatorCommand::idle();
                cmd.motors.top = MotorMode::Driven(0.0);
                cmd.energize.left = true;
                let speed = self.est.velocity().map(Vec2::norm).unwrap_or(0.0);
                if speed > FINE_ENGAGE_FRACTION * task.fine_speed {
                    self.brake_latch = true;
                } else if speed < FINE_RELEASE_FRACTION * task.fine_speed {
                    self.brake_latch = false;
                }
                cmd.energize.right = !self.brake_latch;
                Ok(cmd)
            }
            Phase::FineDrop => cartesian_velocity_cmd(
                Vec2::new(0.0, -task.fine_speed),
                frame.position_measurement,
                cfg,
                false,
                false,
            ),
        }
    }
}

impl Default for ProposedController {
    fn default() -> Self {
        Self::new()
    }
}
