//! Scenario configuration: physical parameters, task thresholds and the
//! flat `key = value` scenario file format.
//!
//! All quantities are SI (meters, seconds, kilograms, newtons, volts,
//! amperes, radians). Configs are immutable after loading and safe to
//! share between threads.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const GRAVITY: f64 = 9.81;

/// 2D vector in the vertical working plane. `x` points rightward,
/// `y` upward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

/// Axis-aligned rectangle, `min` is the lower-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// The previously placed payload the new one is set down against.
/// Rests on the ground: its bottom edge is at `ground_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborBox {
    /// x of the left edge.
    pub x: f64,
    pub width: f64,
    pub height: f64,
}

impl NeighborBox {
    pub fn right_edge(&self) -> f64 {
        self.x + self.width
    }
}

/// Anchor layout and task geometry of the planar robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotGeometry {
    pub anchor_top: Vec2,
    pub anchor_left: Vec2,
    pub anchor_right: Vec2,
    pub ground_y: f64,
    pub neighbor: NeighborBox,
    pub workspace: Rect,
    /// Target payload-center x: the neighbor's side face plus the payload
    /// half width.
    pub target_x: f64,
}

/// One winch actuator. `gear_ratio` is drum revolutions per motor
/// revolution (a 70:1 reduction stores as 1/70), so the cable rate is
/// `d_dot = n * r * theta_dot` with `theta_dot` the motor shaft speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorParams {
    pub rated_power: f64,
    pub gear_ratio: f64,
    pub drum_radius: f64,
    pub winding_resistance: f64,
    pub torque_constant: f64,
    pub back_emf_constant: f64,
    /// Static friction torque referred to the drum (N·m).
    pub static_friction_torque: f64,
    /// Viscous friction at the drum (N·m·s/rad).
    pub viscous_friction: f64,
    /// Motor shaft speed limit (rad/s).
    pub max_motor_speed: f64,
    pub max_current: f64,
}

impl MotorParams {
    /// Meters of cable per radian of motor shaft.
    pub fn cable_per_rad(&self) -> f64 {
        self.gear_ratio * self.drum_radius
    }

    /// Fastest achievable cable rate (m/s).
    pub fn max_cable_rate(&self) -> f64 {
        self.cable_per_rad() * self.max_motor_speed
    }
}

/// Normally-on brake: engaged when unpowered, consumes `power_energized`
/// while held open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrakeParams {
    /// Holding capacity at the drum (N·m). Must exceed the worst static
    /// cable-load torque so a braked cable never slips.
    pub hold_torque: f64,
    pub power_energized: f64,
    pub switch_delay: f64,
}

/// Identifies one of the three cables/actuators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cable {
    Top,
    Left,
    Right,
}

impl Cable {
    pub const ALL: [Cable; 3] = [Cable::Top, Cable::Left, Cable::Right];

    pub fn name(self) -> &'static str {
        match self {
            Cable::Top => "top",
            Cable::Left => "left",
            Cable::Right => "right",
        }
    }
}

impl fmt::Display for Cable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A value per cable/actuator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Trio<T> {
    pub top: T,
    pub left: T,
    pub right: T,
}

impl<T> Trio<T> {
    pub fn get(&self, c: Cable) -> &T {
        match c {
            Cable::Top => &self.top,
            Cable::Left => &self.left,
            Cable::Right => &self.right,
        }
    }

    pub fn get_mut(&mut self, c: Cable) -> &mut T {
        match c {
            Cable::Top => &mut self.top,
            Cable::Left => &mut self.left,
            Cable::Right => &mut self.right,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(Cable, &T) -> U) -> Trio<U> {
        Trio {
            top: f(Cable::Top, &self.top),
            left: f(Cable::Left, &self.left),
            right: f(Cable::Right, &self.right),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cable, &T)> {
        Cable::ALL.into_iter().map(move |c| (c, self.get(c)))
    }
}

/// Task thresholds and tuning of the proposed controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskParams {
    /// Lift height at which the swing starts.
    pub h_d: f64,
    /// Active-side encoder length below which the fine lift ends.
    pub l2_threshold: f64,
    pub lift_speed: f64,
    pub fine_speed: f64,
    /// Drop descent-speed hysteresis band: release below `drop_v_lo`,
    /// engage above `drop_v_hi`.
    pub drop_v_lo: f64,
    pub drop_v_hi: f64,
    /// Tension-keeper current for the idle side motor.
    pub keeper_current: f64,
    /// Top-motor current deviation that flags an impact.
    pub impact_current_threshold: f64,
    /// Pendulum damping (1/s).
    pub swing_damping: f64,
    /// Contact restitution in [0, 1).
    pub restitution: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    /// Camera sample rate (Hz); positions are zero-order held between
    /// samples.
    pub rate: f64,
    /// Gaussian position noise per sample (m).
    pub noise_sigma: f64,
}

/// Full scenario: everything a run needs, immutable after load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub geometry: RobotGeometry,
    pub motors: Trio<MotorParams>,
    pub brakes: Trio<BrakeParams>,
    pub payload_mass: f64,
    pub payload_halfwidth: f64,
    pub dt: f64,
    pub task: TaskParams,
    pub sensor: SensorParams,
    pub rng_seed: u64,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io error reading scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unknown scenario key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let top = MotorParams {
            rated_power: 750.0,
            gear_ratio: 1.0 / 70.0,
            drum_radius: 0.042,
            winding_resistance: 1.0,
            torque_constant: 0.5,
            back_emf_constant: 0.5,
            static_friction_torque: 6.5,
            viscous_friction: 0.002,
            max_motor_speed: 840.0,
            max_current: 10.0,
        };
        // The side reduction is the internal gear times the 30/16 belt
        // stage; the cable is wound directly on the 8 mm output shaft.
        let side = MotorParams {
            rated_power: 188.0,
            gear_ratio: 1.0 / 15.0,
            drum_radius: 0.008,
            winding_resistance: 0.2,
            torque_constant: 0.05,
            back_emf_constant: 0.05,
            static_friction_torque: 0.05,
            viscous_friction: 0.0002,
            max_motor_speed: 1200.0,
            max_current: 15.0,
        };
        ScenarioConfig {
            geometry: RobotGeometry {
                anchor_top: Vec2::new(0.5, 1.4),
                anchor_left: Vec2::new(0.0, 1.0),
                anchor_right: Vec2::new(1.0, 1.0),
                ground_y: 0.0,
                neighbor: NeighborBox {
                    x: 0.38,
                    width: 0.20,
                    height: 0.25,
                },
                workspace: Rect::new(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0)),
                target_x: 0.64,
            },
            motors: Trio {
                top,
                left: side,
                right: side,
            },
            brakes: Trio {
                top: BrakeParams {
                    hold_torque: 20.0,
                    power_energized: 11.0,
                    switch_delay: 0.05,
                },
                left: BrakeParams {
                    hold_torque: 2.5,
                    power_energized: 8.0,
                    switch_delay: 0.05,
                },
                right: BrakeParams {
                    hold_torque: 2.5,
                    power_energized: 8.0,
                    switch_delay: 0.05,
                },
            },
            payload_mass: 14.0,
            payload_halfwidth: 0.06,
            dt: 0.001,
            task: TaskParams {
                h_d: 0.5,
                l2_threshold: 0.92,
                lift_speed: 0.25,
                fine_speed: 0.1,
                drop_v_lo: 0.05,
                drop_v_hi: 0.25,
                keeper_current: 0.07,
                impact_current_threshold: 0.5,
                swing_damping: 0.05,
                restitution: 0.0,
            },
            sensor: SensorParams {
                rate: 150.0,
                noise_sigma: 0.001,
            },
            rng_seed: 42,
        }
    }
}

impl ScenarioConfig {
    /// Payload weight (N).
    pub fn weight(&self) -> f64 {
        self.payload_mass * GRAVITY
    }

    /// Payload start position: on the ground, left of the neighbor box.
    pub fn start_position(&self) -> Vec2 {
        let ws = &self.geometry.workspace;
        Vec2::new(ws.min.x + 0.15 * ws.width(), self.geometry.ground_y)
    }

    /// Deterministic hash of the serialized scenario, used to pair run
    /// logs produced from the same configuration.
    pub fn hash(&self) -> u64 {
        // FNV-1a over the canonical key=value serialization.
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.to_key_values().as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let inv = |key: &str, reason: &str| -> Result<(), ConfigError> {
            Err(ConfigError::Invalid {
                key: key.to_string(),
                reason: reason.to_string(),
            })
        };
        let g = &self.geometry;
        for (key, v) in [
            ("geometry.anchor_top", g.anchor_top),
            ("geometry.anchor_left", g.anchor_left),
            ("geometry.anchor_right", g.anchor_right),
        ] {
            if !v.is_finite() {
                return inv(key, "must be finite");
            }
        }
        if !(g.anchor_top.y > g.anchor_left.y && g.anchor_top.y > g.anchor_right.y) {
            return inv("geometry.anchor_top.y", "top anchor must be highest");
        }
        if !(g.anchor_left.x < g.anchor_top.x && g.anchor_top.x < g.anchor_right.x) {
            return inv(
                "geometry.anchor_top.x",
                "top anchor must lie between the side anchors",
            );
        }
        if g.neighbor.width <= 0.0 || g.neighbor.height <= 0.0 {
            return inv("geometry.neighbor.width", "must be positive");
        }
        if self.payload_mass <= 0.0 {
            return inv("payload.mass", "must be strictly positive");
        }
        if self.payload_halfwidth <= 0.0 {
            return inv("payload.halfwidth", "must be strictly positive");
        }
        if self.dt <= 0.0 {
            return inv("sim.dt", "must be strictly positive");
        }
        for (c, m) in self.motors.iter() {
            let prefix = format!("motor.{c}");
            for (field, v) in [
                ("rated_power", m.rated_power),
                ("gear_ratio", m.gear_ratio),
                ("drum_radius", m.drum_radius),
                ("resistance", m.winding_resistance),
                ("kt", m.torque_constant),
                ("ke", m.back_emf_constant),
                ("static_friction", m.static_friction_torque),
                ("viscous_friction", m.viscous_friction),
                ("max_speed", m.max_motor_speed),
                ("max_current", m.max_current),
            ] {
                if !(v > 0.0) {
                    return inv(&format!("{prefix}.{field}"), "must be strictly positive");
                }
            }
            if m.gear_ratio > 1.0 {
                return inv(
                    &format!("{prefix}.gear_ratio"),
                    "stores drum revolutions per motor revolution and must be <= 1",
                );
            }
            if (m.torque_constant - m.back_emf_constant).abs() > 1e-9 * m.torque_constant {
                return inv(
                    &format!("{prefix}.ke"),
                    "kt and ke must be numerically equal in SI units",
                );
            }
        }
        for (c, b) in self.brakes.iter() {
            let prefix = format!("brake.{c}");
            if b.power_energized < 0.0 {
                return inv(&format!("{prefix}.power"), "must be non-negative");
            }
            if b.switch_delay < 0.0 {
                return inv(&format!("{prefix}.switch_delay"), "must be non-negative");
            }
            // Static load bound: full payload weight on this one drum.
            let worst = self.weight() * self.motors.get(c).drum_radius;
            if b.hold_torque <= worst {
                return inv(
                    &format!("{prefix}.hold_torque"),
                    "must exceed the worst-case static cable-load torque",
                );
            }
        }
        let t = &self.task;
        if !(0.0 <= t.drop_v_lo && t.drop_v_lo < t.drop_v_hi) {
            return inv("task.drop_v_lo", "band must satisfy 0 <= v_lo < v_hi");
        }
        if t.h_d <= g.neighbor.height + self.payload_halfwidth {
            return inv(
                "task.h_d",
                "must clear the neighbor box top plus payload clearance",
            );
        }
        if !(t.restitution >= 0.0 && t.restitution < 1.0) {
            return inv("task.restitution", "must lie in [0, 1)");
        }
        for (key, v) in [
            ("task.l2_threshold", t.l2_threshold),
            ("task.lift_speed", t.lift_speed),
            ("task.fine_speed", t.fine_speed),
            ("task.keeper_current", t.keeper_current),
            ("task.impact_current_threshold", t.impact_current_threshold),
        ] {
            if !(v > 0.0) {
                return inv(key, "must be strictly positive");
            }
        }
        if t.swing_damping < 0.0 {
            return inv("task.swing_damping", "must be non-negative");
        }
        if !(self.sensor.rate > 0.0) {
            return inv("sensor.rate", "must be strictly positive");
        }
        if self.sensor.noise_sigma < 0.0 {
            return inv("sensor.noise_sigma", "must be non-negative");
        }
        Ok(())
    }

    /// Serialize to the flat `key = value` scenario format. The output
    /// parses back to an identical config.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.key_value_pairs() {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    fn key_value_pairs(&self) -> Vec<(String, String)> {
        let g = &self.geometry;
        let f = |v: f64| format!("{v:?}");
        let mut pairs: Vec<(String, String)> = vec![
            ("geometry.anchor_top.x".into(), f(g.anchor_top.x)),
            ("geometry.anchor_top.y".into(), f(g.anchor_top.y)),
            ("geometry.anchor_left.x".into(), f(g.anchor_left.x)),
            ("geometry.anchor_left.y".into(), f(g.anchor_left.y)),
            ("geometry.anchor_right.x".into(), f(g.anchor_right.x)),
            ("geometry.anchor_right.y".into(), f(g.anchor_right.y)),
            ("geometry.ground_y".into(), f(g.ground_y)),
            ("geometry.neighbor.x".into(), f(g.neighbor.x)),
            ("geometry.neighbor.width".into(), f(g.neighbor.width)),
            ("geometry.neighbor.height".into(), f(g.neighbor.height)),
            ("geometry.target_x".into(), f(g.target_x)),
        ];
        for (c, m) in self.motors.iter() {
            let p = format!("motor.{c}");
            pairs.extend([
                (format!("{p}.rated_power"), f(m.rated_power)),
                (format!("{p}.gear_ratio"), f(m.gear_ratio)),
                (format!("{p}.drum_radius"), f(m.drum_radius)),
                (format!("{p}.resistance"), f(m.winding_resistance)),
                (format!("{p}.kt"), f(m.torque_constant)),
                (format!("{p}.ke"), f(m.back_emf_constant)),
                (format!("{p}.static_friction"), f(m.static_friction_torque)),
                (format!("{p}.viscous_friction"), f(m.viscous_friction)),
                (format!("{p}.max_speed"), f(m.max_motor_speed)),
                (format!("{p}.max_current"), f(m.max_current)),
            ]);
        }
        for (c, b) in self.brakes.iter() {
            let p = format!("brake.{c}");
            pairs.extend([
                (format!("{p}.hold_torque"), f(b.hold_torque)),
                (format!("{p}.power"), f(b.power_energized)),
                (format!("{p}.switch_delay"), f(b.switch_delay)),
            ]);
        }
        let t = &self.task;
        pairs.extend([
            ("payload.mass".into(), f(self.payload_mass)),
            ("payload.halfwidth".into(), f(self.payload_halfwidth)),
            ("sim.dt".into(), f(self.dt)),
            ("sim.seed".into(), format!("{}", self.rng_seed)),
            ("task.h_d".into(), f(t.h_d)),
            ("task.l2_threshold".into(), f(t.l2_threshold)),
            ("task.lift_speed".into(), f(t.lift_speed)),
            ("task.fine_speed".into(), f(t.fine_speed)),
            ("task.drop_v_lo".into(), f(t.drop_v_lo)),
            ("task.drop_v_hi".into(), f(t.drop_v_hi)),
            ("task.keeper_current".into(), f(t.keeper_current)),
            (
                "task.impact_current_threshold".into(),
                f(t.impact_current_threshold),
            ),
            ("task.swing_damping".into(), f(t.swing_damping)),
            ("task.restitution".into(), f(t.restitution)),
            ("sensor.rate".into(), f(self.sensor.rate)),
            ("sensor.noise_sigma".into(), f(self.sensor.noise_sigma)),
        ]);
        pairs
    }

    fn apply_key(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        let parse_f64 = |v: &str| -> Result<f64, ConfigError> {
            v.parse::<f64>().map_err(|_| ConfigError::Parse {
                line,
                reason: format!("`{v}` is not a number"),
            })
        };
        if key == "sim.seed" {
            self.rng_seed = value.parse::<u64>().map_err(|_| ConfigError::Parse {
                line,
                reason: format!("`{value}` is not an unsigned integer"),
            })?;
            return Ok(());
        }
        let v = parse_f64(value)?;
        let g = &mut self.geometry;
        let slot: &mut f64 = match key {
            "geometry.anchor_top.x" => &mut g.anchor_top.x,
            "geometry.anchor_top.y" => &mut g.anchor_top.y,
            "geometry.anchor_left.x" => &mut g.anchor_left.x,
            "geometry.anchor_left.y" => &mut g.anchor_left.y,
            "geometry.anchor_right.x" => &mut g.anchor_right.x,
            "geometry.anchor_right.y" => &mut g.anchor_right.y,
            "geometry.ground_y" => &mut g.ground_y,
            "geometry.neighbor.x" => &mut g.neighbor.x,
            "geometry.neighbor.width" => &mut g.neighbor.width,
            "geometry.neighbor.height" => &mut g.neighbor.height,
            "geometry.target_x" => &mut g.target_x,
            "payload.mass" => &mut self.payload_mass,
            "payload.halfwidth" => &mut self.payload_halfwidth,
            "sim.dt" => &mut self.dt,
            "task.h_d" => &mut self.task.h_d,
            "task.l2_threshold" => &mut self.task.l2_threshold,
            "task.lift_speed" => &mut self.task.lift_speed,
            "task.fine_speed" => &mut self.task.fine_speed,
            "task.drop_v_lo" => &mut self.task.drop_v_lo,
            "task.drop_v_hi" => &mut self.task.drop_v_hi,
            "task.keeper_current" => &mut self.task.keeper_current,
            "task.impact_current_threshold" => &mut self.task.impact_current_threshold,
            "task.swing_damping" => &mut self.task.swing_damping,
            "task.restitution" => &mut self.task.restitution,
            "sensor.rate" => &mut self.sensor.rate,
            "sensor.noise_sigma" => &mut self.sensor.noise_sigma,
            _ => {
                let parts: Vec<&str> = key.split('.').collect();
                if parts.len() == 3 && (parts[0] == "motor" || parts[0] == "brake") {
                    let cable = match parts[1] {
                        "top" => Cable::Top,
                        "left" => Cable::Left,
                        "right" => Cable::Right,
                        _ => return Err(ConfigError::UnknownKey(key.to_string())),
                    };
                    if parts[0] == "motor" {
                        let m = self.motors.get_mut(cable);
                        match parts[2] {
                            "rated_power" => m.rated_power = v,
                            "gear_ratio" => m.gear_ratio = v,
                            "drum_radius" => m.drum_radius = v,
                            "resistance" => m.winding_resistance = v,
                            "kt" => m.torque_constant = v,
                            "ke" => m.back_emf_constant = v,
                            "static_friction" => m.static_friction_torque = v,
                            "viscous_friction" => m.viscous_friction = v,
                            "max_speed" => m.max_motor_speed = v,
                            "max_current" => m.max_current = v,
                            _ => return Err(ConfigError::UnknownKey(key.to_string())),
                        }
                    } else {
                        let b = self.brakes.get_mut(cable);
                        match parts[2] {
                            "hold_torque" => b.hold_torque = v,
                            "power" => b.power_energized = v,
                            "switch_delay" => b.switch_delay = v,
                            _ => return Err(ConfigError::UnknownKey(key.to_string())),
                        }
                    }
                    return Ok(());
                }
                return Err(ConfigError::UnknownKey(key.to_string()));
            }
        };
        *slot = v;
        Ok(())
    }

    /// Parse the flat scenario format from a string. Unspecified keys
    /// keep their defaults; `#` starts a comment.
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                reason: "expected `key = value`".to_string(),
            })?;
            cfg.apply_key(key.trim(), value.trim(), line)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Load and validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    ScenarioConfig::from_str(&text)
}

/// Keys and values as an ordered map, mostly for diagnostics.
pub fn key_value_map(cfg: &ScenarioConfig) -> BTreeMap<String, String> {
    cfg.key_value_pairs().into_iter().collect()
}
