//! Motor electrical model, normally-on brake model and the energy
//! ledger.
//!
//! The electrical accounting is `P_el = V * I_a` with the copper losses
//! `R_a * I_a^2` dominating at standstill. Negative instantaneous power
//! (back-driving) is clamped to zero in the ledger: the drives are not
//! regenerative.

use std::collections::BTreeMap;

use crate::config::{BrakeParams, MotorParams};

/// Low-level command for one motor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotorMode {
    /// Velocity servo toward a shaft-speed setpoint (rad/s, payout
    /// positive).
    Driven(f64),
    /// Current controller at a fixed setpoint (A).
    CurrentControlled(f64),
    /// Unpowered: zero current, zero voltage, the shaft follows the
    /// cable.
    Passive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotorState {
    /// Shaft angle (rad), integrated from cable motion.
    pub shaft_angle: f64,
    /// Shaft speed (rad/s), payout positive.
    pub shaft_speed: f64,
    pub current: f64,
    pub voltage: f64,
    pub mode: MotorMode,
}

impl Default for MotorState {
    fn default() -> Self {
        MotorState {
            shaft_angle: 0.0,
            shaft_speed: 0.0,
            current: 0.0,
            voltage: 0.0,
            mode: MotorMode::Passive,
        }
    }
}

/// Total electric power drawn by one motor.
pub fn electrical_power(voltage: f64, current: f64) -> f64 {
    voltage * current
}

/// Resistive winding losses.
pub fn copper_loss(resistance: f64, current: f64) -> f64 {
    resistance * current * current
}

impl MotorState {
    /// Velocity-servo speed update toward the Driven setpoint. First
    /// order tracking that settles within ~50 ms without overshoot.
    pub fn track_setpoint(&mut self, params: &MotorParams, dt: f64) {
        const SERVO_TAU: f64 = 0.012;
        if let MotorMode::Driven(setpoint) = self.mode {
            let sp = setpoint.clamp(-params.max_motor_speed, params.max_motor_speed);
            let alpha = 1.0 - (-dt / SERVO_TAU).exp();
            self.shaft_speed += (sp - self.shaft_speed) * alpha;
        }
    }

    /// Settle the electrical state for this tick, given the realized
    /// shaft speed and the cable tension the drum carries. Quasistatic
    /// torque balance: the servo carries the load torque plus whatever
    /// friction does not supply.
    pub fn settle_electrical(&mut self, params: &MotorParams, tension: f64, realized_speed: f64) {
        self.shaft_angle += 0.0; // angle integration happens in the plant
        self.shaft_speed = realized_speed;
        let n = params.gear_ratio;
        let drum_speed = realized_speed * n;
        match self.mode {
            MotorMode::Passive => {
                self.current = 0.0;
                self.voltage = 0.0;
            }
            MotorMode::CurrentControlled(setpoint) => {
                self.current = setpoint.clamp(-params.max_current, params.max_current);
                self.voltage =
                    params.winding_resistance * self.current + params.back_emf_constant * realized_speed;
            }
            MotorMode::Driven(_) => {
                // Torques at the drum, positive in the payout sense.
                // Tension unwinds the drum; friction opposes motion;
                // static friction can hold the load at standstill.
                let load = tension * params.drum_radius;
                let torque_at_drum = if drum_speed.abs() > 1e-9 {
                    -load
                        + drum_speed.signum() * params.static_friction_torque
                        + params.viscous_friction * drum_speed
                } else {
                    -(load - params.static_friction_torque).max(0.0)
                };
                let shaft_torque = torque_at_drum * n;
                self.current =
                    (shaft_torque / params.torque_constant).clamp(-params.max_current, params.max_current);
                self.voltage = params.winding_resistance * self.current
                    + params.back_emf_constant * realized_speed;
            }
        }
    }

    /// Instantaneous ledger power: V * I clamped at zero from below.
    pub fn ledger_power(&self) -> f64 {
        electrical_power(self.voltage, self.current).max(0.0)
    }
}

/// Normally-on brake: `energized` follows the command immediately,
/// `engaged` flips only `switch_delay` after the command edge. Power is
/// drawn while the brake is held open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrakeState {
    pub energized: bool,
    pub engaged: bool,
    /// Absolute time at which the pending engaged-flip happens.
    pub transition_deadline: Option<f64>,
}

impl Default for BrakeState {
    fn default() -> Self {
        // Quiescent unpowered brake: engaged.
        BrakeState {
            energized: false,
            engaged: true,
            transition_deadline: None,
        }
    }
}

impl BrakeState {
    pub fn released() -> Self {
        BrakeState {
            energized: true,
            engaged: false,
            transition_deadline: None,
        }
    }

    /// Advance one tick. `now` is the time at the start of the tick;
    /// returns the energy drawn over the tick.
    pub fn step(&mut self, command_energized: bool, params: &BrakeParams, now: f64, dt: f64) -> f64 {
        if command_energized != self.energized {
            self.energized = command_energized;
            let target_engaged = !command_energized;
            if target_engaged != self.engaged {
                self.transition_deadline = Some(now + params.switch_delay);
            } else {
                self.transition_deadline = None;
            }
        }
        if let Some(deadline) = self.transition_deadline {
            if now + dt >= deadline {
                self.engaged = !self.energized;
                self.transition_deadline = None;
            }
        }
        if self.energized {
            params.power_energized * dt
        } else {
            0.0
        }
    }
}

/// Per-device energy integrals, sliced into task-phase columns. Motor
/// powers accumulate trapezoidally; brake energy is energized-time times
/// brake power, exactly.
#[derive(Debug, Clone, Default)]
pub struct EnergyLedger {
    /// Per motor: previous tick power (for the trapezoid) and totals.
    motor_prev_power: [f64; 3],
    pub motor_total: [f64; 3],
    /// Motor energy per column, keyed by the id of the last monitor
    /// event seen (0 before the first event).
    pub motor_columns: [BTreeMap<u8, f64>; 3],
    pub brake_total: [f64; 3],
    pub brake_columns: [BTreeMap<u8, f64>; 3],
    /// Energized time per brake (s).
    pub brake_on_time: [f64; 3],
    /// Phase marks: (label, timestamp).
    pub phase_marks: Vec<(String, f64)>,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mark_phase(&mut self, label: impl Into<String>, time: f64) {
        self.phase_marks.push((label.into(), time));
    }

    /// Trapezoidal accumulation of the three motor powers plus exact
    /// brake accounting for one tick, attributed to `column`.
    pub fn integrate(
        &mut self,
        motor_powers: [f64; 3],
        brake_energies: [f64; 3],
        brake_energized: [bool; 3],
        dt: f64,
        column: u8,
    ) {
        for i in 0..3 {
            let inc = 0.5 * (self.motor_prev_power[i] + motor_powers[i]) * dt;
            self.motor_prev_power[i] = motor_powers[i];
            self.motor_total[i] += inc;
            *self.motor_columns[i].entry(column).or_insert(0.0) += inc;
            self.brake_total[i] += brake_energies[i];
            if brake_energies[i] != 0.0 {
                *self.brake_columns[i].entry(column).or_insert(0.0) += brake_energies[i];
            }
            if brake_energized[i] {
                self.brake_on_time[i] += dt;
            }
        }
    }

    pub fn total(&self) -> f64 {
        self.motor_total.iter().sum::<f64>() + self.brake_total.iter().sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioConfig;

    #[test]
    fn electrical_power_is_signed_product() {
        assert_eq!(electrical_power(48.0, 2.0), 96.0);
        assert_eq!(electrical_power(123.0, 0.0), 0.0);
        assert_eq!(electrical_power(24.0, -1.0), -24.0);
    }

    #[test]
    fn copper_loss_is_even_in_current() {
        assert!((copper_loss(0.5, 2.0) - 2.0).abs() < 1e-12);
        assert_eq!(copper_loss(3.3, 0.0), 0.0);
        assert!((copper_loss(1.2, -3.0) - 10.8).abs() < 1e-12);
    }

    #[test]
    fn passive_mode_draws_nothing() {
        let params = ScenarioConfig::default().motors.top;
        let mut m = MotorState::default();
        m.mode = MotorMode::Passive;
        m.settle_electrical(&params, 500.0, 3.0);
        assert_eq!(m.current, 0.0);
        assert_eq!(m.voltage, 0.0);
        assert_eq!(m.ledger_power(), 0.0);
    }

    #[test]
    fn current_control_at_standstill_matches_copper_loss() {
        let mut params = ScenarioConfig::default().motors.top;
        params.winding_resistance = 0.5;
        let mut m = MotorState::default();
        m.mode = MotorMode::CurrentControlled(2.0);
        m.settle_electrical(&params, 0.0, 0.0);
        assert!((m.voltage - 1.0).abs() < 1e-12);
        let p = electrical_power(m.voltage, m.current);
        assert!((p - 2.0).abs() < 1e-12);
        assert!((p - copper_loss(params.winding_resistance, m.current)).abs() < 1e-12);
    }

    #[test]
    fn driven_no_load_no_friction_draws_nothing_at_speed() {
        let mut params = ScenarioConfig::default().motors.top;
        params.static_friction_torque = 1e-30;
        params.viscous_friction = 1e-30;
        let mut m = MotorState::default();
        m.mode = MotorMode::Driven(100.0);
        m.settle_electrical(&params, 0.0, 100.0);
        assert!(m.current.abs() < 1e-12);
        assert!(m.ledger_power() < 1e-9);
    }

    #[test]
    fn static_friction_holds_load_at_standstill() {
        let params = ScenarioConfig::default().motors.top;
        let mut m = MotorState::default();
        m.mode = MotorMode::Driven(0.0);
        // 137 N * 0.042 m = 5.77 N*m below the 6.5 N*m static friction.
        m.settle_electrical(&params, 137.0, 0.0);
        assert_eq!(m.current, 0.0);
    }

    #[test]
    fn brake_default_is_engaged_without_energy() {
        let params = ScenarioConfig::default().brakes.top;
        let mut b = BrakeState::default();
        let mut e = 0.0;
        for i in 0..100 {
            e += b.step(false, &params, i as f64 * 0.001, 0.001);
        }
        assert!(b.engaged);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn energized_brake_accrues_constant_power() {
        let params = ScenarioConfig::default().brakes.top;
        let mut b = BrakeState::released();
        let dt = 0.001;
        let mut e = 0.0;
        for i in 0..10_000 {
            e += b.step(true, &params, i as f64 * dt, dt);
        }
        assert!((e - 110.0).abs() < 1e-9);
    }

    #[test]
    fn brake_energy_equals_power_times_on_time() {
        // Back-derived reference on-time: 8.8727 s at 11 W is 97.60 J.
        let params = ScenarioConfig::default().brakes.top;
        let dt = 0.0001;
        let on_ticks = (8.8727f64 / dt).round() as usize;
        let mut b = BrakeState::released();
        let mut e = 0.0;
        for i in 0..on_ticks {
            e += b.step(true, &params, i as f64 * dt, dt);
        }
        assert!((e - 97.5997).abs() < 1e-6);
        assert!((e - params.power_energized * 8.8727).abs() < 1e-9 * e);
    }

    #[test]
    fn engaged_never_flips_before_switch_delay() {
        let params = ScenarioConfig::default().brakes.top;
        let mut b = BrakeState::released();
        let dt = 0.001;
        let mut t = 0.0;
        b.step(false, &params, t, dt);
        while t + dt < params.switch_delay - 1e-9 {
            assert!(!b.engaged, "engaged flipped early at t={t}");
            t += dt;
            b.step(false, &params, t, dt);
        }
        t += dt;
        b.step(false, &params, t, dt);
        assert!(b.engaged);
    }

    #[test]
    fn trapezoid_exact_for_constant_and_linear() {
        let dt = 0.01;
        let mut ledger = EnergyLedger::new();
        // Constant 11 W for 10 s. Seed the previous power so the first
        // trapezoid is full-height, as in a run that starts powered.
        ledger.motor_prev_power[0] = 11.0;
        for _ in 0..1000 {
            ledger.integrate([11.0, 0.0, 0.0], [0.0; 3], [false; 3], dt, 0);
        }
        assert!((ledger.motor_total[0] - 110.0).abs() < 1e-9);

        let mut ledger = EnergyLedger::new();
        // Linear ramp 0 -> 10 W over 2 s: exactly 10 J.
        let steps = 200;
        for i in 1..=steps {
            let p = 10.0 * i as f64 / steps as f64;
            ledger.integrate([p, 0.0, 0.0], [0.0; 3], [false; 3], 2.0 / steps as f64, 0);
        }
        assert!((ledger.motor_total[0] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn ledger_total_sums_devices() {
        let mut ledger = EnergyLedger::new();
        ledger.motor_prev_power = [1.0, 2.0, 3.0];
        for _ in 0..100 {
            ledger.integrate([1.0, 2.0, 3.0], [0.011, 0.008, 0.0], [true, true, false], 0.001, 1);
        }
        let expect = (1.0 + 2.0 + 3.0) * 0.1 + (0.011 + 0.008) * 100.0;
        assert!((ledger.total() - expect).abs() < 1e-9);
        assert!((ledger.brake_on_time[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn dt_halving_invariance_for_linear_power() {
        let run = |dt: f64| {
            let mut ledger = EnergyLedger::new();
            let steps = (2.0 / dt).round() as usize;
            for i in 1..=steps {
                let p = 5.0 * (i as f64 * dt);
                ledger.integrate([p, 0.0, 0.0], [0.0; 3], [false; 3], dt, 0);
            }
            ledger.motor_total[0]
        };
        let a = run(0.001);
        let b = run(0.0005);
        assert!((a - b).abs() / a < 1e-6);
    }
}
