//! Discrete supervision: task phases, the seven monitors evaluated on
//! the sensor stream, and the phase sequencer.
//!
//! Monitors (circled numbers in the logs):
//!   1 system operational (fresh sample, task cables taut)
//!   2 lift height reached
//!   3 swing apex (horizontal direction reversal, debounced)
//!   4 drop impact (top-current discrepancy spike)
//!   5 fine-lift clearance (active-side encoder threshold)
//!   6 neighbor contact (stall or current spike)
//!   7 placement contact (impact predicate re-armed)

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::config::{ScenarioConfig, Vec2};
use crate::kinematics::active_side;
use crate::plant::SensorFrame;

/// Settle time in Hold before the drop begins (s).
pub const HOLD_SETTLE: f64 = 0.5;
/// Minimum horizontal travel before the apex monitor arms (m).
const APEX_MIN_TRAVEL: f64 = 0.05;
/// Consecutive reversed samples required by the apex debounce.
const APEX_DEBOUNCE: u32 = 3;
/// Measured tautness slack tolerance for monitor 1 (m).
const TAUT_SLACK_TOL: f64 = 0.005;
/// Stall window length and displacement bound for monitor 6.
const STALL_WINDOW: f64 = 0.15;
const STALL_DISPLACEMENT: f64 = 0.002;
/// Quiet time required to re-arm the impact predicate for monitor 7 (s).
const REARM_QUIET: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Init,
    Lifting,
    Swing,
    Hold,
    Drop,
    FineLift,
    FineSwing,
    FineDrop,
    Done,
    Fault,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Init => "Init",
            Phase::Lifting => "Lifting",
            Phase::Swing => "Swing",
            Phase::Hold => "Hold",
            Phase::Drop => "Drop",
            Phase::FineLift => "FineLift",
            Phase::FineSwing => "FineSwing",
            Phase::FineDrop => "FineDrop",
            Phase::Done => "Done",
            Phase::Fault => "Fault",
        }
    }

    /// Ledger column: the id of the last monitor event on entry to this
    /// phase (0 before the first event). Hold and Drop share the
    /// post-apex column.
    pub fn column(self) -> u8 {
        match self {
            Phase::Init => 0,
            Phase::Lifting => 1,
            Phase::Swing => 2,
            Phase::Hold | Phase::Drop => 3,
            Phase::FineLift => 4,
            Phase::FineSwing => 5,
            Phase::FineDrop => 6,
            Phase::Done | Phase::Fault => 7,
        }
    }

    /// Monitor id owned by this phase, if any.
    pub fn owned_monitor(self) -> Option<u8> {
        match self {
            Phase::Init => Some(1),
            Phase::Lifting => Some(2),
            Phase::Swing => Some(3),
            Phase::Drop => Some(4),
            Phase::FineLift => Some(5),
            Phase::FineSwing => Some(6),
            Phase::FineDrop => Some(7),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorEvent {
    pub id: u8,
    pub timestamp: f64,
    /// The measured quantity that crossed its threshold.
    pub trigger_value: f64,
}

/// Advance the phase for one fired event. An event the phase does not
/// own is a fault.
pub fn step_fsm(phase: Phase, event_id: u8) -> Phase {
    if phase.owned_monitor() != Some(event_id) {
        return Phase::Fault;
    }
    match phase {
        Phase::Init => Phase::Lifting,
        Phase::Lifting => Phase::Swing,
        Phase::Swing => Phase::Hold,
        Phase::Drop => Phase::FineLift,
        Phase::FineLift => Phase::FineSwing,
        Phase::FineSwing => Phase::FineDrop,
        Phase::FineDrop => Phase::Done,
        p => p,
    }
}

/// Tick-synchronous supervisor: evaluates the owning monitor, fires at
/// most one event per tick and sequences the phases (including the
/// timed Hold-to-Drop transition).
pub struct Supervisor {
    pub phase: Phase,
    pub events: Vec<MonitorEvent>,
    pub fault: Option<String>,
    phase_entered: f64,
    last_sample_time: f64,
    prev_sample: Option<(f64, Vec2)>,
    swing_dir: f64,
    swing_dx_sum: f64,
    swing_travel: f64,
    reversal_count: u32,
    reversal_start: f64,
    stall_window: VecDeque<(f64, Vec2)>,
    quiet_time: f64,
}

impl Supervisor {
    pub fn new() -> Self {
        Supervisor {
            phase: Phase::Init,
            events: Vec::new(),
            fault: None,
            phase_entered: 0.0,
            last_sample_time: f64::NEG_INFINITY,
            prev_sample: None,
            swing_dir: 0.0,
            swing_dx_sum: 0.0,
            swing_travel: 0.0,
            reversal_count: 0,
            reversal_start: 0.0,
            stall_window: VecDeque::new(),
            quiet_time: 0.0,
        }
    }

    fn enter(&mut self, phase: Phase, now: f64) {
        self.phase = phase;
        self.phase_entered = now;
        self.swing_dir = 0.0;
        self.swing_dx_sum = 0.0;
        self.swing_travel = 0.0;
        self.reversal_count = 0;
        self.stall_window.clear();
        self.quiet_time = 0.0;
    }

    fn fire(&mut self, id: u8, timestamp: f64, trigger_value: f64) -> MonitorEvent {
        let event = MonitorEvent {
            id,
            timestamp,
            trigger_value,
        };
        self.events.push(event);
        let next = step_fsm(self.phase, id);
        if next == Phase::Fault {
            self.fault = Some(format!(
                "monitor {id} fired out of phase {:?}",
                self.phase
            ));
        }
        self.enter(next, timestamp.max(self.phase_entered));
        event
    }

    /// Evaluate the owning monitor for this tick.
    /// `expected_top_current` is the drive-model top current (without
    /// the readback spikes); `side_brake_energized` is the arriving
    /// side's brake state, needed by the stall predicate.
    pub fn step(
        &mut self,
        frame: &SensorFrame,
        expected_top_current: f64,
        side_brake_energized: bool,
        cfg: &ScenarioConfig,
    ) -> Option<MonitorEvent> {
        let now = frame.timestamp;
        let new_sample = frame.position_sample_time != self.last_sample_time;
        let prev = self.prev_sample;
        if new_sample {
            self.last_sample_time = frame.position_sample_time;
            self.prev_sample = Some((frame.position_sample_time, frame.position_measurement));
        }
        let p = frame.position_measurement;
        let impact = (frame.motor_currents.top - expected_top_current).abs();

        match self.phase {
            Phase::Init => {
                if self.last_sample_time < 0.0 {
                    return None;
                }
                let g = &cfg.geometry;
                let side = active_side(p, g).cable();
                let slack_top = frame.encoder_lengths.top - (p - g.anchor_top).norm();
                let slack_side = frame
                    .encoder_lengths
                    .get(side)
                    - (p - match side {
                        crate::config::Cable::Left => g.anchor_left,
                        _ => g.anchor_right,
                    })
                    .norm();
                let slack = slack_top.max(slack_side);
                if slack < TAUT_SLACK_TOL {
                    return Some(self.fire(1, now, slack));
                }
            }
            Phase::Lifting => {
                if p.y >= cfg.task.h_d {
                    return Some(self.fire(2, now, p.y));
                }
            }
            Phase::Swing => {
                if new_sample {
                    if let Some((_, pp)) = prev {
                        let dx = p.x - pp.x;
                        self.swing_travel += dx.abs();
                        if self.swing_dir == 0.0 {
                            self.swing_dx_sum += dx;
                            if self.swing_dx_sum.abs() > 0.02 {
                                self.swing_dir = self.swing_dx_sum.signum();
                            }
                        } else if self.swing_travel >= APEX_MIN_TRAVEL {
                            if dx * self.swing_dir < 0.0 {
                                if self.reversal_count == 0 {
                                    // Backdate the event to the first
                                    // reversed sample.
                                    self.reversal_start = frame.position_sample_time;
                                }
                                self.reversal_count += 1;
                                if self.reversal_count >= APEX_DEBOUNCE {
                                    let t = self.reversal_start;
                                    return Some(self.fire(3, t, p.x));
                                }
                            } else {
                                self.reversal_count = 0;
                            }
                        }
                    }
                }
            }
            Phase::Hold => {
                if now - self.phase_entered >= HOLD_SETTLE {
                    self.enter(Phase::Drop, now);
                }
            }
            Phase::Drop => {
                if impact > cfg.task.impact_current_threshold {
                    return Some(self.fire(4, now, impact));
                }
            }
            Phase::FineLift => {
                let side = active_side(p, &cfg.geometry).cable();
                let l2 = *frame.encoder_lengths.get(side);
                if l2 <= cfg.task.l2_threshold {
                    return Some(self.fire(5, now, l2));
                }
            }
            Phase::FineSwing => {
                if impact > cfg.task.impact_current_threshold {
                    return Some(self.fire(6, now, impact));
                }
                if new_sample && side_brake_energized {
                    self.stall_window.push_back((frame.position_sample_time, p));
                    while let Some((t0, _)) = self.stall_window.front() {
                        if frame.position_sample_time - t0 > STALL_WINDOW {
                            self.stall_window.pop_front();
                        } else {
                            break;
                        }
                    }
                    let span = self
                        .stall_window
                        .back()
                        .zip(self.stall_window.front())
                        .map(|((t1, _), (t0, _))| t1 - t0)
                        .unwrap_or(0.0);
                    // Require a full window of continuous release so the
                    // brake's mechanical switch delay cannot masquerade
                    // as a stall.
                    if span >= STALL_WINDOW * 0.9 && self.stall_window.len() >= 8 {
                        let half = self.stall_window.len() / 2;
                        let mean = |s: &[(f64, Vec2)]| {
                            let mut acc = Vec2::ZERO;
                            for (_, q) in s {
                                acc = acc + *q;
                            }
                            acc.scale(1.0 / s.len() as f64)
                        };
                        let v: Vec<_> = self.stall_window.iter().copied().collect();
                        let displacement = (mean(&v[half..]) - mean(&v[..half])).norm();
                        if displacement < STALL_DISPLACEMENT {
                            return Some(self.fire(6, now, displacement));
                        }
                    }
                } else if !side_brake_energized {
                    self.stall_window.clear();
                }
            }
            Phase::FineDrop => {
                if impact <= cfg.task.impact_current_threshold {
                    self.quiet_time += cfg.dt;
                } else if self.quiet_time >= REARM_QUIET {
                    return Some(self.fire(7, now, impact));
                }
                // Redundant terminator: if the payload already sits on
                // the ground (fine swing can end with a grazing ground
                // contact), no further impact will ever arrive. A full
                // stationary window at ground height ends the task.
                if new_sample && self.quiet_time >= REARM_QUIET {
                    self.stall_window.push_back((frame.position_sample_time, p));
                    while let Some((t0, _)) = self.stall_window.front() {
                        if frame.position_sample_time - t0 > STALL_WINDOW {
                            self.stall_window.pop_front();
                        } else {
                            break;
                        }
                    }
                    let span = self
                        .stall_window
                        .back()
                        .zip(self.stall_window.front())
                        .map(|((t1, _), (t0, _))| t1 - t0)
                        .unwrap_or(0.0);
                    if span >= STALL_WINDOW * 0.9 && self.stall_window.len() >= 8 {
                        let half = self.stall_window.len() / 2;
                        let mean = |s: &[(f64, Vec2)]| {
                            let mut acc = Vec2::ZERO;
                            for (_, q) in s {
                                acc = acc + *q;
                            }
                            acc.scale(1.0 / s.len() as f64)
                        };
                        let v: Vec<_> = self.stall_window.iter().copied().collect();
                        let displacement = (mean(&v[half..]) - mean(&v[..half])).norm();
                        if displacement < STALL_DISPLACEMENT && p.y < 0.02 {
                            return Some(self.fire(7, now, displacement));
                        }
                    }
                }
            }
            Phase::Done | Phase::Fault => {}
        }
        None
    }
}

impl Default for Supervisor {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Trio;

    fn frame(p: Vec2, sample_t: f64, t: f64) -> SensorFrame {
        SensorFrame {
            position_measurement: p,
            position_sample_time: sample_t,
            encoder_lengths: Trio {
                top: 10.0,
                left: 10.0,
                right: 10.0,
            },
            motor_currents: Trio {
                top: 0.0,
                left: 0.0,
                right: 0.0,
            },
            timestamp: t,
        }
    }

    #[test]
    fn fsm_nominal_order() {
        let mut p = Phase::Init;
        for id in 1..=7 {
            if p == Phase::Hold {
                p = Phase::Drop; // timed transition, no event
            }
            if id == 4 {
                assert_eq!(p, Phase::Drop);
            }
            p = step_fsm(p, id);
            assert_ne!(p, Phase::Fault, "id {id}");
        }
        assert_eq!(p, Phase::Done);
    }

    #[test]
    fn out_of_phase_event_faults() {
        assert_eq!(step_fsm(Phase::Lifting, 5), Phase::Fault);
        assert_eq!(step_fsm(Phase::Swing, 2), Phase::Fault);
    }

    #[test]
    fn height_monitor_fires_once_past_threshold() {
        let cfg = ScenarioConfig::default();
        let mut sup = Supervisor::new();
        sup.phase = Phase::Lifting;
        let below = frame(Vec2::new(0.15, cfg.task.h_d - 0.01), 0.0, 0.0);
        assert!(sup.step(&below, 0.0, true, &cfg).is_none());
        let above = frame(Vec2::new(0.15, cfg.task.h_d + 0.003), 0.01, 0.01);
        let ev = sup.step(&above, 0.0, true, &cfg).unwrap();
        assert_eq!(ev.id, 2);
        assert!(ev.trigger_value >= cfg.task.h_d);
        assert_eq!(sup.phase, Phase::Swing);
    }

    #[test]
    fn apex_monitor_debounces_and_backdates() {
        let cfg = ScenarioConfig::default();
        let mut sup = Supervisor::new();
        sup.phase = Phase::Swing;
        let period = 1.0 / cfg.sensor.rate;
        // Simulated swing: x advances 0.3 then reverses.
        let mut t = 0.0;
        let mut fired = None;
        let mut first_reversal_t = None;
        for i in 0..200 {
            let x = if i < 60 {
                0.15 + 0.005 * i as f64
            } else {
                if first_reversal_t.is_none() {
                    first_reversal_t = Some(t);
                }
                0.45 - 0.005 * (i - 60) as f64
            };
            if let Some(ev) = sup.step(&frame(Vec2::new(x, 0.5), t, t), 0.0, true, &cfg) {
                fired = Some(ev);
                break;
            }
            t += period;
        }
        let ev = fired.expect("apex not detected");
        assert_eq!(ev.id, 3);
        // Backdated to the first reversed sample.
        assert!((ev.timestamp - first_reversal_t.unwrap()).abs() < 1.5 * period);
        assert_eq!(sup.phase, Phase::Hold);
    }

    #[test]
    fn hold_exits_on_timer_without_event() {
        let cfg = ScenarioConfig::default();
        let mut sup = Supervisor::new();
        sup.phase = Phase::Hold;
        sup.phase_entered = 2.0;
        let before = sup.events.len();
        assert!(sup
            .step(&frame(Vec2::new(0.8, 0.5), 2.1, 2.1), 0.0, true, &cfg)
            .is_none());
        assert_eq!(sup.phase, Phase::Hold);
        assert!(sup
            .step(
                &frame(Vec2::new(0.8, 0.5), 2.0 + HOLD_SETTLE, 2.0 + HOLD_SETTLE),
                0.0,
                true,
                &cfg
            )
            .is_none());
        assert_eq!(sup.phase, Phase::Drop);
        assert_eq!(sup.events.len(), before, "timed transition emits no event");
    }

    #[test]
    fn impact_monitor_uses_discrepancy() {
        let cfg = ScenarioConfig::default();
        let mut sup = Supervisor::new();
        sup.phase = Phase::Drop;
        let mut f = frame(Vec2::new(0.8, 0.0), 3.0, 3.0);
        f.motor_currents.top = 0.3;
        assert!(sup.step(&f, 0.3, true, &cfg).is_none(), "no discrepancy");
        f.motor_currents.top = 0.3 + cfg.task.impact_current_threshold + 0.1;
        let ev = sup.step(&f, 0.3, true, &cfg).unwrap();
        assert_eq!(ev.id, 4);
        assert_eq!(sup.phase, Phase::FineLift);
    }

    #[test]
    fn placement_monitor_requires_rearm() {
        let cfg = ScenarioConfig::default();
        let mut sup = Supervisor::new();
        sup.phase = Phase::FineDrop;
        // A residual spike right at phase entry must not fire monitor 7.
        let mut f = frame(Vec2::new(0.64, 0.08), 5.0, 5.0);
        f.motor_currents.top = 2.0;
        assert!(sup.step(&f, 0.0, true, &cfg).is_none());
        // Quiet descent re-arms, then the landing spike fires.
        let quiet_ticks = (2.0 * REARM_QUIET / cfg.dt) as usize;
        for i in 0..quiet_ticks {
            let mut q = frame(Vec2::new(0.64, 0.07), 5.0, 5.0 + i as f64 * cfg.dt);
            q.motor_currents.top = 0.0;
            assert!(sup.step(&q, 0.0, true, &cfg).is_none());
        }
        let mut hit = frame(Vec2::new(0.64, 0.0), 5.2, 5.2);
        hit.motor_currents.top = 2.0;
        let ev = sup.step(&hit, 0.0, true, &cfg).unwrap();
        assert_eq!(ev.id, 7);
        assert_eq!(sup.phase, Phase::Done);
    }

    #[test]
    fn stall_monitor_fires_on_stationary_window() {
        let cfg = ScenarioConfig::default();
        let mut sup = Supervisor::new();
        sup.phase = Phase::FineSwing;
        let period = 1.0 / cfg.sensor.rate;
        let mut t = 6.0;
        let mut fired = None;
        for _ in 0..60 {
            if let Some(ev) = sup.step(&frame(Vec2::new(0.64, 0.1), t, t), 0.0, true, &cfg) {
                fired = Some(ev);
                break;
            }
            t += period;
        }
        let ev = fired.expect("stall not detected");
        assert_eq!(ev.id, 6);
        assert!(t - 6.0 <= 0.3, "stall detection too slow");
    }

    #[test]
    fn events_fire_exactly_once() {
        let cfg = ScenarioConfig::default();
        let mut sup = Supervisor::new();
        sup.phase = Phase::Lifting;
        let above = frame(Vec2::new(0.15, 0.6), 0.0, 0.0);
        assert!(sup.step(&above, 0.0, true, &cfg).is_some());
        // Phase advanced; the same condition cannot re-fire.
        let again = frame(Vec2::new(0.15, 0.7), 0.01, 0.01);
        let ev = sup.step(&again, 0.0, true, &cfg);
        assert!(ev.is_none());
        assert_eq!(sup.events.len(), 1);
    }
}
