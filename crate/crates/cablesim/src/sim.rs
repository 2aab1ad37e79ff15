//! Tick-synchronous experiment runner: plant, actuation, controller and
//! supervision composed into deterministic runs producing `RunLog`s.

use thiserror::Error;

use crate::actuation::{BrakeState, EnergyLedger, MotorState};
use crate::config::{Cable, ScenarioConfig, Trio};
use crate::controllers::{ActuatorCommand, ControlError, ProposedController};
use crate::plant::{Plant, PlantError};
use crate::ptp::{build_ptp_plan, PlanError, PtpController};
use crate::runlog::{RunHeader, RunLog, RunSummary, TickRecord};
use crate::supervisor::{MonitorEvent, Phase, Supervisor};

/// Default simulated-time timeout (s).
pub const DEFAULT_TIMEOUT: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    Proposed,
    Ptp,
}

impl ControllerKind {
    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Proposed => "proposed",
            ControllerKind::Ptp => "ptp",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub controller: ControllerKind,
    /// Required for PTP: total duration of the reference proposed run.
    pub reference_duration: Option<f64>,
    pub timeout: f64,
}

impl RunOptions {
    pub fn new(controller: ControllerKind) -> Self {
        RunOptions {
            controller,
            reference_duration: None,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn with_reference(mut self, duration: f64) -> Self {
        self.reference_duration = Some(duration);
        self
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Plan(#[from] PlanError),
}

enum Executive {
    Proposed {
        supervisor: Supervisor,
        controller: ProposedController,
    },
    Ptp {
        controller: PtpController,
        emitted: usize,
        events: Vec<MonitorEvent>,
    },
}

/// Phase label for a PTP tick: the segment delimited by its waypoint
/// labels.
fn ptp_phase_label(last_label: u8) -> &'static str {
    match last_label {
        1 => "1-2",
        2 => "2-3",
        3 => "3-5",
        5 => "5-6",
        6 => "6-7",
        _ => "Done",
    }
}

/// Run one experiment to completion, fault or timeout. Faults and
/// timeouts still produce a log, flagged via `summary.completed` and
/// `summary.fault`.
pub fn run(cfg: &ScenarioConfig, options: &RunOptions) -> Result<RunLog, SimError> {
    let dt = cfg.dt;
    let mut plant = Plant::new(cfg);
    let mut motors: Trio<MotorState> = Trio {
        top: MotorState::default(),
        left: MotorState::default(),
        right: MotorState::default(),
    };
    let mut brakes: Trio<BrakeState> = match options.controller {
        // The PTP baseline keeps every brake energized from the start.
        ControllerKind::Ptp => Trio {
            top: BrakeState::released(),
            left: BrakeState::released(),
            right: BrakeState::released(),
        },
        ControllerKind::Proposed => Trio {
            top: BrakeState::default(),
            left: BrakeState::default(),
            right: BrakeState::default(),
        },
    };
    let mut ledger = EnergyLedger::new();
    let mut ticks: Vec<TickRecord> = Vec::with_capacity(16_384);
    let mut fault: Option<String> = None;

    let mut exec = match options.controller {
        ControllerKind::Proposed => Executive::Proposed {
            supervisor: Supervisor::new(),
            controller: ProposedController::new(),
        },
        ControllerKind::Ptp => {
            let plan = build_ptp_plan(cfg, options.reference_duration)?;
            Executive::Ptp {
                controller: PtpController::new(plan),
                emitted: 0,
                events: Vec::new(),
            }
        }
    };
    let header = RunHeader {
        controller: options.controller.name().to_string(),
        scenario_hash: format!("{:016x}", cfg.hash()),
        seed: cfg.rng_seed,
        dt,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        reference_duration: options.reference_duration,
        ptp_plan: match &exec {
            Executive::Ptp { controller, .. } => Some(controller.plan.clone()),
            _ => None,
        },
    };

    let mut frame = plant.sample_sensors(&motors, cfg);
    let mut last_label: &'static str = "";
    loop {
        let now = plant.state.time;
        if now > options.timeout {
            fault = Some(format!("timeout after {now:.3} s"));
            break;
        }

        // 1. Discrete supervision on the latest sensor frame.
        let (phase_label, column, done) = match &mut exec {
            Executive::Proposed { supervisor, controller: _ } => {
                supervisor.step(&frame, motors.top.current, brakes.right.energized, cfg);
                if let Some(reason) = supervisor.fault.take() {
                    fault = Some(reason);
                }
                (
                    supervisor.phase.label(),
                    supervisor.phase.column(),
                    supervisor.phase == Phase::Done,
                )
            }
            Executive::Ptp {
                controller,
                emitted,
                events,
            } => {
                let plan = &controller.plan;
                if *emitted == 0 {
                    events.push(MonitorEvent {
                        id: 1,
                        timestamp: now,
                        trigger_value: 0.0,
                    });
                    *emitted = 1;
                }
                while *emitted <= plan.segments.len() {
                    let seg = &plan.segments[*emitted - 1];
                    let end = seg.start_time + seg.profile.t_total;
                    if now + 1e-12 >= end {
                        events.push(MonitorEvent {
                            id: seg.end_label,
                            timestamp: end,
                            trigger_value: (frame.position_measurement - seg.to).norm(),
                        });
                        *emitted += 1;
                    } else {
                        break;
                    }
                }
                let (_, _, label) = plan.state_at(now);
                let done = now + 1e-12 >= plan.total_time;
                (
                    if done { "Done" } else { ptp_phase_label(label) },
                    if done { 7 } else { label },
                    done,
                )
            }
        };
        if fault.is_some() || done {
            break;
        }
        if phase_label != last_label {
            ledger.mark_phase(phase_label, now);
            last_label = phase_label;
        }

        // 2. Continuous control.
        let cmd: ActuatorCommand = match &mut exec {
            Executive::Proposed {
                supervisor,
                controller,
            } => match controller.command(supervisor.phase, &frame, cfg) {
                Ok(c) => c,
                Err(ControlError::Kinematics(e)) => {
                    fault = Some(format!("control failure: {e}"));
                    break;
                }
            },
            Executive::Ptp { controller, .. } => match controller.command(now, &frame, cfg) {
                Ok(c) => c,
                Err(ControlError::Kinematics(e)) => {
                    fault = Some(format!("control failure: {e}"));
                    break;
                }
            },
        };

        // 3. Brakes, motors, plant, electrical settle, sensing.
        let mut brake_energy = [0.0; 3];
        let mut brake_energized = [false; 3];
        for (i, c) in Cable::ALL.into_iter().enumerate() {
            brake_energy[i] =
                brakes
                    .get_mut(c)
                    .step(*cmd.energize.get(c), cfg.brakes.get(c), now, dt);
            brake_energized[i] = brakes.get(c).energized;
        }
        for c in Cable::ALL {
            motors.get_mut(c).mode = *cmd.motors.get(c);
            motors.get_mut(c).track_setpoint(cfg.motors.get(c), dt);
        }
        if let Err(e) = plant.step(&mut motors, &brakes, cfg) {
            fault = Some(match e {
                PlantError::ConstraintInfeasible(s) => format!("plant failure: {s}"),
            });
            break;
        }
        for c in Cable::ALL {
            let tension = plant.state.cables.get(c).tension;
            let speed = motors.get(c).shaft_speed;
            motors.get_mut(c).settle_electrical(cfg.motors.get(c), tension, speed);
        }
        frame = plant.sample_sensors(&motors, cfg);

        // 4. Accounting and logging.
        let powers = [
            motors.top.ledger_power(),
            motors.left.ledger_power(),
            motors.right.ledger_power(),
        ];
        ledger.integrate(powers, brake_energy, brake_energized, dt, column);
        ticks.push(TickRecord {
            time: plant.state.time,
            phase: phase_label,
            position: plant.state.position,
            velocity: plant.state.velocity,
            motor_v: motors.map(|_, m| m.voltage),
            motor_i: motors.map(|_, m| m.current),
            motor_omega: motors.map(|_, m| m.shaft_speed),
            brake_energized: brakes.map(|_, b| b.energized),
            brake_engaged: brakes.map(|_, b| b.engaged),
            cable_length: plant.state.cables.map(|_, c| c.spooled_length),
            cable_taut: plant.state.cables.map(|_, c| c.taut),
            cable_tension: plant.state.cables.map(|_, c| c.tension),
            e_motor: ledger.motor_total,
            e_brake: ledger.brake_total,
        });
    }

    let events = match exec {
        Executive::Proposed { supervisor, .. } => supervisor.events,
        Executive::Ptp { events, .. } => events,
    };
    let duration = plant.state.time;
    let completed = fault.is_none();
    let summary = RunSummary::from_ledger(&ledger, events, duration, completed, fault);
    Ok(RunLog {
        header,
        summary,
        ticks,
    })
}

/// Run the same scenario over many seeds. With the `parallel` feature
/// the batch fans out over a rayon pool; otherwise it runs
/// sequentially. Results are in seed order either way.
pub fn run_batch(
    cfg: &ScenarioConfig,
    seeds: &[u64],
    options: &RunOptions,
) -> Vec<Result<RunLog, SimError>> {
    let job = |seed: &u64| {
        let mut c = cfg.clone();
        c.rng_seed = *seed;
        run(&c, options)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        seeds.par_iter().map(job).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        seeds.iter().map(job).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proposed_run_completes_with_ordered_events() {
        let cfg = ScenarioConfig::default();
        let log = run(&cfg, &RunOptions::new(ControllerKind::Proposed)).unwrap();
        assert!(
            log.summary.completed,
            "fault: {:?} duration {:.2}",
            log.summary.fault, log.summary.duration
        );
        let ids: Vec<u8> = log.summary.events.iter().map(|e| e.id).collect();
        assert_eq!(ids, vec![1, 2, 3, 4, 5, 6, 7]);
        for pair in log.summary.events.windows(2) {
            assert!(
                pair[0].timestamp < pair[1].timestamp,
                "event timestamps not increasing: {pair:?}"
            );
        }
        // Final placement near the target face, on the ground.
        let last = log.ticks.last().unwrap();
        assert!(
            (last.position.x - cfg.geometry.target_x).abs() < 0.05,
            "placement x = {:.3}",
            last.position.x
        );
        assert!(last.position.y < 0.01, "placement y = {:.3}", last.position.y);
    }

    #[test]
    fn ptp_run_matches_reference_duration() {
        let cfg = ScenarioConfig::default();
        let proposed = run(&cfg, &RunOptions::new(ControllerKind::Proposed)).unwrap();
        assert!(proposed.summary.completed);
        let ptp = run(
            &cfg,
            &RunOptions::new(ControllerKind::Ptp).with_reference(proposed.summary.duration),
        )
        .unwrap();
        assert!(ptp.summary.completed, "fault: {:?}", ptp.summary.fault);
        assert!(
            (ptp.summary.duration - proposed.summary.duration).abs() <= cfg.dt + 1e-9,
            "ptp {:.4} vs proposed {:.4}",
            ptp.summary.duration,
            proposed.summary.duration
        );
        let ids: Vec<u8> = ptp.summary.events.iter().map(|e| e.id).collect();
        assert_eq!(ids, vec![1, 2, 3, 5, 6, 7]);
        // Noise-free end-position tracking bound.
        let mut quiet = cfg.clone();
        quiet.sensor.noise_sigma = 0.0;
        let clean = run(
            &quiet,
            &RunOptions::new(ControllerKind::Ptp).with_reference(proposed.summary.duration),
        )
        .unwrap();
        let last = clean.ticks.last().unwrap();
        let target = Vec2::new(quiet.geometry.target_x, 0.0);
        assert!(
            (last.position - target).norm() < 0.005,
            "end error {:.4}",
            (last.position - target).norm()
        );
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let cfg = ScenarioConfig::default();
        let opts = RunOptions::new(ControllerKind::Proposed);
        let a = run(&cfg, &opts).unwrap();
        let b = run(&cfg, &opts).unwrap();
        assert_eq!(a.csv_body(), b.csv_body());
        assert_eq!(a.sidecar_json().unwrap(), b.sidecar_json().unwrap());
    }

    #[test]
    fn batch_is_deterministic_across_scheduling() {
        let cfg = ScenarioConfig::default();
        let opts = RunOptions::new(ControllerKind::Proposed);
        let seeds = [1u64, 2, 3, 4];
        let a = run_batch(&cfg, &seeds, &opts);
        let b = run_batch(&cfg, &seeds, &opts);
        for (x, y) in a.iter().zip(b.iter()) {
            let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
            assert_eq!(x.csv_body(), y.csv_body());
        }
    }

    use crate::config::Vec2;
}
