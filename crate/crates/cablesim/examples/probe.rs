//! Development probe: run both controllers and print a phase-by-phase
//! trace for tuning.

use cablesim::config::ScenarioConfig;
use cablesim::sim::{run, ControllerKind, RunOptions};

fn main() {
    let cfg = ScenarioConfig::default();
    let log = run(&cfg, &RunOptions::new(ControllerKind::Proposed)).unwrap();
    println!(
        "proposed: completed={} fault={:?} duration={:.3}",
        log.summary.completed, log.summary.fault, log.summary.duration
    );
    for e in &log.summary.events {
        println!("  event {} at {:.3} trigger {:.4}", e.id, e.timestamp, e.trigger_value);
    }
    let mut last = "";
    for t in &log.ticks {
        if t.phase != last {
            println!(
                "  t={:.3} phase={} p=({:.3},{:.3}) v=({:.3},{:.3}) len=({:.3},{:.3},{:.3})",
                t.time,
                t.phase,
                t.position.x,
                t.position.y,
                t.velocity.x,
                t.velocity.y,
                t.cable_length.top,
                t.cable_length.left,
                t.cable_length.right
            );
            last = t.phase;
        }
    }
    if let Some(t) = log.ticks.last() {
        println!(
            "  final t={:.3} phase={} p=({:.4},{:.4}) e_motor={:?} e_brake={:?}",
            t.time, t.phase, t.position.x, t.position.y, t.e_motor, t.e_brake
        );
    }
    println!(
        "  motors {:?} brakes {:?} total {:.2}",
        log.summary.motor_total,
        log.summary.brake_total,
        log.summary.grand_total
    );
    for (i, name) in ["top", "left", "right"].iter().enumerate() {
        println!("  {name} columns {:?}", log.summary.motor_columns[i]);
    }
    if log.summary.completed {
        let ptp = run(
            &cfg,
            &RunOptions::new(ControllerKind::Ptp).with_reference(log.summary.duration),
        )
        .unwrap();
        println!(
            "ptp: completed={} fault={:?} duration={:.3} motors {:?} brakes {:?} total {:.2}",
            ptp.summary.completed,
            ptp.summary.fault,
            ptp.summary.duration,
            ptp.summary.motor_total,
            ptp.summary.brake_total,
            ptp.summary.grand_total
        );
        for (i, name) in ["top", "left", "right"].iter().enumerate() {
            println!("  {name} columns {:?}", ptp.summary.motor_columns[i]);
        }
        println!(
            "savings {:.1}%",
            100.0 * (1.0 - log.summary.grand_total / ptp.summary.grand_total)
        );
    }
}
