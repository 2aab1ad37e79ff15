//! Run logging: per-tick CSV body plus a structured JSON sidecar with
//! the header, events and summary.
//!
//! CSV column order is frozen (see `CSV_HEADER`). Timestamps carry six
//! decimals and energies four; the JSON sidecar keeps the bit-exact
//! doubles.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actuation::EnergyLedger;
use crate::config::{Trio, Vec2};
use crate::ptp::PtpPlan;
use crate::supervisor::MonitorEvent;

pub const CSV_HEADER: &str = "time,phase,px,py,vx,vy,\
v_top,i_top,omega_top,v_left,i_left,omega_left,v_right,i_right,omega_right,\
brake_top_energized,brake_top_engaged,brake_left_energized,brake_left_engaged,\
brake_right_energized,brake_right_engaged,\
len_top,taut_top,tension_top,len_left,taut_left,tension_left,\
len_right,taut_right,tension_right,\
e_motor_top,e_motor_left,e_motor_right,e_brake_top,e_brake_left,e_brake_right";

#[derive(Debug, Error)]
pub enum LogError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunHeader {
    pub controller: String,
    /// Scenario config hash, hex.
    pub scenario_hash: String,
    pub seed: u64,
    pub dt: f64,
    pub code_version: String,
    pub reference_duration: Option<f64>,
    /// Serialized plan for PTP runs.
    pub ptp_plan: Option<PtpPlan>,
}

#[derive(Debug, Clone, Copy)]
pub struct TickRecord {
    pub time: f64,
    pub phase: &'static str,
    pub position: Vec2,
    pub velocity: Vec2,
    /// Per motor: terminal voltage, current, shaft speed.
    pub motor_v: Trio<f64>,
    pub motor_i: Trio<f64>,
    pub motor_omega: Trio<f64>,
    pub brake_energized: Trio<bool>,
    pub brake_engaged: Trio<bool>,
    pub cable_length: Trio<f64>,
    pub cable_taut: Trio<bool>,
    pub cable_tension: Trio<f64>,
    /// Cumulative energies at the end of the tick.
    pub e_motor: [f64; 3],
    pub e_brake: [f64; 3],
}

impl TickRecord {
    fn csv_line(&self) -> String {
        let b = |v: bool| if v { 1 } else { 0 };
        format!(
            "{:.6},{},{:.6},{:.6},{:.6},{:.6},\
{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},\
{},{},{},{},{},{},\
{:.6},{},{:.6},{:.6},{},{:.6},{:.6},{},{:.6},\
{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            self.time,
            self.phase,
            self.position.x,
            self.position.y,
            self.velocity.x,
            self.velocity.y,
            self.motor_v.top,
            self.motor_i.top,
            self.motor_omega.top,
            self.motor_v.left,
            self.motor_i.left,
            self.motor_omega.left,
            self.motor_v.right,
            self.motor_i.right,
            self.motor_omega.right,
            b(self.brake_energized.top),
            b(self.brake_engaged.top),
            b(self.brake_energized.left),
            b(self.brake_engaged.left),
            b(self.brake_energized.right),
            b(self.brake_engaged.right),
            self.cable_length.top,
            b(self.cable_taut.top),
            self.cable_tension.top,
            self.cable_length.left,
            b(self.cable_taut.left),
            self.cable_tension.left,
            self.cable_length.right,
            b(self.cable_taut.right),
            self.cable_tension.right,
            self.e_motor[0],
            self.e_motor[1],
            self.e_motor[2],
            self.e_brake[0],
            self.e_brake[1],
            self.e_brake[2],
        )
    }
}

/// Final per-run accounting. Column maps are keyed by the id of the
/// last monitor event ("0" before the first). Device order in arrays is
/// top, left, right.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub duration: f64,
    pub completed: bool,
    pub fault: Option<String>,
    pub events: Vec<MonitorEvent>,
    pub motor_columns: [BTreeMap<String, f64>; 3],
    pub motor_total: [f64; 3],
    pub brake_columns: [BTreeMap<String, f64>; 3],
    pub brake_total: [f64; 3],
    pub brake_on_time: [f64; 3],
    pub motor_grand_total: f64,
    pub brake_grand_total: f64,
    pub grand_total: f64,
    pub phase_marks: Vec<(String, f64)>,
}

impl RunSummary {
    pub fn from_ledger(
        ledger: &EnergyLedger,
        events: Vec<MonitorEvent>,
        duration: f64,
        completed: bool,
        fault: Option<String>,
    ) -> Self {
        let keyed = |m: &BTreeMap<u8, f64>| {
            m.iter().map(|(k, v)| (k.to_string(), *v)).collect()
        };
        let motor_grand_total: f64 = ledger.motor_total.iter().sum();
        let brake_grand_total: f64 = ledger.brake_total.iter().sum();
        RunSummary {
            duration,
            completed,
            fault,
            events,
            motor_columns: [
                keyed(&ledger.motor_columns[0]),
                keyed(&ledger.motor_columns[1]),
                keyed(&ledger.motor_columns[2]),
            ],
            motor_total: ledger.motor_total,
            brake_columns: [
                keyed(&ledger.brake_columns[0]),
                keyed(&ledger.brake_columns[1]),
                keyed(&ledger.brake_columns[2]),
            ],
            brake_total: ledger.brake_total,
            brake_on_time: ledger.brake_on_time,
            motor_grand_total,
            brake_grand_total,
            grand_total: motor_grand_total + brake_grand_total,
            phase_marks: ledger.phase_marks.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunLog {
    pub header: RunHeader,
    pub summary: RunSummary,
    pub ticks: Vec<TickRecord>,
}

#[derive(Serialize)]
struct SidecarRef<'a> {
    header: &'a RunHeader,
    summary: &'a RunSummary,
}

/// Owned sidecar shape, for reading logs back.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub header: RunHeader,
    pub summary: RunSummary,
}

impl RunLog {
    /// The CSV body: header line plus one line per tick.
    pub fn csv_body(&self) -> String {
        let mut out = String::with_capacity(64 + self.ticks.len() * 256);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for t in &self.ticks {
            out.push_str(&t.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn sidecar_json(&self) -> Result<String, LogError> {
        Ok(serde_json::to_string_pretty(&SidecarRef {
            header: &self.header,
            summary: &self.summary,
        })?)
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns the
    /// two paths.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(std::path::PathBuf, std::path::PathBuf), LogError> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        fs::write(&csv_path, self.csv_body())?;
        fs::write(&json_path, self.sidecar_json()?)?;
        Ok((csv_path, json_path))
    }
}
