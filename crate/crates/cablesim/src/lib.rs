//! Planar three-winch cable robot simulator: scenario configuration,
//! cable kinematics, winch and brake actuation, mode-switched payload
//! dynamics, supervisory phase logic, an energy-minded controller and a
//! point-to-point baseline, plus run logging and reporting.

pub mod actuation;
pub mod config;
pub mod controllers;
pub mod kinematics;
pub mod plant;
pub mod plot;
pub mod ptp;
pub mod report;
pub mod runlog;
pub mod sim;
pub mod supervisor;

pub use config::{Cable, ScenarioConfig, Trio, Vec2};
