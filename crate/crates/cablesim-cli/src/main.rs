//! Command-line front end: run experiments, compare logs, render plots.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cablesim::config::{load_scenario, ConfigError, ScenarioConfig};
use cablesim::plot;
use cablesim::report;
use cablesim::runlog::{RunLog, Sidecar};
use cablesim::sim::{run, ControllerKind, RunOptions};

const EXIT_RUN_FAULT: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "cablesim", about = "Planar cable robot energy-comparison harness", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerArg {
    Proposed,
    Ptp,
}

impl From<ControllerArg> for ControllerKind {
    fn from(c: ControllerArg) -> Self {
        match c {
            ControllerArg::Proposed => ControllerKind::Proposed,
            ControllerArg::Ptp => ControllerKind::Ptp,
        }
    }
}

#[derive(clap::Args)]
struct ScenarioArgs {
    /// Scenario file (key = value lines); defaults apply when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Override the scenario RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated-time timeout per run (s).
    #[arg(long)]
    timeout: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV log and JSON sidecar.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum)]
        controller: ControllerArg,
        /// Reference duration for the time-matched ptp run (s).
        #[arg(long)]
        ref_duration: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare a ptp and a proposed run from their JSON sidecars.
    Compare {
        /// Sidecar of the ptp run.
        ptp: PathBuf,
        /// Sidecar of the proposed run.
        proposed: PathBuf,
        /// Also write report.txt and report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run both controllers and render the three SVG plots.
    Plot {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Proposed run, time-matched ptp run, comparison report and plots.
    Demo {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load_config(args: &ScenarioArgs) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = match &args.scenario {
        Some(path) => load_scenario(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.rng_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn options(controller: ControllerKind, args: &ScenarioArgs, reference: Option<f64>) -> RunOptions {
    let mut opts = RunOptions::new(controller);
    opts.reference_duration = reference;
    if let Some(t) = args.timeout {
        opts.timeout = t;
    }
    opts
}

fn config_err(err: impl std::fmt::Display) -> ExitCode {
    log::error!("{err}");
    eprintln!("config error: {err}");
    ExitCode::from(EXIT_CONFIG)
}

fn run_fault(log: &RunLog) -> Option<ExitCode> {
    if log.summary.completed {
        return None;
    }
    let reason = log
        .summary
        .fault
        .as_deref()
        .unwrap_or("timeout before task completion");
    eprintln!(
        "run fault ({}): {reason} after {:.3} s",
        log.header.controller, log.summary.duration
    );
    Some(ExitCode::from(EXIT_RUN_FAULT))
}

fn write_log(log: &RunLog, out: &Path) -> Result<(), ExitCode> {
    let stem = log.header.controller.clone();
    match log.write(out, &stem) {
        Ok((csv, json)) => {
            log::info!("wrote {} and {}", csv.display(), json.display());
            println!("wrote {}", csv.display());
            println!("wrote {}", json.display());
            Ok(())
        }
        Err(e) => Err(config_err(e)),
    }
}

/// Proposed run followed by the time-matched ptp run.
fn run_pair(cfg: &ScenarioConfig, args: &ScenarioArgs) -> Result<(RunLog, RunLog), ExitCode> {
    let proposed = run(cfg, &options(ControllerKind::Proposed, args, None))
        .map_err(config_err)?;
    if let Some(code) = run_fault(&proposed) {
        return Err(code);
    }
    let ptp = run(
        cfg,
        &options(
            ControllerKind::Ptp,
            args,
            Some(proposed.summary.duration),
        ),
    )
    .map_err(config_err)?;
    if let Some(code) = run_fault(&ptp) {
        return Err(code);
    }
    Ok((proposed, ptp))
}

fn read_sidecar(path: &Path) -> Result<Sidecar, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn render_report(ptp: &Sidecar, proposed: &Sidecar, out: Option<&Path>) -> Result<(), ExitCode> {
    for side in [ptp, proposed] {
        if !side.summary.completed {
            eprintln!(
                "run fault: {} log is incomplete ({})",
                side.header.controller,
                side.summary.fault.as_deref().unwrap_or("timeout")
            );
            return Err(ExitCode::from(EXIT_RUN_FAULT));
        }
    }
    let rep = report::compare(ptp, proposed).map_err(config_err)?;
    let text = rep.render_text();
    print!("{text}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(config_err)?;
        std::fs::write(dir.join("report.txt"), &text).map_err(config_err)?;
        let json = serde_json::to_string_pretty(&rep).map_err(config_err)?;
        std::fs::write(dir.join("report.json"), json).map_err(config_err)?;
        println!("wrote {}", dir.join("report.txt").display());
        println!("wrote {}", dir.join("report.json").display());
    }
    Ok(())
}

fn render_plots(
    cfg: &ScenarioConfig,
    proposed: &RunLog,
    ptp: &RunLog,
    out: &Path,
) -> Result<(), ExitCode> {
    let runs = [("proposed", proposed), ("ptp", ptp)];
    match plot::write_plots(out, &runs, Some(&cfg.geometry)) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Err(e) => Err(config_err(e)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("CABLESIM_LOG_LEVEL", "warn"),
    )
    .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            controller,
            ref_duration,
            out,
        } => {
            let cfg = match load_config(&scenario) {
                Ok(c) => c,
                Err(e) => return config_err(e),
            };
            let kind: ControllerKind = controller.into();
            if matches!(kind, ControllerKind::Ptp) && ref_duration.is_none() {
                return config_err("ptp requires --ref-duration from a prior proposed run");
            }
            let log = match run(&cfg, &options(kind, &scenario, ref_duration)) {
                Ok(l) => l,
                Err(e) => return config_err(e),
            };
            // A faulted run still leaves its partial log on disk.
            if let Err(code) = write_log(&log, &out) {
                return code;
            }
            if let Some(code) = run_fault(&log) {
                return code;
            }
            println!(
                "{} completed in {:.3} s, grand total {:.2} J",
                log.header.controller, log.summary.duration, log.summary.grand_total
            );
            ExitCode::SUCCESS
        }
        Command::Compare { ptp, proposed, out } => {
            let (ptp, proposed) = match (read_sidecar(&ptp), read_sidecar(&proposed)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(code), _) | (_, Err(code)) => return code,
            };
            match render_report(&ptp, &proposed, out.as_deref()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(code) => code,
            }
        }
        Command::Plot { scenario, out } => {
            let cfg = match load_config(&scenario) {
                Ok(c) => c,
                Err(e) => return config_err(e),
            };
            let (proposed, ptp) = match run_pair(&cfg, &scenario) {
                Ok(pair) => pair,
                Err(code) => return code,
            };
            match render_plots(&cfg, &proposed, &ptp, &out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(code) => code,
            }
        }
        Command::Demo { scenario, out } => {
            let cfg = match load_config(&scenario) {
                Ok(c) => c,
                Err(e) => return config_err(e),
            };
            let (proposed, ptp) = match run_pair(&cfg, &scenario) {
                Ok(pair) => pair,
                Err(code) => return code,
            };
            for log in [&proposed, &ptp] {
                if let Err(code) = write_log(log, &out) {
                    return code;
                }
            }
            let to_sidecar = |log: &RunLog| Sidecar {
                header: log.header.clone(),
                summary: log.summary.clone(),
            };
            if let Err(code) =
                render_report(&to_sidecar(&ptp), &to_sidecar(&proposed), Some(&out))
            {
                return code;
            }
            match render_plots(&cfg, &proposed, &ptp, &out) {
                Ok(()) => ExitCode::SUCCESS,
                Err(code) => code,
            }
        }
    }
}
