//! Minimal hand-rolled SVG renderers for the run artifacts: cumulative
//! energy curves, the x-y trajectory with monitor markers, and brake
//! active-time bars.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::config::RobotGeometry;
use crate::runlog::RunLog;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 2] = ["#1f77b4", "#d62728"];
const MOTOR_NAMES: [&str; 3] = ["top", "left", "right"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        WIDTH / 2.0
    )
}

fn axes(s: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let _ = writeln!(
        s,
        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#444\"/>",
        MARGIN,
        MARGIN,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for i in 0..=4 {
        let xv = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let yv = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{:.2}</text>",
            f.x(xv),
            HEIGHT - MARGIN + 16.0,
            xv
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.1}</text>",
            MARGIN - 6.0,
            f.y(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x_label}</text>",
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">{y_label}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
}

fn polyline(s: &mut String, f: &Frame, points: &[(f64, f64)], color: &str, dash: Option<&str>) {
    if points.is_empty() {
        return;
    }
    let step = (points.len() / 2000).max(1);
    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        if i % step != 0 && i != points.len() - 1 {
            continue;
        }
        let _ = write!(d, "{:.1},{:.1} ", f.x(*x), f.y(*y));
    }
    let dash = dash.map(|p| format!(" stroke-dasharray=\"{p}\"")).unwrap_or_default();
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
        d.trim_end()
    );
}

/// Cumulative energy per motor plus system total against time, one
/// color per run. Per-motor curves are dashed, the system total solid.
pub fn energy_svg(runs: &[(&str, &RunLog)]) -> String {
    let mut t_max: f64 = 1e-9;
    let mut e_max: f64 = 1e-9;
    for (_, log) in runs {
        if let Some(t) = log.ticks.last() {
            t_max = t_max.max(t.time);
            e_max = e_max.max(
                t.e_motor.iter().sum::<f64>() + t.e_brake.iter().sum::<f64>(),
            );
        }
    }
    let f = Frame {
        x0: 0.0,
        x1: t_max,
        y0: 0.0,
        y1: e_max * 1.05,
    };
    let mut s = svg_open("Cumulative energy");
    axes(&mut s, &f, "time [s]", "energy [J]");
    for (ri, (name, log)) in runs.iter().enumerate() {
        let color = COLORS[ri % COLORS.len()];
        for m in 0..3 {
            let pts: Vec<(f64, f64)> =
                log.ticks.iter().map(|t| (t.time, t.e_motor[m])).collect();
            polyline(&mut s, &f, &pts, color, Some("4 3"));
        }
        let pts: Vec<(f64, f64)> = log
            .ticks
            .iter()
            .map(|t| {
                (
                    t.time,
                    t.e_motor.iter().sum::<f64>() + t.e_brake.iter().sum::<f64>(),
                )
            })
            .collect();
        polyline(&mut s, &f, &pts, color, None);
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{name}</text>",
            MARGIN + 8.0,
            MARGIN + 16.0 + 16.0 * ri as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Payload x-y trajectory with circled monitor markers at the event
/// positions; the neighbor outline is drawn when geometry is given.
pub fn trajectory_svg(runs: &[(&str, &RunLog)], geometry: Option<&RobotGeometry>) -> String {
    let f = Frame {
        x0: -0.05,
        x1: 1.15,
        y0: -0.05,
        y1: 0.75,
    };
    let mut s = svg_open("Payload trajectory");
    axes(&mut s, &f, "x [m]", "y [m]");
    if let Some(g) = geometry {
        let _ = writeln!(
            s,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#eee\" stroke=\"#999\"/>",
            f.x(g.neighbor.x),
            f.y(g.neighbor.height),
            f.x(g.neighbor.right_edge()) - f.x(g.neighbor.x),
            f.y(0.0) - f.y(g.neighbor.height)
        );
    }
    for (ri, (name, log)) in runs.iter().enumerate() {
        let color = COLORS[ri % COLORS.len()];
        let pts: Vec<(f64, f64)> = log
            .ticks
            .iter()
            .map(|t| (t.position.x, t.position.y))
            .collect();
        polyline(&mut s, &f, &pts, color, None);
        for event in &log.summary.events {
            let tick = log
                .ticks
                .iter()
                .find(|t| t.time + 1e-9 >= event.timestamp)
                .or(log.ticks.last());
            if let Some(t) = tick {
                let (cx, cy) = (f.x(t.position.x), f.y(t.position.y));
                let _ = writeln!(
                    s,
                    "<circle cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"9\" fill=\"white\" stroke=\"{color}\"/>\
                     <text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
                    cy + 4.0,
                    event.id
                );
            }
        }
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{name}</text>",
            MARGIN + 8.0,
            MARGIN + 16.0 + 16.0 * ri as f64
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Count command edges of the energized flag over a run.
fn energized_transitions(log: &RunLog, brake: usize) -> usize {
    let flag = |t: &crate::runlog::TickRecord| match brake {
        0 => t.brake_energized.top,
        1 => t.brake_energized.left,
        _ => t.brake_energized.right,
    };
    log.ticks.windows(2).filter(|w| flag(&w[0]) != flag(&w[1])).count()
}

/// Active-time (energized) bars per brake and run. A brake whose flag
/// never switches in any run is omitted and named in the caption.
pub fn brakes_svg(runs: &[(&str, &RunLog)]) -> String {
    let mut shown = Vec::new();
    let mut omitted = Vec::new();
    for b in 0..3 {
        if runs.iter().any(|(_, log)| energized_transitions(log, b) > 0) {
            shown.push(b);
        } else {
            omitted.push(MOTOR_NAMES[b]);
        }
    }
    let t_max = runs
        .iter()
        .filter_map(|(_, log)| log.ticks.last().map(|t| t.time))
        .fold(1e-9_f64, f64::max);
    let f = Frame {
        x0: 0.0,
        x1: t_max,
        y0: 0.0,
        y1: 1.0,
    };
    let mut s = svg_open("Brake active time");
    axes(&mut s, &f, "time [s]", "");
    let lanes = (shown.len() * runs.len()).max(1);
    let lane_h = (HEIGHT - 2.0 * MARGIN) / lanes as f64;
    let mut lane = 0;
    for &b in &shown {
        for (ri, (name, log)) in runs.iter().enumerate() {
            let color = COLORS[ri % COLORS.len()];
            let y = MARGIN + lane as f64 * lane_h + lane_h * 0.25;
            let flag = |t: &crate::runlog::TickRecord| match b {
                0 => t.brake_energized.top,
                1 => t.brake_energized.left,
                _ => t.brake_energized.right,
            };
            let mut start: Option<f64> = None;
            let mut bars = Vec::new();
            for t in &log.ticks {
                match (start, flag(t)) {
                    (None, true) => start = Some(t.time),
                    (Some(t0), false) => {
                        bars.push((t0, t.time));
                        start = None;
                    }
                    _ => {}
                }
            }
            if let (Some(t0), Some(t)) = (start, log.ticks.last()) {
                bars.push((t0, t.time));
            }
            for (t0, t1) in bars {
                let _ = writeln!(
                    s,
                    "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.2}\" height=\"{:.1}\" fill=\"{color}\"/>",
                    f.x(t0),
                    y,
                    (f.x(t1) - f.x(t0)).max(0.5),
                    lane_h * 0.5
                );
            }
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{} ({name})</text>",
                MARGIN - 6.0,
                y + lane_h * 0.25 + 4.0,
                MOTOR_NAMES[b]
            );
            lane += 1;
        }
    }
    if !omitted.is_empty() {
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\">omitted (no switching): {}</text>",
            MARGIN,
            HEIGHT - 28.0,
            omitted.join(", ")
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Write the three standard plots into `dir`; returns the file paths.
pub fn write_plots(
    dir: &Path,
    runs: &[(&str, &RunLog)],
    geometry: Option<&RobotGeometry>,
) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let files = [
        ("energy.svg", energy_svg(runs)),
        ("trajectory.svg", trajectory_svg(runs, geometry)),
        ("brakes.svg", brakes_svg(runs)),
    ];
    let mut paths = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        paths.push(path);
    }
    Ok(paths)
}
