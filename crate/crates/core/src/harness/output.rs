use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::Serialize;

use super::{ControllerRun, RunConfig};
use crate::sim::{ControllerKind, Terminal, Trajectory, TrajectoryMetrics, TrajectorySample};
use crate::types::Vec2;

fn header(obstacles: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["t", "x", "y", "ux", "uy", "h_min", "V"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((1..=obstacles).map(|i| format!("phi_{i}")));
    cols
}

/// Writes one row per sample. Values use Rust's shortest round-trip float
/// formatting; not-applicable `phi` values are written as `NaN`.
pub fn write_trajectory_csv(path: &Path, tr: &Trajectory, obstacles: usize) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header(obstacles))?;
    for s in &tr.samples {
        let mut row = vec![
            s.t.to_string(),
            s.x.x.to_string(),
            s.x.y.to_string(),
            s.u.x.to_string(),
            s.u.y.to_string(),
            s.h_min.to_string(),
            s.v.to_string(),
        ];
        row.extend(s.phi.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn read_trajectory_csv(path: &Path) -> io::Result<Vec<TrajectorySample>> {
    let mut r = csv::Reader::from_path(path)?;
    let cols = r.headers()?.len();
    if cols < 7 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "trajectory CSV needs at least 7 columns",
        ));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        out.push(TrajectorySample {
            t: vals[0],
            x: Vec2::new(vals[1], vals[2]),
            u: Vec2::new(vals[3], vals[4]),
            h_min: vals[5],
            v: vals[6],
            phi: vals[7..].to_vec(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ControllerSummary {
    pub name: String,
    pub kind: ControllerKind,
    pub terminal: Terminal,
    pub samples: usize,
    pub gamma_negative_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub metrics: TrajectoryMetrics,
}

/// Contents of `metrics.json`.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsFile {
    pub x0: Vec2,
    pub dt: f64,
    pub t_max: f64,
    pub controllers: Vec<ControllerSummary>,
}

impl MetricsFile {
    pub fn from_runs(config: &RunConfig, runs: &[ControllerRun]) -> Self {
        let controllers = runs
            .iter()
            .zip(&config.controllers)
            .map(|(r, c)| ControllerSummary {
                name: r.name.clone(),
                kind: c.kind,
                terminal: r.trajectory.terminal,
                samples: r.trajectory.samples.len(),
                gamma_negative_steps: r.trajectory.gamma_negative_steps,
                error: r.trajectory.error.clone(),
                metrics: r.metrics,
            })
            .collect();
        MetricsFile {
            x0: config.x0,
            dt: config.sim.dt,
            t_max: config.sim.t_max,
            controllers,
        }
    }
}

fn terminal_name(t: Terminal) -> &'static str {
    match t {
        Terminal::ReachedGoal => "reached_goal",
        Terminal::Timeout => "timeout",
        Terminal::DomainError => "domain_error",
    }
}

/// Largest per-sample position gap between two trajectories over their
/// common prefix.
fn max_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    a.samples
        .iter()
        .zip(&b.samples)
        .map(|(p, q)| (p.x - q.x).norm())
        .fold(0.0, f64::max)
}

pub(super) fn render_report(config: &RunConfig, runs: &[ControllerRun]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "x0 = {}  goal = {}  dt = {}  t_max = {}  integrator = {:?}",
        config.x0, config.scenario.goal, config.sim.dt, config.sim.t_max, config.sim.integrator
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<16} {:<13} {:>9} {:>12} {:>14} {:>12} {:>10}",
        "controller", "terminal", "t_goal", "path_length", "min_clearance", "oscillation", "gamma<0"
    );
    for r in runs {
        let m = &r.metrics;
        let t_goal = m.time_to_goal.map_or("-".to_string(), |t| format!("{t:.2}"));
        let _ = writeln!(
            s,
            "{:<16} {:<13} {:>9} {:>12.4} {:>14.6} {:>12.4} {:>10}",
            r.name,
            terminal_name(r.trajectory.terminal),
            t_goal,
            m.path_length,
            m.min_clearance,
            m.oscillation,
            r.trajectory.gamma_negative_steps
        );
    }
    if runs.len() > 1 {
        let _ = writeln!(s);
        let _ = writeln!(s, "max per-sample position gap relative to {}:", runs[0].name);
        for r in &runs[1..] {
            let _ = writeln!(
                s,
                "  {:<16} {:.3e}",
                r.name,
                max_gap(&runs[0].trajectory, &r.trajectory)
            );
        }
    }
    if let Some(best) = runs
        .iter()
        .filter(|r| r.trajectory.terminal == Terminal::ReachedGoal)
        .min_by(|a, b| a.metrics.oscillation.total_cmp(&b.metrics.oscillation))
    {
        let _ = writeln!(s);
        let _ = writeln!(s, "smoothest controller reaching the goal: {}", best.name);
    }
    s
}
