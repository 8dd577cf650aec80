//! Config-driven batch runs and built-in verification suites behind the
//! `apfcbf` command-line tool.

mod config;
mod output;
mod verify;

pub use config::{ConfigError, NamedController, RunConfig, ScenarioSource, VerifySettings};
pub use output::{read_trajectory_csv, write_trajectory_csv, ControllerSummary, MetricsFile};
pub use verify::{verify, Suite, SuiteResult, VerifyReport};

use std::path::{Path, PathBuf};
use std::{fs, io, thread};

use crate::sim::{metrics, simulate, Terminal, Trajectory, TrajectoryMetrics};

/// Process exit codes used by the CLI.
pub mod exit {
    pub const OK: i32 = 0;
    /// A simulation ended in a domain error, or a verification suite failed.
    pub const FAILURE: i32 = 1;
    /// Unreadable or malformed config.
    pub const CONFIG: i32 = 2;
    /// Scenario violates its invariants.
    pub const SCENARIO: i32 = 3;
}

/// One simulated controller.
#[derive(Debug, Clone)]
pub struct ControllerRun {
    pub name: String,
    pub trajectory: Trajectory,
    pub metrics: TrajectoryMetrics,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub runs: Vec<ControllerRun>,
    pub output_dir: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.runs.iter().any(|r| r.trajectory.terminal == Terminal::DomainError) {
            exit::FAILURE
        } else {
            exit::OK
        }
    }
}

/// Simulates every configured controller (concurrently) without touching
/// the filesystem.
pub fn simulate_all(config: &RunConfig) -> Result<Vec<ControllerRun>, ConfigError> {
    let scenario = &config.scenario;
    let results: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = config
            .controllers
            .iter()
            .map(|c| {
                s.spawn(move || {
                    let spec = c.spec();
                    simulate(scenario, &spec, &config.sim, config.x0).map(|trajectory| ControllerRun {
                        name: c.name.clone(),
                        metrics: metrics(&trajectory),
                        trajectory,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    results
        .into_iter()
        .map(|r| r.map_err(|e| ConfigError::Invalid(e.to_string())))
        .collect()
}

/// Runs every controller and writes `<name>.csv`, `metrics.json` and
/// `report.txt` into the output directory.
pub fn run(config: &RunConfig) -> Result<RunOutcome, ConfigError> {
    let runs = simulate_all(config)?;
    let dir = config.output_dir.clone();
    write_outputs(&dir, config, &runs).map_err(|e| ConfigError::Io {
        path: dir.clone(),
        source: e,
    })?;
    Ok(RunOutcome { runs, output_dir: dir })
}

fn write_outputs(dir: &Path, config: &RunConfig, runs: &[ControllerRun]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for r in runs {
        let path = dir.join(format!("{}.csv", r.name));
        write_trajectory_csv(&path, &r.trajectory, config.scenario.obstacles.len())?;
    }
    let summary = MetricsFile::from_runs(config, runs);
    let json = serde_json::to_string_pretty(&summary).map_err(io::Error::other)?;
    fs::write(dir.join("metrics.json"), json + "\n")?;
    fs::write(dir.join("report.txt"), output::render_report(config, runs))?;
    Ok(())
}
