//! Closed-loop simulation of `x' = u(x)` and trajectory metrics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::clf::{nominal_control, SigmaSelector};
use crate::error::{Error, Result};
use crate::fields::{apf_control, u_att};
use crate::rcbf::{generalized_control, special_filter_with_diagnostics, FilterDiagnostics, GammaSelector};
use crate::types::{classify_safety, rho, Scenario, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    /// Classical potential-field command.
    Apf,
    /// Min-norm CLF command without obstacle handling.
    NominalOnly,
    /// APF-equivalent barrier filter around `-f_att`.
    SpecialFilter,
    /// Nominal CLF command followed by the barrier filter.
    Generalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaSelector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaSelector>,
}

/// Controller output at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSample {
    pub u: Vec2,
    /// Per-obstacle `phi`; NaN for controllers without a barrier filter.
    pub phi: Vec<f64>,
    pub gamma_negative: bool,
}

impl ControlSample {
    fn filtered(u: Vec2, diags: &[FilterDiagnostics]) -> Self {
        Self {
            u,
            phi: diags.iter().map(|d| d.phi).collect(),
            gamma_negative: diags.iter().any(|d| d.gamma_negative),
        }
    }
}

impl ControllerSpec {
    pub fn apf() -> Self {
        Self {
            kind: ControllerKind::Apf,
            sigma: None,
            gamma: None,
        }
    }

    pub fn nominal_only(sigma: SigmaSelector) -> Self {
        Self {
            kind: ControllerKind::NominalOnly,
            sigma: Some(sigma),
            gamma: None,
        }
    }

    pub fn special_filter() -> Self {
        Self {
            kind: ControllerKind::SpecialFilter,
            sigma: None,
            gamma: None,
        }
    }

    pub fn generalized(sigma: SigmaSelector, gamma: GammaSelector) -> Self {
        Self {
            kind: ControllerKind::Generalized,
            sigma: Some(sigma),
            gamma: Some(gamma),
        }
    }

    /// Checks that the selectors required by `kind` are present and valid.
    pub fn validate(&self) -> Result<()> {
        let need_sigma = matches!(self.kind, ControllerKind::NominalOnly | ControllerKind::Generalized);
        let need_gamma = self.kind == ControllerKind::Generalized;
        match (&self.sigma, need_sigma) {
            (Some(s), _) => s.validate()?,
            (None, true) => {
                return Err(Error::Selector(format!(
                    "{:?} controller requires a sigma selector",
                    self.kind
                )))
            }
            (None, false) => {}
        }
        match (&self.gamma, need_gamma) {
            (Some(g), _) => g.validate()?,
            (None, true) => {
                return Err(Error::Selector(format!(
                    "{:?} controller requires a gamma selector",
                    self.kind
                )))
            }
            (None, false) => {}
        }
        Ok(())
    }

    fn sigma(&self) -> SigmaSelector {
        self.sigma.clone().unwrap_or_default()
    }

    pub fn control(&self, x: Vec2, scenario: &Scenario) -> Result<ControlSample> {
        let m = scenario.obstacles.len();
        match self.kind {
            ControllerKind::Apf => Ok(ControlSample {
                u: apf_control(x, scenario)?,
                phi: vec![f64::NAN; m],
                gamma_negative: false,
            }),
            ControllerKind::NominalOnly => {
                // Still reject states inside an obstacle.
                for obs in &scenario.obstacles {
                    let r = rho(x, obs);
                    if r.is_nan() || r <= 0.0 {
                        return Err(Error::InsideObstacle { rho: r });
                    }
                }
                Ok(ControlSample {
                    u: nominal_control(x, scenario, &self.sigma()),
                    phi: vec![f64::NAN; m],
                    gamma_negative: false,
                })
            }
            ControllerKind::SpecialFilter => {
                let (u, diags) = special_filter_with_diagnostics(x, scenario)?;
                Ok(ControlSample::filtered(u, &diags))
            }
            ControllerKind::Generalized => {
                let gamma = self.gamma.clone().unwrap_or(GammaSelector::Zero);
                let (u, diags) = generalized_control(x, scenario, &self.sigma(), &gamma)?;
                Ok(ControlSample::filtered(u, &diags))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub goal_tolerance: f64,
    pub integrator: Integrator,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_max: 40.0,
            goal_tolerance: 0.05,
            integrator: Integrator::Rk4,
        }
    }
}

impl SimConfig {
    pub const MAX_DT: f64 = 0.05;

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        let bad = |msg: String| Err(Error::Selector(msg));
        if !(self.dt > 0.0 && self.dt <= Self::MAX_DT) {
            return bad(format!("dt must be in (0, {}], got {}", Self::MAX_DT, self.dt));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        let min_radius = scenario
            .obstacles
            .iter()
            .map(|o| o.radius)
            .fold(f64::INFINITY, f64::min);
        if !(self.goal_tolerance > 0.0 && self.goal_tolerance < min_radius) {
            return bad(format!(
                "goal_tolerance must be positive and below the smallest obstacle radius, got {}",
                self.goal_tolerance
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: Vec2,
    pub u: Vec2,
    pub h_min: f64,
    pub v: f64,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    ReachedGoal,
    Timeout,
    DomainError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub terminal: Terminal,
    /// Number of samples at which some Gamma evaluated negative.
    pub gamma_negative_steps: usize,
    /// Message of the error that stopped a `DomainError` run.
    pub error: Option<String>,
}

fn evaluate(ctrl: &ControllerSpec, scenario: &Scenario, x: Vec2) -> Result<ControlSample> {
    let out = ctrl.control(x, scenario)?;
    if !out.u.is_finite() {
        return Err(Error::InsideObstacle {
            rho: classify_safety(x, scenario).h,
        });
    }
    Ok(out)
}

fn step(ctrl: &ControllerSpec, scenario: &Scenario, cfg: &SimConfig, x: Vec2, k1: Vec2) -> Result<Vec2> {
    let dt = cfg.dt;
    match cfg.integrator {
        Integrator::Euler => Ok(x + dt * k1),
        Integrator::Rk4 => {
            let k2 = evaluate(ctrl, scenario, x + (0.5 * dt) * k1)?.u;
            let k3 = evaluate(ctrl, scenario, x + (0.5 * dt) * k2)?.u;
            let k4 = evaluate(ctrl, scenario, x + dt * k3)?.u;
            Ok(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        }
    }
}

/// Integrates the closed loop from `x0` until the goal tolerance is met,
/// the horizon is exhausted, or the controller fails (obstacle
/// penetration), re-evaluating the controller at every integrator stage.
pub fn simulate(scenario: &Scenario, ctrl: &ControllerSpec, cfg: &SimConfig, x0: Vec2) -> Result<Trajectory> {
    if !x0.is_finite()
        || scenario
            .obstacles
            .iter()
            .any(|o| rho(x0, o).is_nan() || rho(x0, o) <= 0.0)
    {
        return Err(Error::InvalidInitialState { x0 });
    }

    let mut samples = Vec::new();
    let mut gamma_negative_steps = 0;
    let mut x = x0;
    let mut k: u64 = 0;
    let (terminal, error) = loop {
        let t = k as f64 * cfg.dt;
        let out = match evaluate(ctrl, scenario, x) {
            Ok(out) => out,
            Err(e) => break (Terminal::DomainError, Some(e.to_string())),
        };
        if out.gamma_negative {
            gamma_negative_steps += 1;
        }
        samples.push(TrajectorySample {
            t,
            x,
            u: out.u,
            h_min: classify_safety(x, scenario).h,
            v: u_att(x, scenario),
            phi: out.phi,
        });
        if (x - scenario.goal).norm() < cfg.goal_tolerance {
            break (Terminal::ReachedGoal, None);
        }
        if (k + 1) as f64 * cfg.dt > cfg.t_max * (1.0 + 1e-12) {
            break (Terminal::Timeout, None);
        }
        x = match step(ctrl, scenario, cfg, x, out.u) {
            Ok(next) => next,
            Err(e) => break (Terminal::DomainError, Some(e.to_string())),
        };
        k += 1;
    };

    Ok(Trajectory {
        samples,
        terminal,
        gamma_negative_steps,
        error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    pub path_length: f64,
    pub min_clearance: f64,
    pub time_to_goal: Option<f64>,
    /// Total absolute heading change along the path (rad).
    pub oscillation: f64,
}

/// Displacements at or below this length carry no heading.
const MIN_SEGMENT: f64 = 1e-12;

pub fn metrics(tr: &Trajectory) -> TrajectoryMetrics {
    let mut path_length = 0.0;
    let mut oscillation = 0.0;
    let mut heading: Option<f64> = None;
    for pair in tr.samples.windows(2) {
        let seg = pair[1].x - pair[0].x;
        let len = seg.norm();
        path_length += len;
        if len <= MIN_SEGMENT {
            continue;
        }
        let next = seg.y.atan2(seg.x);
        if let Some(prev) = heading {
            oscillation += wrap_angle(next - prev).abs();
        }
        heading = Some(next);
    }
    let min_clearance = tr.samples.iter().map(|s| s.h_min).fold(f64::INFINITY, f64::min);
    let time_to_goal = match tr.terminal {
        Terminal::ReachedGoal => tr.samples.last().map(|s| s.t),
        _ => None,
    };
    TrajectoryMetrics {
        path_length,
        min_clearance,
        time_to_goal,
        oscillation,
    }
}

/// Wraps an angle difference into `(-pi, pi]`.
fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}
