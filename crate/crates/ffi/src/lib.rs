//! C ABI over the `apfcbf` controllers, safety filters and simulator.
//!
//! Scenarios and trajectories are opaque heap handles created and freed
//! through this API. Every fallible function returns an [`ApfStatus`];
//! on failure a message is available from [`apf_last_error`] until the
//! next failing call on the same thread.
//!
//! The generated header lives at `include/apfcbf.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;

use apfcbf::clf::{nominal_control, SigmaSelector};
use apfcbf::fields::{apf_control, f_att, f_rep, u_att, u_rep};
use apfcbf::harness::write_trajectory_csv;
use apfcbf::qp::{solve_projection, HalfSpaceConstraint};
use apfcbf::rcbf::{generalized_control, safety_filter, special_filter_control, GammaSelector, RcbfTerms};
use apfcbf::sim::{simulate, ControllerKind, ControllerSpec, Integrator, SimConfig, Terminal, Trajectory};
use apfcbf::{classify_safety, Error, Scenario, Vec2};

/// Opaque validated scenario.
pub struct ApfScenario(Scenario);

/// Opaque simulated trajectory.
pub struct ApfTrajectory {
    inner: Trajectory,
    obstacles: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InsideObstacle = 3,
    Infeasible = 4,
    NegativeGamma = 5,
    InvalidScenario = 6,
    Parse = 7,
    Io = 8,
    OutOfRange = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApfVec2 {
    pub x: f64,
    pub y: f64,
}

impl From<ApfVec2> for Vec2 {
    fn from(v: ApfVec2) -> Self {
        Vec2::new(v.x, v.y)
    }
}

impl From<Vec2> for ApfVec2 {
    fn from(v: Vec2) -> Self {
        ApfVec2 { x: v.x, y: v.y }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApfSigmaKind {
    GradNormSquared = 0,
    ScaledValue = 1,
    ScaledNorm = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApfSigma {
    pub kind: ApfSigmaKind,
    /// Ignored for `GradNormSquared`.
    pub coef: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApfGammaKind {
    Zero = 0,
    ScaledSpecial = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApfGamma {
    pub kind: ApfGammaKind,
    /// Ignored for `Zero`.
    pub lambda: f64,
    /// Treat a negative Gamma as an error instead of a diagnostic.
    pub strict: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApfControllerKind {
    Apf = 0,
    NominalOnly = 1,
    SpecialFilter = 2,
    Generalized = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApfIntegrator {
    Euler = 0,
    Rk4 = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApfSimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub goal_tolerance: f64,
    pub integrator: ApfIntegrator,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApfTerminal {
    ReachedGoal = 0,
    Timeout = 1,
    DomainError = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApfSample {
    pub t: f64,
    pub x: ApfVec2,
    pub u: ApfVec2,
    pub h_min: f64,
    pub v: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: ApfStatus, msg: impl Into<String>) -> ApfStatus {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
    status
}

fn fail_with(err: Error) -> ApfStatus {
    let status = match err {
        Error::InsideObstacle { .. } => ApfStatus::InsideObstacle,
        Error::Infeasible { .. } => ApfStatus::Infeasible,
        Error::NegativeGamma { .. } => ApfStatus::NegativeGamma,
        Error::Scenario(_) => ApfStatus::InvalidScenario,
        Error::AlphaBarDomain { .. } | Error::TooManyConstraints { .. } => ApfStatus::OutOfRange,
        Error::InvalidInitialState { .. } | Error::Selector(_) => ApfStatus::InvalidArgument,
    };
    fail(status, err.to_string())
}

fn null() -> ApfStatus {
    fail(ApfStatus::NullPointer, "null pointer argument")
}

fn sigma_selector(s: ApfSigma) -> SigmaSelector {
    match s.kind {
        ApfSigmaKind::GradNormSquared => SigmaSelector::GradNormSquared,
        ApfSigmaKind::ScaledValue => SigmaSelector::ScaledValue { coef: s.coef },
        ApfSigmaKind::ScaledNorm => SigmaSelector::ScaledNorm { coef: s.coef },
    }
}

fn gamma_selector(g: ApfGamma) -> GammaSelector {
    match g.kind {
        ApfGammaKind::Zero => GammaSelector::Zero,
        ApfGammaKind::ScaledSpecial => GammaSelector::ScaledSpecial {
            lambda: g.lambda,
            strict: g.strict,
        },
    }
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn apf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses and validates a scenario JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_scenario_from_json(json: *const c_char, out: *mut *mut ApfScenario) -> ApfStatus {
    if json.is_null() || out.is_null() {
        return null();
    }
    let Ok(text) = CStr::from_ptr(json).to_str() else {
        return fail(ApfStatus::Parse, "scenario JSON is not valid UTF-8");
    };
    let scenario = match Scenario::from_json(text) {
        Ok(s) => s,
        Err(e) => return fail(ApfStatus::Parse, e.to_string()),
    };
    match scenario.validate() {
        Ok(s) => {
            *out = Box::into_raw(Box::new(ApfScenario(s)));
            ApfStatus::Ok
        }
        Err(e) => fail_with(e.into()),
    }
}

/// # Safety
/// `scenario` must come from [`apf_scenario_from_json`] and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn apf_scenario_free(scenario: *mut ApfScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// `scenario` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn apf_scenario_obstacle_count(scenario: *const ApfScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.obstacles.len())
}

/// Signed clearance to the nearest obstacle surface.
///
/// # Safety
/// `scenario` must be a live handle and `h` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_clearance(scenario: *const ApfScenario, x: ApfVec2, h: *mut f64) -> ApfStatus {
    let (Some(s), false) = (scenario.as_ref(), h.is_null()) else {
        return null();
    };
    *h = classify_safety(x.into(), &s.0).h;
    ApfStatus::Ok
}

/// Attractive potential and its gradient. Either output may be null.
///
/// # Safety
/// `scenario` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn apf_attractive(
    scenario: *const ApfScenario,
    x: ApfVec2,
    value: *mut f64,
    gradient: *mut ApfVec2,
) -> ApfStatus {
    let Some(s) = scenario.as_ref() else {
        return null();
    };
    if let Some(v) = value.as_mut() {
        *v = u_att(x.into(), &s.0);
    }
    if let Some(g) = gradient.as_mut() {
        *g = f_att(x.into(), &s.0).into();
    }
    ApfStatus::Ok
}

/// Repulsive potential of obstacle `index` and its gradient. Either output
/// may be null.
///
/// # Safety
/// `scenario` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn apf_repulsive(
    scenario: *const ApfScenario,
    index: usize,
    x: ApfVec2,
    value: *mut f64,
    gradient: *mut ApfVec2,
) -> ApfStatus {
    let Some(s) = scenario.as_ref() else {
        return null();
    };
    let Some(obs) = s.0.obstacles.get(index) else {
        return fail(ApfStatus::OutOfRange, format!("obstacle index {index} out of range"));
    };
    let eval = u_rep(x.into(), obs, &s.0).and_then(|v| Ok((v, f_rep(x.into(), obs, &s.0)?)));
    match eval {
        Ok((v, g)) => {
            if let Some(out) = value.as_mut() {
                *out = v;
            }
            if let Some(out) = gradient.as_mut() {
                *out = g.into();
            }
            ApfStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

unsafe fn write_control(result: apfcbf::Result<Vec2>, u: *mut ApfVec2) -> ApfStatus {
    match result {
        Ok(v) => {
            *u = v.into();
            ApfStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Classical potential-field velocity command.
///
/// # Safety
/// `scenario` must be a live handle and `u` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_apf_control(scenario: *const ApfScenario, x: ApfVec2, u: *mut ApfVec2) -> ApfStatus {
    let (Some(s), false) = (scenario.as_ref(), u.is_null()) else {
        return null();
    };
    write_control(apf_control(x.into(), &s.0), u)
}

/// Barrier filter equivalent to the potential-field command.
///
/// # Safety
/// `scenario` must be a live handle and `u` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_special_filter_control(
    scenario: *const ApfScenario,
    x: ApfVec2,
    u: *mut ApfVec2,
) -> ApfStatus {
    let (Some(s), false) = (scenario.as_ref(), u.is_null()) else {
        return null();
    };
    write_control(special_filter_control(x.into(), &s.0), u)
}

/// Min-norm CLF nominal command.
///
/// # Safety
/// `scenario` must be a live handle and `u` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_nominal_control(
    scenario: *const ApfScenario,
    x: ApfVec2,
    sigma: ApfSigma,
    u: *mut ApfVec2,
) -> ApfStatus {
    let (Some(s), false) = (scenario.as_ref(), u.is_null()) else {
        return null();
    };
    let sel = sigma_selector(sigma);
    if let Err(e) = sel.validate() {
        return fail_with(e);
    }
    *u = nominal_control(x.into(), &s.0, &sel).into();
    ApfStatus::Ok
}

/// Generalized controller. When `phi` is non-null it receives one value
/// per obstacle and must have room for `phi_len` entries, with `phi_len`
/// at least the obstacle count.
///
/// # Safety
/// `scenario` must be a live handle, `u` a valid pointer and `phi` either
/// null or valid for `phi_len` writes.
#[no_mangle]
pub unsafe extern "C" fn apf_generalized_control(
    scenario: *const ApfScenario,
    x: ApfVec2,
    sigma: ApfSigma,
    gamma: ApfGamma,
    u: *mut ApfVec2,
    phi: *mut f64,
    phi_len: usize,
) -> ApfStatus {
    let (Some(s), false) = (scenario.as_ref(), u.is_null()) else {
        return null();
    };
    let (sigma, gamma) = (sigma_selector(sigma), gamma_selector(gamma));
    if let Err(e) = sigma.validate().and_then(|_| gamma.validate()) {
        return fail_with(e);
    }
    if !phi.is_null() && phi_len < s.0.obstacles.len() {
        return fail(ApfStatus::InvalidArgument, "phi buffer shorter than obstacle count");
    }
    match generalized_control(x.into(), &s.0, &sigma, &gamma) {
        Ok((v, diags)) => {
            *u = v.into();
            if !phi.is_null() {
                for (i, d) in diags.iter().enumerate() {
                    *phi.add(i) = d.phi;
                }
            }
            ApfStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Closed-form projection of `u_nom` onto `c_tilde + d.u <= 0`. `phi` may
/// be null.
///
/// # Safety
/// `u` must be a valid pointer; `phi` null or valid.
#[no_mangle]
pub unsafe extern "C" fn apf_safety_filter(
    u_nom: ApfVec2,
    c_tilde: f64,
    d: ApfVec2,
    u: *mut ApfVec2,
    phi: *mut f64,
) -> ApfStatus {
    if u.is_null() {
        return null();
    }
    let terms = RcbfTerms {
        b: 0.0,
        h: 0.0,
        c: c_tilde,
        d: d.into(),
        gamma: 0.0,
        c_tilde,
    };
    match safety_filter(u_nom.into(), &terms) {
        Ok((v, diag)) => {
            *u = v.into();
            if let Some(p) = phi.as_mut() {
                *p = diag.phi;
            }
            ApfStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Exact projection onto `count` stacked half-spaces
/// `offsets[i] + normals[i].u <= 0` (at most 8).
///
/// # Safety
/// `offsets` and `normals` must be valid for `count` reads (may be null
/// when `count == 0`); `u` and `feasible` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn apf_solve_projection(
    u_nom: ApfVec2,
    offsets: *const f64,
    normals: *const ApfVec2,
    count: usize,
    u: *mut ApfVec2,
    feasible: *mut bool,
) -> ApfStatus {
    if u.is_null() || feasible.is_null() || (count > 0 && (offsets.is_null() || normals.is_null())) {
        return null();
    }
    let constraints: Vec<HalfSpaceConstraint> = (0..count)
        .map(|i| HalfSpaceConstraint::new(*offsets.add(i), (*normals.add(i)).into()))
        .collect();
    match solve_projection(u_nom.into(), &constraints) {
        Ok(sol) => {
            *u = sol.u_star.into();
            *feasible = sol.feasible;
            ApfStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// Defaults used by the CLI: rk4, `dt = 0.01`, `t_max = 40`,
/// `goal_tolerance = 0.05`.
#[no_mangle]
pub extern "C" fn apf_sim_config_default() -> ApfSimConfig {
    let d = SimConfig::default();
    ApfSimConfig {
        dt: d.dt,
        t_max: d.t_max,
        goal_tolerance: d.goal_tolerance,
        integrator: ApfIntegrator::Rk4,
    }
}

/// Simulates the closed loop. `sigma` is used by the nominal-only and
/// generalized controllers, `gamma` by the generalized one.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer. The
/// returned trajectory must be released with [`apf_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn apf_simulate(
    scenario: *const ApfScenario,
    kind: ApfControllerKind,
    sigma: ApfSigma,
    gamma: ApfGamma,
    config: ApfSimConfig,
    x0: ApfVec2,
    out: *mut *mut ApfTrajectory,
) -> ApfStatus {
    let (Some(s), false) = (scenario.as_ref(), out.is_null()) else {
        return null();
    };
    let spec = match kind {
        ApfControllerKind::Apf => ControllerSpec::apf(),
        ApfControllerKind::NominalOnly => ControllerSpec::nominal_only(sigma_selector(sigma)),
        ApfControllerKind::SpecialFilter => ControllerSpec::special_filter(),
        ApfControllerKind::Generalized => ControllerSpec {
            kind: ControllerKind::Generalized,
            sigma: Some(sigma_selector(sigma)),
            gamma: Some(gamma_selector(gamma)),
        },
    };
    let cfg = SimConfig {
        dt: config.dt,
        t_max: config.t_max,
        goal_tolerance: config.goal_tolerance,
        integrator: match config.integrator {
            ApfIntegrator::Euler => Integrator::Euler,
            ApfIntegrator::Rk4 => Integrator::Rk4,
        },
    };
    if let Err(e) = spec.validate().and_then(|_| cfg.validate(&s.0)) {
        return fail_with(e);
    }
    match simulate(&s.0, &spec, &cfg, x0.into()) {
        Ok(tr) => {
            *out = Box::into_raw(Box::new(ApfTrajectory {
                inner: tr,
                obstacles: s.0.obstacles.len(),
            }));
            ApfStatus::Ok
        }
        Err(e) => fail_with(e),
    }
}

/// # Safety
/// `trajectory` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn apf_trajectory_len(trajectory: *const ApfTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.inner.samples.len())
}

/// # Safety
/// `trajectory` must be a live handle and `terminal` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_trajectory_terminal(
    trajectory: *const ApfTrajectory,
    terminal: *mut ApfTerminal,
) -> ApfStatus {
    let (Some(t), false) = (trajectory.as_ref(), terminal.is_null()) else {
        return null();
    };
    *terminal = match t.inner.terminal {
        Terminal::ReachedGoal => ApfTerminal::ReachedGoal,
        Terminal::Timeout => ApfTerminal::Timeout,
        Terminal::DomainError => ApfTerminal::DomainError,
    };
    ApfStatus::Ok
}

/// # Safety
/// `trajectory` must be a live handle and `sample` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn apf_trajectory_sample(
    trajectory: *const ApfTrajectory,
    index: usize,
    sample: *mut ApfSample,
) -> ApfStatus {
    let (Some(t), false) = (trajectory.as_ref(), sample.is_null()) else {
        return null();
    };
    let Some(s) = t.inner.samples.get(index) else {
        return fail(ApfStatus::OutOfRange, format!("sample index {index} out of range"));
    };
    *sample = ApfSample {
        t: s.t,
        x: s.x.into(),
        u: s.u.into(),
        h_min: s.h_min,
        v: s.v,
    };
    ApfStatus::Ok
}

/// Writes the trajectory in the CLI's CSV format.
///
/// # Safety
/// `trajectory` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn apf_trajectory_write_csv(trajectory: *const ApfTrajectory, path: *const c_char) -> ApfStatus {
    let (Some(t), false) = (trajectory.as_ref(), path.is_null()) else {
        return null();
    };
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return fail(ApfStatus::InvalidArgument, "path is not valid UTF-8");
    };
    match write_trajectory_csv(Path::new(path), &t.inner, t.obstacles) {
        Ok(()) => ApfStatus::Ok,
        Err(e) => fail(ApfStatus::Io, e.to_string()),
    }
}

/// # Safety
/// `trajectory` must come from [`apf_simulate`] and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn apf_trajectory_free(trajectory: *mut ApfTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}
