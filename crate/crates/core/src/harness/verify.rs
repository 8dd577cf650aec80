use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RunConfig;
use crate::clf::{check_clf_decrease, clf_terms, nominal_control, SigmaSelector};
use crate::fields::{apf_control, f_att, f_rep, u_att, u_rep};
use crate::qp::{solve_projection, HalfSpaceConstraint};
use crate::rcbf::{generalized_control, safety_filter, special_filter_control, GammaSelector, RcbfTerms};
use crate::types::{rho, Scenario, Vec2};

/// Width of the excluded bands around obstacle surfaces, influence
/// boundaries and the goal.
const BAND: f64 = 1e-3;
const EQUIVALENCE_TOL: f64 = 1e-9;
const GRADIENT_TOL: f64 = 1e-5;
const ORACLE_TOL: f64 = 1e-9;
const CLF_DECREASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Equivalence,
    Gradients,
    Oracle,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equivalence" => Ok(Suite::Equivalence),
            "gradients" => Ok(Suite::Gradients),
            "oracle" => Ok(Suite::Oracle),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite {other:?} (expected equivalence, gradients, oracle or all)"
            )),
        }
    }
}

/// One measured quantity within a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub check: String,
    pub samples: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub results: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(SuiteResult::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed = {}", self.seed)?;
        for r in &self.results {
            writeln!(
                f,
                "[{}] {:<12} {:<44} n={:<7} max_error={:.3e} tol={:.0e}",
                if r.passed() { "PASS" } else { "FAIL" },
                r.suite,
                r.check,
                r.samples,
                r.max_error,
                r.tolerance
            )?;
        }
        writeln!(
            f,
            "{}",
            if self.passed() {
                "all checks passed"
            } else {
                "some checks FAILED"
            }
        )
    }
}

pub fn verify(config: &RunConfig, suite: Suite, seed: u64) -> VerifyReport {
    let mut results = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if matches!(suite, Suite::Equivalence | Suite::All) {
        equivalence(config, &mut rng, &mut results);
    }
    if matches!(suite, Suite::Gradients | Suite::All) {
        gradients(config, &mut rng, &mut results);
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        oracle(config, &mut rng, &mut results);
    }
    VerifyReport { seed, results }
}

/// True for states that are admissible and away from the non-smooth sets.
fn admissible(x: Vec2, scenario: &Scenario) -> bool {
    (x - scenario.goal).norm() >= BAND
        && scenario.obstacles.iter().all(|o| {
            let r = rho(x, o);
            r >= BAND && (r - o.influence_margin).abs() >= BAND
        })
}

fn uniform_state(rng: &mut ChaCha8Rng, lo: Vec2, hi: Vec2) -> Vec2 {
    Vec2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y))
}

fn random_admissible(rng: &mut ChaCha8Rng, config: &RunConfig) -> Vec2 {
    loop {
        let x = uniform_state(rng, config.verify.grid_min, config.verify.grid_max);
        if admissible(x, &config.scenario) {
            return x;
        }
    }
}

/// Random state inside the influence band of a random obstacle, at least
/// `BAND` away from both band edges.
fn random_in_band(rng: &mut ChaCha8Rng, scenario: &Scenario) -> Option<Vec2> {
    if scenario.obstacles.is_empty() {
        return None;
    }
    for _ in 0..1000 {
        let obs = &scenario.obstacles[rng.gen_range(0..scenario.obstacles.len())];
        if obs.influence_margin <= 2.0 * BAND {
            continue;
        }
        let clearance = rng.gen_range(BAND..obs.influence_margin - BAND);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let x = obs.center + (obs.radius + clearance) * Vec2::new(angle.cos(), angle.sin());
        if admissible(x, scenario) {
            return Some(x);
        }
    }
    None
}

fn equivalence(config: &RunConfig, rng: &mut ChaCha8Rng, out: &mut Vec<SuiteResult>) {
    let sc = &config.scenario;
    let v = &config.verify;
    let n = v.grid_n;
    let mut states = Vec::with_capacity(n * n + v.random_samples);
    for i in 0..n {
        for j in 0..n {
            let tx = i as f64 / (n - 1) as f64;
            let ty = j as f64 / (n - 1) as f64;
            let x = Vec2::new(
                v.grid_min.x + tx * (v.grid_max.x - v.grid_min.x),
                v.grid_min.y + ty * (v.grid_max.y - v.grid_min.y),
            );
            if admissible(x, sc) {
                states.push(x);
            }
        }
    }
    for _ in 0..v.random_samples {
        states.push(random_admissible(rng, config));
    }

    let sigma = SigmaSelector::GradNormSquared;
    let gamma = GammaSelector::scaled_special(1.0);
    let mut special_err: f64 = 0.0;
    let mut general_err: f64 = 0.0;
    for &x in &states {
        let Ok(apf) = apf_control(x, sc) else {
            special_err = f64::INFINITY;
            general_err = f64::INFINITY;
            continue;
        };
        special_err = special_err.max(special_filter_control(x, sc).map_or(f64::INFINITY, |u| (u - apf).norm()));
        general_err = general_err
            .max(generalized_control(x, sc, &sigma, &gamma).map_or(f64::INFINITY, |(u, _)| (u - apf).norm()));
    }
    out.push(SuiteResult {
        suite: "equivalence",
        check: "|apf - special_filter|".into(),
        samples: states.len(),
        max_error: special_err,
        tolerance: EQUIVALENCE_TOL,
    });
    out.push(SuiteResult {
        suite: "equivalence",
        check: "|apf - generalized(|b|^2, lambda=1)|".into(),
        samples: states.len(),
        max_error: general_err,
        tolerance: EQUIVALENCE_TOL,
    });
}

/// Central differences with step `1e-6 * length`. The divisor is the
/// distance between the two representable evaluation points.
fn central_difference(f: impl Fn(Vec2) -> f64, x: Vec2, length: f64) -> Vec2 {
    let h = 1e-6 * length;
    let (xp, xm) = (x.x + h, x.x - h);
    let dx = (f(Vec2::new(xp, x.y)) - f(Vec2::new(xm, x.y))) / (xp - xm);
    let (yp, ym) = (x.y + h, x.y - h);
    let dy = (f(Vec2::new(x.x, yp)) - f(Vec2::new(x.x, ym))) / (yp - ym);
    Vec2::new(dx, dy)
}

fn relative_error(approx: Vec2, exact: Vec2) -> f64 {
    let diff = (approx - exact).norm();
    let scale = exact.norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn gradients(config: &RunConfig, rng: &mut ChaCha8Rng, out: &mut Vec<SuiteResult>) {
    let sc = &config.scenario;
    let n = config.verify.random_samples;
    let mut att_err: f64 = 0.0;
    let mut rep_err: f64 = 0.0;
    for k in 0..n {
        let x = if k % 2 == 0 {
            random_in_band(rng, sc).unwrap_or_else(|| random_admissible(rng, config))
        } else {
            random_admissible(rng, config)
        };
        let att_scale = x.x.abs().max(x.y.abs()).max(1.0);
        att_err = att_err.max(relative_error(
            central_difference(|p| u_att(p, sc), x, att_scale),
            f_att(x, sc),
        ));
        for obs in &sc.obstacles {
            // The repulsive field varies on the scale of the clearance.
            let rep_scale = rho(x, obs).min(1.0);
            let fd = central_difference(|p| u_rep(p, obs, sc).unwrap_or(f64::NAN), x, rep_scale);
            let exact = f_rep(x, obs, sc).unwrap_or(Vec2::new(f64::NAN, f64::NAN));
            let e = relative_error(fd, exact);
            rep_err = if e.is_nan() { f64::INFINITY } else { rep_err.max(e) };
        }
    }
    out.push(SuiteResult {
        suite: "gradients",
        check: "central FD of u_att vs f_att (relative)".into(),
        samples: n,
        max_error: att_err,
        tolerance: GRADIENT_TOL,
    });
    out.push(SuiteResult {
        suite: "gradients",
        check: "central FD of u_rep vs f_rep (relative)".into(),
        samples: n,
        max_error: rep_err,
        tolerance: GRADIENT_TOL,
    });
}

fn oracle(config: &RunConfig, rng: &mut ChaCha8Rng, out: &mut Vec<SuiteResult>) {
    let n = config.verify.random_samples;
    let mut filter_err: f64 = 0.0;
    for _ in 0..n {
        let u_nom = Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let c_tilde = rng.gen_range(-10.0..10.0);
        let d = loop {
            let d = Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            if d.norm() > 1e-3 {
                break d;
            }
        };
        let terms = RcbfTerms {
            b: 0.0,
            h: 0.0,
            c: c_tilde,
            d,
            gamma: 0.0,
            c_tilde,
        };
        let err = match (
            safety_filter(u_nom, &terms),
            solve_projection(u_nom, &[HalfSpaceConstraint::new(c_tilde, d)]),
        ) {
            (Ok((u, _)), Ok(sol)) if sol.feasible => (u - sol.u_star).norm(),
            _ => f64::INFINITY,
        };
        filter_err = filter_err.max(err);
    }
    out.push(SuiteResult {
        suite: "oracle",
        check: "safety_filter vs enumeration QP".into(),
        samples: n,
        max_error: filter_err,
        tolerance: ORACLE_TOL,
    });

    let sc = &config.scenario;
    let selectors = [
        ("|b|^2", SigmaSelector::GradNormSquared),
        ("2 V", SigmaSelector::ScaledValue { coef: 2.0 }),
        ("|x - x_goal|", SigmaSelector::ScaledNorm { coef: 1.0 }),
    ];
    for (label, sel) in selectors {
        let mut qp_err: f64 = 0.0;
        let mut decrease: f64 = f64::NEG_INFINITY;
        for _ in 0..n {
            let x = random_admissible(rng, config);
            let u = nominal_control(x, sc, &sel);
            let terms = clf_terms(x, sc, &sel);
            let err = match solve_projection(Vec2::ZERO, &[HalfSpaceConstraint::new(terms.a_tilde, terms.b)]) {
                Ok(sol) if sol.feasible => (u - sol.u_star).norm(),
                _ => f64::INFINITY,
            };
            qp_err = qp_err.max(err);
            decrease = decrease.max(check_clf_decrease(x, u, sc, &sel));
        }
        out.push(SuiteResult {
            suite: "oracle",
            check: format!("nominal_control vs QP, sigma = {label}"),
            samples: n,
            max_error: qp_err,
            tolerance: ORACLE_TOL,
        });
        out.push(SuiteResult {
            suite: "oracle",
            check: format!("max CLF residual, sigma = {label}"),
            samples: n,
            max_error: decrease.max(0.0),
            tolerance: CLF_DECREASE_TOL,
        });
    }
}
