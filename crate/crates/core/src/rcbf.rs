//! Reciprocal barrier terms for the repulsive potential and the closed-form
//! single-constraint safety filter.
//!
//! Each obstacle contributes one constraint `c_tilde + d.u <= 0` with
//! `B = u_rep`, `h = rho`, `c = -alpha(h)` and `d = f_rep(x)`. Several
//! obstacles are handled by filtering the same nominal command against
//! each constraint independently and summing the corrections, which keeps
//! the classical APF superposition intact.

use log::debug;
use serde::{Deserialize, Serialize};

use crate::clf::{attractive_gain, clf_terms, nominal_from_terms, SigmaSelector};
use crate::error::{Error, Result};
use crate::fields::{f_att, f_rep, u_rep};
use crate::types::{rho, Obstacle, Scenario, Vec2};

/// Choice of the positive-semidefinite tightening term `Gamma(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GammaSelector {
    /// `Gamma = 0`: the plain reciprocal barrier condition.
    Zero,
    /// `Gamma = lambda * |d|^2 + alpha(h) - d.u_nom`. `lambda = 1` yields
    /// the APF-equivalent filter.
    ///
    /// This family is not sign-definite. A negative value is flagged in
    /// [`FilterDiagnostics::gamma_negative`] and becomes a hard
    /// [`Error::NegativeGamma`] only when `strict` is set.
    ScaledSpecial {
        lambda: f64,
        #[serde(default)]
        strict: bool,
    },
    /// Piecewise-linear `Gamma(h)` over `[h, Gamma]` knots, held constant
    /// outside the knot range.
    Custom { table: Vec<[f64; 2]> },
}

impl GammaSelector {
    pub fn scaled_special(lambda: f64) -> Self {
        GammaSelector::ScaledSpecial { lambda, strict: false }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Selector(msg.to_string()));
        match self {
            GammaSelector::Zero => Ok(()),
            GammaSelector::ScaledSpecial { lambda, .. } => {
                if lambda.is_finite() && *lambda > 0.0 {
                    Ok(())
                } else {
                    bad("gamma lambda must be positive")
                }
            }
            GammaSelector::Custom { table } => {
                if table.is_empty() {
                    return bad("custom gamma table is empty");
                }
                let mut prev: Option<f64> = None;
                for &[h, g] in table {
                    if !(h.is_finite() && g.is_finite()) {
                        return bad("custom gamma table entries must be finite");
                    }
                    if prev.is_some_and(|p| h <= p) {
                        return bad("custom gamma table h knots must be increasing");
                    }
                    if g < 0.0 {
                        return bad("custom gamma table values must be non-negative");
                    }
                    prev = Some(h);
                }
                Ok(())
            }
        }
    }

    fn eval(&self, h: f64, alpha: f64, d: Vec2, u_nom: Vec2) -> f64 {
        match self {
            GammaSelector::Zero => 0.0,
            GammaSelector::ScaledSpecial { lambda, .. } => lambda * d.norm_squared() + alpha - d.dot(u_nom),
            GammaSelector::Custom { table } => interpolate_clamped(table, h),
        }
    }

    fn is_strict(&self) -> bool {
        matches!(self, GammaSelector::ScaledSpecial { strict: true, .. })
    }
}

fn interpolate_clamped(table: &[[f64; 2]], arg: f64) -> f64 {
    let first = table[0];
    if arg <= first[0] {
        return first[1];
    }
    for pair in table.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if arg <= hi[0] {
            let t = (arg - lo[0]) / (hi[0] - lo[0]);
            return lo[1] + t * (hi[1] - lo[1]);
        }
    }
    table[table.len() - 1][1]
}

/// Barrier terms of one obstacle at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcbfTerms {
    /// Reciprocal barrier value `B = u_rep`.
    pub b: f64,
    pub h: f64,
    /// `L_f B - alpha(h)`, i.e. `-alpha(h)` here.
    pub c: f64,
    /// `L_g B = f_rep(x)`.
    pub d: Vec2,
    pub gamma: f64,
    pub c_tilde: f64,
}

/// Per-obstacle result of the filter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FilterDiagnostics {
    /// `c_tilde + d.u_nom`; the constraint is active when positive.
    pub phi: f64,
    pub active: bool,
    /// `u - u_nom` contributed by this constraint.
    pub correction: Vec2,
    pub g_att: f64,
    /// Repulsive gain `-phi / |d|^2`; zero where `d = 0`.
    pub g_rep: f64,
    pub gamma_negative: bool,
}

pub fn rcbf_terms(x: Vec2, obs: &Obstacle, scenario: &Scenario, u_nom: Vec2, sel: &GammaSelector) -> Result<RcbfTerms> {
    let b = u_rep(x, obs, scenario)?;
    let d = f_rep(x, obs, scenario)?;
    let h = rho(x, obs);
    let alpha = scenario.alpha(h);
    let c = -alpha;
    let gamma = sel.eval(h, alpha, d, u_nom);
    if gamma < 0.0 && sel.is_strict() {
        return Err(Error::NegativeGamma { gamma, x });
    }
    Ok(RcbfTerms {
        b,
        h,
        c,
        d,
        gamma,
        c_tilde: c + gamma,
    })
}

/// Closed-form minimizer of `|u - u_nom|^2 / 2` subject to
/// `c_tilde + d.u <= 0`.
pub fn safety_filter(u_nom: Vec2, terms: &RcbfTerms) -> Result<(Vec2, FilterDiagnostics)> {
    let d2 = terms.d.norm_squared();
    if d2 == 0.0 && terms.c_tilde > 0.0 {
        return Err(Error::Infeasible { c_tilde: terms.c_tilde });
    }
    let phi = terms.c_tilde + terms.d.dot(u_nom);
    let g_rep = if d2 == 0.0 { 0.0 } else { -phi / d2 };
    let mut diag = FilterDiagnostics {
        phi,
        g_rep,
        gamma_negative: terms.gamma < 0.0,
        ..FilterDiagnostics::default()
    };
    if phi <= 0.0 {
        return Ok((u_nom, diag));
    }
    diag.active = true;
    diag.correction = g_rep * terms.d;
    Ok((u_nom + diag.correction, diag))
}

/// Filters `u_nom` against every obstacle and sums the corrections.
fn filter_all(
    x: Vec2,
    scenario: &Scenario,
    u_nom: Vec2,
    g_att: f64,
    sel: &GammaSelector,
) -> Result<(Vec2, Vec<FilterDiagnostics>)> {
    let mut u = u_nom;
    let mut diags = Vec::with_capacity(scenario.obstacles.len());
    for obs in &scenario.obstacles {
        let terms = rcbf_terms(x, obs, scenario, u_nom, sel)?;
        let (_, mut diag) = safety_filter(u_nom, &terms)?;
        if diag.gamma_negative {
            debug!("negative Gamma {} at {x}", terms.gamma);
        }
        diag.g_att = g_att;
        if diag.active {
            u += diag.correction;
        }
        diags.push(diag);
    }
    Ok((u, diags))
}

/// Safety filter wrapped around `u_nom = -f_att` with
/// `Gamma = |f_rep|^2 + alpha(h) - d.u_nom`, which reproduces the APF
/// command at every admissible state.
pub fn special_filter_control(x: Vec2, scenario: &Scenario) -> Result<Vec2> {
    special_filter_with_diagnostics(x, scenario).map(|(u, _)| u)
}

pub fn special_filter_with_diagnostics(x: Vec2, scenario: &Scenario) -> Result<(Vec2, Vec<FilterDiagnostics>)> {
    let u_nom = -f_att(x, scenario);
    filter_all(x, scenario, u_nom, -1.0, &GammaSelector::scaled_special(1.0))
}

/// Generalized potential-field controller: nominal min-norm CLF command
/// `G_att * f_att` followed by the barrier filter, adding `G_rep * f_rep`
/// for every obstacle with `G_rep > 0`.
pub fn generalized_control(
    x: Vec2,
    scenario: &Scenario,
    sigma_sel: &SigmaSelector,
    gamma_sel: &GammaSelector,
) -> Result<(Vec2, Vec<FilterDiagnostics>)> {
    let clf = clf_terms(x, scenario, sigma_sel);
    let u_nom = nominal_from_terms(&clf);
    filter_all(x, scenario, u_nom, attractive_gain(&clf), gamma_sel)
}

/// Certificate value `c + d.(-f_rep) = -alpha(h) - |f_rep|^2`
/// for the pure repulsive command; negative inside the influence band.
pub fn repulsive_certificate(x: Vec2, obs: &Obstacle, scenario: &Scenario) -> Result<f64> {
    let terms = rcbf_terms(x, obs, scenario, Vec2::ZERO, &GammaSelector::Zero)?;
    Ok(terms.c + terms.d.dot(-terms.d))
}
