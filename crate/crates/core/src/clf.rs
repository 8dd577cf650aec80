//! Tightened CLF terms for the attractive potential and the min-norm
//! nominal controller.
//!
//! With `V = u_att` and single-integrator dynamics the Lie derivatives are
//! `a(x) = 0` and `b(x) = f_att(x)`. The tightened condition
//! `a + sigma + b.u <= 0` with a positive-definite `sigma` implies strict
//! decrease `a + b.u < 0` away from the goal, so the QP only ever has to
//! enforce a non-strict inequality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{f_att, u_att};
use crate::types::{Scenario, Vec2};

/// Choice of the positive-definite tightening term `sigma(x)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaSelector {
    /// `sigma = |b|^2`; the nominal controller reduces to `-f_att`.
    #[default]
    GradNormSquared,
    /// `sigma = coef * V(x)`.
    ScaledValue { coef: f64 },
    /// `sigma = coef * |x - x_goal|`.
    ScaledNorm { coef: f64 },
    /// Piecewise-linear `sigma(V)` through `(0, 0)` and the given
    /// `[V, sigma]` knots, extended proportionally beyond the last knot.
    Custom { table: Vec<[f64; 2]> },
}

impl SigmaSelector {
    /// Rejects selectors that cannot be positive definite.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Selector(msg));
        match self {
            SigmaSelector::GradNormSquared => Ok(()),
            SigmaSelector::ScaledValue { coef } | SigmaSelector::ScaledNorm { coef } => {
                if coef.is_finite() && *coef > 0.0 {
                    Ok(())
                } else {
                    bad(format!("sigma coef must be positive, got {coef}"))
                }
            }
            SigmaSelector::Custom { table } => {
                if table.is_empty() {
                    return bad("custom sigma table is empty".into());
                }
                let mut prev_v = 0.0;
                for &[v, s] in table {
                    if !(v.is_finite() && s.is_finite()) {
                        return bad("custom sigma table entries must be finite".into());
                    }
                    if v <= prev_v {
                        return bad("custom sigma table V knots must be positive and increasing".into());
                    }
                    if s <= 0.0 {
                        return bad("custom sigma table values must be positive".into());
                    }
                    prev_v = v;
                }
                Ok(())
            }
        }
    }

    /// Evaluates `sigma` given the CLF gradient `b` and value `v` at `x`.
    fn eval(&self, x: Vec2, scenario: &Scenario, b: Vec2, v: f64) -> f64 {
        match self {
            SigmaSelector::GradNormSquared => b.norm_squared(),
            SigmaSelector::ScaledValue { coef } => coef * v,
            SigmaSelector::ScaledNorm { coef } => coef * (x - scenario.goal).norm(),
            SigmaSelector::Custom { table } => interpolate_through_origin(table, v),
        }
    }
}

/// Linear interpolation over `(0, 0)` plus `table`; proportional beyond the
/// last knot.
pub(crate) fn interpolate_through_origin(table: &[[f64; 2]], arg: f64) -> f64 {
    let mut lo = [0.0, 0.0];
    for &hi in table {
        if arg <= hi[0] {
            let t = (arg - lo[0]) / (hi[0] - lo[0]);
            return lo[1] + t * (hi[1] - lo[1]);
        }
        lo = hi;
    }
    lo[1] * arg / lo[0]
}

/// CLF terms at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClfTerms {
    /// `L_f V`, zero for the single integrator.
    pub a: f64,
    /// `L_g V = f_att(x)`.
    pub b: Vec2,
    pub sigma: f64,
    pub a_tilde: f64,
}

pub fn clf_terms(x: Vec2, scenario: &Scenario, sel: &SigmaSelector) -> ClfTerms {
    let a = 0.0;
    let b = f_att(x, scenario);
    let sigma = sel.eval(x, scenario, b, u_att(x, scenario));
    ClfTerms {
        a,
        b,
        sigma,
        a_tilde: a + sigma,
    }
}

/// Attractive gain `G_att = -sigma / |f_att|^2`; zero at the goal, where
/// the nominal command is zero.
pub fn attractive_gain(terms: &ClfTerms) -> f64 {
    let b2 = terms.b.norm_squared();
    if b2 == 0.0 {
        0.0
    } else {
        -terms.sigma / b2
    }
}

/// Min-norm solution of `min |u|^2 / 2  s.t.  a_tilde + b.u <= 0`, i.e.
/// `u = G_att * f_att(x)`, and `u = 0` at the goal.
pub fn nominal_control(x: Vec2, scenario: &Scenario, sel: &SigmaSelector) -> Vec2 {
    let terms = clf_terms(x, scenario, sel);
    nominal_from_terms(&terms)
}

pub(crate) fn nominal_from_terms(terms: &ClfTerms) -> Vec2 {
    // Constraint slack at u = 0 is a_tilde; inactive means u = 0 is optimal.
    if terms.a_tilde <= 0.0 || terms.b.is_zero() {
        return Vec2::ZERO;
    }
    attractive_gain(terms) * terms.b
}

/// Tightened CLF residual `a_tilde(x) + b(x).u`; non-positive certifies
/// the condition at `(x, u)`.
pub fn check_clf_decrease(x: Vec2, u: Vec2, scenario: &Scenario, sel: &SigmaSelector) -> f64 {
    let terms = clf_terms(x, scenario, sel);
    terms.a_tilde + terms.b.dot(u)
}
