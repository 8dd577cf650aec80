//! Attractive and repulsive potential fields.
//!
//! Naming follows the usual APF convention: `f_att` and `f_rep` are the
//! *gradients* of the potentials, and the commanded velocity is their
//! negated sum. [`apf_control`] therefore returns `u = -f_att - sum(f_rep)`
//! directly rather than a "force" with an ambiguous sign.

use crate::error::{Error, Result};
use crate::types::{rho, Obstacle, Scenario, Vec2};

/// Potential value together with its gradient at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEval {
    pub value: f64,
    pub gradient: Vec2,
}

pub fn u_att(x: Vec2, scenario: &Scenario) -> f64 {
    0.5 * scenario.k_att * (x - scenario.goal).norm_squared()
}

pub fn f_att(x: Vec2, scenario: &Scenario) -> Vec2 {
    scenario.k_att * (x - scenario.goal)
}

pub fn attractive(x: Vec2, scenario: &Scenario) -> FieldEval {
    FieldEval {
        value: u_att(x, scenario),
        gradient: f_att(x, scenario),
    }
}

fn checked_rho(x: Vec2, obs: &Obstacle) -> Result<f64> {
    let r = rho(x, obs);
    // Also rejects NaN.
    if r > 0.0 {
        Ok(r)
    } else {
        Err(Error::InsideObstacle { rho: r })
    }
}

/// Repulsive potential of one obstacle. Zero outside the influence band,
/// undefined (error) on or inside the obstacle surface.
pub fn u_rep(x: Vec2, obs: &Obstacle, scenario: &Scenario) -> Result<f64> {
    let r = checked_rho(x, obs)?;
    if r >= obs.influence_margin {
        return Ok(0.0);
    }
    let s = 1.0 / r - 1.0 / obs.influence_margin;
    Ok(0.5 * scenario.k_rep * s * s)
}

/// Gradient of [`u_rep`]; points toward the obstacle inside the band.
pub fn f_rep(x: Vec2, obs: &Obstacle, scenario: &Scenario) -> Result<Vec2> {
    let r = checked_rho(x, obs)?;
    if r >= obs.influence_margin {
        return Ok(Vec2::ZERO);
    }
    let offset = x - obs.center;
    let dist = offset.norm();
    let magnitude = -(scenario.k_rep / (r * r)) * (1.0 / r - 1.0 / obs.influence_margin);
    Ok((magnitude / dist) * offset)
}

pub fn repulsive(x: Vec2, obs: &Obstacle, scenario: &Scenario) -> Result<FieldEval> {
    Ok(FieldEval {
        value: u_rep(x, obs, scenario)?,
        gradient: f_rep(x, obs, scenario)?,
    })
}

/// Classical APF velocity command `-f_att(x) - sum_i f_rep_i(x)`.
pub fn apf_control(x: Vec2, scenario: &Scenario) -> Result<Vec2> {
    let mut repulsion = Vec2::ZERO;
    for obs in &scenario.obstacles {
        repulsion += f_rep(x, obs, scenario)?;
    }
    Ok(-f_att(x, scenario) - repulsion)
}

/// Class-K function realizing `u_rep = 1 / alpha_bar(rho)` inside the
/// influence band: `(2 / K_rep) * (rho0 * h / (rho0 - h))^2` on `[0, rho0)`.
pub fn alpha_bar(h: f64, obs: &Obstacle, scenario: &Scenario) -> Result<f64> {
    let rho0 = obs.influence_margin;
    if !(0.0..rho0).contains(&h) {
        return Err(Error::AlphaBarDomain { h, rho0 });
    }
    let q = rho0 * h / (rho0 - h);
    Ok((2.0 / scenario.k_rep) * q * q)
}
