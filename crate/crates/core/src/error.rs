use thiserror::Error;

use crate::types::Vec2;

/// Invariant violations found by [`crate::types::validate_scenario`].
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid scenario: {}", violations.join("; "))]
pub struct ScenarioError {
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inside obstacle: repulsive potential undefined (rho = {rho})")]
    InsideObstacle { rho: f64 },

    #[error("alpha_bar argument h = {h} outside [0, {rho0})")]
    AlphaBarDomain { h: f64, rho0: f64 },

    #[error("Gamma selector produced negative value {gamma} at {x}")]
    NegativeGamma { gamma: f64, x: Vec2 },

    #[error("constraint infeasible at state (c_tilde = {c_tilde}, d = 0)")]
    Infeasible { c_tilde: f64 },

    #[error("initial state {x0} is not strictly outside every obstacle")]
    InvalidInitialState { x0: Vec2 },

    #[error("too many constraints for the enumeration oracle: {count} > {max}")]
    TooManyConstraints { count: usize, max: usize },

    #[error("{0}")]
    Selector(String),

    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
