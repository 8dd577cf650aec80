//! Potential-field navigation controllers and reciprocal control-barrier
//! quadratic-program safety filters for single-integrator robots.
//!
//! The crate evaluates attractive/repulsive potentials ([`fields`]), the
//! tightened CLF nominal controller ([`clf`]), the closed-form barrier
//! filter and its APF-equivalent and generalized variants ([`rcbf`]), an
//! exact enumeration QP solver used as a reference ([`qp`]), and a
//! closed-loop simulator ([`sim`]). [`harness`] drives everything from
//! JSON run configs and backs the `apfcbf` command-line tool.

pub mod clf;
pub mod error;
pub mod fields;
pub mod harness;
pub mod qp;
pub mod rcbf;
pub mod sim;
pub mod types;

pub use error::{Error, Result, ScenarioError};
pub use types::{classify_safety, rho, validate_scenario, Obstacle, SafeSetSample, Scenario, Vec2};
