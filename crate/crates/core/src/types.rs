//! Geometric primitives, scenario description and safe-set predicates.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;

/// Tolerance on `|h|` used to classify a point as lying on the safe-set boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Planar vector used for positions (m) and velocity commands (m/s).
///
/// Serialized as a two-element array `[x, y]`. Deserialization rejects
/// non-finite components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn is_zero(self) -> bool {
        self.x == 0.0 && self.y == 0.0
    }
}

impl TryFrom<[f64; 2]> for Vec2 {
    type Error = String;

    fn try_from(v: [f64; 2]) -> Result<Self, Self::Error> {
        let out = Vec2::new(v[0], v[1]);
        if out.is_finite() {
            Ok(out)
        } else {
            Err(format!("vector components must be finite, got {v:?}"))
        }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.x, self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self * rhs.x, self * rhs.y)
    }
}

/// Circular obstacle with its own repulsive influence margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub center: Vec2,
    pub radius: f64,
    /// Width of the band outside the obstacle where repulsion acts (`rho0`).
    #[serde(rename = "rho0")]
    pub influence_margin: f64,
}

impl Obstacle {
    pub fn new(center: Vec2, radius: f64, influence_margin: f64) -> Self {
        Self {
            center,
            radius,
            influence_margin,
        }
    }
}

/// Goal, obstacles and field gains for one navigation problem.
///
/// Field access is unrestricted; call [`Scenario::validate`] (or
/// [`validate_scenario`]) before handing a scenario to the controllers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub goal: Vec2,
    pub obstacles: Vec<Obstacle>,
    pub k_att: f64,
    pub k_rep: f64,
    /// Slope `k` of the linear extended class-K function `alpha(h) = k * h`.
    pub alpha_gain: f64,
}

impl Scenario {
    /// The three-obstacle navigation problem: goal `[7, 3.2]`, unit gains,
    /// `r = 0.5`, `rho0 = 0.2` and `alpha(h) = h`.
    pub fn three_obstacle_course() -> Self {
        let obstacle = |x, y| Obstacle::new(Vec2::new(x, y), 0.5, 0.2);
        Self {
            goal: Vec2::new(7.0, 3.2),
            obstacles: vec![obstacle(-0.4, 1.5), obstacle(2.0, 3.3), obstacle(4.5, 2.5)],
            k_att: 1.0,
            k_rep: 1.0,
            alpha_gain: 1.0,
        }
    }

    pub fn alpha(&self, h: f64) -> f64 {
        self.alpha_gain * h
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn validate(self) -> Result<Self, ScenarioError> {
        validate_scenario(self)
    }
}

/// Safe-set classification of a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeSetSample {
    /// Signed clearance to the nearest obstacle surface (m).
    pub h: f64,
    pub in_interior: bool,
    pub on_boundary: bool,
}

/// Signed distance from `x` to the surface of `obs`: `|x - center| - r`.
pub fn rho(x: Vec2, obs: &Obstacle) -> f64 {
    (x - obs.center).norm() - obs.radius
}

/// Global clearance `h = min_i rho_i`. With no obstacles every point is
/// interior and `h = +inf`.
pub fn classify_safety(x: Vec2, scenario: &Scenario) -> SafeSetSample {
    let h = scenario
        .obstacles
        .iter()
        .map(|obs| rho(x, obs))
        .fold(f64::INFINITY, f64::min);
    SafeSetSample {
        h,
        in_interior: h > 0.0,
        on_boundary: h.abs() <= BOUNDARY_TOL,
    }
}

/// Checks every scenario invariant and reports all violations at once.
pub fn validate_scenario(scenario: Scenario) -> Result<Scenario, ScenarioError> {
    let mut violations = Vec::new();

    if !scenario.goal.is_finite() {
        violations.push("goal must be finite".to_string());
    }
    for (name, value) in [
        ("k_att", scenario.k_att),
        ("k_rep", scenario.k_rep),
        ("alpha_gain", scenario.alpha_gain),
    ] {
        if !(value.is_finite() && value > 0.0) {
            violations.push(format!("{name} must be positive"));
        }
    }

    for (i, obs) in scenario.obstacles.iter().enumerate() {
        let idx = i + 1;
        if !obs.center.is_finite() {
            violations.push(format!("obstacle {idx}: center must be finite"));
        }
        if !(obs.radius.is_finite() && obs.radius > 0.0) {
            violations.push(format!("obstacle {idx}: radius must be positive"));
        }
        if !(obs.influence_margin.is_finite() && obs.influence_margin > 0.0) {
            violations.push(format!("obstacle {idx}: rho0 must be positive"));
        }
        // NaN clearance (bad inputs above) is already reported.
        let clearance = rho(scenario.goal, obs);
        if clearance < obs.influence_margin {
            violations.push(format!("goal inside influence region of obstacle {idx}"));
        }
    }

    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError { violations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_obstacle() -> Obstacle {
        Obstacle::new(Vec2::ZERO, 0.5, 0.2)
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(Vec2::new(0.0, 1.0), &unit_obstacle()), 0.5);
        assert_eq!(rho(Vec2::new(0.5, 0.0), &unit_obstacle()), 0.0);
        assert!((rho(Vec2::new(0.6, 0.0), &unit_obstacle()) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn classify_examples() {
        let sc = Scenario::three_obstacle_course();
        let far = classify_safety(Vec2::new(-3.0, -2.0), &sc);
        assert!(far.in_interior && !far.on_boundary);

        let at_center = classify_safety(Vec2::new(-0.4, 1.5), &sc);
        assert_eq!(at_center.h, -0.5);
        assert!(!at_center.in_interior);

        let on_surface = classify_safety(Vec2::new(2.0, 3.8), &sc);
        assert!(on_surface.on_boundary && !on_surface.in_interior);
    }

    #[test]
    fn course_is_valid() {
        assert!(Scenario::three_obstacle_course().validate().is_ok());
    }

    #[test]
    fn reports_each_violation() {
        let mut sc = Scenario::three_obstacle_course();
        sc.k_att = 0.0;
        sc.goal = sc.obstacles[1].center;
        sc.obstacles[0].radius = -1.0;
        let err = sc.validate().unwrap_err();
        assert!(err.violations.contains(&"k_att must be positive".to_string()));
        assert!(err
            .violations
            .iter()
            .any(|v| v.starts_with("goal inside influence region")));
        assert!(err
            .violations
            .contains(&"obstacle 1: radius must be positive".to_string()));
        assert_eq!(err.violations.len(), 3);
    }

    #[test]
    fn json_rejects_unknown_keys() {
        let text = r#"{"goal":[1,2],"obstacles":[],"k_att":1,"k_rep":1,"alpha_gain":1,"extra":0}"#;
        assert!(Scenario::from_json(text).is_err());
        let text = r#"{"goal":[1,2],"obstacles":[{"center":[0,0],"radius":0.5,"rho0":0.2}],"k_att":1,"k_rep":1,"alpha_gain":1}"#;
        let sc = Scenario::from_json(text).unwrap();
        assert_eq!(sc.obstacles[0].influence_margin, 0.2);
    }
}
