//! Exact projection onto a small polyhedron by active-set enumeration.
//!
//! Solves `min |u - u_nom|^2 / 2` subject to `offset_i + normal_i.u <= 0`
//! by trying every subset of constraints as the active set, projecting
//! onto the corresponding affine subspace, and keeping the feasible KKT
//! point with the smallest objective. With at most [`MAX_CONSTRAINTS`]
//! constraints this is cheap and needs no iteration or tuning, which is
//! why the controllers use it as their reference solution.

use crate::error::{Error, Result};
use crate::types::Vec2;

pub const MAX_CONSTRAINTS: usize = 8;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-10;
/// Lower bound accepted for Lagrange multipliers.
const MULTIPLIER_TOL: f64 = -1e-12;
/// Relative pivot threshold below which an active subset is rank deficient.
const PIVOT_TOL: f64 = 1e-12;

/// Half-space `offset + normal.u <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpaceConstraint {
    pub offset: f64,
    pub normal: Vec2,
}

impl HalfSpaceConstraint {
    pub fn new(offset: f64, normal: Vec2) -> Self {
        Self { offset, normal }
    }

    pub fn value(&self, u: Vec2) -> f64 {
        self.offset + self.normal.dot(u)
    }

    /// Violation tolerance scaled to the magnitude of the terms involved.
    fn tolerance(&self, u: Vec2) -> f64 {
        let scale = self.offset.abs().max(self.normal.norm() * u.norm()).max(1.0);
        FEAS_TOL * scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub u_star: Vec2,
    /// Indices of the constraints in the selected active set.
    pub active_set: Vec<usize>,
    pub multipliers: Vec<f64>,
    /// Max of stationarity, complementarity and primal violation residuals.
    pub kkt_residual: f64,
    pub feasible: bool,
}

impl QpSolution {
    pub fn objective(&self, u_nom: Vec2) -> f64 {
        0.5 * (self.u_star - u_nom).norm_squared()
    }
}

pub fn objective(u: Vec2, u_nom: Vec2) -> f64 {
    0.5 * (u - u_nom).norm_squared()
}

/// True iff every constraint holds at `u` within [`FEAS_TOL`].
pub fn sample_feasibility_check(u: Vec2, constraints: &[HalfSpaceConstraint]) -> bool {
    constraints.iter().all(|c| c.value(u) <= FEAS_TOL)
}

struct Candidate {
    u: Vec2,
    active: Vec<usize>,
    multipliers: Vec<f64>,
    objective: f64,
}

pub fn solve_projection(u_nom: Vec2, constraints: &[HalfSpaceConstraint]) -> Result<QpSolution> {
    let m = constraints.len();
    if m > MAX_CONSTRAINTS {
        return Err(Error::TooManyConstraints {
            count: m,
            max: MAX_CONSTRAINTS,
        });
    }

    // Subsets ordered by size, then lexicographically by index, so that the
    // first of several equal-objective points wins ties deterministically.
    let mut subsets: Vec<Vec<usize>> = (0u32..(1 << m))
        .map(|mask| (0..m).filter(|&i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let mut best: Option<Candidate> = None;
    for active in subsets {
        let Some((u, multipliers)) = project_onto_active(u_nom, constraints, &active) else {
            continue;
        };
        if multipliers.iter().any(|&l| l < MULTIPLIER_TOL) {
            continue;
        }
        if !constraints.iter().all(|c| c.value(u) <= c.tolerance(u)) {
            continue;
        }
        let obj = objective(u, u_nom);
        let better = match &best {
            None => true,
            Some(b) => obj < b.objective - 1e-15 * b.objective.max(1.0),
        };
        if better {
            best = Some(Candidate {
                u,
                active,
                multipliers,
                objective: obj,
            });
        }
    }

    Ok(match best {
        Some(c) => {
            let kkt_residual = kkt_residual(u_nom, constraints, &c);
            QpSolution {
                u_star: c.u,
                active_set: c.active,
                multipliers: c.multipliers,
                kkt_residual,
                feasible: true,
            }
        }
        None => QpSolution {
            u_star: u_nom,
            active_set: Vec::new(),
            multipliers: Vec::new(),
            kkt_residual: f64::INFINITY,
            feasible: false,
        },
    })
}

/// Projection of `u_nom` onto `{u : offset_i + normal_i.u = 0, i in active}`.
///
/// Writes `u = u_nom - sum_j lambda_j n_j` and solves the Gram system
/// `sum_j (n_i.n_j) lambda_j = offset_i + n_i.u_nom`. Returns `None` for
/// rank-deficient subsets.
fn project_onto_active(u_nom: Vec2, constraints: &[HalfSpaceConstraint], active: &[usize]) -> Option<(Vec2, Vec<f64>)> {
    let k = active.len();
    if k == 0 {
        return Some((u_nom, Vec::new()));
    }
    let mut gram = vec![vec![0.0; k + 1]; k];
    for (row, &i) in active.iter().enumerate() {
        let ci = constraints[i];
        for (col, &j) in active.iter().enumerate() {
            gram[row][col] = ci.normal.dot(constraints[j].normal);
        }
        gram[row][k] = ci.value(u_nom);
    }
    let lambda = solve_augmented(gram)?;
    let mut u = u_nom;
    for (&i, &l) in active.iter().zip(&lambda) {
        u = u - l * constraints[i].normal;
    }
    Some((u, lambda))
}

/// Gaussian elimination with partial pivoting on an `n x (n+1)` augmented
/// matrix.
fn solve_augmented(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    let scale = a
        .iter()
        .flat_map(|r| r[..n].iter())
        .fold(0.0_f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot][col].abs() <= PIVOT_TOL * scale {
            return None;
        }
        a.swap(col, pivot);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest.iter_mut() {
            let f = row[col] / pivot_row[col];
            for (dst, src) in row[col..=n].iter_mut().zip(&pivot_row[col..=n]) {
                *dst -= f * src;
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (a[row][n] - tail) / a[row][row];
    }
    Some(x)
}

fn kkt_residual(u_nom: Vec2, constraints: &[HalfSpaceConstraint], c: &Candidate) -> f64 {
    let mut stationarity = c.u - u_nom;
    let mut worst: f64 = 0.0;
    for (&i, &l) in c.active.iter().zip(&c.multipliers) {
        let con = constraints[i];
        stationarity += l * con.normal;
        let scale = con.tolerance(c.u) / FEAS_TOL;
        worst = worst.max((l * con.value(c.u)).abs() / scale.max(l.abs().max(1.0)));
    }
    for con in constraints {
        worst = worst.max(con.value(c.u).max(0.0) / (con.tolerance(c.u) / FEAS_TOL));
    }
    let scale = u_nom.norm().max(c.u.norm()).max(1.0);
    worst.max(stationarity.norm() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained() {
        let u_nom = Vec2::new(1.5, -2.0);
        let sol = solve_projection(u_nom, &[]).unwrap();
        assert!(sol.feasible);
        assert_eq!(sol.u_star, u_nom);
        assert!(sol.active_set.is_empty());
        assert_eq!(sol.kkt_residual, 0.0);
    }

    #[test]
    fn single_constraint() {
        let c = [HalfSpaceConstraint::new(2.0, Vec2::new(1.0, 0.0))];
        let sol = solve_projection(Vec2::ZERO, &c).unwrap();
        assert_eq!(sol.u_star, Vec2::new(-2.0, 0.0));
        assert_eq!(sol.active_set, vec![0]);
        assert!(sample_feasibility_check(sol.u_star, &c));
    }

    #[test]
    fn corner_of_two() {
        let c = [
            HalfSpaceConstraint::new(1.0, Vec2::new(1.0, 0.0)),
            HalfSpaceConstraint::new(1.0, Vec2::new(0.0, 1.0)),
        ];
        let sol = solve_projection(Vec2::ZERO, &c).unwrap();
        assert_eq!(sol.u_star, Vec2::new(-1.0, -1.0));
        assert_eq!(sol.active_set, vec![0, 1]);
        assert!(sol.multipliers.iter().all(|&l| (l - 1.0).abs() < 1e-15));
        assert!(sol.kkt_residual <= 1e-10);
    }

    #[test]
    fn empty_polyhedron() {
        let c = [
            HalfSpaceConstraint::new(1.0, Vec2::new(1.0, 0.0)),
            HalfSpaceConstraint::new(1.0, Vec2::new(-1.0, 0.0)),
        ];
        let sol = solve_projection(Vec2::ZERO, &c).unwrap();
        assert!(!sol.feasible);

        let c = [HalfSpaceConstraint::new(1.0, Vec2::ZERO)];
        assert!(!solve_projection(Vec2::ZERO, &c).unwrap().feasible);
    }

    #[test]
    fn degenerate_three_through_a_point() {
        // Three active lines through [-1, -1]; only pairs are full rank.
        let c = [
            HalfSpaceConstraint::new(1.0, Vec2::new(1.0, 0.0)),
            HalfSpaceConstraint::new(1.0, Vec2::new(0.0, 1.0)),
            HalfSpaceConstraint::new(2.0, Vec2::new(1.0, 1.0)),
        ];
        let sol = solve_projection(Vec2::ZERO, &c).unwrap();
        assert!(sol.feasible);
        assert!((sol.u_star - Vec2::new(-1.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn feasibility_check() {
        let c = [HalfSpaceConstraint::new(0.0, Vec2::new(1.0, 0.0))];
        assert!(sample_feasibility_check(Vec2::new(-1.0, 3.0), &c));
        assert!(!sample_feasibility_check(Vec2::new(1.0, 0.0), &c));
        assert!(sample_feasibility_check(Vec2::new(1e9, 1e9), &[]));
    }

    #[test]
    fn too_many_constraints() {
        let c = vec![HalfSpaceConstraint::new(0.0, Vec2::new(1.0, 0.0)); 9];
        assert!(solve_projection(Vec2::ZERO, &c).is_err());
    }
}
