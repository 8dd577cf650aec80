//! Acceptance criteria. Runs as a plain binary so that every criterion
//! prints its own PASS/FAIL line; the process fails if any criterion does.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use apfcbf::clf::{check_clf_decrease, clf_terms, nominal_control, SigmaSelector};
use apfcbf::fields::{alpha_bar, apf_control, f_att, f_rep, u_att, u_rep};
use apfcbf::harness::{simulate_all, RunConfig};
use apfcbf::qp::{solve_projection, HalfSpaceConstraint};
use apfcbf::rcbf::{
    generalized_control, repulsive_certificate, safety_filter, special_filter_control, GammaSelector, RcbfTerms,
};
use apfcbf::sim::{simulate, ControllerSpec, SimConfig, Terminal};
use apfcbf::{rho, Obstacle, Scenario, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BAND: f64 = 1e-3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn course() -> Scenario {
    Scenario::three_obstacle_course().validate().unwrap()
}

fn fig2_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/fig2.json")
}

fn admissible(x: Vec2, sc: &Scenario) -> bool {
    (x - sc.goal).norm() >= BAND
        && sc.obstacles.iter().all(|o| {
            let r = rho(x, o);
            r >= BAND && (r - o.influence_margin).abs() >= BAND
        })
}

fn random_state(rng: &mut ChaCha8Rng) -> Vec2 {
    Vec2::new(rng.gen_range(-3.0..9.0), rng.gen_range(-2.0..6.0))
}

fn random_admissible(rng: &mut ChaCha8Rng, sc: &Scenario) -> Vec2 {
    loop {
        let x = random_state(rng);
        if admissible(x, sc) {
            return x;
        }
    }
}

/// State at clearance `clearance` from a random obstacle, in a random direction.
fn state_at_clearance(rng: &mut ChaCha8Rng, obs: &Obstacle, clearance: f64) -> Vec2 {
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    obs.center + (obs.radius + clearance) * Vec2::new(angle.cos(), angle.sin())
}

/// Potential-field command written out directly from the field formulas.
fn reference_apf(x: Vec2, sc: &Scenario) -> Vec2 {
    let mut u = -(sc.k_att * (x - sc.goal));
    for o in &sc.obstacles {
        let diff = x - o.center;
        let dist = diff.norm();
        let r = dist - o.radius;
        if r < o.influence_margin {
            let mag = sc.k_rep / (r * r) * (1.0 / r - 1.0 / o.influence_margin) / dist;
            u += mag * diff;
        }
    }
    u
}

fn criterion_1() -> Outcome {
    let sc = course();
    let start = Instant::now();
    let gamma3 = GammaSelector::scaled_special(1.0);
    let n = 200;
    let (mut special, mut general, mut reference, mut count) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for i in 0..n {
        for j in 0..n {
            let x = Vec2::new(
                -3.0 + 12.0 * i as f64 / (n - 1) as f64,
                -2.0 + 8.0 * j as f64 / (n - 1) as f64,
            );
            if !admissible(x, &sc) {
                continue;
            }
            count += 1;
            let apf = apf_control(x, &sc).unwrap();
            let expected = reference_apf(x, &sc);
            reference = reference.max((apf - expected).norm() / expected.norm().max(1.0));
            special = special.max((special_filter_control(x, &sc).unwrap() - apf).norm());
            let (u, _) = generalized_control(x, &sc, &SigmaSelector::GradNormSquared, &gamma3).unwrap();
            general = general.max((u - apf).norm());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        special <= 1e-9 && general <= 1e-9 && reference <= 1e-12 && elapsed <= Duration::from_secs(5),
        format!(
            "{count} grid states: max|apf-special|={special:.2e}, max|apf-generalized(G3)|={general:.2e} (tol 1e-9), \
             apf vs direct formula rel={reference:.2e}, {:.2}s (limit 5s)",
            elapsed.as_secs_f64()
        ),
    )
}

/// Independent check that `u` solves the single-constraint projection:
/// feasibility plus the KKT conditions in the active and inactive cases.
fn kkt_gap(u_nom: Vec2, c: f64, d: Vec2, u: Vec2) -> f64 {
    let g = c + d.dot(u);
    let shift = u - u_nom;
    let scale = 1.0 + c.abs() + d.norm() * (u_nom.norm() + 1.0);
    if c + d.dot(u_nom) <= 0.0 {
        return shift.norm();
    }
    // Active: u - u_nom = -lambda d with lambda >= 0 and g = 0.
    let lambda = -shift.dot(d) / d.norm_squared();
    let parallel = (shift + lambda * d).norm();
    (g.abs() / scale).max(parallel).max((-lambda).max(0.0))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let (mut err, mut kkt) = (0.0f64, 0.0f64);
    let n = 100_000;
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
        let (u, _) = safety_filter(u_nom, &terms).unwrap();
        let sol = solve_projection(u_nom, &[HalfSpaceConstraint::new(c_tilde, d)]).unwrap();
        err = if sol.feasible {
            err.max((u - sol.u_star).norm())
        } else {
            f64::INFINITY
        };
        kkt = kkt.max(kkt_gap(u_nom, c_tilde, d, u));
    }
    let elapsed = start.elapsed();
    outcome(
        err <= 1e-9 && kkt <= 1e-9 && elapsed <= Duration::from_secs(10),
        format!(
            "{n} instances: max|filter-QP|={err:.2e} (tol 1e-9), KKT gap={kkt:.2e}, {:.2}s (limit 10s)",
            elapsed.as_secs_f64()
        ),
    )
}

/// Central difference with step `1e-6 * length`, dividing by the distance
/// between the representable evaluation points.
fn fd_gradient(f: impl Fn(Vec2) -> f64, x: Vec2, length: f64) -> Vec2 {
    let h = 1e-6 * length;
    let (xp, xm, yp, ym) = (x.x + h, x.x - h, x.y + h, x.y - h);
    Vec2::new(
        (f(Vec2::new(xp, x.y)) - f(Vec2::new(xm, x.y))) / (xp - xm),
        (f(Vec2::new(x.x, yp)) - f(Vec2::new(x.x, ym))) / (yp - ym),
    )
}

fn rel(approx: Vec2, exact: Vec2) -> f64 {
    let n = exact.norm();
    if n == 0.0 {
        approx.norm()
    } else {
        (approx - exact).norm() / n
    }
}

fn criterion_3() -> Outcome {
    let sc = course();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut att, mut rep, mut in_band) = (0.0f64, 0.0f64, 0usize);
    let n = 10_000;
    for k in 0..n {
        // Half of the states sit inside an influence band, where the
        // repulsive field is nonzero.
        let x = if k % 2 == 0 {
            loop {
                let obs = &sc.obstacles[rng.gen_range(0..sc.obstacles.len())];
                let clearance = rng.gen_range(BAND..obs.influence_margin - BAND);
                let x = state_at_clearance(&mut rng, obs, clearance);
                if admissible(x, &sc) {
                    break x;
                }
            }
        } else {
            random_admissible(&mut rng, &sc)
        };
        let att_len = x.x.abs().max(x.y.abs()).max(1.0);
        att = att.max(rel(fd_gradient(|p| u_att(p, &sc), x, att_len), f_att(x, &sc)));
        for obs in &sc.obstacles {
            let r = rho(x, obs);
            if r < obs.influence_margin {
                in_band += 1;
            }
            let fd = fd_gradient(|p| u_rep(p, obs, &sc).unwrap(), x, r.min(1.0));
            let e = rel(fd, f_rep(x, obs, &sc).unwrap());
            rep = if e.is_nan() { f64::INFINITY } else { rep.max(e) };
        }
    }
    outcome(
        att <= 1e-5 && rep <= 1e-5 && in_band >= n / 2,
        format!(
            "{n} states ({in_band} obstacle pairs in band): max rel err u_att={att:.2e}, u_rep={rep:.2e} (tol 1e-5)"
        ),
    )
}

fn criterion_4() -> Outcome {
    let sc = course();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut product, mut worst_cert) = (0.0f64, f64::NEG_INFINITY);
    let mut cert_mismatch = 0.0f64;
    let n = 10_000;
    for _ in 0..n {
        let obs = &sc.obstacles[rng.gen_range(0..sc.obstacles.len())];
        let clearance = loop {
            let c = rng.gen_range(0.0..obs.influence_margin);
            if c > 0.0 {
                break c;
            }
        };
        let x = state_at_clearance(&mut rng, obs, clearance);
        let h = rho(x, obs);
        if !(h > 0.0 && h < obs.influence_margin) {
            continue;
        }
        let b = u_rep(x, obs, &sc).unwrap();
        product = product.max((b * alpha_bar(h, obs, &sc).unwrap() - 1.0).abs());
        let d = f_rep(x, obs, &sc).unwrap();
        let direct = -sc.alpha(h) - d.norm_squared();
        let cert = repulsive_certificate(x, obs, &sc).unwrap();
        cert_mismatch = cert_mismatch.max((cert - direct).abs() / direct.abs());
        worst_cert = worst_cert.max(cert.max(direct));
    }

    let obs = &sc.obstacles[0];
    let grid: Vec<f64> = (0..1000)
        .map(|i| alpha_bar(obs.influence_margin * i as f64 / 1000.0, obs, &sc).unwrap())
        .collect();
    let increasing = grid.windows(2).all(|w| w[1] > w[0]);

    outcome(
        product <= 1e-12 && increasing && worst_cert < 0.0 && cert_mismatch <= 1e-12,
        format!(
            "(a) max|B*alpha_bar-1|={product:.2e} (tol 1e-12); (b) alpha_bar strictly increasing on 1000 points: {increasing}; \
             (c) max c+d.(-f_rep)={worst_cert:.3e} (< 0)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let sc = course();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let selectors = [
        ("|b|^2", SigmaSelector::GradNormSquared),
        ("2V", SigmaSelector::ScaledValue { coef: 2.0 }),
        ("|x-goal|", SigmaSelector::ScaledNorm { coef: 1.0 }),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let n = 10_000;
    for (label, sel) in selectors {
        let (mut resid, mut qp_err, mut exact) = (f64::NEG_INFINITY, 0.0f64, true);
        for _ in 0..n {
            let x = random_admissible(&mut rng, &sc);
            let u = nominal_control(x, &sc, &sel);
            resid = resid.max(check_clf_decrease(x, u, &sc, &sel));
            // Independent residual: a_tilde + b.u with b = K_att (x - goal).
            let b = sc.k_att * (x - sc.goal);
            let t = clf_terms(x, &sc, &sel);
            resid = resid.max(t.sigma + b.dot(u));
            let sol = solve_projection(Vec2::ZERO, &[HalfSpaceConstraint::new(t.a_tilde, t.b)]).unwrap();
            qp_err = if sol.feasible {
                qp_err.max((u - sol.u_star).norm())
            } else {
                f64::INFINITY
            };
            if matches!(sel, SigmaSelector::GradNormSquared) {
                exact &= u == -f_att(x, &sc);
            }
        }
        pass &= resid <= 1e-12 && qp_err <= 1e-9 && exact;
        parts.push(format!("sigma={label}: residual={resid:.2e}, |u-QP|={qp_err:.2e}"));
        if matches!(sel, SigmaSelector::GradNormSquared) {
            parts.push(format!("u == -f_att exactly: {exact}"));
        }
    }
    outcome(pass, format!("{n} states each; {}", parts.join("; ")))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let config = RunConfig::load(&fig2_path()).unwrap();
    let runs = simulate_all(&config).unwrap();
    let elapsed = start.elapsed();
    let by_name = |name: &str| runs.iter().find(|r| r.name == name).unwrap();
    let (g1, g2, g3) = (by_name("gamma1"), by_name("gamma2"), by_name("gamma3"));
    let reached = [g1, g2, g3]
        .iter()
        .all(|r| r.trajectory.terminal == Terminal::ReachedGoal && r.metrics.time_to_goal.is_some_and(|t| t <= 40.0));
    let clear = [g1, g2, g3].iter().all(|r| r.metrics.min_clearance > 0.0);
    let ordered = g2.metrics.oscillation > g1.metrics.oscillation && g3.metrics.oscillation > g1.metrics.oscillation;
    let summary: Vec<String> = [g1, g2, g3]
        .iter()
        .map(|r| {
            format!(
                "{}: t={:.2}s clearance={:.4} oscillation={:.3}",
                r.name,
                r.metrics.time_to_goal.unwrap_or(f64::NAN),
                r.metrics.min_clearance,
                r.metrics.oscillation
            )
        })
        .collect();
    outcome(
        reached && clear && ordered && elapsed <= Duration::from_secs(30),
        format!("{}; {:.2}s (limit 30s)", summary.join("; "), elapsed.as_secs_f64()),
    )
}

fn criterion_7() -> Outcome {
    let config = RunConfig::load(&fig2_path()).unwrap();
    let sc = &config.scenario;
    let apf = simulate(sc, &ControllerSpec::apf(), &config.sim, config.x0).unwrap();
    let gen = simulate(
        sc,
        &ControllerSpec::generalized(SigmaSelector::GradNormSquared, GammaSelector::scaled_special(1.0)),
        &config.sim,
        config.x0,
    )
    .unwrap();
    let gap = apf
        .samples
        .iter()
        .zip(&gen.samples)
        .map(|(a, b)| (a.x - b.x).norm().max((a.u - b.u).norm() / a.u.norm().max(1.0)))
        .fold(0.0, f64::max);
    let same_len = apf.samples.len() == gen.samples.len();
    outcome(
        same_len && gap <= 1e-9 && apf.terminal == gen.terminal,
        format!(
            "{} vs {} samples, terminal {:?}/{:?}, max per-sample gap={gap:.2e} (tol 1e-9)",
            apf.samples.len(),
            gen.samples.len(),
            apf.terminal,
            gen.terminal
        ),
    )
}

fn criterion_8() -> Outcome {
    let sc = Scenario {
        obstacles: Vec::new(),
        ..Scenario::three_obstacle_course()
    }
    .validate()
    .unwrap();
    let cfg = SimConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let selectors = [
        SigmaSelector::GradNormSquared,
        SigmaSelector::ScaledValue { coef: 2.0 },
        SigmaSelector::ScaledNorm { coef: 1.0 },
    ];
    let (mut reached, mut worst_rise, mut runs) = (0usize, f64::NEG_INFINITY, 0usize);
    for _ in 0..20 {
        let x0 = loop {
            let x = random_state(&mut rng);
            if (x - sc.goal).norm() > 2.0 * cfg.goal_tolerance {
                break x;
            }
        };
        for sel in &selectors {
            runs += 1;
            let tr = simulate(&sc, &ControllerSpec::nominal_only(sel.clone()), &cfg, x0).unwrap();
            if tr.terminal == Terminal::ReachedGoal {
                reached += 1;
            }
            // V recomputed from the state rather than read from the sample.
            for w in tr.samples.windows(2) {
                let rise = 0.5 * sc.k_att * ((w[1].x - sc.goal).norm_squared() - (w[0].x - sc.goal).norm_squared());
                worst_rise = worst_rise.max(rise);
            }
        }
    }
    outcome(
        reached == runs && worst_rise <= 1e-9,
        format!("{reached}/{runs} runs reached the goal (20 starts x 3 sigma), max V increase per step={worst_rise:.2e} (tol 1e-9)"),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        (
            "grid equivalence of apf, special filter and generalized controller",
            criterion_1,
        ),
        ("closed-form safety filter vs enumeration QP", criterion_2),
        ("finite-difference gradient oracles", criterion_3),
        ("reciprocal barrier certificate", criterion_4),
        ("CLF nominal control for three sigma selectors", criterion_5),
        ("three-obstacle course with Gamma_1, Gamma_2, Gamma_3", criterion_6),
        ("closed-loop apf vs generalized Gamma_3", criterion_7),
        ("obstacle-free nominal stability", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        if !result.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {}: {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
