//! The sublinear Lane–Emden problem `(-Δ)^s u = q u^α`, `u = 0` outside `Ω`.
//!
//! Its positive solution is the stationary supersolution of the evolution.
//! Two solvers compute it independently: projected gradient descent on
//!
//! ```text
//! E(u) = ½ E_h(u, u) - h/(α+1) Σ q_i |u_i|^{α+1}
//! ```
//!
//! and the monotone fixed point `v ← A⁻¹(q v^α)` from a supersolution.

use crate::discretization::{eigendecomposition, energy, signed_power, OperatorMatrix, WeightField};
use crate::error::{Error, Result};
use crate::parabolic::{TimeGrid, Trajectory};

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;
/// Relative slack for the per-iterate monotonicity check of the fixed point.
const MONOTONE_SLACK: f64 = 1e-13;
const FIXED_POINT_MAX_ITERS: usize = 10_000;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("Lane-Emden exponent alpha = {alpha} must lie in (0, 1)")))
    }
}

fn check_weight(a: &OperatorMatrix, q: &WeightField) -> Result<()> {
    a.check_len(q.values())?;
    if q.sup() <= 0.0 {
        return Err(Error::Config(
            "q vanishes identically: the minimizer is the trivial solution, (Q2) fails".into(),
        ));
    }
    Ok(())
}

/// `½ E_h(u, u) - h/(α+1) Σ q_i |u_i|^{α+1}`.
pub fn energy_functional(u: &[f64], a: &OperatorMatrix, q: &WeightField, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    a.check_len(q.values())?;
    let quad = energy(u, u, a)?;
    Ok(0.5 * quad - potential(u, q, alpha, a.grid().spacing()))
}

fn potential(u: &[f64], q: &WeightField, alpha: f64, h: f64) -> f64 {
    h / (alpha + 1.0)
        * q.values()
            .iter()
            .zip(u)
            .map(|(qi, v)| qi * v.abs().powf(alpha + 1.0))
            .sum::<f64>()
}

/// `E(u + d) - E(u)` without forming either energy, so that tiny decreases stay resolvable.
fn energy_change(u: &[f64], au: &[f64], d: &[f64], ad: &[f64], q: &WeightField, alpha: f64, h: f64) -> f64 {
    let mut lin = 0.0;
    let mut quad = 0.0;
    let mut pot = 0.0;
    for i in 0..u.len() {
        lin += au[i] * d[i];
        quad += ad[i] * d[i];
        let (a, b) = (u[i].abs(), (u[i] + d[i]).abs());
        let diff = if a > 0.0 && b > 0.0 {
            a.powf(alpha + 1.0) * ((alpha + 1.0) * (b / a).ln()).exp_m1()
        } else {
            b.powf(alpha + 1.0) - a.powf(alpha + 1.0)
        };
        pot += q.values()[i] * diff;
    }
    h * (lin + 0.5 * quad) - h / (alpha + 1.0) * pot
}

/// A computed positive solution together with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneEmdenSolution {
    pub values: Vec<f64>,
    pub energy: f64,
    /// `‖A u - q u^α‖` in the discrete `L²` norm.
    pub residual_norm: f64,
    pub alpha: f64,
    pub iterations: usize,
    /// Energy change of every accepted step (all `≤ 0` for the minimizer).
    pub descent: Vec<f64>,
}

impl LaneEmdenSolution {
    fn finish(
        values: Vec<f64>,
        a: &OperatorMatrix,
        q: &WeightField,
        alpha: f64,
        iterations: usize,
        descent: Vec<f64>,
    ) -> Result<Self> {
        let residual_norm = stationary_residual(&values, a, q, alpha)?;
        let energy = energy_functional(&values, a, q, alpha)?;
        Ok(Self {
            values,
            energy,
            residual_norm,
            alpha,
            iterations,
            descent,
        })
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `‖A u - q u^α‖_{L²_h}`.
pub fn stationary_residual(u: &[f64], a: &OperatorMatrix, q: &WeightField, alpha: f64) -> Result<f64> {
    let au = a.apply(u)?;
    let r: Vec<f64> = au
        .iter()
        .zip(q.reaction(u, alpha))
        .map(|(x, y)| x - y)
        .collect();
    Ok(a.grid().norm(&r))
}

/// Projected gradient descent with Barzilai–Borwein steps and Armijo backtracking.
///
/// Starts from the ground eigenvector scaled to minimise `E` along its ray,
/// which makes the starting energy negative. Stops when the projected
/// gradient has `L²_h` norm at most `tol`.
pub fn minimize_energy(
    a: &OperatorMatrix,
    q: &WeightField,
    alpha: f64,
    tol: f64,
    max_iters: usize,
) -> Result<LaneEmdenSolution> {
    check_alpha(alpha)?;
    check_weight(a, q)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let grid = *a.grid();
    let h = grid.spacing();
    let n = a.dim();

    let phi = eigendecomposition(a, 1)?.remove(0).vector;
    let mass = potential(&phi, q, alpha, h) * (alpha + 1.0);
    let stiffness = energy(&phi, &phi, a)?;
    if mass <= 0.0 {
        return Err(Error::Config("q vanishes on the support of the ground state".into()));
    }
    let t = (mass / stiffness).powf(1.0 / (1.0 - alpha));
    let mut u: Vec<f64> = phi.iter().map(|v| (t * v).max(0.0)).collect();

    let gradient = |u: &[f64], au: &[f64]| -> Vec<f64> {
        au.iter()
            .zip(q.reaction(u, alpha))
            .map(|(x, y)| x - y)
            .collect()
    };
    let projected_norm = |u: &[f64], g: &[f64]| -> f64 {
        let pg: Vec<f64> = u.iter().zip(g).map(|(x, gi)| x - (x - gi).max(0.0)).collect();
        grid.norm(&pg)
    };

    let mut au = a.apply(&u)?;
    let mut g = gradient(&u, &au);
    let mut step = 1.0 / a.get(0, 0);
    let mut descent = Vec::new();
    let mut last = projected_norm(&u, &g);
    for iter in 0..max_iters {
        if last <= tol {
            return LaneEmdenSolution::finish(u, a, q, alpha, iter, descent);
        }
        let mut tau = step;
        let (u_new, au_new, change) = loop {
            let cand: Vec<f64> = u.iter().zip(&g).map(|(x, gi)| (x - tau * gi).max(0.0)).collect();
            let d: Vec<f64> = cand.iter().zip(&u).map(|(c, x)| c - x).collect();
            let ad = a.apply(&d)?;
            let change = energy_change(&u, &au, &d, &ad, q, alpha, h);
            let dist2 = grid.inner(&d, &d);
            if change <= -ARMIJO / tau * dist2 {
                let au_new: Vec<f64> = au.iter().zip(&ad).map(|(x, y)| x + y).collect();
                break (cand, au_new, change);
            }
            tau *= 0.5;
            if tau < MIN_STEP {
                return Err(Error::Convergence {
                    solver: "projected gradient (line search)",
                    iterations: iter,
                    last,
                });
            }
        };
        let g_new = gradient(&u_new, &au_new);
        let du: Vec<f64> = u_new.iter().zip(&u).map(|(x, y)| x - y).collect();
        let dg: Vec<f64> = g_new.iter().zip(&g).map(|(x, y)| x - y).collect();
        let curv = grid.inner(&du, &dg);
        step = if curv > 0.0 {
            grid.inner(&du, &du) / curv
        } else {
            1.0 / a.get(0, 0)
        };
        descent.push(change);
        u = u_new;
        au = au_new;
        g = g_new;
        last = projected_norm(&u, &g);
        debug_assert_eq!(u.len(), n);
    }
    if last <= tol {
        return LaneEmdenSolution::finish(u, a, q, alpha, max_iters, descent);
    }
    Err(Error::Convergence {
        solver: "projected gradient",
        iterations: max_iters,
        last,
    })
}

/// Outcome of the fixed-point solver.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// `+1` for a nondecreasing sequence, `-1` for nonincreasing, `0` if the start was already fixed.
    pub direction: i8,
    pub sup_norm_diffs: Vec<f64>,
}

/// `v ← A⁻¹(q v^α)` until the sup-norm step is at most `tol` and the
/// stationary residual is at most `tol·‖q‖_∞`.
///
/// From a supersolution the sequence decreases, from a subsolution it
/// increases; any other behaviour is reported as a numeric error.
pub fn fixed_point_iteration(
    a: &OperatorMatrix,
    q: &WeightField,
    alpha: f64,
    start: &[f64],
    tol: f64,
) -> Result<FixedPoint> {
    check_alpha(alpha)?;
    check_weight(a, q)?;
    a.check_len(start)?;
    if !start.iter().all(|&v| v > 0.0 && v.is_finite()) {
        return Err(Error::Domain("fixed-point start must be positive at every node".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let solver = a.factor(0.0)?;
    let qsup = q.sup();
    let mut v = start.to_vec();
    let mut direction = 0i8;
    let mut diffs = Vec::new();
    for iter in 1..=FIXED_POINT_MAX_ITERS {
        let next = solver.solve(&q.reaction(&v, alpha));
        let scale = MONOTONE_SLACK * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let (mut up, mut down) = (0.0f64, 0.0f64);
        let mut sup = 0.0f64;
        for (x, y) in next.iter().zip(&v) {
            let d = x - y;
            up = up.max(d);
            down = down.max(-d);
            sup = sup.max(d.abs());
        }
        let step_dir = match (up > scale, down > scale) {
            (true, true) => {
                return Err(Error::Numeric(format!(
                    "fixed-point iterate {iter} is not ordered with its predecessor (up {up:e}, down {down:e})"
                )))
            }
            (true, false) => 1,
            (false, true) => -1,
            (false, false) => 0,
        };
        if direction != 0 && step_dir != 0 && step_dir != direction {
            return Err(Error::Numeric(format!(
                "fixed-point sequence changed direction at iterate {iter}"
            )));
        }
        if direction == 0 {
            direction = step_dir;
        }
        diffs.push(sup);
        v = next;
        if sup <= tol && stationary_residual(&v, a, q, alpha)? <= tol * qsup {
            return Ok(FixedPoint {
                values: v,
                iterations: iter,
                direction,
                sup_norm_diffs: diffs,
            });
        }
    }
    Err(Error::Convergence {
        solver: "fixed point",
        iterations: FIXED_POINT_MAX_ITERS,
        last: diffs.last().copied().unwrap_or(f64::NAN),
    })
}

/// A supersolution `λ A⁻¹q` of the stationary problem, `λ = 2‖A⁻¹q‖_∞^{α/(1-α)}`.
pub fn supersolution_start(a: &OperatorMatrix, q: &WeightField, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_weight(a, q)?;
    let w = a.factor(0.0)?.solve(q.values());
    let sup = w.iter().fold(0.0f64, |m, x| m.max(*x));
    let lambda = 2.0 * sup.powf(alpha / (1.0 - alpha));
    Ok(w.iter().map(|x| lambda * x).collect())
}

/// Fixed point started from [`supersolution_start`], packaged with its diagnostics.
pub fn solve_fixed_point(
    a: &OperatorMatrix,
    q: &WeightField,
    alpha: f64,
    tol: f64,
) -> Result<LaneEmdenSolution> {
    let start = supersolution_start(a, q, alpha)?;
    let fp = fixed_point_iteration(a, q, alpha, &start, tol)?;
    LaneEmdenSolution::finish(fp.values, a, q, alpha, fp.iterations, Vec::new())
}

/// Both solvers side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneEmdenPair {
    pub minimizer: LaneEmdenSolution,
    pub fixed_point: LaneEmdenSolution,
    /// `‖û - v‖_∞ / ‖û‖_∞`.
    pub discrepancy: f64,
}

impl LaneEmdenPair {
    /// The larger of the two solutions (by sup norm), used as the supersolution.
    pub fn upper(&self) -> &LaneEmdenSolution {
        if self.fixed_point.sup() >= self.minimizer.sup() {
            &self.fixed_point
        } else {
            &self.minimizer
        }
    }
}

pub fn solve_lane_emden(
    a: &OperatorMatrix,
    q: &WeightField,
    alpha: f64,
    tol: f64,
    max_iters: usize,
) -> Result<LaneEmdenPair> {
    let minimizer = minimize_energy(a, q, alpha, tol, max_iters)?;
    let fixed_point = solve_fixed_point(a, q, alpha, tol)?;
    let diff = minimizer
        .values
        .iter()
        .zip(&fixed_point.values)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let discrepancy = diff / minimizer.sup();
    Ok(LaneEmdenPair {
        minimizer,
        fixed_point,
        discrepancy,
    })
}

/// The constant-in-time trajectory `ū(t_k) = û`, initial datum `û`.
pub fn as_supersolution(sol: &LaneEmdenSolution, a: &OperatorMatrix, time: TimeGrid) -> Result<Trajectory> {
    a.check_len(&sol.values)?;
    Trajectory::new(vec![sol.values.clone(); time.steps() + 1], *a.grid(), time)
}

/// `max_k ‖(ū_k - ū_{k-1})/dt + Aū_k - q ū_k^α‖_∞`; zero time differences for a constant trajectory.
pub fn supersolution_defect(u: &Trajectory, a: &OperatorMatrix, q: &WeightField, alpha: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    let dt = u.time().dt();
    for k in 1..u.snapshots().len() {
        let (prev, cur) = (&u.snapshots()[k - 1], &u.snapshots()[k]);
        let acur = a.apply(cur)?;
        for i in 0..cur.len() {
            let r = (cur[i] - prev[i]) / dt + acur[i] - q.values()[i] * signed_power(cur[i], alpha);
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}
