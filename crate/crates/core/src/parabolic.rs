//! Backward Euler in time, the monotone iteration between the barrier
//! `θψ` and the stationary supersolution, time shifts, and the `α ≥ 1`
//! uniqueness experiment.
//!
//! The outer iteration freezes the reaction at the previous iterate,
//!
//! ```text
//! (I + dt A) u^n_k = u^n_{k-1} + dt q (u^{n-1}_k)^α,   u^n_0 = 0,
//! ```
//!
//! so each sweep is a linear space-time solve with one Cholesky factor. The
//! inverse of `I + dt A` is entrywise nonnegative, which makes the sweep
//! order preserving: from a discrete subsolution the iterates increase, and
//! they stay below any discrete supersolution.

use crate::bump::{BumpProfile, ThetaSchedule};
use crate::discretization::{
    eigendecomposition, energy, signed_power, Grid1D, OperatorMatrix, ShiftedSolver, WeightField,
};
use crate::error::{Error, Result};

/// Tolerance on a ratio `τ/dt` being an integer.
const ALIGN_TOL: f64 = 1e-9;
/// Fraction of `T_max` allowed for experiments.
pub const HORIZON_FRACTION: f64 = 0.9;
/// Fraction of the smallest reaction value on the ball granted to `ε_h`.
pub const SLACK_BUDGET_FRACTION: f64 = 0.1;
pub const MONOTONICITY_LIMIT: f64 = 1e-12;
pub const SANDWICH_LIMIT: f64 = 1e-10;
/// Quadrature tolerance for `(-Δ)^sψ` at nodes outside the ball.
const EXTERIOR_QUAD_TOL: f64 = 1e-10;

/// `t_k = k·dt`, `k = 0..=m`, `dt = T/m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    m: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, m: usize) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::Domain(format!("final time T = {t_end} must be positive")));
        }
        if m == 0 {
            return Err(Error::Domain("time grid needs at least one step".into()));
        }
        Ok(Self { t_end, m })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.m
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.m as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.m {
            self.t_end
        } else {
            k as f64 * self.dt()
        }
    }
}

/// Node values at every time level `t_0, …, t_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    snapshots: Vec<Vec<f64>>,
    grid: Grid1D,
    time: TimeGrid,
}

impl Trajectory {
    pub fn new(snapshots: Vec<Vec<f64>>, grid: Grid1D, time: TimeGrid) -> Result<Self> {
        if snapshots.len() != time.steps() + 1 {
            return Err(Error::Dimension {
                expected: time.steps() + 1,
                got: snapshots.len(),
            });
        }
        if let Some(bad) = snapshots.iter().find(|s| s.len() != grid.len()) {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: bad.len(),
            });
        }
        Ok(Self {
            snapshots,
            grid,
            time,
        })
    }

    pub fn zeros(grid: Grid1D, time: TimeGrid) -> Self {
        Self {
            snapshots: vec![vec![0.0; grid.len()]; time.steps() + 1],
            grid,
            time,
        }
    }

    pub fn snapshots(&self) -> &[Vec<f64>] {
        &self.snapshots
    }

    pub fn at(&self, k: usize) -> &[f64] {
        &self.snapshots[k]
    }

    pub fn last(&self) -> &[f64] {
        &self.snapshots[self.time.steps()]
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn time(&self) -> TimeGrid {
        self.time
    }

    pub fn sup(&self) -> f64 {
        self.snapshots
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max_{k,i} (self - other)_+`.
    pub fn excess_over(&self, other: &Trajectory) -> f64 {
        self.snapshots
            .iter()
            .flatten()
            .zip(other.snapshots.iter().flatten())
            .fold(0.0f64, |m, (a, b)| m.max(a - b))
    }

    /// `max_{k,i} |self - other|`.
    pub fn distance(&self, other: &Trajectory) -> f64 {
        self.snapshots
            .iter()
            .flatten()
            .zip(other.snapshots.iter().flatten())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `I + dt A` factored once for a time grid.
#[derive(Debug, Clone)]
pub struct LinearEvolution {
    solver: ShiftedSolver,
    grid: Grid1D,
    time: TimeGrid,
}

impl LinearEvolution {
    pub fn new(a: &OperatorMatrix, time: TimeGrid) -> Result<Self> {
        let solver = a.factor(1.0 / time.dt()).map_err(|e| {
            Error::Numeric(format!("I + dt A not factorizable, impossible for an M-matrix: {e}"))
        })?;
        Ok(Self {
            solver,
            grid: *a.grid(),
            time,
        })
    }

    pub fn time(&self) -> TimeGrid {
        self.time
    }

    /// One step `(I + dt A) u = prev + dt f`.
    pub fn step(&self, prev: &[f64], f: &[f64]) -> Vec<f64> {
        let inv_dt = 1.0 / self.time.dt();
        let rhs: Vec<f64> = prev.iter().zip(f).map(|(p, fi)| p * inv_dt + fi).collect();
        self.solver.solve(&rhs)
    }

    /// March from `u0` with forcing `f(k)` at levels `k = 1..=m`.
    pub fn march(&self, u0: &[f64], mut f: impl FnMut(usize) -> Vec<f64>) -> Result<Trajectory> {
        let mut snaps = Vec::with_capacity(self.time.steps() + 1);
        snaps.push(u0.to_vec());
        for k in 1..=self.time.steps() {
            let fk = f(k);
            if fk.len() != self.grid.len() {
                return Err(Error::Dimension {
                    expected: self.grid.len(),
                    got: fk.len(),
                });
            }
            let next = self.step(&snaps[k - 1], &fk);
            snaps.push(next);
        }
        Trajectory::new(snaps, self.grid, self.time)
    }
}

/// Backward Euler for `u_t + A u = f`, `u_0 = 0`; `forcing[k-1]` is `f` at `t_k`.
pub fn solve_linear(forcing: &[Vec<f64>], evolution: &LinearEvolution) -> Result<Trajectory> {
    let m = evolution.time().steps();
    if forcing.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: forcing.len(),
        });
    }
    let zero = vec![0.0; evolution.grid.len()];
    evolution.march(&zero, |k| forcing[k - 1].clone())
}

/// Smallest and largest entry of `(u_k - u_{k-1})/dt + A u_k - q|u_k|^{α-1}u_k` over `k ≥ 1`.
pub fn residual_range(u: &Trajectory, a: &OperatorMatrix, q: &WeightField, alpha: f64) -> Result<(f64, f64)> {
    a.check_len(q.values())?;
    let dt = u.time().dt();
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    for k in 1..u.snapshots().len() {
        let (prev, cur) = (u.at(k - 1), u.at(k));
        let acur = a.apply(cur)?;
        for i in 0..cur.len() {
            let r = (cur[i] - prev[i]) / dt + acur[i] - q.values()[i] * signed_power(cur[i], alpha);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok((lo, hi))
}

/// Largest `|(u_k - u_{k-1})/dt + A u_k - q|u_k|^{α-1}u_k|` over `k ≥ 1` and all nodes.
pub fn verify_solution(u: &Trajectory, a: &OperatorMatrix, q: &WeightField, alpha: f64) -> Result<f64> {
    let (lo, hi) = residual_range(u, a, q, alpha)?;
    Ok(hi.max(-lo).abs())
}

/// Ordering diagnostics of the monotone iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iterations: usize,
    pub sup_norm_diffs: Vec<f64>,
    /// `max (u^{n-1} - u^n)_+` over all sweeps, levels and nodes.
    pub monotonicity_violation: f64,
    /// `max (u^n - ū)_+` and `(w - u^n)_+` over all sweeps.
    pub sandwich_violation: f64,
    /// Residual of the returned trajectory, see [`verify_solution`].
    pub residual: f64,
}

/// Monotone iteration from the subsolution `lower` below the supersolution `upper`.
///
/// Stops when successive iterates differ by at most `tol` in the sup norm and
/// the nonlinear residual is at most `tol·(1 + ‖q‖_∞)`.
pub fn monotone_iteration(
    lower: &Trajectory,
    upper: &Trajectory,
    a: &OperatorMatrix,
    q: &WeightField,
    alpha: f64,
    tol: f64,
    max_outer: usize,
) -> Result<(Trajectory, IterationReport)> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if lower.time() != upper.time() || lower.grid() != upper.grid() {
        return Err(Error::Config("sub- and supersolution live on different grids".into()));
    }
    let gap = lower.excess_over(upper);
    if gap > SANDWICH_LIMIT {
        return Err(Error::Config(format!(
            "subsolution exceeds supersolution by {gap:e}; shrink T or the weight floor"
        )));
    }
    let evolution = LinearEvolution::new(a, lower.time())?;
    let target = tol * (1.0 + q.sup());
    let mut report = IterationReport {
        iterations: 0,
        sup_norm_diffs: Vec::new(),
        monotonicity_violation: 0.0,
        sandwich_violation: gap.max(0.0),
        residual: f64::INFINITY,
    };
    let mut prev = lower.clone();
    for n in 1..=max_outer {
        let zero = vec![0.0; a.dim()];
        let next = evolution.march(&zero, |k| q.reaction(prev.at(k), alpha))?;
        let diff = next.distance(&prev);
        report.iterations = n;
        report.sup_norm_diffs.push(diff);
        report.monotonicity_violation = report.monotonicity_violation.max(prev.excess_over(&next));
        report.sandwich_violation = report
            .sandwich_violation
            .max(next.excess_over(upper))
            .max(lower.excess_over(&next));
        prev = next;
        if diff <= tol {
            report.residual = verify_solution(&prev, a, q, alpha)?;
            if report.residual <= target {
                return Ok((prev, report));
            }
        }
    }
    report.residual = verify_solution(&prev, a, q, alpha)?;
    Err(Error::Convergence {
        solver: "monotone iteration",
        iterations: max_outer,
        last: report.sup_norm_diffs.last().copied().unwrap_or(f64::NAN),
    })
}

/// How well the sampled barrier satisfies the discrete subsolution inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsolutionCheck {
    /// `ε_h = max_k θ(t_k) max_i |(Aψ)_i - (-Δ)^sψ(x_i)|`.
    pub slack: f64,
    /// `0.1 · min` of `q θ(T)^α ψ^α` over the nodes inside the ball.
    pub budget: f64,
    /// Largest `θ'(t_k)ψ + θ(t_k)(Aψ)_i - q θ^α ψ^α`.
    pub semi_discrete_max: f64,
    /// Largest fully discrete residual `(w_k - w_{k-1})/dt + A w_k - q w_k^α`.
    pub discrete_max: f64,
}

/// Samples `θ(t_k)ψ(x_i)` and checks it against the discrete operator.
pub fn make_discrete_subsolution(
    profile: &BumpProfile,
    schedule: &ThetaSchedule,
    time: TimeGrid,
    a: &OperatorMatrix,
    q: &WeightField,
) -> Result<(Trajectory, SubsolutionCheck)> {
    let limit = HORIZON_FRACTION * schedule.t_max();
    if time.t_end() > limit * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "T = {} exceeds {HORIZON_FRACTION}·T_max = {limit}",
            time.t_end()
        )));
    }
    a.check_len(q.values())?;
    let grid = *a.grid();
    let alpha = schedule.alpha();
    let psi = grid.sample(|x| profile.psi(x));
    let apsi = a.apply(&psi)?;
    let mut consistency = 0.0f64;
    for (i, &v) in apsi.iter().enumerate() {
        let x = grid.node(i);
        let exact = if profile.contains(x) {
            profile.frac_lap_inside(x)?
        } else {
            profile.frac_lap_quadrature(x, EXTERIOR_QUAD_TOL)?
        };
        consistency = consistency.max((v - exact).abs());
    }
    let theta_end = schedule.theta(time.t_end());
    let slack = theta_end * consistency;
    let budget = SLACK_BUDGET_FRACTION
        * psi
            .iter()
            .zip(q.values())
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, qi)| qi * (theta_end * p).powf(alpha))
            .fold(f64::INFINITY, f64::min);

    let snaps: Vec<Vec<f64>> = (0..=time.steps())
        .map(|k| {
            let th = schedule.theta(time.time(k));
            psi.iter().map(|p| th * p).collect()
        })
        .collect();
    let traj = Trajectory::new(snaps, grid, time)?;

    let mut semi = f64::NEG_INFINITY;
    for k in 0..=time.steps() {
        let t = time.time(k);
        let (th, dth) = (schedule.theta(t), schedule.theta_derivative(t));
        for i in 0..psi.len() {
            let r = dth * psi[i] + th * apsi[i] - q.values()[i] * (th * psi[i]).powf(alpha);
            semi = semi.max(r);
        }
    }
    let (_, discrete_max) = residual_range(&traj, a, q, alpha)?;
    let check = SubsolutionCheck {
        slack,
        budget,
        semi_discrete_max: semi,
        discrete_max,
    };
    if semi > slack || slack > budget {
        return Err(Error::Config(format!(
            "discrete subsolution inequality fails (max residual {semi:e}, slack {slack:e}, budget {budget:e}); refine the grid"
        )));
    }
    Ok((traj, check))
}

/// Outcome of [`fit_sandwich`].
#[derive(Debug, Clone, PartialEq)]
pub struct Sandwich {
    pub schedule: ThetaSchedule,
    pub t_end: f64,
    pub halvings: usize,
    pub q0_reductions: usize,
}

/// Largest horizon `t_start/2^j` (`j ≤ 6`), then weight floors `q₀/2^i`,
/// for which `θ(T)ψ ≤ ū` at every node. `None` starts from `0.9·T_max`.
pub fn fit_sandwich(
    profile: &BumpProfile,
    schedule: &ThetaSchedule,
    upper: &[f64],
    grid: &Grid1D,
    t_start: Option<f64>,
) -> Result<Sandwich> {
    const MAX_HALVINGS: usize = 6;
    const MAX_Q0_REDUCTIONS: usize = 60;
    let psi = grid.sample(|x| profile.psi(x));
    let fits = |sch: &ThetaSchedule, t: f64| {
        let th = sch.theta(t);
        psi.iter().zip(upper).all(|(p, u)| th * p <= *u)
    };
    let limit = HORIZON_FRACTION * schedule.t_max();
    let base = t_start.unwrap_or(limit);
    if !(base > 0.0 && base <= limit * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "horizon T = {base} must lie in (0, {HORIZON_FRACTION}·T_max = {limit}]"
        )));
    }
    for j in 0..=MAX_HALVINGS {
        let t = base / 2f64.powi(j as i32);
        if fits(schedule, t) {
            return Ok(Sandwich {
                schedule: *schedule,
                t_end: t,
                halvings: j,
                q0_reductions: 0,
            });
        }
    }
    let t = base / 2f64.powi(MAX_HALVINGS as i32);
    let mut sch = *schedule;
    for i in 1..=MAX_Q0_REDUCTIONS {
        sch = sch.with_q0(0.5 * sch.q0())?;
        if fits(&sch, t) {
            return Ok(Sandwich {
                schedule: sch,
                t_end: t,
                halvings: MAX_HALVINGS,
                q0_reductions: i,
            });
        }
    }
    Err(Error::Config(
        "barrier stays above the supersolution after shrinking T and q0".into(),
    ))
}

/// Zero on `[0, τ]`, then `u(t - τ)`; `τ` must be a multiple of `dt`.
pub fn time_shift(u: &Trajectory, tau: f64) -> Result<Trajectory> {
    let time = u.time();
    let ratio = tau / time.dt();
    let j = ratio.round();
    if !(tau >= 0.0) || (ratio - j).abs() > ALIGN_TOL * ratio.max(1.0) {
        return Err(Error::Domain(format!(
            "shift tau = {tau} is not a nonnegative multiple of dt = {}",
            time.dt()
        )));
    }
    let j = j as usize;
    if j == 0 {
        return Ok(u.clone());
    }
    let shifted = TimeGrid::new(time.dt() * (time.steps() + j) as f64, time.steps() + j)?;
    let mut snaps = vec![vec![0.0; u.grid().len()]; j];
    snaps.extend(u.snapshots().iter().cloned());
    Trajectory::new(snaps, *u.grid(), shifted)
}

/// Terms of the a priori energy bound along a trajectory `u ≤ ū`.
///
/// Summing `⟨u_k - u_{k-1}, u_k⟩ + dt E_h(u_k, u_k) = dt ⟨f_k, u_k⟩` gives
/// `lhs + ½‖u_m‖² + dissipation = dt Σ ⟨f_k, u_k⟩ ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBound {
    /// `dt Σ_k E_h(u_k, u_k)`.
    pub lhs: f64,
    /// `dt Σ_k h Σ_i q_i ū_{k,i}^{α+1}`.
    pub rhs: f64,
    /// `½ Σ_k ‖u_k - u_{k-1}‖²_h`, the numerical dissipation of backward Euler.
    pub dissipation: f64,
    /// `½ ‖u_m‖²_h`.
    pub terminal: f64,
    /// `|lhs + terminal + dissipation - dt Σ ⟨q u_k^α, u_k⟩|`.
    pub identity_defect: f64,
}

impl EnergyBound {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

pub fn energy_bound(
    u: &Trajectory,
    upper: &Trajectory,
    a: &OperatorMatrix,
    q: &WeightField,
    alpha: f64,
) -> Result<EnergyBound> {
    let dt = u.time().dt();
    let grid = *u.grid();
    let (mut lhs, mut rhs, mut diss, mut work) = (0.0, 0.0, 0.0, 0.0);
    for k in 1..u.snapshots().len() {
        let (prev, cur) = (u.at(k - 1), u.at(k));
        lhs += dt * energy(cur, cur, a)?;
        let ub = upper.at(k);
        rhs += dt
            * grid.spacing()
            * ub.iter()
                .zip(q.values())
                .map(|(v, qi)| qi * v.abs().powf(alpha + 1.0))
                .sum::<f64>();
        let d: Vec<f64> = cur.iter().zip(prev).map(|(x, y)| x - y).collect();
        diss += 0.5 * grid.inner(&d, &d);
        work += dt * grid.inner(&q.reaction(cur, alpha), cur);
    }
    let terminal = 0.5 * grid.inner(u.last(), u.last());
    Ok(EnergyBound {
        lhs,
        rhs,
        dissipation: diss,
        terminal,
        identity_defect: (lhs + terminal + diss - work).abs(),
    })
}

/// Result of the uniqueness experiment for `α ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub alpha: f64,
    /// `max_k ‖u_k‖_∞` of the run from zero data.
    pub zero_run_sup: f64,
    /// `C₀ = ‖q‖_∞ (max_k ‖u_k‖_∞)^{α-1}` of the perturbed run.
    pub c0: f64,
    pub dt: f64,
    /// `‖u_k‖²_h` of the perturbed run.
    pub energies: Vec<f64>,
    /// `‖u_0‖²_h (1 - 2 dt C₀)^{-k}`.
    pub envelope: Vec<f64>,
    /// `min_k (envelope_k - energies_k) / envelope_k`.
    pub envelope_margin: f64,
    /// `min_k (y_{k-1}/(1 - 2 dt C₀) - y_k) / y_k`.
    pub step_margin: f64,
}

/// Semi-implicit march `(I + dt A) u_k = u_{k-1} + dt q|u_{k-1}|^{α-1}u_{k-1}`
/// from zero data and from `ε₀ φ₁`, with the discrete Grönwall envelope.
pub fn uniqueness_experiment(
    alpha: f64,
    a: &OperatorMatrix,
    q: &WeightField,
    time: TimeGrid,
    eps0: f64,
) -> Result<UniquenessReport> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::Config(format!(
            "uniqueness holds for alpha >= 1, got alpha = {alpha}"
        )));
    }
    if !(eps0 > 0.0 && eps0.is_finite()) {
        return Err(Error::Domain(format!("perturbation scale must be positive, got {eps0}")));
    }
    a.check_len(q.values())?;
    let evolution = LinearEvolution::new(a, time)?;
    let grid = *a.grid();
    let explicit = |u: &Trajectory| -> Result<Trajectory> {
        let mut snaps = vec![u.at(0).to_vec()];
        for k in 1..=time.steps() {
            let f = q.reaction(&snaps[k - 1], alpha);
            let next = evolution.step(&snaps[k - 1], &f);
            snaps.push(next);
        }
        Trajectory::new(snaps, grid, time)
    };

    let zero_run = explicit(&Trajectory::zeros(grid, time))?;
    let zero_run_sup = zero_run.sup();

    let phi = eigendecomposition(a, 1)?.remove(0).vector;
    let mut start = Trajectory::zeros(grid, time);
    start.snapshots[0] = phi.iter().map(|v| eps0 * v).collect();
    let run = explicit(&start)?;
    let c0 = if alpha == 1.0 {
        q.sup()
    } else {
        q.sup() * run.sup().powf(alpha - 1.0)
    };
    let dt = time.dt();
    if !(dt < 0.25 / c0) {
        return Err(Error::Config(format!(
            "dt = {dt} too large for the envelope, need dt < 1/(4 C0) = {}",
            0.25 / c0
        )));
    }
    let factor = 1.0 / (1.0 - 2.0 * dt * c0);
    let energies: Vec<f64> = run.snapshots().iter().map(|u| grid.inner(u, u)).collect();
    let envelope: Vec<f64> = (0..energies.len())
        .map(|k| energies[0] * factor.powi(k as i32))
        .collect();
    let envelope_margin = energies
        .iter()
        .zip(&envelope)
        .map(|(y, e)| (e - y) / e)
        .fold(f64::INFINITY, f64::min);
    let step_margin = energies
        .windows(2)
        .map(|w| (w[0] * factor - w[1]) / w[1])
        .fold(f64::INFINITY, f64::min);
    Ok(UniquenessReport {
        alpha,
        zero_run_sup,
        c0,
        dt,
        energies,
        envelope,
        envelope_margin,
        step_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::assemble_operator;

    #[test]
    fn time_grid_layout() {
        let t = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!(t.dt(), 0.25);
        assert_eq!(t.time(4), 1.0);
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let g = Grid1D::new(1.0, 15).unwrap();
        let a = assemble_operator(&g, 0.5).unwrap();
        let t = TimeGrid::new(0.5, 10).unwrap();
        let ev = LinearEvolution::new(&a, t).unwrap();
        let u = solve_linear(&vec![vec![0.0; 15]; 10], &ev).unwrap();
        assert_eq!(u.sup(), 0.0);
        assert!(solve_linear(&vec![vec![0.0; 15]; 9], &ev).is_err());
    }

    #[test]
    fn shift_requires_alignment() {
        let g = Grid1D::new(1.0, 7).unwrap();
        let t = TimeGrid::new(1.0, 10).unwrap();
        let u = Trajectory::zeros(g, t);
        assert!(time_shift(&u, 0.15).is_err());
        assert!(time_shift(&u, -0.1).is_err());
        let s = time_shift(&u, 0.3).unwrap();
        assert_eq!(s.time().steps(), 13);
        assert!((s.time().t_end() - 1.3).abs() < 1e-12);
        assert_eq!(time_shift(&u, 0.0).unwrap(), u);
    }

    #[test]
    fn uniqueness_rejects_sublinear() {
        let g = Grid1D::new(1.0, 7).unwrap();
        let a = assemble_operator(&g, 0.5).unwrap();
        let q = WeightField::constant(&g, 1.0, (-0.5, 0.5)).unwrap();
        let t = TimeGrid::new(0.1, 10).unwrap();
        assert!(matches!(uniqueness_experiment(0.5, &a, &q, t, 1e-3), Err(Error::Config(_))));
    }
}
