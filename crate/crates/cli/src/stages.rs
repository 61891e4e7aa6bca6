//! The experiment stages behind each subcommand.

use std::f64::consts::PI;
use std::time::Instant;

use fracsub::bump::{BumpProfile, ThetaSchedule};
use fracsub::discretization::{assemble_operator, eigendecomposition, Grid1D, OperatorMatrix, WeightField};
use fracsub::parabolic::{
    energy_bound, fit_sandwich, make_discrete_subsolution, monotone_iteration, time_shift,
    uniqueness_experiment, verify_solution, LinearEvolution, TimeGrid, Trajectory,
};
use fracsub::specfun::{cns, gamma, gauss_sum, hyp2f1, hyp2f1_series, kappa, FracParams};
use fracsub::stationary::{as_supersolution, solve_lane_emden, supersolution_defect, LaneEmdenPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Horizon};
use crate::error::CliError;
use crate::report::{Margin, StageDir, StageReport};
use crate::svg::{Chart, Series};

/// Random parameter triples drawn by the special-function checks.
pub const SPECFUN_SAMPLES: usize = 100;
/// Sample points for the closed form against quadrature.
pub const DYDA_POINTS: usize = 50;
/// Time by space resolution of the continuous subsolution scan.
pub const SCAN_SHAPE: (usize, usize) = (64, 256);
/// Budget for `max_k‖u_k‖_∞` of the zero-data run in the uniqueness experiment.
pub const ZERO_RUN_LIMIT: f64 = 1e-12;
const COMPARISON_PAIRS: usize = 16;
/// Largest number of time levels kept in the trajectory exports.
const TRAJECTORY_ROWS: usize = 64;

/// Everything derived from the configuration that more than one stage needs.
pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub grid: Grid1D,
    pub profile: BumpProfile,
    pub schedule: ThetaSchedule,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Result<Self, CliError> {
        let grid = cfg.grid()?;
        let params = FracParams::new(1, cfg.s, cfg.p)?;
        let profile = BumpProfile::new(cfg.bump.x0, cfg.bump.radius, params)?;
        let c = profile.ratio_bound_constant(cfg.ratio_resolution)?;
        let alpha = if cfg.alpha > 0.0 && cfg.alpha < 1.0 { cfg.alpha } else { 0.5 };
        let schedule = ThetaSchedule::new(
            cfg.q_spec.floor(),
            &profile,
            alpha,
            c,
            cfg.theta_convention.into(),
        )?;
        Ok(Self {
            cfg,
            grid,
            profile,
            schedule,
        })
    }

    pub fn operator(&self) -> Result<OperatorMatrix, CliError> {
        Ok(assemble_operator(&self.grid, self.cfg.s)?)
    }

    pub fn weight(&self) -> Result<WeightField, CliError> {
        self.cfg.q_spec.weight(&self.grid)
    }

    fn residual_target(&self, q: &WeightField) -> f64 {
        self.cfg.tolerances.iteration * (1.0 + q.sup())
    }
}

fn timed(f: impl FnOnce(&mut StageReport) -> Result<(), CliError>) -> Result<StageReport, CliError> {
    let start = Instant::now();
    let mut rep = StageReport::default();
    f(&mut rep)?;
    rep.seconds = start.elapsed().as_secs_f64();
    Ok(rep)
}

fn rel_err(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs().max(1e-300)
}

/// Self-consistency of the special functions on seeded random parameters.
pub fn specfun(cfg: &ExperimentConfig, dir: &StageDir) -> Result<StageReport, CliError> {
    timed(|rep| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut rows = Vec::with_capacity(SPECFUN_SAMPLES);
        let mut continuity = 0.0f64;
        for _ in 0..SPECFUN_SAMPLES {
            let dim = rng.random_range(1..=3u32);
            let s = rng.random_range(0.05..0.95);
            let p = rng.random_range(1f64.max(2.0 * s) + 0.05..4.0);
            let (a, b, c) = (s + 0.5 * dim as f64, s - p, 0.5 * dim as f64);
            let series = hyp2f1_series(a, b, c, 0.9)?;
            let switched = hyp2f1(a, b, c, 0.9)?;
            continuity = continuity.max(rel_err(switched, series));
            let at_one = hyp2f1(a, b, c, 1.0)?;
            let k = kappa(&FracParams::new(dim, s, p)?)?;
            rows.push(vec![dim as f64, s, p, a, b, c, series, switched, at_one, gauss_sum(a, b, c)?, k]);
        }
        rep.push("specfun.connection_continuity", Margin::at_most(continuity, 1e-10));

        let mut reflection = 0.0f64;
        for j in 1..SPECFUN_SAMPLES {
            let x = j as f64 / SPECFUN_SAMPLES as f64;
            let v = gamma(x)? * gamma(1.0 - x)? * (PI * x).sin() / PI;
            reflection = reflection.max((v - 1.0).abs());
        }
        rep.push("specfun.gamma_reflection", Margin::at_most(reflection, 1e-13));
        let unit = kappa(&FracParams::new(1, 0.5, 2.0)?)?;
        rep.push("specfun.kappa_unit", Margin::at_most(rel_err(unit, 16.0 / (3.0 * PI)), 1e-12));
        rep.push("specfun.cns_half", Margin::at_most(rel_err(cns(1, 0.5)?, 1.0 / PI), 1e-13));

        dir.table(
            "triples.csv",
            &["dim", "s", "p", "a", "b", "c", "series_z09", "hyp2f1_z09", "hyp2f1_z1", "gauss_sum", "kappa"],
            &rows,
        )
    })
}

/// Closed form against quadrature, exterior sign, ratio bound, subsolution scan.
pub fn bump(ctx: &Context, dir: &StageDir) -> Result<StageReport, CliError> {
    timed(|rep| {
        let cfg = ctx.cfg;
        let (pr, sch) = (&ctx.profile, &ctx.schedule);
        let (x0, r) = (pr.center(), pr.radius());
        let tol = cfg.tolerances.quadrature;

        let mut dyda = 0.0f64;
        for j in 0..DYDA_POINTS {
            let x = x0 + r * (-0.98 + 1.96 * j as f64 / (DYDA_POINTS - 1) as f64);
            let exact = pr.frac_lap_inside(x)?;
            let quad = pr.frac_lap_quadrature(x, tol)?;
            dyda = dyda.max((exact - quad).abs() / (1.0 + exact.abs()));
        }
        rep.push("bump.closed_form_vs_quadrature", Margin::at_most(dyda, 1e-6));

        let mut exterior = f64::NEG_INFINITY;
        for j in 0..DYDA_POINTS / 2 {
            let d = r * 10f64.powf(-6.0 + 8.0 * j as f64 / (DYDA_POINTS / 2 - 1) as f64);
            for x in [x0 - r - d, x0 + r + d] {
                exterior = exterior.max(pr.frac_lap_quadrature(x, tol)?);
            }
        }
        rep.push("bump.exterior_sign", Margin::at_most(exterior, tol));

        let c = sch.ratio_bound();
        let mut worst_ratio = 0.0f64;
        for j in 0..1000 {
            let rho = r * j as f64 / 1000.0;
            let ratio = pr.frac_lap_at_radius(rho)? / pr.psi(x0 + rho);
            worst_ratio = worst_ratio.max(ratio);
        }
        rep.push("bump.ratio_bound", Margin::at_most(worst_ratio, c));
        rep.push("bump.ratio_at_centre", Margin::at_most(pr.kappa() * r.powf(-2.0 * cfg.s), c));

        let (nt, nx) = SCAN_SHAPE;
        let t_hi = 0.9 * sch.t_max();
        let q0 = sch.q0();
        let mut scan = f64::NEG_INFINITY;
        let mut scan_rows = Vec::with_capacity(nt);
        for it in 0..nt {
            let t = t_hi * it as f64 / (nt - 1) as f64;
            let mut worst = f64::NEG_INFINITY;
            for ix in 0..nx {
                let x = x0 + r * (-1.0 + 2.0 * (ix as f64 + 0.5) / nx as f64);
                worst = worst.max(fracsub::bump::subsolution_residual(t, x, pr, sch, q0, tol)?);
            }
            scan = scan.max(worst);
            scan_rows.push(vec![t, sch.theta(t), worst]);
        }
        rep.push("bump.subsolution_scan", Margin::at_most(scan, 1e-10));

        let mut ode = 0.0f64;
        for it in 1..=40 {
            let t = t_hi * it as f64 / 41.0;
            let h = 1e-6 * t;
            let fd = (sch.theta(t + h) - sch.theta(t - h)) / (2.0 * h);
            let rhs = sch.rate() * sch.theta(t).powf(sch.alpha());
            ode = ode.max((fd - rhs).abs() / rhs.max(1e-300));
        }
        rep.push("bump.theta_ode", Margin::at_most(ode, 1e-6));

        let l = cfg.half_width;
        let mut rows = Vec::new();
        for j in 0..=400 {
            let x = -l + 2.0 * l * j as f64 / 400.0;
            let inside = pr.contains(x) && (x - x0).abs() < r;
            let exact = if inside { pr.frac_lap_inside(x)? } else { f64::NAN };
            let quad = pr.frac_lap_quadrature(x, tol)?;
            rows.push(vec![x, pr.psi(x), exact, quad]);
        }
        dir.table("profile.csv", &["x", "psi", "frac_lap_closed_form", "frac_lap_quadrature"], &rows)?;
        dir.chart(
            "profile.svg",
            &Chart {
                title: "bump and its fractional Laplacian".into(),
                x_label: "x".into(),
                y_label: "value".into(),
                log_y: false,
                series: vec![
                    Series::new("psi", rows.iter().map(|r| (r[0], r[1])).collect()),
                    Series::new("frac lap (quadrature)", rows.iter().map(|r| (r[0], r[3])).collect()),
                ],
            },
        )?;
        dir.table("theta.csv", &["t", "theta", "max_residual"], &scan_rows)?;
        dir.chart(
            "theta.svg",
            &Chart {
                title: "growth schedule".into(),
                x_label: "t".into(),
                y_label: "theta".into(),
                log_y: false,
                series: vec![Series::new("theta", scan_rows.iter().map(|r| (r[0], r[1])).collect())],
            },
        )
    })
}

/// Operator checks and the two Lane–Emden solvers. Returns the solver pair for reuse.
pub fn stationary(
    ctx: &Context,
    a: &OperatorMatrix,
    q: &WeightField,
    dir: &StageDir,
    dump_matrix: bool,
) -> Result<(StageReport, LaneEmdenPair), CliError> {
    let mut pair = None;
    let rep = timed(|rep| {
        let cfg = ctx.cfg;
        rep.push("operator.m_matrix_defect", Margin::at_most(a.m_matrix_defect(), 0.0));
        rep.push("operator.asymmetry", Margin::at_most(a.asymmetry(), 0.0));
        let ground = eigendecomposition(a, 1)?;
        rep.push("operator.lambda1_min", Margin::above(ground[0].value, 0.0));
        if dump_matrix {
            let path = dir.path("operator.csv");
            let file = std::fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            a.write_csv(std::io::BufWriter::new(file)).map_err(|e| CliError::io(&path, e))?;
        }

        let tol = &cfg.tolerances;
        let p = solve_lane_emden(a, q, cfg.alpha, tol.iteration, tol.max_iterations)?;
        let (mz, fp) = (&p.minimizer, &p.fixed_point);
        rep.push(
            "stationary.energy",
            Margin {
                value: mz.energy,
                budget: 0.0,
                pass: mz.energy < 0.0,
            },
        );
        rep.push("stationary.minimizer_min", Margin::above(mz.min(), 0.0));
        rep.push("stationary.fixed_point_min", Margin::above(fp.min(), 0.0));
        rep.push("stationary.minimizer_residual", Margin::at_most(mz.residual_norm, tol.residual));
        rep.push("stationary.fixed_point_residual", Margin::at_most(fp.residual_norm, tol.residual));
        let descent = mz.descent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rep.push("stationary.energy_increase", Margin::at_most(descent.max(0.0), 0.0));
        rep.push("stationary.solver_discrepancy", Margin::at_most(p.discrepancy, 1e-4));
        if p.discrepancy > 1e-4 {
            rep.warn(format!(
                "minimizer and fixed point differ by {:.3e} (relative sup norm)",
                p.discrepancy
            ));
        }

        let rows: Vec<Vec<f64>> = (0..ctx.grid.len())
            .map(|i| vec![ctx.grid.node(i), mz.values[i], fp.values[i], q.values()[i]])
            .collect();
        dir.table("solution.csv", &["x", "minimizer", "fixed_point", "q"], &rows)?;
        let trace: Vec<Vec<f64>> = mz
            .descent
            .iter()
            .enumerate()
            .map(|(k, d)| vec![(k + 1) as f64, *d])
            .collect();
        dir.table("descent.csv", &["iteration", "energy_change"], &trace)?;
        dir.chart(
            "solution.svg",
            &Chart {
                title: "stationary solutions".into(),
                x_label: "x".into(),
                y_label: "u".into(),
                log_y: false,
                series: vec![
                    Series::new("minimizer", rows.iter().map(|r| (r[0], r[1])).collect()),
                    Series::new("fixed point", rows.iter().map(|r| (r[0], r[2])).collect()),
                ],
            },
        )?;
        pair = Some(p);
        Ok(())
    })?;
    Ok((rep, pair.expect("stage sets the pair")))
}

struct Sandwiched {
    lower: Trajectory,
    upper: Trajectory,
    u: Trajectory,
    schedule: ThetaSchedule,
    iterations: Vec<f64>,
}

fn sandwiched_solution(
    ctx: &Context,
    a: &OperatorMatrix,
    q: &WeightField,
    pair: &LaneEmdenPair,
    steps: usize,
    rep: &mut StageReport,
    record: bool,
) -> Result<Sandwiched, CliError> {
    let cfg = ctx.cfg;
    let upper_sol = pair.upper();
    let t_start = match cfg.horizon {
        Horizon::Auto => None,
        Horizon::Fixed(t) => Some(t),
    };
    let fit = fit_sandwich(&ctx.profile, &ctx.schedule, &upper_sol.values, &ctx.grid, t_start)?;
    let time = TimeGrid::new(fit.t_end, steps)?;
    let (lower, check) = make_discrete_subsolution(&ctx.profile, &fit.schedule, time, a, q)?;
    let upper = as_supersolution(upper_sol, a, time)?;
    let (u, it) = monotone_iteration(&lower, &upper, a, q, cfg.alpha, cfg.tolerances.iteration, cfg.tolerances.max_iterations)?;
    if record {
        if fit.halvings > 0 || fit.q0_reductions > 0 {
            rep.warn(format!(
                "barrier repaired to fit below the stationary solution: {} horizon halvings, {} floor halvings",
                fit.halvings, fit.q0_reductions
            ));
        }
        if check.slack > 0.5 * check.budget {
            rep.warn(format!(
                "subsolution slack {:.3e} uses more than half of its budget {:.3e}",
                check.slack, check.budget
            ));
        }
        rep.push("evolve.horizon", Margin::at_most(fit.t_end, 0.9 * fit.schedule.t_max()));
        rep.push("evolve.subsolution_slack", Margin::at_most(check.slack, check.budget));
        rep.push("evolve.subsolution_semi_discrete", Margin::at_most(check.semi_discrete_max, check.slack));
        rep.push("evolve.subsolution_discrete", Margin::at_most(check.discrete_max, 0.0));
        rep.push(
            "evolve.supersolution_defect",
            Margin::at_most(supersolution_defect(&upper, a, q, cfg.alpha)?, cfg.tolerances.residual),
        );
        rep.push("evolve.monotonicity", Margin::at_most(it.monotonicity_violation, fracsub::parabolic::MONOTONICITY_LIMIT));
        rep.push("evolve.sandwich", Margin::at_most(it.sandwich_violation, fracsub::parabolic::SANDWICH_LIMIT));
    }
    Ok(Sandwiched {
        lower,
        upper,
        u,
        schedule: fit.schedule,
        iterations: it.sup_norm_diffs,
    })
}

/// Two solutions from zero data, their shifts, and the energy bound.
pub fn evolve(
    ctx: &Context,
    a: &OperatorMatrix,
    q: &WeightField,
    pair: &LaneEmdenPair,
    dir: &StageDir,
) -> Result<StageReport, CliError> {
    timed(|rep| {
        let cfg = ctx.cfg;
        let alpha = cfg.alpha;
        let target = ctx.residual_target(q);
        let sw = sandwiched_solution(ctx, a, q, pair, cfg.m, rep, true)?;
        let (u, time, grid) = (&sw.u, sw.u.time(), &ctx.grid);
        let t_end = time.t_end();

        rep.push("evolve.residual_nontrivial", Margin::at_most(verify_solution(u, a, q, alpha)?, target));
        let zero = Trajectory::zeros(*grid, time);
        rep.push("evolve.residual_trivial", Margin::at_most(verify_solution(&zero, a, q, alpha)?, target));
        rep.push("evolve.nontrivial_sup_min", Margin::above(u.sup(), 0.0));

        let (x0, r) = (ctx.profile.center(), ctx.profile.radius());
        let centre = (0..grid.len())
            .min_by(|&i, &j| (grid.node(i) - x0).abs().total_cmp(&(grid.node(j) - x0).abs()))
            .expect("grid is nonempty");
        let th = sw.schedule.theta(t_end);
        let barrier = th * ctx.profile.psi(grid.node(centre));
        rep.push("evolve.centre_gap_min", Margin::at_least(u.last()[centre] - barrier, 0.0));
        let half: Vec<usize> = (0..grid.len()).filter(|&i| (grid.node(i) - x0).abs() < 0.5 * r).collect();
        let half_min = half.iter().map(|&i| u.last()[i]).fold(f64::INFINITY, f64::min);
        let half_floor = half
            .iter()
            .map(|&i| th * ctx.profile.psi(grid.node(i)))
            .fold(f64::INFINITY, f64::min);
        rep.push(
            "evolve.half_ball_min",
            Margin {
                value: half_min,
                budget: half_floor,
                pass: !half.is_empty() && half_floor > 0.0 && half_min >= half_floor,
            },
        );

        let dt = time.dt();
        let mut shifted = Vec::new();
        for &tau in &cfg.taus {
            let j = (tau / dt).round() as usize;
            let v = time_shift(u, j as f64 * dt)?;
            let res = verify_solution(&v, a, q, alpha)?;
            let head = (0..=j.min(time.steps()))
                .flat_map(|k| v.at(k).iter().map(|x| x.abs()))
                .fold(0.0f64, f64::max);
            rep.push(format!("evolve.shift_residual.j{j}"), Margin::at_most(res, target));
            rep.push(format!("evolve.shift_head.j{j}"), Margin::at_most(head, 0.0));
            shifted.push((j, v));
        }

        let eb = energy_bound(u, &sw.upper, a, q, alpha)?;
        rep.push("evolve.energy_margin_min", Margin::at_least(eb.margin(), 0.0));
        rep.push("evolve.energy_identity_defect", Margin::at_most(eb.identity_defect, 1e-8));
        if cfg.m >= 2 {
            let mut scratch = StageReport::default();
            let coarse = sandwiched_solution(ctx, a, q, pair, cfg.m / 2, &mut scratch, false)?;
            let eb2 = energy_bound(&coarse.u, &coarse.upper, a, q, alpha)?;
            rep.push(
                "evolve.dissipation_refinement",
                Margin {
                    value: eb.dissipation,
                    budget: eb2.dissipation,
                    pass: eb.dissipation < eb2.dissipation || eb2.dissipation == 0.0,
                },
            );
        }

        let ev = LinearEvolution::new(a, time)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
        let zero_f = vec![0.0; grid.len()];
        let mut order = 0.0f64;
        for _ in 0..COMPARISON_PAIRS {
            let lo: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|v| v + rng.random_range(0.0..1.0)).collect();
            let (sl, sh) = (ev.step(&lo, &zero_f), ev.step(&hi, &zero_f));
            order = sl.iter().zip(&sh).fold(order, |m, (x, y)| m.max(x - y));
        }
        rep.push("evolve.comparison_violation", Margin::at_most(order, 0.0));

        let stride = (time.steps() / TRAJECTORY_ROWS).max(1);
        let export = |file: &str, v: &Trajectory| {
            let mut rows = Vec::new();
            for k in (0..=time.steps()).step_by(stride) {
                for i in 0..grid.len() {
                    rows.push(vec![time.time(k), grid.node(i), v.at(k)[i]]);
                }
            }
            dir.table(file, &["t", "x", "u"], &rows)
        };
        export("trajectory.csv", u)?;
        export("subsolution.csv", &sw.lower)?;
        for (j, v) in &shifted {
            export(&format!("shift_j{j}.csv"), v)?;
        }

        let mut header = vec!["t".to_string(), "subsolution".into(), "solution".into()];
        header.extend(shifted.iter().map(|(j, _)| format!("shift_j{j}")));
        header.push("supersolution".into());
        let centre_rows: Vec<Vec<f64>> = (0..=time.steps())
            .map(|k| {
                let mut row = vec![time.time(k), sw.lower.at(k)[centre], u.at(k)[centre]];
                row.extend(shifted.iter().map(|(_, v)| v.at(k)[centre]));
                row.push(sw.upper.at(k)[centre]);
                row
            })
            .collect();
        let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
        dir.table("centre.csv", &header_ref, &centre_rows)?;
        dir.chart(
            "centre.svg",
            &Chart {
                title: "solutions at the bump centre".into(),
                x_label: "t".into(),
                y_label: "u(t, x0)".into(),
                log_y: false,
                series: (1..header.len())
                    .map(|c| Series::new(header[c].clone(), centre_rows.iter().map(|r| (r[0], r[c])).collect()))
                    .collect(),
            },
        )?;
        let final_rows: Vec<Vec<f64>> = (0..grid.len())
            .map(|i| vec![grid.node(i), sw.lower.last()[i], u.last()[i], sw.upper.last()[i]])
            .collect();
        dir.table("final.csv", &["x", "subsolution", "solution", "supersolution"], &final_rows)?;
        dir.chart(
            "final.svg",
            &Chart {
                title: format!("profiles at T = {t_end:.4}"),
                x_label: "x".into(),
                y_label: "u(T, x)".into(),
                log_y: false,
                series: (1..4)
                    .map(|c| {
                        Series::new(["", "subsolution", "solution", "supersolution"][c], final_rows.iter().map(|r| (r[0], r[c])).collect())
                    })
                    .collect(),
            },
        )?;
        let it_rows: Vec<Vec<f64>> = sw
            .iterations
            .iter()
            .enumerate()
            .map(|(k, d)| vec![(k + 1) as f64, *d])
            .collect();
        dir.table("iterations.csv", &["sweep", "sup_norm_change"], &it_rows)?;
        let energy_rows = vec![vec![eb.lhs, eb.rhs, eb.dissipation, eb.terminal, eb.identity_defect]];
        dir.table("energy.csv", &["lhs", "rhs", "dissipation", "terminal", "identity_defect"], &energy_rows)
    })
}

/// Grönwall envelope runs for each exponent in `alphas` (all `≥ 1`).
pub fn uniqueness(
    ctx: &Context,
    a: &OperatorMatrix,
    q: &WeightField,
    alphas: &[f64],
    dir: &StageDir,
) -> Result<StageReport, CliError> {
    timed(|rep| {
        let u = &ctx.cfg.uniqueness;
        let time = TimeGrid::new(u.t_end, ctx.cfg.m)?;
        let mut series = Vec::new();
        for &alpha in alphas {
            let r = uniqueness_experiment(alpha, a, q, time, u.eps0)?;
            let tag = format!("a{alpha}");
            rep.push(format!("uniqueness.{tag}.zero_run_sup"), Margin::at_most(r.zero_run_sup, ZERO_RUN_LIMIT));
            rep.push(format!("uniqueness.{tag}.envelope_margin_min"), Margin::at_least(r.envelope_margin, 0.0));
            rep.push(format!("uniqueness.{tag}.step_margin_min"), Margin::at_least(r.step_margin, 0.0));
            let rows: Vec<Vec<f64>> = r
                .energies
                .iter()
                .zip(&r.envelope)
                .enumerate()
                .map(|(k, (e, env))| vec![k as f64, time.time(k), *e, *env])
                .collect();
            dir.table(&format!("envelope_{tag}.csv"), &["step", "t", "energy", "envelope"], &rows)?;
            series.push(Series::new(format!("energy, alpha = {alpha}"), rows.iter().map(|r| (r[1], r[2])).collect()));
            series.push(Series::new(format!("envelope, alpha = {alpha}"), rows.iter().map(|r| (r[1], r[3])).collect()));
        }
        dir.chart(
            "envelope.svg",
            &Chart {
                title: "perturbation energy and its envelope".into(),
                x_label: "t".into(),
                y_label: "||u - v||^2".into(),
                log_y: true,
                series,
            },
        )
    })
}
