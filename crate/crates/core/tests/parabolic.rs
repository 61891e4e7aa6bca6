use fracsub::bump::{BumpProfile, ThetaConvention, ThetaSchedule};
use fracsub::discretization::{assemble_operator, Grid1D, OperatorMatrix, WeightField};
use fracsub::parabolic::{
    energy_bound, fit_sandwich, make_discrete_subsolution, monotone_iteration, residual_range,
    solve_linear, time_shift, uniqueness_experiment, verify_solution, LinearEvolution, TimeGrid,
    Trajectory,
};
use fracsub::specfun::FracParams;
use fracsub::stationary::{as_supersolution, solve_fixed_point};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Setup {
    grid: Grid1D,
    a: OperatorMatrix,
    q: WeightField,
    bump: BumpProfile,
    schedule: ThetaSchedule,
}

fn setup(n: usize) -> Setup {
    let grid = Grid1D::new(1.0, n).unwrap();
    let a = assemble_operator(&grid, 0.5).unwrap();
    let q = WeightField::constant(&grid, 1.0, (-0.5, 0.5)).unwrap();
    let bump = BumpProfile::new(0.0, 0.5, FracParams::new(1, 0.5, 2.0).unwrap()).unwrap();
    let c = bump.ratio_bound_constant(256).unwrap();
    let schedule = ThetaSchedule::new(1.0, &bump, 0.5, c, ThetaConvention::Exact).unwrap();
    Setup {
        grid,
        a,
        q,
        bump,
        schedule,
    }
}

fn sandwich(st: &Setup, m: usize) -> (Trajectory, Trajectory, ThetaSchedule) {
    let upper = solve_fixed_point(&st.a, &st.q, 0.5, 1e-12).unwrap();
    let fit = fit_sandwich(&st.bump, &st.schedule, &upper.values, &st.grid, None).unwrap();
    let time = TimeGrid::new(fit.t_end, m).unwrap();
    let (lower, _) = make_discrete_subsolution(&st.bump, &fit.schedule, time, &st.a, &st.q).unwrap();
    (lower, as_supersolution(&upper, &st.a, time).unwrap(), fit.schedule)
}

#[test]
fn linear_solve_respects_order() {
    let st = setup(31);
    let time = TimeGrid::new(0.3, 20).unwrap();
    let ev = LinearEvolution::new(&st.a, time).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f1: Vec<Vec<f64>> = (0..20)
        .map(|_| (0..31).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let f2: Vec<Vec<f64>> = f1
        .iter()
        .map(|f| f.iter().map(|v| v + rng.random_range(0.0..0.1)).collect())
        .collect();
    let (u1, u2) = (solve_linear(&f1, &ev).unwrap(), solve_linear(&f2, &ev).unwrap());
    assert!(u1.snapshots().iter().flatten().all(|&v| v >= 0.0));
    assert_eq!(u1.excess_over(&u2), 0.0);
}

#[test]
fn zero_subsolution_stays_trivial() {
    let st = setup(63);
    let (_, upper, _) = sandwich(&st, 32);
    let zero = Trajectory::zeros(st.grid, upper.time());
    let (u, rep) = monotone_iteration(&zero, &upper, &st.a, &st.q, 0.5, 1e-10, 10).unwrap();
    assert_eq!(u.sup(), 0.0);
    assert_eq!(rep.iterations, 1);
    assert_eq!(verify_solution(&u, &st.a, &st.q, 0.5).unwrap(), 0.0);
}

#[test]
fn two_solutions_from_zero_data() {
    let st = setup(127);
    let (lower, upper, schedule) = sandwich(&st, 128);
    let (u, rep) = monotone_iteration(&lower, &upper, &st.a, &st.q, 0.5, 1e-10, 500).unwrap();
    assert!(rep.monotonicity_violation <= 1e-12);
    assert!(rep.sandwich_violation <= 1e-10);
    assert!(rep.residual <= 1e-10 * (1.0 + st.q.sup()));

    let centre = st.grid.len() / 2;
    let t_end = u.time().t_end();
    assert!(u.last()[centre] >= schedule.theta(t_end) * st.bump.psi(st.grid.node(centre)));
    // nontriviality on the half ball
    let floor = (0..st.grid.len())
        .filter(|&i| st.grid.node(i).abs() < 0.25)
        .map(|i| schedule.theta(t_end) * st.bump.psi(st.grid.node(i)))
        .fold(f64::INFINITY, f64::min);
    assert!((0..st.grid.len())
        .filter(|&i| st.grid.node(i).abs() < 0.25)
        .all(|i| u.last()[i] >= floor));

    let trivial = Trajectory::zeros(st.grid, u.time());
    assert_eq!(verify_solution(&trivial, &st.a, &st.q, 0.5).unwrap(), 0.0);

    let dt = u.time().dt();
    for j in [13, 40] {
        let shifted = time_shift(&u, j as f64 * dt).unwrap();
        let r = verify_solution(&shifted, &st.a, &st.q, 0.5).unwrap();
        assert!(r <= 1e-10 * (1.0 + st.q.sup()));
        assert!(shifted.at(j).iter().all(|&v| v == 0.0));
    }
}

#[test]
fn barrier_is_a_strict_subsolution() {
    let st = setup(63);
    let (lower, _, _) = sandwich(&st, 64);
    let (lo, hi) = residual_range(&lower, &st.a, &st.q, 0.5).unwrap();
    assert!(hi <= 0.0);
    assert!(lo < 0.0);
    assert!(lower.at(0).iter().all(|&v| v == 0.0));
    for (i, &v) in lower.last().iter().enumerate() {
        if st.grid.node(i).abs() >= 0.5 {
            assert_eq!(v, 0.0);
        }
    }
}

#[test]
fn subsolution_slack_shrinks_with_the_grid() {
    let mut slacks = Vec::new();
    for n in [127, 255, 511] {
        let st = setup(n);
        let t = 0.5 * st.schedule.t_max();
        let time = TimeGrid::new(t, 16).unwrap();
        let (_, check) = make_discrete_subsolution(&st.bump, &st.schedule, time, &st.a, &st.q).unwrap();
        assert!(check.semi_discrete_max <= check.slack);
        slacks.push(check.slack);
    }
    assert!(slacks[1] < slacks[0] && slacks[2] < slacks[1], "{slacks:?}");
}

#[test]
fn subsolution_rejects_long_horizons() {
    let st = setup(31);
    let time = TimeGrid::new(0.95 * st.schedule.t_max(), 8).unwrap();
    assert!(make_discrete_subsolution(&st.bump, &st.schedule, time, &st.a, &st.q).is_err());
}

#[test]
fn sandwich_repair_shrinks_the_barrier() {
    let st = setup(63);
    let upper = solve_fixed_point(&st.a, &st.q, 0.5, 1e-12).unwrap();
    let tiny: Vec<f64> = upper.values.iter().map(|v| 1e-4 * v).collect();
    let fit = fit_sandwich(&st.bump, &st.schedule, &tiny, &st.grid, None).unwrap();
    assert!(fit.halvings > 0);
    let th = fit.schedule.theta(fit.t_end);
    assert!(st
        .grid
        .nodes()
        .iter()
        .zip(&tiny)
        .all(|(x, u)| th * st.bump.psi(*x) <= *u));
    assert!(fit_sandwich(&st.bump, &st.schedule, &vec![0.0; 63], &st.grid, None).is_err());
}

#[test]
fn energy_bound_holds_and_dissipation_shrinks() {
    let st = setup(63);
    let mut dissipation = Vec::new();
    for m in [32, 64, 128] {
        let (lower, upper, _) = sandwich(&st, m);
        let (u, _) = monotone_iteration(&lower, &upper, &st.a, &st.q, 0.5, 1e-11, 500).unwrap();
        let eb = energy_bound(&u, &upper, &st.a, &st.q, 0.5).unwrap();
        assert!(eb.margin() >= 0.0);
        assert!(eb.identity_defect <= 1e-8);
        dissipation.push(eb.dissipation);
    }
    assert!(dissipation[1] < dissipation[0] && dissipation[2] < dissipation[1]);
}

#[test]
fn uniqueness_for_linear_and_superlinear_reaction() {
    let st = setup(63);
    let time = TimeGrid::new(0.5, 256).unwrap();
    for alpha in [1.0, 2.0] {
        let rep = uniqueness_experiment(alpha, &st.a, &st.q, time, 1e-3).unwrap();
        assert!(rep.zero_run_sup <= 1e-12);
        assert!(rep.envelope_margin >= 0.0);
        assert!(rep.step_margin >= 0.0);
    }
    let coarse = TimeGrid::new(10.0, 4).unwrap();
    assert!(uniqueness_experiment(1.0, &st.a, &st.q, coarse, 1e-3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shifts_compose(j1 in 0usize..10, j2 in 0usize..10, seed in any::<u64>()) {
        let grid = Grid1D::new(1.0, 5).unwrap();
        let time = TimeGrid::new(0.8, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut snaps = vec![vec![0.0; 5]];
        for _ in 0..8 {
            snaps.push((0..5).map(|_| rng.random_range(0.0..1.0)).collect());
        }
        let u = Trajectory::new(snaps, grid, time).unwrap();
        let dt = time.dt();
        let twice = time_shift(&time_shift(&u, j1 as f64 * dt).unwrap(), j2 as f64 * dt).unwrap();
        let once = time_shift(&u, (j1 + j2) as f64 * dt).unwrap();
        prop_assert_eq!(twice.snapshots(), once.snapshots());
        prop_assert!((twice.time().t_end() - once.time().t_end()).abs() < 1e-12);
    }

    #[test]
    fn backward_euler_is_order_preserving(seed in any::<u64>(), s in 0.1f64..0.9) {
        let grid = Grid1D::new(1.0, 20).unwrap();
        let a = assemble_operator(&grid, s).unwrap();
        let ev = LinearEvolution::new(&a, TimeGrid::new(0.1, 4).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = u.iter().map(|x| x + rng.random_range(0.0..1.0)).collect();
        let zero = vec![0.0; 20];
        let (su, sv) = (ev.step(&u, &zero), ev.step(&v, &zero));
        prop_assert!(su.iter().zip(&sv).all(|(x, y)| x <= y));
    }
}
