use hypwave::globalsolver::{picard_solve, weighted_norm, SolverConfig, SolverContext};
use hypwave::nonlin::{Nonlinearity, NonlinearitySpec};
use hypwave::{Error, QuadratureConfig, RadialProfile, SpaceTimeField};

fn ctx(p: f64, h: f64, step: f64, len: f64) -> SolverContext {
    let spec = NonlinearitySpec::canonical(p).unwrap();
    let cfg = SolverConfig::new(p, h, 0.0).with_grid(len, len, step, step);
    let u1 = RadialProfile::theta(1.0).unwrap();
    SolverContext::new(&RadialProfile::zero(), &u1, Some(&spec), &cfg, &QuadratureConfig::default()).unwrap()
}

#[test]
fn linear_run_is_the_scaled_linear_solution() {
    let cfg = SolverConfig::new(3.5, 1.2, 0.0).with_grid(3.0, 3.0, 0.2, 0.2);
    let u1 = RadialProfile::theta(1.0).unwrap();
    let c = SolverContext::new(&RadialProfile::zero(), &u1, None, &cfg, &QuadratureConfig::default()).unwrap();
    let run = c.picard(0.3).unwrap();
    for (v, l) in run.values.iter().zip(c.linear()) {
        assert_eq!(*v, 0.3 * l);
    }
}

#[test]
fn converged_runs_satisfy_the_fixed_point_and_stay_in_the_ball() {
    let c = ctx(3.5, 1.2, 0.2, 4.0);
    let th = c.epsilon_threshold(8, 3, 0.5).unwrap();
    for eps in [th.epsilon, th.epsilon / 2.0, th.epsilon / 10.0] {
        let run = c.picard(eps).unwrap();
        let tol = c.config().fixed_point_tol;
        assert!(c.residual(eps, &run.values) <= 2.0 * tol);
        assert!(c.norm(&run.values) <= 2.0 * eps * c.n_h());
        for w in run.history.windows(2) {
            assert!(w[1] <= 0.5 * w[0], "history {:?}", run.history);
        }
    }
}

#[test]
fn large_data_escape_and_short_budgets_fail_with_history() {
    let c = ctx(3.5, 1.2, 0.2, 4.0);
    assert!(matches!(c.picard(5.0), Err(Error::DomainEscape { iteration: 0, .. })));
    let spec = NonlinearitySpec::canonical(3.5).unwrap();
    let mut cfg = SolverConfig::new(3.5, 1.2, 1e-3).with_grid(2.0, 2.0, 0.2, 0.2);
    cfg.max_iters = 1;
    let u1 = RadialProfile::theta(1.0).unwrap();
    match picard_solve(&RadialProfile::zero(), &u1, &spec, &cfg) {
        Err(Error::NonConvergence { history }) => assert_eq!(history.len(), 1),
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn contraction_ratio_shrinks_with_epsilon() {
    let c = ctx(3.5, 1.2, 0.2, 4.0);
    let mut last = f64::INFINITY;
    for eps in [1e-1, 5e-2, 2.5e-2, 1e-3, 1e-6] {
        let r = c.contraction_probe(eps, 6, 11);
        assert!(r.max_ratio <= last * (1.0 + 1e-12), "eps {eps}: {} > {last}", r.max_ratio);
        assert_eq!(r.max_ratio, r.ratios.iter().copied().fold(0.0, f64::max));
        last = r.max_ratio;
    }
}

#[test]
fn threshold_is_deterministic_and_fails_for_zero_target() {
    let c = ctx(3.5, 1.2, 0.25, 2.0);
    let a = c.epsilon_threshold(4, 5, 0.5).unwrap();
    let b = c.epsilon_threshold(4, 5, 0.5).unwrap();
    assert_eq!(a, b);
    assert!(matches!(c.epsilon_threshold(4, 5, 0.0), Err(Error::Threshold(_))));
}

#[test]
fn threshold_exists_for_p4() {
    let c = ctx(4.0, 1.5, 0.25, 2.0);
    let th = c.epsilon_threshold(4, 1, 0.5).unwrap();
    assert!(th.epsilon > 0.0 && th.max_ratio <= 0.5);
}

fn pde_residual(u: &SpaceTimeField, f: &dyn Nonlinearity, pts: &[(f64, f64)]) -> f64 {
    let h = u.t_grid()[1] - u.t_grid()[0];
    let mut worst = 0.0f64;
    for &(t, r) in pts {
        let i = SpaceTimeField::index_of(u.t_grid(), t).unwrap();
        let j = SpaceTimeField::index_of(u.r_grid(), r).unwrap();
        let c = u.get(i, j);
        let utt = (u.get(i + 1, j) - 2.0 * c + u.get(i - 1, j)) / (h * h);
        let urr = (u.get(i, j + 1) - 2.0 * c + u.get(i, j - 1)) / (h * h);
        let ur = (u.get(i, j + 1) - u.get(i, j - 1)) / (2.0 * h);
        worst = worst.max((utt - urr - ur / r.tanh() - 0.25 * c - f.eval(c)).abs());
    }
    worst
}

#[test]
fn solution_satisfies_the_pde_under_refinement() {
    let spec = NonlinearitySpec::canonical(3.5).unwrap();
    let pts = [(1.6, 0.8), (2.0, 1.0), (2.4, 1.6), (3.0, 2.0), (2.0, 3.0)];
    let u1 = RadialProfile::theta(1.0).unwrap();
    let mut res = Vec::new();
    for step in [0.2, 0.1] {
        let cfg = SolverConfig::new(3.5, 1.2, 0.05).with_grid(4.0, 4.0, step, step);
        let sol = picard_solve(&RadialProfile::zero(), &u1, &spec, &cfg).unwrap();
        assert!(weighted_norm(&sol.field, 1.2) <= 2.0 * 0.05 * sol.n_h);
        res.push(pde_residual(&sol.field, &spec, &pts));
    }
    assert!(res[1] < 0.5 * res[0], "residuals {res:?}");
}
