use trimarket::model::{assemble_qp, validate_config, MarketData, Role, VppConfig};
use trimarket::qp::{kkt_residuals, oracle_solve, solve_qp, SolverSettings};

fn hand_model() -> trimarket::model::ValidatedModel {
    let mut cfg = VppConfig::default();
    cfg.horizon = 1;
    cfg.policy.r = 0.5;
    cfg.policy.alpha = 1.0;
    cfg.caps.g_cap = None;
    cfg.caps.r_cap = None;
    cfg.caps.c_cap = None;
    validate_config(cfg, MarketData::flat(1, 100.0, 20.0, 30.0, 10.0, 5.0)).unwrap()
}

#[test]
fn hand_instance_profit_both_solvers() {
    let p = assemble_qp(&hand_model());
    let ipm = solve_qp(&p.qp, &SolverSettings::default()).unwrap();
    let ora = oracle_solve(&p.qp).unwrap();
    for sol in [&ipm, &ora] {
        assert!(
            (sol.objective - 2810.0).abs() < 1e-6,
            "objective {}",
            sol.objective
        );
        let x = |r: Role| sol.x[p.layout.index(0, r)];
        assert!(x(Role::G).abs() < 1e-7);
        assert!((x(Role::GridTrade) - 5.0).abs() < 1e-7);
        assert!((x(Role::RecRetired) - 2.5).abs() < 1e-7);
        assert!((x(Role::RecTrade) - 7.5).abs() < 1e-7);
        assert!((x(Role::CerQuota) - 72.0).abs() < 1e-7);
        assert!((x(Role::CerTrade) - 72.0).abs() < 1e-7);
        let r = kkt_residuals(&p.qp, sol).unwrap();
        assert!(
            r.primal_inf < 1e-7 && r.dual_inf < 1e-6 && r.comp_gap < 1e-6,
            "{r:?}"
        );
    }
    println!("ipm iters {} polished {}", ipm.iterations, ipm.polished);
}

#[test]
fn default_week_solves_quickly() {
    use trimarket::scenarios::{synth_data, SynthSpec};
    let _ = env_logger::builder().is_test(true).try_init();
    for t in [168usize, 336] {
        let mut cfg = VppConfig::default();
        cfg.horizon = t;
        let data = synth_data(&SynthSpec {
            horizon: t,
            ..SynthSpec::default()
        });
        let m = validate_config(cfg, data).unwrap();
        let p = assemble_qp(&m);
        let start = std::time::Instant::now();
        let sol = solve_qp(&p.qp, &SolverSettings::default()).unwrap();
        let r = kkt_residuals(&p.qp, &sol).unwrap();
        let rel = trimarket::qp::relative_residuals(&p.qp, &sol.x, sol.objective, &r);
        println!("T={t} status {:?} iters {} polished {} obj {:.4} time {:?} rel {:?} duals mu {} delta {}",
            sol.status, sol.iterations, sol.polished, sol.objective, start.elapsed(), rel, sol.ineq_duals[0], sol.ineq_duals[1]);
    }
}
