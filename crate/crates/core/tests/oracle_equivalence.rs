use trimarket::model::{assemble_qp, validate_config};
use trimarket::qp::{kkt_residuals, oracle_solve, solve_qp, SolverSettings};
use trimarket::scenarios::{random_instance, CapMode, RandomOptions};

#[test]
fn random_three_hour_instances_match_oracle() {
    for (k, caps) in [CapMode::Mixed, CapMode::Finite, CapMode::Unbounded]
        .into_iter()
        .enumerate()
    {
        let opts = RandomOptions {
            caps,
            hourly_certificate_prices: k == 0,
            ..Default::default()
        };
        for seed in 0..20u64 {
            let (cfg, data) = random_instance(seed, 3, &opts);
            let p = assemble_qp(&validate_config(cfg, data).unwrap());
            let ipm = solve_qp(&p.qp, &SolverSettings::default()).unwrap();
            assert!(
                ipm.is_optimal(),
                "seed {seed} caps {caps:?}: {:?}",
                ipm.status
            );
            let ora = oracle_solve(&p.qp).unwrap();
            let rel = (ipm.objective - ora.objective).abs() / (1.0 + ora.objective.abs());
            let rk = kkt_residuals(&p.qp, &ora).unwrap();
            println!("{caps:?} seed {seed}: ipm {:.8} oracle {:.8} rel {rel:.1e} polished {} oracle kkt {:.1e}/{:.1e}/{:.1e}",
                ipm.objective, ora.objective, ipm.polished, rk.primal_inf, rk.dual_inf, rk.comp_gap);
            assert!(rel <= 1e-4, "seed {seed}");
        }
    }
}
