//! Properties that hold on every instance, checked on random ones.

use proptest::prelude::*;

use trimarket::analysis::{
    check_prop1, classify_cer, classify_rec, solve_model, tie_break, PropertyStatus,
};
use trimarket::model::{assemble_qp, validate_config, ValidatedModel};
use trimarket::qp::{oracle_solve, solve_qp, SolverSettings};
use trimarket::scenarios::{
    inventory_matrix, random_instance, CapMode, RandomOptions, RevenueBreakdown,
};

fn caps_mode() -> impl Strategy<Value = CapMode> {
    prop_oneof![
        Just(CapMode::Finite),
        Just(CapMode::Unbounded),
        Just(CapMode::Mixed)
    ]
}

fn instance(seed: u64, horizon: usize, caps: CapMode, hourly: bool) -> ValidatedModel {
    let opts = RandomOptions {
        caps,
        hourly_certificate_prices: hourly,
        ..RandomOptions::default()
    };
    let (cfg, data) = random_instance(seed, horizon, &opts);
    validate_config(cfg, data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn solutions_meet_kkt_and_profit_matches_breakdown(
        seed in any::<u64>(),
        horizon in 1usize..=48,
        caps in caps_mode(),
        hourly in any::<bool>(),
    ) {
        let m = instance(seed, horizon, caps, hourly);
        let s = solve_model(&m, &SolverSettings::default()).unwrap();
        prop_assert!(s.residuals.max() <= 1e-6, "residuals {:?}", s.residuals);
        let b = RevenueBreakdown::from_plan(&s.plan, m.data(), &m.config().tg);
        prop_assert!((b.profit - s.objective()).abs() <= 1e-9 * (1.0 + s.objective().abs()));
        prop_assert!(s.plan.overlap.iter().all(|o| *o >= 0.0));
    }

    #[test]
    fn small_instances_agree_with_the_oracle(
        seed in any::<u64>(),
        horizon in 1usize..=3,
        caps in caps_mode(),
        hourly in any::<bool>(),
    ) {
        let p = assemble_qp(&instance(seed, horizon, caps, hourly));
        let ipm = solve_qp(&p.qp, &SolverSettings::default()).unwrap();
        let ora = oracle_solve(&p.qp).unwrap();
        prop_assert!((ipm.objective - ora.objective).abs() <= 1e-6 * (1.0 + ora.objective.abs()));
    }

    #[test]
    fn tie_break_moves_profit_only_slightly(seed in any::<u64>(), caps in caps_mode()) {
        let m = instance(seed, 24, caps, false);
        let plain = assemble_qp(&m);
        let a = solve_qp(&plain.qp, &SolverSettings::default()).unwrap();
        let b = solve_qp(&tie_break(&plain, 1e-7).qp, &SolverSettings::default()).unwrap();
        prop_assert!(b.polished);
        let shifted = plain.qp.objective(&b.x);
        prop_assert!(shifted <= a.objective + 1e-7 * (1.0 + a.objective.abs()));
        prop_assert!(a.objective - shifted <= 1e-5 * (1.0 + a.objective.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn storage_never_charges_and_discharges_together_under_a_binding_standard(
        seed in any::<u64>(),
        caps in caps_mode(),
    ) {
        let opts = RandomOptions { r_range: (0.5, 1.0), caps, ..RandomOptions::default() };
        let (cfg, data) = random_instance(seed, 24, &opts);
        let r = cfg.policy.r;
        let s = solve_model(&validate_config(cfg, data).unwrap(), &SolverSettings::default()).unwrap();
        let rep = check_prop1(&s.raw_plan, &s.duals, r);
        prop_assert_ne!(rep.status, PropertyStatus::Fail, "{}", rep.detail);
    }

    #[test]
    fn uncapped_shadow_prices_equal_extreme_certificate_prices(seed in any::<u64>()) {
        let m = instance(seed, 48, CapMode::Unbounded, false);
        let s = solve_model(&m, &SolverSettings::default()).unwrap();
        let (_, _, cor1) = classify_cer(&s.model, &s.plan, &s.duals);
        let (_, _, cor2, _) = classify_rec(&s.model, &s.plan, &s.duals);
        prop_assert_ne!(cor1.status, PropertyStatus::Fail, "{}", cor1.detail);
        prop_assert_ne!(cor2.status, PropertyStatus::Fail, "{}", cor2.detail);
    }

    #[test]
    fn inventories_never_reduce_profit(seed in any::<u64>(), caps in caps_mode()) {
        let m = instance(seed, 24, caps, false);
        let r = inventory_matrix(&m, &SolverSettings::default()).unwrap();
        prop_assert!(r.nesting_holds());
    }
}
