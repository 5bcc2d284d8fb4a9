//! Small instances on which the multiplier lemmas and the purchase-timing
//! corollary fail. Each is solved by the interior-point method and by the
//! enumeration oracle, and both optima must show the violation.

use trimarket::analysis::{classify_cer, classify_rec, PropertyStatus, SolvedModel};
use trimarket::model::{assemble_qp, validate_config, MarketData, ValidatedModel, VppConfig};
use trimarket::qp::{oracle_solve, solve_qp, SolverSettings};

/// The instance solved both ways.
fn both_routes(model: &ValidatedModel) -> [SolvedModel; 2] {
    let problem = assemble_qp(model);
    let ipm = solve_qp(&problem.qp, &SolverSettings::default()).unwrap();
    let ora = oracle_solve(&problem.qp).unwrap();
    assert!(ipm.is_optimal() && ora.is_optimal());
    assert!(
        (ipm.objective - ora.objective).abs() <= 1e-7 * (1.0 + ora.objective.abs()),
        "ipm {} oracle {}",
        ipm.objective,
        ora.objective
    );
    [ipm, ora].map(|s| SolvedModel::from_solution(model, problem.clone(), s).unwrap())
}

fn base(horizon: usize) -> VppConfig {
    let mut cfg = VppConfig {
        horizon,
        ..VppConfig::default()
    };
    cfg.caps.g_cap = None;
    cfg.caps.r_cap = None;
    cfg.caps.c_cap = None;
    cfg
}

#[test]
fn quota_multiplier_positive_with_every_cer_sale_at_cap() {
    // Selling a CER at 150 beats burning the quota in the TG, so the sale sits
    // at its cap; the leftover quota still has value for the TG, so δ > 0.
    let mut cfg = base(1);
    cfg.policy.r = 0.0;
    cfg.policy.alpha = 30.0 / 72.0;
    cfg.caps.c_cap = Some(10.0);
    cfg.rec.enabled = false;
    cfg.cer.enabled = false;
    let model = validate_config(cfg, MarketData::flat(1, 200.0, 20.0, 150.0, 0.0, 0.0)).unwrap();
    for s in both_routes(&model) {
        assert!(s.duals.delta > 1e-3, "δ = {}", s.duals.delta);
        assert!((s.plan.cer_trade[0] - 10.0).abs() < 1e-7);
        let (_, lemma, _) = classify_cer(&s.model, &s.plan, &s.duals);
        assert_eq!(lemma.status, PropertyStatus::Fail, "{}", lemma.detail);
    }
}

#[test]
fn rps_multiplier_zero_with_a_rec_sale_below_cap() {
    // A renewable surplus in hour 1 exceeds the REC cap, so the excess must be
    // retired and over-fulfils the standard (μ = 0); hour 2 sells its few RECs
    // below the cap.
    let mut cfg = base(2);
    cfg.policy.r = 0.5;
    cfg.caps.r_cap = Some(20.0);
    cfg.rec.enabled = false;
    cfg.cer.enabled = false;
    let mut data = MarketData::flat(2, 100.0, 20.0, 30.0, 0.0, 10.0);
    data.e = vec![100.0, 5.0];
    let model = validate_config(cfg, data).unwrap();
    for s in both_routes(&model) {
        assert!(s.duals.mu.abs() < 1e-7, "μ = {}", s.duals.mu);
        assert!((s.plan.rec_trade[1] - 5.0).abs() < 1e-7);
        let (_, lemma, _, _) = classify_rec(&s.model, &s.plan, &s.duals);
        assert_eq!(lemma.status, PropertyStatus::Fail, "{}", lemma.detail);
    }
}

#[test]
fn rec_bought_above_minimum_price_for_storage() {
    // Buying at 30 to deposit and sell at 50 later is profitable even though
    // 20 is the cheapest price, because the deposit cap limits what hour 3
    // alone can move.
    let mut cfg = base(3);
    cfg.policy.r = 0.5;
    cfg.rec.w_max = 20.0;
    cfg.rec.d_max = 10.0;
    cfg.rec.i_max = 20.0;
    cfg.cer.enabled = false;
    let mut data = MarketData::flat(3, 100.0, 0.0, 30.0, 0.0, 10.0);
    data.pi_r = vec![30.0, 50.0, 20.0];
    let model = validate_config(cfg, data).unwrap();
    for s in both_routes(&model) {
        assert!(
            s.plan.rec_trade[0] < -1e-6,
            "hour 1 trade {}",
            s.plan.rec_trade[0]
        );
        let (_, _, _, timing) = classify_rec(&s.model, &s.plan, &s.duals);
        assert_eq!(timing.status, PropertyStatus::Fail, "{}", timing.detail);
    }
}
