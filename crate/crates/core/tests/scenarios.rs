//! Scenario-level behaviour on the default week and on the sensitivity
//! checks.

use trimarket::analysis::{
    affine_sensitivity, envelope_check, rps_priority_check, solve_model, Param, PropertyStatus,
    PROPERTY_IDS,
};
use trimarket::model::{is_daily_blocked, validate_config, ValidatedModel, VppConfig};
use trimarket::qp::SolverSettings;
use trimarket::scenarios::{
    default_grid, inventory_matrix, parameter_sweep, random_instance, run_scenario, synth_data,
    tou_band, CapMode, InventoryCell, RandomOptions, ScenarioOptions, SynthSpec,
};

fn week(edit: impl FnOnce(&mut VppConfig)) -> ValidatedModel {
    let mut cfg = VppConfig::default();
    edit(&mut cfg);
    validate_config(cfg, synth_data(&SynthSpec::default())).unwrap()
}

#[test]
fn synthetic_data_follow_their_contract() {
    let spec = SynthSpec::default();
    let d = synth_data(&spec);
    assert_eq!(d, synth_data(&spec));
    assert_ne!(
        d,
        synth_data(&SynthSpec {
            seed: 2,
            ..spec.clone()
        })
    );
    assert_eq!(d.len(), 168);
    let tou = [spec.tou_off, spec.tou_mid, spec.tou_peak];
    for (t, p) in d.pi_g.iter().enumerate() {
        assert_eq!(*p, tou[tou_band(t % 24)]);
    }
    assert!(is_daily_blocked(&d.pi_r) && is_daily_blocked(&d.pi_c));
    assert!(d.pi_r.iter().all(|p| (20.0..=50.0).contains(p)));
    assert!(d.pi_c.iter().all(|p| (40.0..=60.0).contains(p)));
    assert!(d.e.iter().chain(&d.l).all(|v| *v >= 0.0));
}

#[test]
fn default_week_reports_every_property_without_failure() {
    let res = run_scenario(&week(|_| {}), &ScenarioOptions::default()).unwrap();
    let ids: Vec<&str> = res.reports.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, PROPERTY_IDS);
    let failed: Vec<_> = res.failures().map(|r| (&r.id, &r.detail)).collect();
    assert!(failed.is_empty(), "{failed:?}");
    assert!(res.breakdown.profit > 0.0);
}

#[test]
fn inventories_raise_default_week_profit() {
    let m = inventory_matrix(&week(|_| {}), &SolverSettings::default()).unwrap();
    assert!(m.nesting_holds() && m.decoupled());
    for c in [
        InventoryCell::CerOnly,
        InventoryCell::RecOnly,
        InventoryCell::Both,
    ] {
        assert!(m.cell(c).improvement > 0.0, "{}", c.name());
    }
    let both = m.cell(InventoryCell::Both).improvement;
    assert!(both >= m.cell(InventoryCell::RecOnly).improvement);
}

#[test]
fn uncapped_certificate_trade_isolates_its_revenue() {
    let s = SolverSettings::default();
    let m = week(|c| c.caps.r_cap = None);
    let sw = parameter_sweep(&m, Param::R, &default_grid(Param::R, 11), &s).unwrap();
    assert!(sw.monotone());
    assert_eq!(sw.varying(), ["rev_r"]);
    let m = week(|c| c.caps.c_cap = None);
    let sw = parameter_sweep(&m, Param::Alpha, &default_grid(Param::Alpha, 11), &s).unwrap();
    assert!(sw.monotone());
    assert_eq!(sw.varying(), ["rev_c"]);
}

#[test]
fn capped_quota_sweep_moves_the_thermal_generator() {
    let sw = parameter_sweep(
        &week(|_| {}),
        Param::Alpha,
        &default_grid(Param::Alpha, 21),
        &SolverSettings::default(),
    )
    .unwrap();
    assert!(sw.monotone());
    let v = sw.varying();
    assert!(v.contains(&"rev_g") && v.contains(&"cost_g"), "{v:?}");
    assert!(!sw.breakpoints.is_empty());
}

#[test]
fn quota_response_is_affine_inside_a_region() {
    let m = week(|c| c.caps.c_cap = Some(50.0));
    let rep = affine_sensitivity(
        &m,
        Param::Alpha,
        &[0.18, 0.20, 0.22],
        &SolverSettings::default(),
    )
    .unwrap();
    assert_ne!(
        rep.report.status,
        PropertyStatus::Fail,
        "{}",
        rep.report.detail
    );
}

#[test]
fn rps_response_has_breakpoints_on_a_wide_grid() {
    let m = week(|c| {
        c.caps.r_cap = Some(50.0);
        c.ess.p_c_max = 100.0;
        c.ess.p_d_max = 100.0;
    });
    let rep = affine_sensitivity(
        &m,
        Param::R,
        &default_grid(Param::R, 21),
        &SolverSettings::default(),
    )
    .unwrap();
    assert!(!rep.breakpoints.is_empty());
    assert_ne!(
        rep.report.status,
        PropertyStatus::Fail,
        "{}",
        rep.report.detail
    );
}

/// r scales the charging power in the portfolio standard, so inside one
/// active set the optimum is rational in r. The curvature shows as a second
/// difference that shrinks with the square of the step.
#[test]
fn rps_response_curves_when_charging_moves_with_r() {
    let opts = RandomOptions {
        caps: CapMode::Mixed,
        ..RandomOptions::default()
    };
    let (cfg, data) = random_instance(5, 24, &opts);
    let m = validate_config(cfg, data).unwrap();
    let c = m.config().policy.r;
    let second_diff = |h: f64| {
        let rep = affine_sensitivity(&m, Param::R, &[c - h, c, c + h], &SolverSettings::default())
            .unwrap();
        assert_eq!(rep.regions.len(), 1);
        rep.segments[0].max_second_diff_all
    };
    let (big, small) = (second_diff(0.01), second_diff(0.005));
    assert!(big > 1e-5, "second difference {big}");
    assert!((big / small - 4.0).abs() < 0.1, "ratio {}", big / small);
    // α enters only the right-hand side and stays affine on the same instance
    let a = m.config().policy.alpha;
    let rep = affine_sensitivity(
        &m,
        Param::Alpha,
        &[a - 0.005, a, a + 0.005],
        &SolverSettings::default(),
    )
    .unwrap();
    assert_ne!(
        rep.report.status,
        PropertyStatus::Fail,
        "{}",
        rep.report.detail
    );
}

#[test]
fn envelope_and_rps_priority_hold_on_the_default_week() {
    let s = SolverSettings::default();
    let base = solve_model(&week(|_| {}), &s).unwrap();
    let env = envelope_check(&base, 1.0, 1e-3, &s).unwrap();
    assert_eq!(env.status, PropertyStatus::Pass, "{}", env.detail);
    let pri = rps_priority_check(&base, 0.01, &s).unwrap();
    assert_ne!(pri.status, PropertyStatus::Fail, "{}", pri.detail);
}
