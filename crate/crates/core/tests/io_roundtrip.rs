use trimarket::analysis::solve_model;
use trimarket::io::{
    parse_config, read_config, read_market_csv, read_plan_csv, read_solution, render_config,
    write_config, write_market_csv, write_plan_csv, DEFAULTS_CFG,
};
use trimarket::model::validate_config;
use trimarket::qp::SolverSettings;
use trimarket::scenarios::{random_instance, synth_data, RandomOptions, SynthSpec};

#[test]
fn config_survives_render_and_parse() {
    let mut cfg = parse_config(DEFAULTS_CFG).unwrap();
    cfg.vpp.policy.r = 0.1 + 0.2;
    cfg.vpp.caps.r_cap = None;
    cfg.vpp.tg.a = 1.0 / 3.0;
    let back = parse_config(&render_config(&cfg)).unwrap();
    assert_eq!(back.vpp, cfg.vpp);
    assert_eq!(back.synth, cfg.synth);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.cfg");
    write_config(&path, &cfg).unwrap();
    assert_eq!(read_config(&path).unwrap().vpp, cfg.vpp);
}

#[test]
fn relative_data_path_resolves_against_config_directory() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("run");
    std::fs::create_dir(&sub).unwrap();
    let text = DEFAULTS_CFG
        .lines()
        .filter(|l| !l.starts_with("synth."))
        .collect::<Vec<_>>()
        .join("\n")
        + "\ndata = m.csv\n";
    std::fs::write(sub.join("c.cfg"), text).unwrap();
    let cfg = read_config(&sub.join("c.cfg")).unwrap();
    assert_eq!(cfg.data.as_deref(), Some(sub.join("m.csv").as_path()));
    assert!(cfg.synth.is_none());
}

#[test]
fn market_and_plan_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, data) = random_instance(4, 48, &RandomOptions::default());
    let market = dir.path().join("m.csv");
    write_market_csv(&market, &data).unwrap();
    assert_eq!(read_market_csv(&market).unwrap(), data);

    let s = solve_model(
        &validate_config(cfg, data).unwrap(),
        &SolverSettings::default(),
    )
    .unwrap();
    let plan = dir.path().join("plan.csv");
    write_plan_csv(&plan, &s.plan).unwrap();
    let back = read_plan_csv(&plan, s.plan.netted).unwrap();
    assert_eq!(back.columns(), s.plan.columns());
}

#[test]
fn saved_solution_reads_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        horizon: 24,
        ..SynthSpec::default()
    };
    let cfg = trimarket::model::VppConfig {
        horizon: 24,
        ..Default::default()
    };
    let s = solve_model(
        &validate_config(cfg, synth_data(&spec)).unwrap(),
        &SolverSettings::default(),
    )
    .unwrap();
    let path = dir.path().join("solution.json");
    std::fs::write(&path, serde_json::to_string(&s.solution).unwrap()).unwrap();
    let back = read_solution(&path).unwrap();
    assert_eq!(back.x, s.solution.x);
    assert_eq!(back.eq_duals, s.solution.eq_duals);
    assert_eq!(back.status, s.solution.status);
}
