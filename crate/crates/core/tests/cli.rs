//! End-to-end runs of the `trimarket` binary.

use std::path::Path;
use std::process::{Command, Output};

use trimarket::analysis::PROPERTY_IDS;
use trimarket::io::{read_properties, BASE_CHARTS, DEFAULTS_CFG, MATRIX_FILES, RESULT_FILES};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trimarket"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    let out = run(args);
    out.status
        .code()
        .unwrap_or_else(|| panic!("killed: {out:?}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A one-day scenario, fast enough for repeated solves.
fn day_config(dir: &Path) -> std::path::PathBuf {
    let text = DEFAULTS_CFG.replace("horizon = 168", "horizon = 24");
    let path = dir.join("day.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn solve_writes_every_result_file_and_check_accepts_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = day_config(dir.path());
    let out = dir.path().join("out");
    assert_eq!(code(&["solve", "-c", s(&cfg), "-o", s(&out)]), 0);
    for f in RESULT_FILES {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    for (file, _, _) in BASE_CHARTS {
        let text = std::fs::read_to_string(out.join(file)).unwrap();
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    }
    let reports = read_properties(&out.join("properties.json")).unwrap();
    let ids: Vec<&str> = reports.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, PROPERTY_IDS);
    assert_eq!(code(&["check", "-i", s(&out), "--strict"]), 0);
}

#[test]
fn rerun_reproduces_plan_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = day_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&["solve", "-c", s(&cfg), "-o", s(&a), "-P"]), 0);
    // the copied config points at the copied data, so it repeats the run
    assert_eq!(
        code(&["solve", "-c", s(&a.join("config.cfg")), "-o", s(&b), "-P"]),
        0
    );
    for f in ["plan.csv", "duals.csv", "market.csv", "config.cfg"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn tampered_solution_or_plan_fails_strict_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = day_config(dir.path());
    let out = dir.path().join("out");
    assert_eq!(code(&["solve", "-c", s(&cfg), "-o", s(&out), "-P"]), 0);

    let sol_path = out.join("solution.json");
    let original = std::fs::read_to_string(&sol_path).unwrap();
    let mut sol: serde_json::Value = serde_json::from_str(&original).unwrap();
    let x0 = sol["x"][0].as_f64().unwrap();
    sol["x"][0] = serde_json::json!(x0 + 1.0);
    std::fs::write(&sol_path, sol.to_string()).unwrap();
    assert_eq!(code(&["check", "-i", s(&out), "--strict"]), 3);
    // without --strict the failure is reported but not an error
    assert_eq!(code(&["check", "-i", s(&out)]), 0);
    std::fs::write(&sol_path, original).unwrap();
    assert_eq!(code(&["check", "-i", s(&out), "--strict"]), 0);

    let plan_path = out.join("plan.csv");
    let plan = std::fs::read_to_string(&plan_path).unwrap();
    let mut lines: Vec<String> = plan.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[1].split(',').map(String::from).collect();
    cells[1] = (cells[1].parse::<f64>().unwrap() + 0.5).to_string();
    lines[1] = cells.join(",");
    std::fs::write(&plan_path, lines.join("\n") + "\n").unwrap();
    assert_eq!(code(&["check", "-i", s(&out), "--strict"]), 3);
}

#[test]
fn sweep_writes_one_row_per_point_and_component_charts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = day_config(dir.path());
    let out = dir.path().join("sweep");
    let args = [
        "sweep",
        "-c",
        s(&cfg),
        "-p",
        "r",
        "-f",
        "0.5",
        "-t",
        "0.95",
        "-n",
        "10",
        "-o",
        s(&out),
    ];
    assert_eq!(code(&args), 0);
    let mut rdr = csv::Reader::from_path(out.join("day_r.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().get(0), Some("r"));
    assert_eq!(rdr.records().count(), 10);
    for c in ["rev_g", "rev_r", "rev_c", "cost_g", "profit"] {
        assert!(out.join(format!("day_r_{c}.svg")).is_file(), "{c}");
    }
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn inventory_matrix_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = day_config(dir.path());
    let out = dir.path().join("m");
    assert_eq!(code(&["inventory-matrix", "-c", s(&cfg), "-o", s(&out)]), 0);
    for f in MATRIX_FILES {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let rows = csv::Reader::from_path(out.join("matrix.csv"))
        .unwrap()
        .records()
        .count();
    assert_eq!(rows, 4);
    assert!(out.join("daily_rec_profit.svg").is_file());
}

#[test]
fn gen_data_output_feeds_solve() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("m.csv");
    assert_eq!(
        code(&["gen-data", "-s", "3", "-T", "48", "-o", s(&data)]),
        0
    );
    let rows = csv::Reader::from_path(&data).unwrap().records().count();
    assert_eq!(rows, 48);
    let cfg = DEFAULTS_CFG.replace("horizon = 168", "horizon = 48");
    let cfg_path = dir.path().join("c.cfg");
    std::fs::write(&cfg_path, cfg).unwrap();
    let out = dir.path().join("out");
    assert_eq!(
        code(&[
            "solve",
            "-c",
            s(&cfg_path),
            "-d",
            s(&data),
            "-o",
            s(&out),
            "-P"
        ]),
        0
    );
    assert_eq!(
        std::fs::read(&data).unwrap(),
        std::fs::read(out.join("market.csv")).unwrap()
    );
}

#[test]
fn usage_and_input_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["solve", "--no-such-flag"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["--help"]), 0);
    let missing = dir.path().join("nope.cfg");
    let out = run(&["solve", "-c", s(&missing), "-o", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.cfg"));

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, DEFAULTS_CFG.replace("tg.k = 0.9\n", "")).unwrap();
    let out = run(&["solve", "-c", s(&bad), "-o", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tg.k"));
}

#[test]
fn infeasible_model_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // no grid purchases and no TG output cannot cover the load
    let text = DEFAULTS_CFG
        .replace("horizon = 168", "horizon = 24")
        .replace("tg.g_max = 80", "tg.g_max = 0")
        .replace("caps.g = 400", "caps.g = 0");
    let cfg = dir.path().join("inf.cfg");
    std::fs::write(&cfg, text).unwrap();
    let out = run(&["solve", "-c", s(&cfg), "-o", s(&dir.path().join("o"))]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}
