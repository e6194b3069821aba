use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qcrelax_cli::{run_batch, run_case, run_network, ManifestEntry, RunOptions, VariantSpec};
use qcrelax_conic::SolverRegistry;
use qcrelax_core::netdata::validate;
use qcrelax_core::qcmodel::{check_ac_point, AcPoint};
use qcrelax_testkit::criteria::instance;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn qcrelax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcrelax"))
        .args(args)
        .env_remove("QCRELAX_SOLVER_TOL")
        .output()
        .unwrap()
}

/// Local AC solution of toy2.m, re-verified below.
fn toy2_point() -> AcPoint {
    AcPoint {
        vm: vec![1.0751372529207042, 1.05],
        va: vec![0.0, -0.05149813648649225],
        pg: vec![0.6035892204137498],
        qg: vec![0.2133080030112999],
    }
}

fn ac_cost(case: &str, point: &AcPoint) -> f64 {
    let mut net = qcrelax_cli::load_case(&data(case)).unwrap();
    validate(&mut net);
    let r = check_ac_point(&net, point).unwrap();
    assert!(r.max_violation() <= 1e-7, "{r:?}");
    r.objective
}

#[test]
fn gap_against_a_feasible_cost_is_nonnegative() {
    let ac = ac_cost("toy2.m", &toy2_point());
    assert!((ac - 702.5465519).abs() < 1e-6);
    for spec in [VariantSpec::new(false, false, false), VariantSpec::default()] {
        let opts = RunOptions {
            variant: spec,
            ac_objective: Some(ac),
            ..RunOptions::default()
        };
        let r = run_case(&data("toy2.m"), &opts, &SolverRegistry::builtin()).unwrap();
        let gap = r.gap_percent.unwrap();
        assert!(gap >= -1e-6, "{spec}: {gap}");
        assert!(r.qc_bound > 0.0);
    }
}

#[test]
fn run_without_ac_objective_omits_the_gap() {
    let out = qcrelax(&["run", data("toy3.m").to_str().unwrap(), "--no-bt"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["gap_percent"].is_null());
    assert!(report["qc_bound"].as_f64().unwrap() > 0.0);
    assert_eq!(report["variant"], "no-bt");
}

#[test]
fn run_reports_gap_and_timing_as_csv() {
    let out = qcrelax(&["run", data("toy2.m").to_str().unwrap(), "--ac-objective", "702.5465519", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let get = |name: &str| row[headers.iter().position(|h| h == name).unwrap()].to_string();
    assert!(get("gap_percent").parse::<f64>().unwrap() >= -1e-6);
    assert!(get("bt_time").parse::<f64>().unwrap() >= 0.0);
    assert_eq!(get("status"), "optimal");
}

#[test]
fn exit_codes_distinguish_failures() {
    let code = |args: &[&str]| qcrelax(args).status.code();
    assert_eq!(code(&["run", data("broken.m").to_str().unwrap()]), Some(3));
    assert_eq!(code(&["run", data("missing.m").to_str().unwrap()]), Some(3));
    assert_eq!(code(&["run", data("overload2.m").to_str().unwrap()]), Some(4));
    assert_eq!(code(&["run", data("overload2.m").to_str().unwrap(), "--no-bt"]), Some(4));
    assert_eq!(code(&["run", data("toy2.m").to_str().unwrap(), "--solver", "nope"]), Some(3));
    assert_eq!(code(&["run", data("toy2.m").to_str().unwrap(), "--format", "xml"]), Some(2));
    let bad_env = Command::new(env!("CARGO_BIN_EXE_qcrelax"))
        .args(["run", data("toy2.m").to_str().unwrap()])
        .env("QCRELAX_SOLVER_TOL", "loose")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(1));
}

#[test]
fn solver_tolerance_comes_from_the_environment() {
    let run = |tol: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qcrelax"));
        cmd.args(["run", data("ring3.m").to_str().unwrap(), "--no-bt"]);
        match tol {
            Some(t) => cmd.env("QCRELAX_SOLVER_TOL", t),
            None => cmd.env_remove("QCRELAX_SOLVER_TOL"),
        };
        let out = cmd.output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["solver"]["iterations"].as_u64().unwrap()
    };
    assert!(run(Some("1e-3")) < run(None));
}

fn manifest(dir: &Path, body: &str) -> PathBuf {
    for case in ["toy2.m", "toy3.m", "ring3.m"] {
        std::fs::copy(data(case), dir.join(case)).unwrap();
    }
    let path = dir.join("manifest.json");
    std::fs::write(&path, body).unwrap();
    path
}

const FOUR: &str = r#"["no-bt-mf-vdiff", "no-bt", "no-mf-vdiff", "all"]"#;

#[test]
fn batch_is_the_cartesian_product() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"[{{"case": "toy2.m", "ac_objective": 702.5465519, "variants": {FOUR}}},
            {{"case": "toy3.m", "ac_objective": 1021.1153432, "variants": {FOUR}}},
            {{"case": "ring3.m", "variants": {FOUR}}}]"#
    );
    let path = manifest(dir.path(), &body);
    let out = qcrelax(&["batch", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(&rows[0][0], "toy2.m");
    assert_eq!(&rows[11][1], "all");
    // gaps only where an AC objective was given
    assert!(rows[..8].iter().all(|r| !r[8].is_empty()));
    assert!(rows[8..].iter().all(|r| r[8].is_empty()));
}

#[test]
fn batch_records_row_errors_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let path = manifest(
        dir.path(),
        r#"[{"case": "gone.m", "variants": ["all"]}, {"case": "toy2.m", "variants": ["no-bt"]}]"#,
    );
    let out = qcrelax(&["batch", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(6));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(rows[0]["error"].as_str().unwrap().contains("cannot read"));
    assert!(rows[1]["error"].is_null());
    assert!(rows[1]["report"]["qc_bound"].as_f64().unwrap() > 0.0);
}

#[test]
fn empty_manifest_is_an_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = manifest(dir.path(), "[]");
    let out = qcrelax(&["batch", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
    let out = qcrelax(&["batch", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "[]");
}

#[test]
fn untimed_batch_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = manifest(dir.path(), r#"[{"case": "toy3.m", "ac_objective": 1021.1153432}, {"case": "ring3.m"}]"#);
    let once = || {
        let out = qcrelax(&["batch", path.to_str().unwrap(), "--no-timing"]);
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    assert_eq!(once(), once());
}

#[test]
fn json_network_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let net = qcrelax_cli::load_case(&data("toy3.m")).unwrap();
    let path = dir.path().join("toy3.json");
    std::fs::write(&path, net.to_json()).unwrap();
    let opts = RunOptions {
        variant: VariantSpec::new(true, true, false),
        ..RunOptions::default()
    };
    let a = run_case(&path, &opts, &SolverRegistry::builtin()).unwrap();
    let b = run_case(&data("toy3.m"), &opts, &SolverRegistry::builtin()).unwrap();
    assert_eq!(a.qc_bound, b.qc_bound);
}

#[test]
fn stronger_relaxations_never_widen_the_gap() {
    // same bounds, same AC objective: the feasible sets are nested, so the
    // bound rises and, where defined, the gap shrinks
    let solvers = SolverRegistry::builtin();
    let mut compared = 0;
    for seed in 0..20 {
        let (net, point) = instance(seed);
        let ac = check_ac_point(&net, &point).unwrap().objective;
        let report = |use_mf, use_vdiff| {
            let opts = RunOptions {
                variant: VariantSpec::new(use_mf, use_vdiff, false),
                ac_objective: Some(ac),
                ..RunOptions::default()
            };
            run_network(net.clone(), &opts, &solvers).unwrap()
        };
        let all = report(true, true);
        assert!(all.qc_bound <= ac + 1e-6 * ac.abs().max(1.0), "seed {seed}");
        for weaker in [report(false, true), report(true, false)] {
            let tol = 1e-6 * weaker.qc_bound.abs().max(1.0);
            assert!(all.qc_bound >= weaker.qc_bound - tol, "seed {seed} vs {}", weaker.variant);
            if let (Some(g), Some(w)) = (all.gap_percent, weaker.gap_percent) {
                // the bound tolerance, carried through 100·(ac − b)/b
                let carried = 100.0 * ac.abs() / (weaker.qc_bound * weaker.qc_bound) * tol;
                assert!(g <= w + 1e-4 + carried, "seed {seed} vs {}: {g} > {w}", weaker.variant);
                compared += 1;
            }
        }
    }
    assert!(compared > 10);
}

#[test]
fn library_batch_matches_manifest_order() {
    let entries = vec![
        ManifestEntry {
            case: "ring3.m".into(),
            ac_objective: None,
            variants: Some(vec!["no-bt".into()]),
        },
        ManifestEntry {
            case: "toy2.m".into(),
            ac_objective: None,
            variants: None,
        },
    ];
    let rows = run_batch(&entries, &data(""), &RunOptions::default(), &SolverRegistry::builtin());
    let labels: Vec<(String, String)> = rows.iter().map(|r| (r.case.clone(), r.variant.clone())).collect();
    let mut expected = vec![("ring3.m".to_string(), "no-bt".to_string())];
    expected.extend(qcrelax_cli::PRESETS.iter().map(|(n, _)| ("toy2.m".to_string(), n.to_string())));
    assert_eq!(labels, expected);
    assert!(rows.iter().all(|r| r.error.is_none()));
}
