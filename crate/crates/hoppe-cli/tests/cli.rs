//! End-to-end tests of the `hoppe` binary: determinism, file formats and
//! exit codes.

use std::process::{Command, Output};

fn hoppe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hoppe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

#[test]
fn tree_output_is_byte_identical_across_runs() {
    let a = hoppe(&["tree", "--n", "5", "--theta", "1", "--seed", "42"]);
    let b = hoppe(&["tree", "--n", "5", "--theta", "1", "--seed", "42"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    // parses back into the same tree, ignoring the stats annotation
    let text = stdout(&a);
    let tree = hoppe::tree::HoppeTree::from_text(&text).expect("round-trips");
    assert_eq!(tree.n(), 5);
    assert_eq!(tree.theta(), 1.0);
    assert!(text.lines().nth(2).unwrap().starts_with("# T="));

    let c = hoppe(&["tree", "--n", "5", "--theta", "1", "--seed", "43"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn expectations_match_the_exact_module() {
    let out = hoppe(&["expectations", "--theta", "2", "--n", "1,10,100,1000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,theta,e_t,e_u,e_w");
    assert_eq!(lines.len(), 5);
    for (row, &n) in lines[1..].iter().zip(&[1usize, 10, 100, 1000]) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[0], n.to_string());
        let e_t: f64 = cols[2].parse().unwrap();
        assert!((e_t - hoppe::exact::expected_t(n, 2.0)).abs() < 1e-9);
        let e_u: f64 = cols[3].parse().unwrap();
        assert!((e_u - hoppe::exact::expected_u(n, 2.0)).abs() < 1e-6);
    }
}

#[test]
fn realize_emits_one_row_per_vertex() {
    let out = hoppe(&[
        "realize", "--n", "7", "--theta", "0.5", "--kernel", "srw", "--seed", "9",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "vertex,parent,depth,x");
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[1], "0,-1,0,0");
}

#[test]
fn fixpoint_json_and_csv() {
    let out = hoppe(&[
        "fixpoint",
        "--kind",
        "u",
        "--pool-size",
        "5000",
        "--generations",
        "25",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).expect("valid json");
    assert_eq!(value["kind"], "u");
    assert_eq!(value["pool_size"], 5000);
    let mean = value["mean"].as_f64().unwrap();
    assert!((mean - 1.0).abs() < 0.05, "mean {mean}");

    let csv = hoppe(&[
        "fixpoint",
        "--kind",
        "u",
        "--pool-size",
        "500",
        "--generations",
        "5",
        "--format",
        "csv",
    ]);
    assert!(csv.status.success());
    let text = stdout(&csv);
    assert_eq!(text.lines().count(), 501);
    assert_eq!(text.lines().next().unwrap(), "sample");

    let wt = hoppe(&[
        "fixpoint",
        "--kind",
        "wtprime",
        "--theta",
        "2",
        "--pool-size",
        "4000",
        "--generations",
        "25",
        "--seed",
        "4",
    ]);
    assert!(wt.status.success());
    let value: serde_json::Value = serde_json::from_str(stdout(&wt).trim()).expect("valid json");
    assert!(value["w"]["second_moment"].as_f64().unwrap() > 0.0);
    let q_mean = value["u_from_q"]["mean"].as_f64().unwrap();
    assert!((q_mean - 2.0 / 3.0).abs() < 0.05, "q mean {q_mean}");
}

#[test]
fn decompose_reports_json() {
    let out = hoppe(&[
        "decompose",
        "--n",
        "30",
        "--theta",
        "3",
        "--replicates",
        "20000",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).expect("valid json");
    assert!(value["z_mean"].as_f64().unwrap().abs() < 4.0);
    assert!(value["z_second"].as_f64().unwrap().abs() < 4.0);
}

#[test]
fn verify_quick_passes_and_reports() {
    let out = hoppe(&["verify", "--quick"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 11);
    assert!(text.lines().all(|l| l.starts_with("PASS")));

    let json = hoppe(&["verify", "--quick", "--format", "json"]);
    assert!(json.status.success());
    for line in stdout(&json).lines() {
        let value: serde_json::Value = serde_json::from_str(line).expect("jsonl");
        assert_eq!(value["pass"], true);
    }
}

#[test]
fn verify_config_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("verify.cfg");
    std::fs::write(&path, "# comment\nquick=true\nseed=99\n").unwrap();
    let out = hoppe(&["verify", "--config", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stdout(&out));

    std::fs::write(&path, "bogus=1\n").unwrap();
    let out = hoppe(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    // missing required flag
    assert_eq!(hoppe(&["tree"]).status.code(), Some(2));
    // invalid theta
    assert_eq!(
        hoppe(&["tree", "--n", "5", "--theta", "-1"]).status.code(),
        Some(2)
    );
    // unknown kernel
    assert_eq!(
        hoppe(&["realize", "--n", "5", "--kernel", "cauchy:1"])
            .status
            .code(),
        Some(2)
    );
    // unknown subcommand
    assert_eq!(hoppe(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn output_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tree.txt");
    let out = hoppe(&[
        "tree", "--n", "6", "--seed", "1", "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(hoppe::tree::HoppeTree::from_text(&text).is_ok());
}
