//! Runs the binary on the shared fixtures and compares stdout byte for byte
//! with `tests/golden/`. Set `UPDATE_GOLDEN=1` to rewrite the expected files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_semiring-ci"));
    cmd.args(args).env_remove("SEMIRING_CI_MAX_STEPS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).expect("utf-8 output")
}

fn golden(name: &str, args: &[&str], code: i32) -> serde_json::Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(code), "{name}: {}", stdout(&out));
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, &out.stdout).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(stdout(&out), expected, "{name}");
    let again = run(args);
    assert_eq!(again.stdout, out.stdout, "{name} is not deterministic");
    serde_json::from_str(&expected).unwrap()
}

#[test]
fn hotel_price_depends_on_room_only() {
    let v = golden(
        "check_hotel",
        &[
            "check",
            "--rel",
            &fixture("hotel.tsv"),
            "--dep",
            r#"{"ci":{"x":["Room"],"y":["Date"],"z":["Persons"]}}"#,
        ],
        0,
    );
    assert_eq!(v["holds"], true);
}

#[test]
fn pair_relation_violates_marginal_independence() {
    let v = golden(
        "check_fig5",
        &["check", "--rel", &fixture("fig5.tsv"), "--dep", r#"{"ci":{"x":[],"y":["A"],"z":["B"]}}"#],
        1,
    );
    assert_eq!(v["results"][0]["holds"], false);
    assert!(v["results"][0]["witness"].is_object());
}

#[test]
fn network_normalizes_to_four_schemas() {
    let out = run(&["normalize", "--schema", "A,B,C,D,E", "--sigma", &fixture("bn.jsonl")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "{\"schemas\":[[\"A\",\"B\"],[\"A\",\"C\"],[\"B\",\"C\",\"D\"],[\"D\",\"E\"]]}\n");
}

#[test]
fn network_decomposition_plan() {
    golden("decompose_bn", &["decompose", "--schema", "A,B,C,D,E", "--sigma", &fixture("bn.jsonl")], 0);
}

#[test]
fn binary_split_of_hotel_prices() {
    let v = golden(
        "decompose_hotel_split",
        &["decompose", "--rel", &fixture("hotel.tsv"), "--left", "Room,Date", "--right", "Room,Persons"],
        0,
    );
    assert_eq!(v["lossless"], true);
}

#[test]
fn fd_implication_and_refutation() {
    let sigma = fixture("fd_a_b.jsonl");
    let v = golden(
        "implies_fd",
        &["implies", "--schema", "A,B,C", "--sigma", &sigma, "--tau", r#"{"ci":{"x":["A"],"y":["B"],"z":["C"]}}"#],
        0,
    );
    assert_eq!(v["implied"], true);
    let v = golden(
        "implies_refuted",
        &["implies", "--schema", "A,B,C", "--sigma", &sigma, "--tau", r#"{"ci":{"x":["B"],"y":["A"],"z":["C"]}}"#],
        1,
    );
    assert_eq!(v["implied"], false);
}

#[test]
fn cycle_chase_reaches_the_goal() {
    let v = golden(
        "chase_cycle",
        &["chase", "--sigma", &fixture("cycle_sigma.jsonl"), "--tau", &fixture("cycle_tau.json")],
        0,
    );
    assert_eq!(v["verdict"], "implied");
}

#[test]
fn chase_step_limit_from_flag_and_environment() {
    let args = ["chase", "--sigma", &fixture("cycle_sigma.jsonl"), "--tau", &fixture("cycle_tau.json")];
    let out = run_env(&args, &[("SEMIRING_CI_MAX_STEPS", "1")]);
    assert_eq!(out.status.code(), Some(2), "{}", stdout(&out));
    let mut flagged = args.to_vec();
    flagged.extend(["--max-steps", "1"]);
    let out = run(&flagged);
    assert_eq!(out.status.code(), Some(2));
    let out = run_env(&args, &[("SEMIRING_CI_MAX_STEPS", "many")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn chase_without_premises_fails() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let out = run(&["chase", "--sigma", empty.to_str().unwrap(), "--tau", &fixture("cycle_tau.json")]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
}

#[test]
fn copy_extension_writes_a_readable_relation() {
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("copy.tsv");
    let args = [
        "copy-extend",
        "--rel",
        &fixture("hotel.tsv"),
        "--x",
        "Room",
        "--y",
        "Date,Persons",
        "--out",
        tsv.to_str().unwrap(),
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["fresh"], serde_json::json!(["Date'", "Persons'"]));
    let written = semiring_ci::KRelation::from_tsv(&fs::read_to_string(&tsv).unwrap()).unwrap();
    assert_eq!(written.entries().len(), v["relation"]["tuples"].as_array().unwrap().len());
    golden("copy_extend_hotel", &args[..7], 0);
}

#[test]
fn zhang_yeung_script_verifies() {
    let v = golden("verify_zhang_yeung", &["verify-proof", &fixture("zhang_yeung.proof.json")], 0);
    assert_eq!(v["valid"], true);
    assert_eq!(v["existential"], serde_json::json!(["C'", "D'"]));
    assert!(!v["conclusion"].to_string().contains('\''));
}

#[test]
fn mvd_simulation_script_verifies() {
    golden("verify_mvd3", &["verify-proof", &fixture("mvd3_simulation.proof.json")], 0);
}

#[test]
fn corrupted_scripts_are_rejected_at_the_right_step() {
    let cases = [
        ("zy_changed_coefficient", 9),
        ("zy_missing_instance", 6),
        ("zy_existential_conclusion", 9),
        ("zy_wrong_premise", 14),
        ("zy_stale_copy", 1),
        ("mvd3_swapped_contraction", 12),
    ];
    for (name, step) in cases {
        let v = golden(
            &format!("reject_{name}"),
            &["verify-proof", &fixture(&format!("negative/{name}.proof.json"))],
            1,
        );
        assert_eq!(v["valid"], false, "{name}");
        assert_eq!(v["step"], step, "{name}");
    }
}

#[test]
fn entropy_of_a_small_distribution() {
    let v = golden("entropy_coins", &["entropy", "--rel", &fixture("coins.tsv"), "--vector"], 0);
    assert_eq!(v["vector"]["A,B"], 1.5);
    assert_eq!(v["vector"][""], 0.0);
    let v = golden("entropy_coins_b", &["entropy", "--rel", &fixture("coins.tsv"), "--subset", "B"], 0);
    assert_eq!(v["entropy"], 1.0);
}

#[test]
fn tropical_laws_report() {
    let v = golden("laws_tropical", &["laws", "--semiring", "tropical"], 0);
    assert_eq!(v["violations"], serde_json::json!([]));
    let out = run(&["laws", "--semiring", "pairnz2", "--samples", "(1,0),(1,1),(2,0)"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn pretty_output_parses_to_the_same_document() {
    let args = ["normalize", "--schema", "A,B,C,D,E", "--sigma", &fixture("bn.jsonl")];
    let compact: serde_json::Value = serde_json::from_slice(&run(&args).stdout).unwrap();
    let mut pretty_args = vec!["--pretty"];
    pretty_args.extend(args);
    let pretty = run(&pretty_args);
    assert!(stdout(&pretty).contains("\n  "));
    assert_eq!(serde_json::from_slice::<serde_json::Value>(&pretty.stdout).unwrap(), compact);
}

#[test]
fn usage_errors_exit_three() {
    let out = run(&["check", "--rel", &fixture("hotel.tsv"), "--semiring", "bool", "--dep", r#"{"fd":{"x":["Room"],"y":["Date"]}}"#]);
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["error"].is_string());
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(run(&["check"]).status.code(), Some(3));
    assert_eq!(run(&["entropy", "--rel", &fixture("hotel.tsv"), "--vector"]).status.code(), Some(3));
    assert_eq!(run(&["verify-proof", &fixture("missing.proof.json")]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn headerless_relation_takes_the_semiring_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plain.tsv");
    let text = fs::read_to_string(fixtures().join("hotel.tsv")).unwrap();
    let body: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
    fs::write(&path, body).unwrap();
    let dep = r#"{"ci":{"x":["Room"],"y":["Date"],"z":["Persons"]}}"#;
    let p = path.to_str().unwrap();
    assert_eq!(run(&["check", "--rel", p, "--dep", dep]).status.code(), Some(3));
    let with = run(&["check", "--rel", p, "--semiring", "tropical", "--dep", dep]);
    assert_eq!(with.status.code(), Some(0));
    assert_eq!(with.stdout, run(&["check", "--rel", &fixture("hotel.tsv"), "--dep", dep]).stdout);
}
