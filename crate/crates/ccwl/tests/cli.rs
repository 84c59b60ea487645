//! End-to-end runs of the `ccwl` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccwl"))
        .args(args)
        .env_remove("CCWL_CAPS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ccwl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn lift_then_anchor_produces_valid_documents() {
    let lifted = run(&["lift", &fixture("c6.json")]);
    assert_eq!(lifted.status.code(), Some(0));
    let path = temp_path("c6_lifted.json");
    std::fs::write(&path, stdout(&lifted)).unwrap();
    let acc = ccwl::acc::Acc::from_json(&stdout(&lifted)).unwrap();
    assert_eq!(acc.len(), 12);
    let anchored = run(&["anchor", path.to_str().unwrap()]);
    assert_eq!(anchored.status.code(), Some(0));
    let acc = ccwl::acc::Acc::from_json(&stdout(&anchored)).unwrap();
    assert_eq!(acc.len(), 12 + 1 + 6);
    assert!(acc.anchor().is_some());
}

#[test]
fn compare_documents_are_reproducible_and_hash_inputs() {
    let args = [
        "compare",
        &fixture("figure2_a.json"),
        &fixture("figure2_b.json"),
        "-k",
        "2",
        "--json",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(1));
    assert_eq!(first.stdout, second.stdout);
    let doc: ccwl::refine::TraceDocument = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(doc.inputs.len(), 2);
    assert!(doc.inputs.iter().all(|h| h.len() == 64));
    assert!(doc.anchored);
}

#[test]
fn round_limit_reports_inconclusive() {
    let out = run(&[
        "compare",
        &fixture("figure2_a.json"),
        &fixture("figure2_a.json"),
        "-k",
        "1",
        "--max-rounds",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("Inconclusive"));
}

#[test]
fn malformed_input_names_the_problem() {
    let path = temp_path("bad.json");
    std::fs::write(&path, r#"{"version":1,"vertices":2,"ell":1,"cells":[{"vertices":[0,1],"rank":1,"attr":"0"},{"vertices":[0,1],"rank":1,"attr":"1"}]}"#).unwrap();
    let out = run(&["compare", path.to_str().unwrap(), &fixture("c6.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains("bad.json"), "{err}");
}

#[test]
fn check_exit_code_follows_truth_value() {
    let triangle = "(exists 1 (x1 x2) (and (adj down x1 x2) (exists 1 (x3 x4) (and (and (adj down x3 x4) (adj down x1 x3)) (eq x2 x4)))))";
    assert_eq!(
        run(&["check", &fixture("two_triangles.json"), triangle]).status.code(),
        Some(0)
    );
    assert_eq!(run(&["check", &fixture("c6.json"), triangle]).status.code(), Some(1));
    let bad = run(&["check", &fixture("c6.json"), "(eq x1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn separate_prints_a_sentence_that_check_confirms() {
    let out = run(&[
        "separate",
        &fixture("c6.json"),
        &fixture("two_triangles.json"),
        "-k",
        "2",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let formula = doc["formula"].as_str().unwrap();
    let (holds_on, fails_on) = if doc["true_on"] == 0 {
        ("c6.json", "two_triangles.json")
    } else {
        ("two_triangles.json", "c6.json")
    };
    assert_eq!(run(&["check", &fixture(holds_on), formula]).status.code(), Some(0));
    assert_eq!(run(&["check", &fixture(fails_on), formula]).status.code(), Some(1));
    let same = run(&[
        "separate",
        &fixture("c6.json"),
        &fixture("two_triangles.json"),
        "-k",
        "1",
    ]);
    assert_eq!(same.status.code(), Some(0));
}

#[test]
fn saved_certificate_replays_and_tampering_is_caught() {
    let (a, b) = (fixture("figure2_a.json"), fixture("figure2_b.json"));
    let cert = temp_path("cert.json");
    let game = run(&["game", &a, &b, "--pebbles", "4", "--out", cert.to_str().unwrap()]);
    assert_eq!(game.status.code(), Some(1));
    assert!(stdout(&game).contains("winner: PlayerI"));
    assert_eq!(run(&["replay", &a, &b, cert.to_str().unwrap()]).status.code(), Some(0));
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    doc["moves"][0]["responder_set"].as_array_mut().unwrap().pop();
    let tampered = temp_path("tampered.json");
    std::fs::write(&tampered, doc.to_string()).unwrap();
    let out = run(&["replay", &a, &b, tampered.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("certificate invalid"));
    let swapped = run(&["replay", &b, &a, cert.to_str().unwrap()]);
    assert_eq!(swapped.status.code(), Some(2));
}

#[test]
fn triad_reports_consistency() {
    let fig = run(&[
        "triad",
        &fixture("figure2_a.json"),
        &fixture("figure2_b.json"),
        "-k",
        "2",
    ]);
    assert_eq!(fig.status.code(), Some(1));
    let text = stdout(&fig);
    assert!(text.contains("CONSISTENT"), "{text}");
    assert_eq!(text.matches("Distinguished").count(), 3, "{text}");
    let same = run(&["triad", &fixture("c6.json"), &fixture("c6.json"), "-k", "2"]);
    assert_eq!(same.status.code(), Some(0));
    let text = stdout(&same);
    assert_eq!(text.matches("Equivalent").count(), 3, "{text}");
}

#[test]
fn caps_mark_oversized_legs_as_skipped() {
    let out = run(&[
        "triad",
        &fixture("c6.json"),
        &fixture("c6.json"),
        "-k",
        "2",
        "--caps",
        "logic=10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("logic: Skipped"));
    let env = Command::new(env!("CARGO_BIN_EXE_ccwl"))
        .args(["oracle", "iso", &fixture("c6.json"), &fixture("c6.json")])
        .env("CCWL_CAPS", "iso=4")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2));
    assert!(String::from_utf8(env.stderr).unwrap().contains("size limit"));
    assert_eq!(
        run(&["triad", &fixture("c6.json"), &fixture("c6.json"), "--caps", "iso=0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn oracles_emit_machine_readable_verdicts() {
    let out = run(&[
        "oracle",
        "iso",
        &fixture("triangle_face.json"),
        &fixture("triangle_face.json"),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["equivalent"], true);
    let logic = run(&[
        "oracle",
        "logic",
        &fixture("c6.json"),
        &fixture("two_triangles.json"),
        "--vars",
        "4",
        "--depth",
        "2",
        "--json",
    ]);
    assert_eq!(logic.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&logic.stdout).unwrap();
    assert!(doc["witness"].is_string());
}

#[test]
fn sweep_is_clean_on_a_small_run() {
    let out = run(&["sweep", "--count", "15", "--max-cells", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("0 inconsistent"));
}
