use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dateline::domain::parse_domain;
use dateline::search::Plan;

fn dateline(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dateline"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gadget(dir: &Path) -> PathBuf {
    let o = dateline(
        dir,
        &["gen", "--type", "I", "--copies", "1", "-o", "g.json"],
    );
    assert_eq!(code(&o), 0);
    dir.join("g.json")
}

#[test]
fn gen_writes_requested_copies() {
    let dir = tempfile::tempdir().unwrap();
    let o = dateline(dir.path(), &["gen", "--type", "I", "--copies", "5"]);
    assert_eq!(code(&o), 0);
    let d = parse_domain(&stdout(&o)).unwrap();
    assert_eq!(d.skills.len(), 15);
    let o = dateline(dir.path(), &["gen", "--type", "II", "--copies", "1"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn solve_writes_plan_and_record() {
    let dir = tempfile::tempdir().unwrap();
    gadget(dir.path());
    let o = dateline(dir.path(), &["solve", "g.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let plan =
        Plan::from_json(&fs::read_to_string(dir.path().join("g.plan.json")).unwrap()).unwrap();
    assert_eq!(plan.n, 4);
    let rec: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(rec["instance"], "g");
    assert_eq!(rec["n_found"], 4);
    assert_eq!(rec["verdict"], "valid");
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn solve_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let no_raiser = r#"{
        "fluents": [{"name": "g"}],
        "skills": [{"name": "idle", "kind": "delay", "duration": 2}],
        "goal": ["g"]
    }"#;
    fs::write(dir.path().join("no-raiser.json"), no_raiser).unwrap();
    let o = dateline(dir.path(), &["solve", "no-raiser.json", "--max-n", "3"]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("no-raiser.plan.json").exists());

    assert_eq!(code(&dateline(dir.path(), &["solve", "missing.json"])), 3);
    assert_eq!(code(&dateline(dir.path(), &["solve"])), 3);
    assert_eq!(code(&dateline(dir.path(), &["frobnicate"])), 3);

    let o = dateline(
        dir.path(),
        &[
            "gen",
            "--type",
            "II",
            "--copies",
            "2",
            "--height",
            "3",
            "-o",
            "deep.json",
        ],
    );
    assert_eq!(code(&o), 0);
    let o = dateline(
        dir.path(),
        &[
            "solve",
            "deep.json",
            "--time-budget",
            "0.001",
            "--max-copies",
            "1",
        ],
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn solve_rejects_unknown_keys_unless_lenient() {
    let dir = tempfile::tempdir().unwrap();
    let g = gadget(dir.path());
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&g).unwrap()).unwrap();
    v["comment"] = "extra".into();
    fs::write(&g, v.to_string()).unwrap();
    assert_eq!(code(&dateline(dir.path(), &["solve", "g.json"])), 3);
    let o = dateline(dir.path(), &["solve", "g.json", "--strict-io", "false"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    gadget(dir.path());
    assert_eq!(
        code(&dateline(dir.path(), &["solve", "g.json", "-o", "p.json"])),
        0
    );
    let o = dateline(dir.path(), &["validate", "g.json", "p.json"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("valid"));

    let mut plan =
        Plan::from_json(&fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    plan.actions.retain(|a| a.action != "a3_c1");
    fs::write(dir.path().join("bad.json"), plan.to_json()).unwrap();
    let o = dateline(dir.path(), &["validate", "g.json", "bad.json", "--json"]);
    assert_eq!(code(&o), 1);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["verdict"], "invalid");
    assert!(report["violations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v["rule"] == "frame"));

    fs::write(dir.path().join("empty.json"), "").unwrap();
    assert_eq!(
        code(&dateline(dir.path(), &["validate", "g.json", "empty.json"])),
        3
    );
}

#[test]
fn encode_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    gadget(dir.path());
    let a = dateline(dir.path(), &["encode", "g.json", "--n", "4"]);
    let b = dateline(dir.path(), &["encode", "g.json", "--n", "4"]);
    assert_eq!(code(&a), 0);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let m = dateline::model::CspModel::parse(&stdout(&a)).unwrap();
    assert!(m.validate().is_ok());
}

#[test]
fn bench_appends_rows() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "bench", "--type", "I", "--copies", "1..5", "--csv", "b.csv", "--jobs", "2",
    ];
    assert_eq!(code(&dateline(dir.path(), &args)), 0);
    let text = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "instance,type,copies,height,n_found,bool_vars,int_vars,nodes,wall_ms,objective,verdict"
    );
    assert_eq!(lines.len(), 6);
    let ids: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(
        ids,
        [
            "gadget-I-m1",
            "gadget-I-m2",
            "gadget-I-m3",
            "gadget-I-m4",
            "gadget-I-m5"
        ]
    );

    assert_eq!(code(&dateline(dir.path(), &args)), 0);
    let again = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(again.lines().count(), 11);
    // Identical runs differ only in the wall-time column.
    let strip = |l: &str| {
        let mut f: Vec<&str> = l.split(',').collect();
        f.remove(8);
        f.join(",")
    };
    let rows: Vec<String> = again.lines().skip(1).map(strip).collect();
    assert_eq!(rows[..5], rows[5..]);

    let o = dateline(
        dir.path(),
        &["bench", "--type", "II", "--copies", "1", "--csv", "c.csv"],
    );
    assert_eq!(code(&o), 3);
}
