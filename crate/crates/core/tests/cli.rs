//! The `axiomtest` binary: exit codes, files and the external protocol.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_axiomtest");
const IUT: &str = env!("CARGO_BIN_EXE_containers-iut");

fn axiomtest(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("AXIOMTEST_PATH")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn check_bundled_containers() {
    let dir = tempfile::tempdir().unwrap();
    let o = axiomtest(dir.path(), &["check", "containers"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("constructor completeness (bound 6): ok"));
    assert!(text.contains("ground confluence (bound 6): ok"));
}

#[test]
fn check_reports_defects() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("partial.spec"),
        "spec Partial imports NatBool\n  sorts Nat\n  constructors\n    0 : -> Nat\n  ops\n    half : Nat -> Nat\n  vars\n    x : Nat\n  axioms\n    [half_0] half(0) = 0\n    [half_ss] half(succ(succ(x))) = succ(half(x))\nend\n",
    )
    .unwrap();
    let o = axiomtest(dir.path(), &["check", "partial.spec"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("half(1)"), "{}", stdout(&o));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(axiomtest(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(axiomtest(dir.path(), &[]).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.spec"), "spec Bad sorts S constructors a : -> T axioms end").unwrap();
    let o = axiomtest(dir.path(), &["check", "bad.spec"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown sort `T`"));
    assert_eq!(axiomtest(dir.path(), &["check", "missing.spec"]).status.code(), Some(2));
    let o = axiomtest(dir.path(), &["gen", "containers", "--reps", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_then_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = axiomtest(dir.path(), &["gen", "containers", "--depth", "0", "--bound", "7", "-o", "s.json"]);
    assert_eq!(o.status.code(), Some(0));
    let o = axiomtest(dir.path(), &["run", "s.json", "--iut", "reference", "-o", "r.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "6 tests: 6 pass, 0 fail, 0 error, 0 inconclusive\n");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["pass"], 6);
    assert_eq!(report["results"].as_array().unwrap().len(), 6);
    assert!(report["assumptions"][0].as_str().unwrap().starts_with("H_min"));
    let o = axiomtest(dir.path(), &["run", "s.json", "--iut", "mutant:M3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("isin_1#1 isin(0, 0 :: []) = true: fail: false /= true\n"));
}

#[test]
fn gen_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "containers", "--depth", "1", "--reps", "2", "--seed", "7", "--strategy", "seeded-random"];
    let a = axiomtest(dir.path(), &args);
    let b = axiomtest(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let d0 = axiomtest(dir.path(), &["gen", "containers"]);
    assert_eq!(stdout(&d0), std::fs::read_to_string(golden("containers_d0.json")).unwrap());
    let obs = axiomtest(dir.path(), &["gen", "containers", "--depth", "1", "--observable-mode"]);
    assert_eq!(stdout(&obs), std::fs::read_to_string(golden("containers_d1_obs.json")).unwrap());
}

#[test]
fn contexts_listing() {
    let dir = tempfile::tempdir().unwrap();
    let o = axiomtest(dir.path(), &["contexts", "containers", "--sort", "Container", "--depth", "4"]);
    assert_eq!(stdout(&o), "isin(x, z)\nisin(x, x1 :: z)\nisin(x, remove(x1, z))\n");
    let o = axiomtest(dir.path(), &["contexts", "containers", "--sort", "Bool", "--depth", "4"]);
    assert_eq!(stdout(&o), "z\n");
    let o = axiomtest(dir.path(), &["contexts", "containers", "--sort", "Set", "--depth", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spec_files_and_import_paths() {
    let dir = tempfile::tempdir().unwrap();
    let lib = dir.path().join("lib");
    std::fs::create_dir(&lib).unwrap();
    std::fs::write(
        lib.join("flags.spec"),
        "spec Flags\n  sorts Flag\n  constructors\n    on : -> Flag\n    off : -> Flag\n  ops\n    flip : Flag -> Flag\n  axioms\n    [flip_on] flip(on) = off\n    [flip_off] flip(off) = on\nend\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("twice.spec"),
        "spec Twice imports Flags\n  sorts Flag\n  constructors\n    on : -> Flag\n  ops\n    twice : Flag -> Flag\n  vars\n    f : Flag\n  axioms\n    [twice_def] twice(f) = flip(flip(f))\nend\n",
    )
    .unwrap();
    assert_eq!(axiomtest(dir.path(), &["check", "twice.spec"]).status.code(), Some(2));
    let o = axiomtest(dir.path(), &["check", "twice.spec", "--path", "lib"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = Command::new(BIN)
        .args(["gen", "twice.spec", "-o", "t.json"])
        .env("AXIOMTEST_PATH", &lib)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(BIN)
        .args(["run", "t.json", "--iut", "reference"])
        .env("AXIOMTEST_PATH", &lib)
        .current_dir(dir.path())
        .output()
        .unwrap();
    // only the importing specification's own axiom is targeted
    assert_eq!(stdout(&o), "1 tests: 1 pass, 0 fail, 0 error, 0 inconclusive\n");
}

#[test]
fn mutation_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("isin_empty_true.spec"),
        "spec X imports Containers\n  sorts Container\n  constructors\n    [] : -> Container\n  axioms\n    override [isin_empty] isin(x, []) = true\nend\n",
    )
    .unwrap();
    axiomtest(dir.path(), &["gen", "containers", "-o", "s.json"]);
    let o = axiomtest(dir.path(), &["run", "s.json", "--iut", "mutant:isin_empty_true.spec"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("isin_empty#1"));
    assert_eq!(axiomtest(dir.path(), &["run", "s.json", "--iut", "mutant:M42"]).status.code(), Some(2));
}

#[test]
fn external_iut_needs_contexts() {
    let dir = tempfile::tempdir().unwrap();
    let exec = format!("exec:{IUT}");
    axiomtest(dir.path(), &["gen", "containers", "-o", "s.json"]);
    let o = axiomtest(dir.path(), &["run", "s.json", "--iut", &exec, "-o", "r.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("remove_1#1 remove(0, 0 :: []) = []: inconclusive: opaque-comparison"));
    assert!(stdout(&o).ends_with("6 tests: 3 pass, 0 fail, 0 error, 3 inconclusive\n"));
    axiomtest(dir.path(), &["gen", "containers", "--depth", "1", "--observable-mode", "-o", "o.json"]);
    let o = axiomtest(dir.path(), &["run", "o.json", "--iut", &exec, "-j", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn protocol_faults_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    axiomtest(dir.path(), &["gen", "containers", "-o", "s.json"]);
    for mode in ["garbage", "crash", "mute"] {
        let exec = format!("exec:{IUT} --mode {mode}");
        let o = axiomtest(dir.path(), &["run", "s.json", "--iut", &exec, "--timeout", "1", "-o", "r.json"]);
        assert_eq!(o.status.code(), Some(3), "{mode}: {}", stdout(&o));
        // every test still gets a verdict
        let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
        assert_eq!(report["summary"]["total"], 6);
    }
    let o = axiomtest(dir.path(), &["run", "s.json", "--iut", "exec:echo hello"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("handshake"));
}

#[test]
fn obscheck() {
    let dir = tempfile::tempdir().unwrap();
    let exec = format!("exec:{IUT}");
    let o = axiomtest(dir.path(), &["obscheck", "containers", "--iut-a", "reference", "--iut-b", &exec, "--bound", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("observationally equivalent at bound 6"));
    let o = axiomtest(dir.path(), &["obscheck", "containers", "--iut-a", "reference", "--iut-b", "mutant:M2", "--bound", "9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("isin(0, remove(0, 0 :: 0 :: [])): true vs false"));
}
