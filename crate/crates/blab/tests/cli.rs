use std::process::Command;

use blab::cli::{main_with, EXIT_ERROR, EXIT_OK, EXIT_VIOLATED};
use blab::config::{Config, KEYS};
use proptest::prelude::*;

fn run(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with(std::iter::once("blab").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn binary_without_arguments_fails() {
    let out = Command::new(env!("CARGO_BIN_EXE_blab")).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_ERROR as i32));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn binary_help_succeeds() {
    let out = Command::new(env!("CARGO_BIN_EXE_blab")).arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["construct-i", "construct-ii", "inequality-audit", "cantor", "moments", "hamilton-sweep", "solve"] {
        assert!(text.contains(sub), "help lacks {sub}");
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(run(&["no-such-command"]).0, EXIT_ERROR);
    let (code, _, err) = run(&["cantor", "--out", d, "--set", "cantor.bogus=1"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("unknown key"), "{err}");
    assert_eq!(run(&["cantor", "--out", d, "--set", "cantor.stage=-1"]).0, EXIT_ERROR);
    assert_eq!(run(&["cantor", "--out", d, "--set", "scenario.k=1.5"]).0, EXIT_ERROR);
    assert_eq!(run(&["cantor", "--config", "/nonexistent/blab.conf"]).0, EXIT_ERROR);
}

#[test]
fn cantor_stage_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["cantor", "--out", dir.path().to_str().unwrap(), "--set", "cantor.stage=1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("[0,2/5] ∪ [3/5,1]"), "{out}");
    assert!(out.contains("measure 4/5"), "{out}");
    assert!(dir.path().join("cantor.json").exists());
    assert!(dir.path().join("cantor-intervals.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cantor.json")).unwrap()).unwrap();
    assert_eq!(report["scenario"], "cantor");
}

#[test]
fn quiet_prints_only_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["moments", "--quiet", "--out", dir.path().to_str().unwrap(), "--set", "cantor.stage=3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 1, "{out}");
    assert!(out.starts_with("moments: "));
    assert!(out.contains(" 0 violated"));
}

#[test]
fn failed_check_exits_two() {
    // a sweep that stops at small x cannot approach k
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) =
        run(&["hamilton-sweep", "--out", dir.path().to_str().unwrap(), "--set", "battery.x=0.3,0.5"]);
    assert_eq!(code, EXIT_VIOLATED);
    assert!(out.contains("VIOLATED sweep/functional-reaches"), "{out}");
}

#[test]
fn file_then_set_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.conf");
    std::fs::write(&path, "[cantor]\nstage = 4 # comment\n[scenario]\nseed = 9\n").unwrap();
    let p = path.to_str().unwrap();
    let (code, out, _) = run(&["config", "--config", p]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("stage = 4") && out.contains("seed = 9"));
    let (_, out, _) = run(&["config", "--config", p, "--set", "cantor.stage=7", "--seed", "3"]);
    assert!(out.contains("stage = 7") && out.contains("seed = 3"));
    assert_eq!(Config::parse(&out).unwrap().raw("scenario", "seed"), "3");
}

#[test]
fn config_file_errors() {
    assert!(Config::parse("[nope]\n").is_err());
    assert!(Config::parse("stage = 3\n").is_err());
    assert!(Config::parse("[cantor]\nstage = 3\nstage = 4\n").is_err());
    assert!(Config::parse("[cantor]\nstage 3\n").is_err());
}

fn key_index() -> impl Strategy<Value = usize> {
    0..KEYS.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn display_round_trips(edits in prop::collection::vec((key_index(), "[a-z0-9.,:]{1,12}"), 0..6)) {
        let mut cfg = Config::default();
        for (i, v) in &edits {
            let (s, k, _, _) = KEYS[*i];
            cfg.set(&format!("{s}.{k}={v}")).unwrap();
        }
        prop_assert_eq!(Config::parse(&cfg.to_string()).unwrap(), cfg);
    }

    #[test]
    fn set_shadows_the_file(i in key_index(), a in "[a-z0-9.]{1,8}", b in "[a-z0-9.]{1,8}") {
        let (s, k, _, _) = KEYS[i];
        let mut cfg = Config::parse(&format!("[{s}]\n{k} = {a}\n")).unwrap();
        prop_assert_eq!(cfg.raw(s, k), a.as_str());
        cfg.set(&format!("{s}.{k}={b}")).unwrap();
        prop_assert_eq!(cfg.raw(s, k), b.as_str());
    }
}
