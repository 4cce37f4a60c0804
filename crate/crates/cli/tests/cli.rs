use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use mcg_core::tower::{Tower, TowerConfig};
use mcg_core::words::OmegaWord;
use num_bigint::BigUint;

fn mcg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcg")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mcg-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_suite_exit_differs_from_check_failure() {
    let o = mcg(&["audit", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(mcg(&["tower", "build"]).status.code(), Some(2));
    assert_eq!(mcg(&["sparse", "theta", "--g", "oops", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn overlapping_partition_is_rejected() {
    let bad = scratch("bad-orbits.txt");
    fs::write(&bad, "0 1\n1 2\n").unwrap();
    assert_eq!(mcg(&["periodic", "glue", "--orbits", bad.to_str().unwrap(), "--steps", "5"]).status.code(), Some(2));
}

#[test]
fn audit_writes_json_lines() {
    let report = scratch("coding.jsonl");
    let _ = fs::remove_file(&report);
    let o = mcg(&["--seed", "11", "--report", report.to_str().unwrap(), "audit", "coding", "--scale", "0.05"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = fs::read_to_string(&report).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(lines.len() >= 2);
    assert!(lines.iter().all(|l| l["seed"] == 11));
    assert_eq!(lines.last().unwrap()["ok"], true);
}

#[test]
fn tower_eval_matches_library() {
    let word = "[ones: 0 ; zero ; ones: 1] [ones: 1 ; ones: 0 ; zero]^-1";
    let t = Tower::new(TowerConfig::default());
    let w: OmegaWord = word.parse().unwrap();
    for p in [0u32, 5, 20, 100, 400] {
        let o = mcg(&["tower", "eval", "--word", word, "--point", &p.to_string()]);
        assert_eq!(o.status.code(), Some(0));
        let want = t.eval_e(&w, &BigUint::from(p)).unwrap();
        assert_eq!(stdout(&o).trim(), want.to_string());
    }
}

#[test]
fn glue_emits_an_injection() {
    let orbits = scratch("orbits.txt");
    let emit = scratch("h.txt");
    fs::write(&orbits, "# pairs\n0 1\n2 3\n4 5 6\n").unwrap();
    let o = mcg(&["periodic", "glue", "--orbits", orbits.to_str().unwrap(), "--steps", "30", "--emit", emit.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let pairs: Vec<(u64, u64)> = fs::read_to_string(&emit)
        .unwrap()
        .lines()
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse::<u64>().unwrap());
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    assert_eq!(pairs.len(), 30);
    let mut dom: Vec<u64> = pairs.iter().map(|p| p.0).collect();
    let mut range: Vec<u64> = pairs.iter().map(|p| p.1).collect();
    dom.sort();
    dom.dedup();
    range.sort();
    range.dedup();
    assert_eq!((dom.len(), range.len()), (30, 30));
}

#[test]
fn edot_audit_passes_on_a_window() {
    let seed = scratch("seed.txt");
    fs::write(&seed, "[ones: 0 ; zero ; ones: 1]").unwrap();
    let o = mcg(&["edot", "audit", "--seed", seed.to_str().unwrap(), "--window", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("injective true"));
}
