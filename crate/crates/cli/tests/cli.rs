//! End-to-end tests of the `selberg` binary: verbs, output formats, exit
//! codes, and the trace cache file.

use std::process::{Command, Output};

fn selberg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selberg"))
        .args(args)
        .env_remove("SELBERG_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn verify_es_passes_with_exit_zero() {
    let out = selberg(&["verify", "es", "--weight", "12", "--nmax", "10"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("PASS eichler-selberg[2k=12]"));
}

#[test]
fn verify_thm13_passes() {
    let out = selberg(&["verify", "thm13", "--nu", "1", "--m", "1", "--nmax", "20"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PASS thm13[m=1,nu=1]"));
}

#[test]
fn unknown_verb_exits_two() {
    let out = selberg(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = selberg(&["verify", "es", "--weight", "twelve"]);
    assert_eq!(out.status.code(), Some(2));
    let out = selberg(&["--qprec", "2", "classnum", "--dmax", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_kloosterman_modulus_exits_one() {
    let out = selberg(&["kloosterman", "--k", "3/2", "--m", "1", "--n", "1", "--c", "6"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn nonconvergent_cutoff_exits_three() {
    let out = selberg(&[
        "poincare",
        "--weight",
        "12",
        "--index",
        "-1",
        "--n",
        "1",
        "--kloosterman-cutoff",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn classnum_emits_csv() {
    let out = selberg(&["classnum", "--dmax", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("d,h,H"));
    assert!(text.contains("\n0,0,-1/12"));
    assert!(text.contains("\n3,1,1/3"));
    assert!(text.contains("\n4,1,1/2"));
    assert!(text.contains("\n7,1,1"));
}

#[test]
fn kloosterman_values() {
    let out = selberg(&["kloosterman", "--k", "3/2", "--m", "0", "--n", "0", "--c", "4"]);
    let text = stdout(&out);
    assert!(text.contains("1.000000000000000"), "{text}");
    assert!(text.contains("-1.000000000000000i"), "{text}");

    let out = selberg(&["kloosterman", "--k", "0", "--m", "0", "--n", "0", "--c", "12"]);
    assert!(stdout(&out).contains("= 4.000000000000000")); // phi(12)
}

#[test]
fn poincare_exact_coefficient() {
    let out = selberg(&["poincare", "--weight", "4", "--index", "-1", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    // E_4 (j - 984) has q^1 coefficient 196884 - 240^2 + 2160
    let expect = selberg_core::poincare::poincare_exact(4, 1, 3)
        .unwrap()
        .exact_part
        .c(1);
    assert!(stdout(&out).contains(&expect.to_string()));
}

#[test]
fn gseries_json_is_deterministic() {
    let run = || {
        let out = selberg(&[
            "gseries", "--m", "2", "--nu", "5", "--nmax", "6", "--output", "json",
        ]);
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    let a = run();
    let b = run();
    assert_eq!(a, b, "identical invocations must produce identical JSON");
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["config"]["float_bits"], 192);
    assert_eq!(doc["series"]["valuation"], -1);
}

#[test]
fn trace_cache_via_env() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.ndjson");
    let out = Command::new(env!("CARGO_BIN_EXE_selberg"))
        .args(["trace", "--m", "1", "--dmax", "20", "--output", "json"])
        .env("SELBERG_CACHE", &cache)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("\"t\":\"-248\""), "{text}");
    assert!(cache.exists());
    let contents = std::fs::read_to_string(&cache).unwrap();
    assert!(contents.lines().count() >= 9);
    // second run hits the cache and reports the same table
    let out2 = Command::new(env!("CARGO_BIN_EXE_selberg"))
        .args(["trace", "--m", "1", "--dmax", "20", "--output", "json"])
        .env("SELBERG_CACHE", &cache)
        .output()
        .unwrap();
    assert_eq!(stdout(&out2), text);
}

#[test]
fn lhat_reports_method_and_error() {
    let out = selberg(&["lhat", "--m", "1", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["method"], "thm14_inversion");
    let v = doc["value"].as_f64().unwrap();
    assert!((v + 33.383).abs() < 0.01, "{v}");
    assert!(doc["reported_error"].as_f64().unwrap() >= 0.0);
}

#[test]
fn norm_verb() {
    let out = selberg(&["norm", "--weight", "12", "--output", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let v = doc["norm"].as_f64().unwrap();
    assert!((v - 1.0353e-6).abs() / 1.0353e-6 < 1e-3, "{v}");
}

#[test]
fn verify_weilrep_small_scan() {
    let out = selberg(&["verify", "weilrep", "--cmax", "6", "--mnmax", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PASS weilrep-kloosterman"));
}

#[test]
fn verify_cor15_small() {
    let out = selberg(&["verify", "cor15", "--m", "1", "--nmax", "3"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout(&out).contains("PASS cor15[m=1]"));
}
