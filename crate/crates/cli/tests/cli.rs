use std::path::PathBuf;
use std::process::{Command, Output};

use noflab_cli::report::round12;
use noflab_core::nof::{constant_protocol, NofDomain};
use serde_json::Value;

fn noflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noflab")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn occ_eq5_reports_three() {
    let out = noflab(&["occ", "--fn", "eq", "--q", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.is_object());
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["results"]["occ"], 3);
    assert_eq!(v["config"]["seed"], 0);
    assert!(v.get("runtime_ms").is_none());
}

#[test]
fn unknown_subcommand_and_bad_params_exit_2() {
    assert_eq!(noflab(&["badcmd"]).status.code(), Some(2));
    assert_eq!(noflab(&["occ", "--fn", "eq", "--q", "4", "--r", "1", "--k", "2"]).status.code(), Some(2));
    assert_eq!(noflab(&["disperser", "--q", "17", "--density-max", "0.01"]).status.code(), Some(2));
    assert_eq!(noflab(&["disj3-attack", "--n", "11"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_1() {
    let domain = NofDomain { x_sizes: vec![3, 3], z_size: 3 };
    let p = constant_protocol(domain, false).unwrap();
    let path = scratch("constant.json");
    std::fs::write(&path, p.to_json()).unwrap();
    let out = noflab(&["simulate", "--protocol", "json", "--protocol-file", path.to_str().unwrap(), "--q", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert_eq!(v["checks"][0]["passed"], false);
}

#[test]
fn csv_has_one_line_per_probability() {
    let out = noflab(&["disperser", "--q", "5", "--r", "3", "--k", "2", "--sets", "1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "set,v,prob,stderr");
    assert_eq!(lines.len() - 1, 5);
    let total: f64 = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn output_path_is_written_and_missing_directory_fails() {
    let path = scratch("report.json");
    let out = noflab(&["cor35", "--samples", "100", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["experiment"], "cor35");

    let bad = scratch("no-such-dir").join("report.json");
    let out = noflab(&["cor35", "--samples", "100", "--output", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn timing_is_opt_in() {
    let out = noflab(&["occ", "--q", "3", "--timing"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["runtime_ms"].as_f64().is_some());
}

#[test]
fn help_lists_every_subcommand() {
    let help = String::from_utf8(noflab(&["--help"]).stdout).unwrap();
    for cmd in ["occ", "nof-search", "simulate", "disperser", "chain", "largeness", "hd", "density", "disj3-attack", "cor35"] {
        assert!(help.contains(cmd), "--help misses {cmd}");
    }
    assert!(help.contains("NOFLAB_THREADS"));
}

#[test]
fn seeds_change_monte_carlo_reports() {
    let a = noflab(&["simulate", "--protocol", "eq-rand", "--q", "5", "--t", "1", "--samples", "2000", "--seed", "1"]);
    let b = noflab(&["simulate", "--protocol", "eq-rand", "--q", "5", "--t", "1", "--samples", "2000", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn twelve_significant_digits() {
    assert_eq!(round12(1.0 / 3.0), 0.333333333333);
    assert_eq!(round12(2.0f64.sqrt() * 1e-7), 1.41421356237e-7);
    assert_eq!(round12(0.0), 0.0);
    assert_eq!(round12(12345.0), 12345.0);
    let out = noflab(&["chain", "--sets", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for token in text.split(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == '-')) {
        let mantissa = token.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        let digits = mantissa.trim_start_matches('0');
        assert!(digits.len() <= 12 || token.parse::<f64>().is_err(), "{token}");
    }
}
