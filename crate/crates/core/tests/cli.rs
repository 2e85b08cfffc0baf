use std::process::{Command, Output};

use sqfull_core::campaign::{parse_report, ReportFormat, CSV_HEADER};

fn sqfull(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqfull"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn constants_json_carries_precision() {
    let out = sqfull(&["constants"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["precision_bits"], 128);
    assert!((v["zeta_3"].as_f64().unwrap() - 1.2020569031595942).abs() < 1e-15);
    assert_eq!(
        sqfull(&["constants", "--precision-bits", "8"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sieve_outputs() {
    let out = sqfull(&["sieve", "--lo", "0", "--hi", "20"]);
    assert_eq!(stdout(&out), "2\n3\n5\n7\n11\n13\n17\n19\n");
    let out = sqfull(&[
        "sieve", "--lo", "1e6", "--hi", "1000100", "--emit", "theta", "--format", "json",
    ]);
    let theta: f64 = serde_json::from_slice(&out.stdout).unwrap();
    // 1000003, 1000033, 1000037, 1000039, 1000081, 1000099
    let want: f64 = [
        1000003.0f64,
        1000033.0,
        1000037.0,
        1000039.0,
        1000081.0,
        1000099.0,
    ]
    .iter()
    .map(|p| p.ln())
    .sum();
    assert!((theta - want).abs() < 1e-9);
}

#[test]
fn squarefull_subcommands() {
    let list = stdout(&sqfull(&["squarefull", "list", "--lo", "0", "--hi", "30"]));
    assert_eq!(
        list,
        "f,a,b\n1,1,1\n4,2,1\n8,1,2\n9,3,1\n16,4,1\n25,5,1\n27,1,3\n"
    );
    assert_eq!(
        stdout(&sqfull(&["squarefull", "count", "--x", "10^6"])),
        "2027\n"
    );
    assert_eq!(
        stdout(&sqfull(&["squarefull", "count", "--x", "1e6", "--B", "1"])),
        "1000\n"
    );
    assert_eq!(
        sqfull(&["squarefull", "decompose", "--f", "12"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn repr_routes_agree() {
    let out = sqfull(&["repr", "--X", "20000", "--H", "200", "--route", "both"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["route_delta"].as_f64().unwrap() <= 1e-9);
    assert!(v["term_count"].as_u64().unwrap() > 0);
    let single: serde_json::Value =
        serde_json::from_slice(&sqfull(&["repr", "--N", "100"]).stdout).unwrap();
    assert!((single["value"].as_f64().unwrap() - 7.928045600874777).abs() < 1e-12);
    assert_eq!(sqfull(&["repr", "--X", "100"]).status.code(), Some(2));
}

#[test]
fn asym_rows() {
    let out = stdout(&sqfull(&["asym", "main-term", "--X", "1e6", "--H", "1e3"]));
    let value: f64 = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 2_173_254.312_519_554).abs() < 1e-6);
    let fits = stdout(&sqfull(&["asym", "qx-fit", "--x-grid", "1e4,1e6"]));
    assert_eq!(fits.lines().count(), 3);
    let mv = |seed: &str| {
        stdout(&sqfull(&[
            "asym",
            "meanvalue",
            "--X",
            "1e6",
            "--H",
            "5000",
            "--samples",
            "20",
            "--seed",
            seed,
        ]))
    };
    assert_eq!(mv("7"), mv("7"));
    assert_ne!(mv("7"), mv("8"));
}

#[test]
fn verify_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let run = |threads: &str| {
        let out = sqfull(&[
            "verify",
            "--x-grid",
            "1e6,1e5",
            "--threads",
            threads,
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        parse_report(&std::fs::read_to_string(&path).unwrap(), ReportFormat::Json).unwrap()
    };
    let (one, two) = (run("1"), run("2"));
    assert_eq!(
        one.iter().map(|r| r.x).collect::<Vec<_>>(),
        vec![100_000, 1_000_000]
    );
    for (a, b) in one.iter().zip(&two) {
        assert_eq!(a.computed_sum.to_bits(), b.computed_sum.to_bits());
        assert_eq!(a.rel_error, b.rel_error);
    }

    let empty = sqfull(&["verify", "--x-grid", ""]);
    assert!(empty.status.success());
    assert_eq!(stdout(&empty).trim_end(), CSV_HEADER.join(","));

    assert_eq!(sqfull(&["verify", "--x-grid", "10"]).status.code(), Some(2));
    assert_eq!(
        sqfull(&["verify", "--h-exponent", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(sqfull(&["verify", "--threads", "0"]).status.code(), Some(2));
    assert_eq!(sqfull(&["verify", "--B", "zero"]).status.code(), Some(2));
    let missing = dir.path().join("nope").join("r.csv");
    let out = sqfull(&[
        "verify",
        "--x-grid",
        "1e5",
        "--out",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}
