use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ccgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccgeo")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn catalog_free33_relations_pass_exactly() {
    let out = ccgeo(&["catalog", "--name", "free33", "--emit", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let r = &v["result"];
    assert_eq!(r["dimension"], 14);
    assert_eq!(r["step"], 3);
    let checks = r["relation_checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["status"] == "exact-pass"));
    assert_eq!(v["seed"], 0);
}

#[test]
fn v6_is_not_three_non_involutive() {
    let out = ccgeo(&["involutivity", "--structure", "free33_v6", "--h", "3", "--point", "0,0,0,0,0,0,0,0,0,0,0,0,0,0"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["result"];
    assert_eq!(r["verdict"], "involutive-at-x");
    assert!(r["residual"].as_f64().unwrap() <= 1e-10);
    let basis = r["witness"]["exact_basis"].as_array().unwrap();
    assert_eq!(basis.len(), 3);
    for (i, b) in basis.iter().enumerate() {
        for (j, c) in b.as_array().unwrap().iter().enumerate() {
            assert_eq!(c.as_str().unwrap(), if i == j { "1" } else { "0" });
        }
    }
}

#[test]
fn heisenberg_bracket_leaves_the_distribution() {
    let out = ccgeo(&["bracket", "--i", "1", "--j", "2", "--point", "1/2,-1/3,0"]);
    assert_eq!(code(&out), 0);
    let r = &json(&out)["result"];
    assert_eq!(r["in_distribution"], false);
    assert_eq!(r["frame_coordinates"], serde_json::json!(["0", "0", "1"]));
}

#[test]
fn step_of_engel_is_three() {
    let v = json(&ccgeo(&["step", "--structure", "engel"]));
    assert_eq!(v["result"]["hormander"]["step"], 3);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let args = ["ccdist", "--to", "0,0,0.05", "--budget", "16", "--seed", "3"];
    let a = ccgeo(&args);
    let b = ccgeo(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["tolerances"]["budget"], 16);
    assert_eq!(v["result"]["estimate"]["method"], "cc-shooting");
}

#[test]
fn report_files_are_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = ccgeo(&[
            "report",
            "--structure",
            "heisenberg1",
            "--seed",
            "1",
            "--criteria",
            "1,8,9",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        let stderr = String::from_utf8_lossy(&out.stderr).to_string();
        assert_eq!(stderr.lines().filter(|l| l.starts_with("[PASS]")).count(), 3, "{stderr}");
        std::fs::read(p).unwrap()
    };
    let a = run("a.json");
    let b = run("b.json");
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["result"]["passed"], 3);
}

#[test]
fn ballbox_csv_columns() {
    let out = ccgeo(&["ballbox", "--direction", "1", "--scales", "1e-2:1e-1:3", "--emit", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next().unwrap(), "tau,dist_upper,dist_lower,width,method,budget");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    let tau: f64 = rows[0].split(',').next().unwrap().parse().unwrap();
    assert_eq!(tau, 1e-2);
    assert!(text.contains("# seed = 0"));
    assert!(text.contains("# tolerances.h_int = 1.0000000000000000e-3"));
}

#[test]
fn tangency_csv_marks_the_saddle_contact_line() {
    let out = ccgeo(&["tangency", "--surface", "saddle", "--grid", "21", "--tau", "1e-6", "--emit", "csv"]);
    assert_eq!(code(&out), 0);
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(out.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["q1", "q2", "delta", "contact"]);
    let mut contact = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        if &rec[3] == "true" {
            contact += 1;
            assert_eq!(rec[1].parse::<f64>().unwrap(), 0.0);
        }
    }
    assert_eq!(contact, 21);
}

#[test]
fn jacobian_of_the_euclidean_norm_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("norm.csv");
    let mut text = String::from("u1,u2,value\n");
    for i in 0..64 {
        let a = std::f64::consts::PI * i as f64 / 32.0;
        text.push_str(&format!("{},{},1\n", a.cos(), a.sin()));
    }
    std::fs::write(&p, text).unwrap();
    let out = ccgeo(&["jacobian", "--seminorm", p.to_str().unwrap(), "--m", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!((json(&out)["result"]["jacobian"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&ccgeo(&["no-such-command"])), 1);
    assert_eq!(code(&ccgeo(&["ccdist", "--structure", "nowhere.toml"])), 1);
    assert_eq!(code(&ccgeo(&["ccdist", "--mode", "exact"])), 1);
    assert_eq!(code(&ccgeo(&["involutivity", "--point", "1,2"])), 1);
    assert_eq!(code(&ccgeo(&["report", "--criteria", "10"])), 1);
    assert_eq!(code(&ccgeo(&["--help"])), 0);
    let out = ccgeo(&["ccdist", "--to", "0,0,0.1", "--budget", "1", "--restarts", "1"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["result"]["converged"], false);
}

#[test]
fn out_flag_writes_the_file_and_nothing_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("squeeze.csv");
    let out = ccgeo(&["squeeze", "--metric", "euclidean", "--pairs", "8", "--emit", "csv", "--jobs", "1", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(Path::new(&p)).unwrap();
    assert!(text.contains("band_lo,band_hi,fitted_C,pairs_used,dropped,metric"));
}
