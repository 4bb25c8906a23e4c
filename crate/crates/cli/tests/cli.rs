use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ifsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifsq")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_ss_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = tmp.path().join("gen");
    let out = ifsq(&["gen", "--figure", "2", "--tprime", "0", "--out-dir", path(&gen)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&gen);
    assert_eq!(m["command"], "gen");
    assert_eq!(m["config"]["base_interval"], 0.1);
    assert_eq!(m["details"]["formula"], "cos(2 pi(t+0.05t^2))");
    assert!(!m["argv"].as_array().unwrap().iter().any(|a| a == "--out-dir"));

    let samples = gen.join("samples.csv");
    let ss = tmp.path().join("ss");
    let out = ifsq(&["ss", "--input", path(&samples), "--base-interval", "0.1", "--squeeze-map", "--out-dir", path(&ss)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["if_set.csv", "curves.csv", "squeeze_map.csv"] {
        assert!(ss.join(f).exists(), "{f}");
    }
    let m = manifest(&ss);
    assert_eq!(m["config"]["eta_max"], 10.0);
    assert_eq!(m["inputs"][0]["path"], path(&samples));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);

    let cmp = tmp.path().join("cmp");
    let out = ifsq(&["compare", "--input", path(&ss.join("if_set.csv")), "--truth", "2", "--out-dir", path(&cmp)]);
    assert_eq!(code(&out), 0);
    let summary = fs::read_to_string(cmp.join("summary.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "component_1");
    assert_eq!(row[4], "1", "coverage of the uniform chirp");
}

#[test]
fn bl_writes_a_trace_and_dft_writes_values() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = tmp.path().join("gen");
    assert_eq!(code(&ifsq(&["gen", "--figure", "7", "--out-dir", path(&gen)])), 0);
    let samples = gen.join("samples.csv");
    let bl = tmp.path().join("bl");
    assert_eq!(code(&ifsq(&["bl", "--input", path(&samples), "--order-N", "60", "--out-dir", path(&bl)])), 0);
    let trace = fs::read_to_string(bl.join("trace.csv")).unwrap();
    assert!(trace.starts_with("t,re,im,if_h\n"));
    assert_eq!(manifest(&bl)["config"]["order"], 60);

    let dft = tmp.path().join("dft");
    assert_eq!(code(&ifsq(&["bl", "--input", path(&samples), "--basis", "dft", "--out-dir", path(&dft)])), 0);
    assert!(dft.join("reconstruction.csv").exists());
    assert!(!dft.join("trace.csv").exists());
}

#[test]
fn run_scores_both_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = ifsq(&["run", "--figure", "4", "--method", "both", "--out-dir", path(&dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["samples.csv", "if_set.csv", "summary_ss.csv", "metrics_ss.csv", "trace.csv", "summary_bl.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let m = manifest(&dir);
    assert_eq!(m["details"]["summary_ss"]["component_1"]["coverage"], 1.0);
}

#[test]
fn replay_reproduces_outputs_bit_for_bit() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    assert_eq!(code(&ifsq(&["run", "--figure", "2", "--method", "ss", "--seed", "7", "--out-dir", path(&first)])), 0);
    let out = ifsq(&["replay", "--manifest", path(&first.join("manifest.json")), "--out-dir", path(&second)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["manifest.json", "samples.csv", "if_set.csv", "summary_ss.csv"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&ifsq(&["ss"])), 2);
    assert_eq!(code(&ifsq(&["gen", "--figure", "9", "--out-dir", path(tmp.path())])), 2);
    assert_eq!(code(&ifsq(&["gen", "--figure", "2", "--tprime", "0.5", "--out-dir", path(tmp.path())])), 2);
    assert_eq!(code(&ifsq(&["bl", "--basis", "wavelet", "--input", "x", "--out-dir", "y"])), 2);
}

#[test]
fn parse_errors_exit_3_with_line_numbers() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("bad.csv");
    fs::write(&input, "t,value\n0,1\n0.1,2\n0.2,oops\n").unwrap();
    let out = ifsq(&["ss", "--input", path(&input), "--out-dir", path(&tmp.path().join("o"))]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let manifest = tmp.path().join("m.json");
    fs::write(&manifest, "{ not json").unwrap();
    assert_eq!(code(&ifsq(&["replay", "--manifest", path(&manifest), "--out-dir", path(tmp.path())])), 3);
}

#[test]
fn empty_input_writes_empty_outputs_and_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("empty.csv");
    fs::write(&input, "t,value\n").unwrap();
    let dir = tmp.path().join("o");
    assert_eq!(code(&ifsq(&["ss", "--input", path(&input), "--out-dir", path(&dir)])), 4);
    assert_eq!(fs::read_to_string(dir.join("if_set.csv")).unwrap(), "t,xi\n");
    assert_eq!(manifest(&dir)["details"]["sample_count"], 0);
}

#[test]
fn validation_errors_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("unsorted.csv");
    fs::write(&input, "t,value\n0,1\n0.2,2\n0.1,3\n").unwrap();
    assert_eq!(code(&ifsq(&["ss", "--input", path(&input), "--out-dir", path(&tmp.path().join("a"))])), 4);
    // Fewer samples than basis functions.
    let short = tmp.path().join("short.csv");
    fs::write(&short, "t,value\n0,1\n0.1,2\n0.2,3\n").unwrap();
    let out = ifsq(&["bl", "--input", path(&short), "--order-N", "5", "--out-dir", path(&tmp.path().join("b"))]);
    assert_eq!(code(&out), 4);
}

#[test]
fn missing_input_exits_6() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ifsq(&["ss", "--input", path(&tmp.path().join("nope.csv")), "--out-dir", path(tmp.path())]);
    assert_eq!(code(&out), 6);
}

#[test]
fn edr_writes_comparison_and_heart_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = tmp.path().join("gen");
    assert_eq!(code(&ifsq(&["gen-edr", "--duration", "200", "--out-dir", path(&gen)])), 0);
    let dir = tmp.path().join("edr");
    let out = ifsq(&[
        "edr",
        "--rpeaks",
        path(&gen.join("rpeaks.csv")),
        "--respiration",
        path(&gen.join("respiration.csv")),
        "--out-dir",
        path(&dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&dir);
    let rate = m["details"]["mean_heart_rate"].as_f64().unwrap();
    assert!((rate - 1.0).abs() < 0.01, "{rate}");
    assert_eq!(m["config"]["alpha"], 0.02);
    let table = fs::read_to_string(dir.join("respiration_comparison.csv")).unwrap();
    assert!(table.starts_with("t,respiration_if_h,edr_nearest,respiration_ss_nearest\n"));
}
