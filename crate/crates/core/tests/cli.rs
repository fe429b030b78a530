use std::fs;
use std::path::Path;

use hybrid_bci::cli::{run, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use hybrid_bci::io::RunManifest;

fn hbci(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("hbci").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn simulate(dir: &Path, epochs: &str) {
    let (code, _, err) = hbci(&["simulate", "--epochs", epochs, "--seed", "4", "--out-dir", &p(dir, "sim")]);
    assert_eq!(code, EXIT_OK, "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(hbci(&[]).0, EXIT_USAGE);
    assert_eq!(hbci(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(hbci(&["filter-design", "bandpass", "--fs", "250", "--hi", "30"]).0, EXIT_USAGE);
    assert_eq!(hbci(&["filter-design", "bandpass", "--lo", "30", "--hi", "6.5", "--fs", "250"]).0, EXIT_USAGE);
    assert_eq!(hbci(&["evaluate"]).0, EXIT_USAGE);
    assert_eq!(hbci(&["evaluate", "--itr", "1.0", "1", "60"]).0, EXIT_USAGE);
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = hbci(&["simulate", "--epochs", "0", "--out-dir", &p(dir.path(), "x")]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("epochs"));
}

#[test]
fn help_and_version_exit_0() {
    let (code, out, _) = hbci(&["--help"]);
    assert_eq!(code, EXIT_OK);
    for sub in ["filter-design", "psd", "erp", "simulate", "decode", "evaluate"] {
        assert!(out.contains(sub), "{sub} missing from help");
    }
    assert_eq!(hbci(&["--version"]).0, EXIT_OK);
}

#[test]
fn invalid_config_exits_2_and_lists_problems() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    let text = include_str!("../configs/default.toml").replace("frequency_hz = 8.0", "frequency_hz = 7.0");
    fs::write(&cfg, text).unwrap();
    let (code, _, err) = hbci(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", &p(dir.path(), "s")]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("duplicate frequency"), "{err}");
}

#[test]
fn malformed_recording_row_exits_3_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "2");
    let rec = dir.path().join("sim/recording.csv");
    let mut lines: Vec<String> = fs::read_to_string(&rec).unwrap().lines().map(String::from).collect();
    lines[10] = "36000,1.0,oops,3.0,4.0,5.0,6.0".into();
    fs::write(&rec, lines.join("\n") + "\n").unwrap();
    let (code, _, err) = hbci(&[
        "decode",
        "--recording",
        &p(dir.path(), "sim/recording.csv"),
        "--markers",
        &p(dir.path(), "sim/markers.csv"),
        "--out-dir",
        &p(dir.path(), "dec"),
    ]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("11"), "{err}");
}

#[test]
fn missing_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = hbci(&[
        "decode",
        "--recording",
        &p(dir.path(), "nope.csv"),
        "--markers",
        &p(dir.path(), "nope.csv"),
        "--out-dir",
        &p(dir.path(), "dec"),
    ]);
    assert_eq!(code, EXIT_DATA);
}

#[test]
fn pipeline_round_trip_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "8");
    let m = RunManifest::read(&d.join("sim/manifest.json")).unwrap();
    assert_eq!(m.subcommand, "simulate");
    assert_eq!(m.seed, Some(4));
    assert!(m.rng.unwrap().contains("ChaCha8"));
    assert_eq!(fs::read(d.join("sim/markers.serial")).unwrap().len(), 32);

    let (code, _, err) = hbci(&[
        "decode",
        "--recording",
        &p(d, "sim/recording.csv"),
        "--markers",
        &p(d, "sim/markers.csv"),
        "--out-dir",
        &p(d, "dec"),
        "--commands",
        &p(d, "dec/commands.txt"),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let log = fs::read_to_string(d.join("dec/decisions.csv")).unwrap();
    assert!(log.starts_with("epoch_idx,ssvep_winner_hz,p300_winner,agreement,command\n"));
    assert_eq!(log.lines().count(), 9);
    let wire = fs::read_to_string(d.join("dec/commands.txt")).unwrap();
    assert!(wire.lines().next().unwrap().starts_with("0,"));

    let report = p(d, "report.csv");
    let (code, out, _) =
        hbci(&["evaluate", "--decisions", &p(d, "dec/decisions.csv"), "--intents", &p(d, "sim/intents.csv"), "--out", &report]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("overall accuracy: "));
    assert!(fs::read_to_string(&report).unwrap().starts_with("stratum,key,successes,attempts,percent\n"));
    assert!(d.join("report.csv.manifest.json").exists());
}

#[test]
fn evaluate_rejects_misaligned_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("dec.csv"), "epoch_idx,ssvep_winner_hz,p300_winner,agreement,command\n0,7,o,true,Forward\n").unwrap();
    fs::write(d.join("int.csv"), "epoch_idx,attended_led,command\n0,0,Forward\n1,2,Backward\n").unwrap();
    let (code, _, _) = hbci(&["evaluate", "--decisions", &p(d, "dec.csv"), "--intents", &p(d, "int.csv")]);
    assert_eq!(code, EXIT_DATA);
}

#[test]
fn filter_design_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "bp");
    let (code, _, _) = hbci(&["filter-design", "bandpass", "--lo", "6.5", "--hi", "30", "--order", "4", "--fs", "250", "--out-dir", &out]);
    assert_eq!(code, EXIT_OK);
    let sos = fs::read_to_string(dir.path().join("bp/sos.csv")).unwrap();
    assert_eq!(sos.lines().count(), 5);
    let resp = fs::read_to_string(dir.path().join("bp/response.csv")).unwrap();
    assert_eq!(resp.lines().count(), 1252);
    let at_30 = resp.lines().find(|l| l.starts_with("30.0,")).unwrap();
    let db: f64 = at_30.split(',').nth(1).unwrap().parse().unwrap();
    assert!((db + 3.0103).abs() < 0.01);
    assert!(dir.path().join("bp/manifest.json").exists());
}

#[test]
fn itr_and_fixture_output() {
    let (code, out, _) = hbci(&["evaluate", "--itr", "1.0", "4", "60"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("2.00 bpm"));
    let (_, out, _) = hbci(&["evaluate", "--itr", "0.8625", "4", "1.717"]);
    assert!(out.contains("42.09 bpm") || out.contains("42.08 bpm"), "{out}");
    let (_, out, _) = hbci(&["evaluate", "--fixture", "table2"]);
    assert!(out.contains("87.50%") && out.contains("86.25%"));
}

#[test]
fn psd_and_erp_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "4");
    let (code, out, err) = hbci(&["psd", "--recording", &p(d, "sim/recording.csv"), "--start-ms", "1000", "--end-ms", "3000"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.starts_with("freq_hz,power\n"));
    assert_eq!(out.lines().count(), 252);
    let (code, out, _) = hbci(&[
        "erp",
        "--recording",
        &p(d, "sim/recording.csv"),
        "--markers",
        &p(d, "sim/markers.csv"),
        "--intents",
        &p(d, "sim/intents.csv"),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("time_ms,value_uV\n"));
    assert_eq!(out.lines().count(), 202);
    let (code, _, _) = hbci(&["erp", "--recording", &p(d, "sim/recording.csv"), "--markers", &p(d, "sim/markers.csv"), "--code", "z"]);
    assert_eq!(code, EXIT_USAGE);
}
