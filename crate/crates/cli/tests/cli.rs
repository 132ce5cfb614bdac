use std::path::Path;
use std::process::{Command, Output};

use fbmc_mimo::analysis::{Csi, ReceiverKind};
use fbmc_mimo::detection::Waveform;
use fbmc_mimo::harness::{parse_csv, preset, Mode, Scenario, Sweep, SweepVar};

fn simulate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate")).args(args).output().expect("run simulate")
}

fn small() -> Scenario {
    let mut s = preset("fig2a").unwrap();
    s.name = "tiny".into();
    s.trials = 100;
    s.receivers = vec![ReceiverKind::Mrc, ReceiverKind::Zf];
    s.sweep = Sweep { var: SweepVar::Antennas, values: vec![16.0, 32.0] };
    s
}

fn write_config(dir: &Path, s: &Scenario) -> String {
    let p = dir.join(format!("{}.json", s.name));
    std::fs::write(&p, s.to_json()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn list_prints_every_preset() {
    let o = simulate(&["--list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().any(|l| l == "fig9b"));
}

#[test]
fn config_run_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let s = small();
    let cfg = write_config(dir.path(), &s);
    let out = dir.path().join("out");
    let o = simulate(&["--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "9", "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("tiny.csv")).unwrap();
    let (embedded, rows) = parse_csv(&text).unwrap();
    assert_eq!(embedded.seed, 9);
    assert_eq!(rows.len(), 2 * 2 * 2);
    assert!(rows.iter().all(|r| r.seed == 9 && r.mode == Mode::Analytic));

    // The embedded scenario alone reproduces the file.
    let again = dir.path().join("again");
    let cfg2 = write_config(dir.path(), &Scenario { name: "tiny".into(), ..embedded });
    let o = simulate(&["--config", &cfg2, "--out", again.to_str().unwrap(), "--threads", "1"]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(again.join("tiny.csv")).unwrap(), text);
}

#[test]
fn plotdata_writes_one_file_per_receiver() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &small());
    let out = dir.path().join("out");
    let o = simulate(&["--config", &cfg, "--out", out.to_str().unwrap(), "--format", "plotdata"]);
    assert!(o.status.success());
    for rx in ["mrc", "zf"] {
        let text = std::fs::read_to_string(out.join(format!("tiny_{rx}.dat"))).unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 2);
        assert_eq!(data[0].split_whitespace().count(), 1 + 4 * 2);
    }
}

#[test]
fn waveform_ofdm_with_estimated_csi_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small();
    s.name = "wave".into();
    s.mode = Mode::Waveform;
    s.waveform = Waveform::Ofdm;
    s.antennas = 16;
    s.subcarriers = 16;
    s.data_symbols = 2;
    s.csi = vec![Csi::Imperfect];
    s.sweep = Sweep { var: SweepVar::Taps, values: vec![2.0] };
    let cfg = write_config(dir.path(), &s);
    let out = dir.path().join("out");
    let o = simulate(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = parse_csv(&std::fs::read_to_string(out.join("wave.csv")).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.rate_sim > 0.0 && r.mode == Mode::Waveform));
}

#[test]
fn invalid_scenarios_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small();
    s.users = 0;
    let cfg = write_config(dir.path(), &s);
    let o = simulate(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("users"));

    let o = simulate(&["--preset", "fig4"]);
    assert_eq!(o.status.code(), Some(2));

    let o = simulate(&["--preset", "fig2a", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name": "x", "antenas": 4}"#).unwrap();
    let o = simulate(&["--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let o = simulate(&["--config", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(4));
}
