use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn twobath(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twobath"))
        .args(args)
        .current_dir(dir)
        .env("TWOBATH_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_ok(dir: &Path, args: &[&str]) {
    let o = twobath(args, dir);
    assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
}

fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

const TABLE1_SYSTEM: &str = r#"{
    "omega01_hz": 5.5e9,
    "radiative": {"gamma_hz": 227e3, "occupation": 0.004},
    "nonradiative": {"gamma_hz": 55e3, "occupation": 0.139}
}"#;

#[test]
fn empty_config_is_a_config_error() {
    let t = TempDir::new().unwrap();
    let c = write_config(t.path(), "c.json", "{}");
    for cmd in ["validate", "simulate"] {
        let o = twobath(&[cmd, "--config", &c], t.path());
        assert_eq!(code(&o), 1);
        assert!(stderr(&o).contains("scenario"), "{}", stderr(&o));
    }
}

#[test]
fn unknown_keys_rejected() {
    let t = TempDir::new().unwrap();
    let top = write_config(t.path(), "a.json", r#"{"scenario": "qp", "colour": 1}"#);
    let nested = write_config(
        t.path(),
        "b.json",
        r#"{"scenario": "spectrum", "params": {"points": 11, "span": 3}}"#,
    );
    let sys = write_config(
        t.path(),
        "c.json",
        r#"{"scenario": "qp", "system": {"omega01_hz": 5e9, "radiative": {"gamma_hz": 1e5, "occupation": 0, "t": 1},
            "nonradiative": {"gamma_hz": 1e4, "occupation": 0}}}"#,
    );
    for c in [top, nested, sys] {
        let o = twobath(&["validate", "--config", &c], t.path());
        assert_eq!(code(&o), 1, "{c}");
        assert!(stderr(&o).contains("unknown field"), "{}", stderr(&o));
    }
}

#[test]
fn missing_config_file_is_io_error() {
    let t = TempDir::new().unwrap();
    let o = twobath(&["validate", "--config", "absent.json"], t.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn missing_input_is_io_error() {
    let t = TempDir::new().unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        r#"{"scenario": "fit", "params": {"kind": "mollow", "input": "nope.csv"}}"#,
    );
    assert_eq!(code(&twobath(&["fit", "--config", &c], t.path())), 3);
    assert_eq!(code(&twobath(&["validate", "--config", &c], t.path())), 3);
}

#[test]
fn malformed_input_is_io_error() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("bad.csv"), "freq_hz,psd_w_per_hz\n1,abc\n").unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        r#"{"scenario": "fit", "params": {"kind": "thermal", "input": "bad.csv"}}"#,
    );
    assert_eq!(code(&twobath(&["fit", "--config", &c], t.path())), 3);
}

#[test]
fn negative_radiative_rate_rejected() {
    let t = TempDir::new().unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        r#"{"scenario": "spectrum", "system": {"omega01_hz": 5.5e9,
            "radiative": {"gamma_hz": -227e3, "occupation": 0.004},
            "nonradiative": {"gamma_hz": 55e3, "occupation": 0.139}}}"#,
    );
    let o = twobath(&["validate", "--config", &c], t.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("radiative"));
}

#[test]
fn table1_config_validates_with_notes() {
    let t = TempDir::new().unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        &format!(r#"{{"scenario": "table1", "system": {TABLE1_SYSTEM}}}"#),
    );
    let o = twobath(&["validate", "--config", &c], t.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("ok"), "{out}");
    assert!(out.contains("Γ1/2π = 2.99"), "{out}");
    assert!(
        fs::read_dir(t.path()).unwrap().count() == 1,
        "validate must not write outputs"
    );
}

#[test]
fn intermediate_drive_warns() {
    let t = TempDir::new().unwrap();
    let sys = TABLE1_SYSTEM.replace(
        "\"omega01_hz\": 5.5e9,",
        "\"omega01_hz\": 5.5e9, \"drives\": [{\"transition\": \"01\", \"rabi_hz\": 2e5}],",
    );
    let c = write_config(
        t.path(),
        "c.json",
        &format!(r#"{{"scenario": "spectrum", "system": {sys}}}"#),
    );
    let o = twobath(&["validate", "--config", &c], t.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("warning: drive"), "{}", stdout(&o));
}

#[test]
fn undersampled_welch_rejected() {
    let t = TempDir::new().unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        r#"{"scenario": "welch", "params": {"sample_rate_hz": 1e6}}"#,
    );
    let o = twobath(&["validate", "--config", &c], t.path());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("undersamples"));
}

#[test]
fn scenario_must_match_subcommand() {
    let t = TempDir::new().unwrap();
    let c = write_config(t.path(), "c.json", r#"{"scenario": "table1"}"#);
    assert_eq!(code(&twobath(&["simulate", "--config", &c], t.path())), 1);
}

#[test]
fn both_weightings_rejected() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("s.csv"), "freq_hz,psd_w_per_hz\n1,1\n").unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        r#"{"scenario": "fit", "params": {"kind": "thermal", "input": "s.csv", "relative_noise": 0.05, "sigma": 1e-20}}"#,
    );
    assert_eq!(code(&twobath(&["fit", "--config", &c], t.path())), 1);
}

#[test]
fn power_loss_crosses_zero_near_95_khz() {
    let t = TempDir::new().unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        &format!(
            r#"{{"scenario": "power-loss", "system": {TABLE1_SYSTEM},
                "params": {{"rabi_min_hz": 1e4, "rabi_max_hz": 1e7, "points": 61}}}}"#
        ),
    );
    run_ok(t.path(), &["simulate", "--config", &c, "--out", "out"]);
    let (header, rows) = read_csv(&t.path().join("out/power-loss.csv"));
    assert_eq!(header, "rabi_hz,watts");
    assert_eq!(rows.len(), 61);
    assert!((rows[0][0] - 1e4).abs() < 1e-6 && (rows[60][0] - 1e7).abs() < 1e-3);
    assert!(rows[0][1] < 0.0 && rows[60][1] > 0.0);
    let sign_changes: Vec<_> = rows
        .windows(2)
        .filter(|w| (w[0][1] < 0.0) != (w[1][1] < 0.0))
        .collect();
    assert_eq!(sign_changes.len(), 1);
    let w = sign_changes[0];
    assert!(w[0][0] < 95e3 && w[1][0] > 90e3, "{w:?}");

    let summary: Value = serde_json::from_str(
        &fs::read_to_string(t.path().join("out/power-loss_summary.json")).unwrap(),
    )
    .unwrap();
    let zc = summary["zero_crossing_hz"].as_f64().unwrap();
    assert!((zc - 95e3).abs() < 3e3, "{zc}");
}

#[test]
fn outputs_are_deterministic() {
    let t = TempDir::new().unwrap();
    let c = write_config(t.path(), "c.json", r#"{"scenario": "table1", "seed": 7}"#);
    run_ok(t.path(), &["table1", "--config", &c, "--out", "a"]);
    run_ok(
        t.path(),
        &["table1", "--config", &c, "--out", "b", "--threads", "1"],
    );
    let names: Vec<_> = fs::read_dir(t.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 8);
    for n in names {
        let a = fs::read(t.path().join("a").join(&n)).unwrap();
        let b = fs::read(t.path().join("b").join(&n)).unwrap();
        assert!(a == b, "{n:?} differs");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let t = TempDir::new().unwrap();
    let c = write_config(t.path(), "c.json", r#"{"scenario": "table1", "seed": 7}"#);
    run_ok(t.path(), &["table1", "--config", &c, "--out", "a"]);
    run_ok(
        t.path(),
        &["table1", "--config", &c, "--out", "b", "--seed", "8"],
    );
    let a = fs::read(t.path().join("a/table1_mollow.csv")).unwrap();
    let b = fs::read(t.path().join("b/table1_mollow.csv")).unwrap();
    assert_ne!(a, b);
    let meta: Value = serde_json::from_str(
        &fs::read_to_string(t.path().join("b/table1.json.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["config"]["seed"], 8);
}

#[test]
fn sidecars_carry_config_and_digest() {
    let t = TempDir::new().unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        r#"{"scenario": "reflection", "params": {"points": 21}}"#,
    );
    run_ok(t.path(), &["simulate", "--config", &c, "--out", "o"]);
    let data = fs::read(t.path().join("o/reflection.csv")).unwrap();
    let meta: Value = serde_json::from_str(
        &fs::read_to_string(t.path().join("o/reflection.csv.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(
        meta["sha256"].as_str().unwrap(),
        format!("{:x}", Sha256::digest(&data))
    );
    assert_eq!(meta["bytes"].as_u64().unwrap() as usize, data.len());
    let cfg = &meta["config"];
    assert_eq!(cfg["scenario"], "reflection");
    assert_eq!(cfg["params"]["points"], 21);
    // Defaults are filled in.
    assert_eq!(cfg["params"]["half_span_hz"], 1.5e6);
    assert_eq!(cfg["system"]["radiative"]["gamma_hz"], 227e3);

    // The recorded config is itself a valid config reproducing the output.
    fs::write(
        t.path().join("again.json"),
        serde_json::to_string(cfg).unwrap(),
    )
    .unwrap();
    run_ok(
        t.path(),
        &["simulate", "--config", "again.json", "--out", "p"],
    );
    assert_eq!(fs::read(t.path().join("p/reflection.csv")).unwrap(), data);
}

#[test]
fn spectrum_scenario_analytic_matches_numeric() {
    let t = TempDir::new().unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        r#"{"scenario": "spectrum", "params": {"points": 161}}"#,
    );
    run_ok(t.path(), &["simulate", "--config", &c, "--out", "o"]);
    for kind in ["thermal", "mollow"] {
        let (h, a) = read_csv(&t.path().join(format!("o/spectrum_{kind}.csv")));
        let (_, n) = read_csv(&t.path().join(format!("o/spectrum_{kind}_numeric.csv")));
        assert_eq!(h, "freq_hz,psd_w_per_hz");
        assert_eq!(a.len(), 161);
        let peak = a.iter().map(|r| r[1]).fold(0.0, f64::max);
        // The closed-form Mollow line omits the side peaks, whose tails
        // reach the center at the percent level for Ω ≈ 30Γ1.
        let tol = if kind == "thermal" { 1e-3 } else { 1e-2 };
        for (x, y) in a.iter().zip(&n) {
            assert_eq!(x[0], y[0]);
            assert!(
                (x[1] - y[1]).abs() < tol * peak,
                "{kind} at {}: {} vs {}",
                x[0],
                x[1],
                y[1]
            );
        }
    }
}

#[test]
fn fit_round_trip_on_simulated_line() {
    let t = TempDir::new().unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        r#"{"scenario": "spectrum", "params": {"numeric": false}}"#,
    );
    run_ok(t.path(), &["simulate", "--config", &c, "--out", "o"]);
    let f = write_config(
        t.path(),
        "f.json",
        r#"{"scenario": "fit", "params": {"kind": "thermal", "input": "o/spectrum_thermal.csv"}}"#,
    );
    run_ok(t.path(), &["fit", "--config", &f, "--out", "o"]);
    let v: Value =
        serde_json::from_str(&fs::read_to_string(t.path().join("o/fit.json")).unwrap()).unwrap();
    let names = v["fit"]["names"].as_array().unwrap();
    let i = names.iter().position(|n| n == "gamma_2_hz").unwrap();
    let g2 = v["fit"]["values"][i].as_f64().unwrap();
    assert!((g2 - 149.55e3).abs() < 100.0, "{g2}");
    let p = v["thermal_power_w"].as_f64().unwrap();
    assert!((p - 132e-21).abs() < 5e-21, "{p}");
}

#[test]
fn welch_surrogate_and_raw_input() {
    let t = TempDir::new().unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        r#"{"scenario": "welch", "params": {"duration_s": 0.5}}"#,
    );
    run_ok(t.path(), &["welch", "--config", &c, "--out", "o"]);
    let (h, rows) = read_csv(&t.path().join("o/welch.csv"));
    assert_eq!(h, "freq_hz,psd_w_per_hz");
    assert!(rows.len() > 100);
    let v: Value =
        serde_json::from_str(&fs::read_to_string(t.path().join("o/welch_fit.json")).unwrap())
            .unwrap();
    assert!(v["segment_len"].as_u64().unwrap() >= 256);

    // Raw little-endian stream with sidecar.
    let fs_hz = 1e5;
    let samples: Vec<f64> = (0..8192)
        .map(|k| (2.0 * std::f64::consts::PI * 1e4 * k as f64 / fs_hz).cos())
        .collect();
    let bytes: Vec<u8> = samples.iter().flat_map(|x| x.to_le_bytes()).collect();
    fs::write(t.path().join("tone.f64"), bytes).unwrap();
    fs::write(
        t.path().join("tone.f64.json"),
        r#"{"sample_rate_hz": 1e5, "gain": 2.0}"#,
    )
    .unwrap();
    let r = write_config(
        t.path(),
        "r.json",
        r#"{"scenario": "welch", "output_prefix": "tone",
            "params": {"input": "tone.f64", "segment_len": 1024, "fit": false}}"#,
    );
    run_ok(t.path(), &["welch", "--config", &r, "--out", "o"]);
    let (_, rows) = read_csv(&t.path().join("o/tone.csv"));
    let df = rows[1][0] - rows[0][0];
    let power: f64 = rows.iter().map(|r| r[1] * df).sum();
    // Mean square of a unit cosine is 1/2, times the gain.
    assert!((power - 1.0).abs() < 0.02, "{power}");
    let peak = rows.iter().max_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    assert!((peak[0] - 1e4).abs() <= df);
}

#[test]
fn spectrometer_tracks_profile() {
    let t = TempDir::new().unwrap();
    let c = write_config(
        t.path(),
        "c.json",
        r#"{"scenario": "spectrometer",
            "system": {"omega01_hz": 5e9, "radiative": {"gamma_hz": 1e6, "occupation": 0.0},
                       "nonradiative": {"gamma_hz": 1e3, "occupation": 0.1}},
            "params": {"gamma_r_hz": 1e6, "gamma_n_hz": 1e3,
                       "profile": {"kind": "step", "below": 0.05, "above": 0.2, "at_hz": 5e9},
                       "f_start_hz": 4.9e9, "f_stop_hz": 5.1e9, "points": 5}}"#,
    );
    run_ok(t.path(), &["spectrometer", "--config", &c, "--out", "o"]);
    let (h, rows) = read_csv(&t.path().join("o/spectrometer.csv"));
    assert_eq!(h, "omega01_hz,delta_n");
    assert_eq!(rows.len(), 5);
    assert!((rows[0][1] - 0.05).abs() < 2e-3, "{rows:?}");
    assert!((rows[4][1] - 0.2).abs() < 5e-3, "{rows:?}");
}

#[test]
fn remaining_scenarios_run() {
    let t = TempDir::new().unwrap();
    for (s, files) in [
        ("budget", vec!["budget.csv"]),
        ("qp", vec!["qp.json"]),
        (
            "autler",
            vec!["autler_difference.csv", "autler_sidepeaks.csv"],
        ),
    ] {
        let c = write_config(
            t.path(),
            &format!("{s}.json"),
            &format!(r#"{{"scenario": "{s}"}}"#),
        );
        run_ok(t.path(), &["simulate", "--config", &c, "--out", "o"]);
        for f in files {
            assert!(t.path().join("o").join(f).is_file(), "{f}");
            assert!(t.path().join("o").join(format!("{f}.meta.json")).is_file());
        }
    }
    let (h, rows) = read_csv(&t.path().join("o/budget.csv"));
    assert_eq!(h, "rabi_hz,p_loss_w,w_dot_w,q_dot_r_w,q_dot_n_w,u_dot_w");
    for r in rows {
        // Energy balance: dU/dt = W + Q_r + Q_n in steady state vanishes.
        let scale = r[2].abs().max(r[3].abs()).max(1e-30);
        assert!((r[2] + r[3] + r[4]).abs() < 1e-9 * scale, "{r:?}");
        assert!(r[5].abs() < 1e-9 * scale);
    }
}

#[test]
fn bad_thread_env_is_config_error() {
    let t = TempDir::new().unwrap();
    let c = write_config(t.path(), "c.json", r#"{"scenario": "qp"}"#);
    let o = Command::new(env!("CARGO_BIN_EXE_twobath"))
        .args(["simulate", "--config", &c])
        .current_dir(t.path())
        .env("TWOBATH_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}
