//! Contract tests of the command-line surface: exit codes, produced files,
//! gradcheck, round-trip through compare, and plotdata output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn wide() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wide"))
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wide-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn golden_solve_produces_all_outputs() {
    let root = workspace_root();
    let out = temp_dir("golden");
    let status = wide()
        .arg("solve")
        .arg("--config")
        .arg(root.join("configs").join("wave_mode1.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for name in [
        "field.csv",
        "energy.csv",
        "approx_energy.csv",
        "report.json",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    // LF line endings and the pinned header
    let field = fs::read_to_string(out.join("field.csv")).unwrap();
    assert!(field.starts_with("t,x,w\n"));
    assert!(!field.contains('\r'));
    let _ = fs::remove_dir_all(&out);
}

#[test]
fn invalid_step_guard_exits_2_naming_the_guard() {
    let dir = temp_dir("bad-dt");
    let config = write_config(
        &dir,
        "bad.json",
        r#"{
            "preset": "wave",
            "domain": { "length": 6.283185307179586, "nodes": 16, "bc": "periodic" },
            "time": { "horizon": 1.0, "dt": 0.02 },
            "epsilons": [0.1],
            "initial": { "w0": { "kind": "zero" }, "w1": { "kind": "zero" } }
        }"#,
    );
    let output = wide()
        .arg("solve")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("dt <= eps/10"),
        "stderr does not name the guard: {stderr}"
    );
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn unknown_preset_exits_2() {
    let dir = temp_dir("bad-preset");
    let config = write_config(
        &dir,
        "bad.json",
        r#"{
            "preset": "heat",
            "domain": { "length": 6.283185307179586, "nodes": 16, "bc": "periodic" },
            "time": { "horizon": 1.0, "dt": 0.005 },
            "epsilons": [0.1],
            "initial": { "w0": { "kind": "zero" }, "w1": { "kind": "zero" } }
        }"#,
    );
    let output = wide()
        .arg("solve")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn solve_rejects_multi_eps_schedules() {
    let root = workspace_root();
    let output = wide()
        .arg("solve")
        .arg("--config")
        .arg(root.join("configs").join("wave_sweep.json"))
        .arg("--out")
        .arg(temp_dir("multi"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn sweep_with_failing_entry_exits_3_but_keeps_entries() {
    let dir = temp_dir("fail-entry");
    // an impossible iteration budget forces non-convergence on the
    // quasi-Newton path
    let config = write_config(
        &dir,
        "fail.json",
        r#"{
            "preset": "nlw(4)",
            "domain": { "length": 6.283185307179586, "nodes": 16, "bc": "periodic" },
            "time": { "horizon": 1.0, "dt": 0.02 },
            "epsilons": [0.4, 0.2],
            "initial": {
                "w0": { "kind": "single-mode", "mode": 1, "amplitude": 1.0 },
                "w1": { "kind": "zero" }
            },
            "solver": {
                "tolerance": 1e-14, "max_iterations": 1, "memory": 10,
                "path": "nonlinear", "warm_start": false
            },
            "oracle": { "kind": "none" }
        }"#,
    );
    let out = dir.join("out");
    let output = wide()
        .arg("sweep")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert!(entries.iter().any(|e| e["error"].is_string()));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn single_entry_sweep_has_empty_slope_column() {
    let root = workspace_root();
    let out = temp_dir("single-sweep");
    let status = wide()
        .arg("sweep")
        .arg("--config")
        .arg(root.join("configs").join("wave_mode1.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = fs::read_to_string(out.join("convergence.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "epsilon,spacetime_l2_error,slope");
    let row = lines.next().unwrap();
    assert!(row.ends_with(','), "slope column not empty: {row}");
    let _ = fs::remove_dir_all(&out);
}

#[test]
fn cold_sweep_is_thread_count_invariant() {
    let dir = temp_dir("threads");
    let config = write_config(
        &dir,
        "cold.json",
        r#"{
            "preset": "wave",
            "domain": { "length": 6.283185307179586, "nodes": 32, "bc": "periodic" },
            "time": { "horizon": 1.0, "dt": 0.005 },
            "epsilons": [0.2, 0.1],
            "initial": {
                "w0": { "kind": "single-mode", "mode": 1, "amplitude": 1.0 },
                "w1": { "kind": "zero" }
            },
            "solver": {
                "tolerance": 1e-8, "max_iterations": 10000, "memory": 10,
                "path": "auto", "warm_start": false
            },
            "oracle": { "kind": "none" }
        }"#,
    );
    let out1 = dir.join("serial");
    let out2 = dir.join("parallel");
    let status = wide()
        .arg("sweep")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out1)
        .arg("--threads")
        .arg("1")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // the worker count may also come from the environment
    let status = wide()
        .arg("sweep")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out2)
        .env("WIDE_SOLVER_THREADS", "2")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for eps_dir in ["eps_0.200000", "eps_0.100000"] {
        let a = fs::read(out1.join(eps_dir).join("field.csv")).unwrap();
        let b = fs::read(out2.join(eps_dir).join("field.csv")).unwrap();
        assert_eq!(a, b, "{eps_dir} differs across thread counts");
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn gradcheck_passes_with_seed_7() {
    let output = wide()
        .arg("gradcheck")
        .arg("--seed")
        .arg("7")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("13 presets"), "unexpected output: {stdout}");
}

#[test]
fn presets_lists_the_registry() {
    let output = wide().arg("presets").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    for name in ["wave", "sine-gordon", "kirchhoff", "fractional-wave"] {
        assert!(stdout.contains(name), "registry listing misses {name}");
    }
}

#[test]
fn compare_round_trips_run_directories() {
    let root = workspace_root();
    let out = temp_dir("roundtrip");
    let status = wide()
        .arg("solve")
        .arg("--config")
        .arg(root.join("configs").join("wave_mode1.json"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let output = wide().arg("compare").arg(&out).arg(&out).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(
        stdout.contains("space-time rms gap: 0.000000e0"),
        "{stdout}"
    );
    let _ = fs::remove_dir_all(&out);
}

#[test]
fn compare_rejects_mismatched_directories() {
    let dir = temp_dir("mismatch");
    fs::create_dir_all(dir.join("a")).unwrap();
    fs::create_dir_all(dir.join("b")).unwrap();
    fs::write(dir.join("a/field.csv"), "t,x,w\n0e0,0e0,0e0\n").unwrap();
    fs::write(dir.join("b/field.csv"), "t,x,w\n0e0,0e0,0e0\n1e0,0e0,0e0\n").unwrap();
    let output = wide()
        .arg("compare")
        .arg(dir.join("a"))
        .arg(dir.join("b"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn plotdata_on_zero_data_is_all_zeros() {
    let dir = temp_dir("plotdata");
    let config = write_config(
        &dir,
        "zero.json",
        r#"{
            "preset": "wave",
            "domain": { "length": 6.283185307179586, "nodes": 16, "bc": "periodic" },
            "time": { "horizon": 1.0, "dt": 0.005 },
            "epsilons": [0.1],
            "initial": { "w0": { "kind": "zero" }, "w1": { "kind": "zero" } }
        }"#,
    );
    let out = dir.join("out");
    let status = wide()
        .arg("solve")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let status = wide().arg("plotdata").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let field = fs::read_to_string(out.join("field.dat")).unwrap();
    for line in field.lines().filter(|l| !l.is_empty()) {
        let w: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
        assert_eq!(w, 0.0);
    }
    let energy = fs::read_to_string(out.join("energy.dat")).unwrap();
    for line in energy.lines() {
        let e: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert_eq!(e, 0.0);
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn kappa_override_strips_damping() {
    let dir = temp_dir("kappa");
    let config = write_config(
        &dir,
        "kappa.json",
        r#"{
            "preset": "telegraph-on-top-of(wave)",
            "domain": { "length": 6.283185307179586, "nodes": 16, "bc": "periodic" },
            "time": { "horizon": 1.0, "dt": 0.005 },
            "epsilons": [0.1],
            "kappa": 0,
            "initial": {
                "w0": { "kind": "single-mode", "mode": 1, "amplitude": 1.0 },
                "w1": { "kind": "zero" }
            }
        }"#,
    );
    let out = dir.join("out");
    let status = wide()
        .arg("solve")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // with damping stripped, the cumulative dissipation column vanishes
    let energy = fs::read_to_string(out.join("energy.csv")).unwrap();
    let last = energy.lines().last().unwrap();
    let cum: f64 = last.split(',').nth(3).unwrap().parse().unwrap();
    assert_eq!(cum, 0.0);
    let _ = fs::remove_dir_all(&dir);

    // kappa = 1 on an undamped preset is a config error
    let dir = temp_dir("kappa-bad");
    let config = write_config(
        &dir,
        "bad.json",
        r#"{
            "preset": "wave",
            "domain": { "length": 6.283185307179586, "nodes": 16, "bc": "periodic" },
            "time": { "horizon": 1.0, "dt": 0.005 },
            "epsilons": [0.1],
            "kappa": 1,
            "initial": { "w0": { "kind": "zero" }, "w1": { "kind": "zero" } }
        }"#,
    );
    let output = wide()
        .arg("solve")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn initial_data_from_file_round_trips() {
    let dir = temp_dir("fromfile");
    fs::create_dir_all(&dir).unwrap();
    let values: Vec<String> = (0..16)
        .map(|i| format!("{:.6e}", (i as f64) * 0.01))
        .collect();
    fs::write(dir.join("w0.txt"), values.join("\n")).unwrap();
    let config = write_config(
        &dir,
        "fromfile.json",
        r#"{
            "preset": "wave",
            "domain": { "length": 6.283185307179586, "nodes": 16, "bc": "periodic" },
            "time": { "horizon": 1.0, "dt": 0.005 },
            "epsilons": [0.1],
            "initial": {
                "w0": { "kind": "from-file", "path": "w0.txt" },
                "w1": { "kind": "zero" }
            }
        }"#,
    );
    let out = dir.join("out");
    let status = wide()
        .arg("solve")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    // layer 0 of the field equals the file contents
    let field = fs::read_to_string(out.join("field.csv")).unwrap();
    let first: Vec<f64> = field
        .lines()
        .skip(1)
        .take(16)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    for (i, v) in first.iter().enumerate() {
        assert!((v - i as f64 * 0.01).abs() <= 1e-12);
    }
    let _ = fs::remove_dir_all(&dir);
}
