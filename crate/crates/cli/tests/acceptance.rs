//! CLI acceptance: discrete minimality and level bounds on every shipped
//! instance (criterion 2) and bit-exact reproducibility of solve runs
//! (criterion 10), each printing one pass/fail line.

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
    let dir = std::env::temp_dir().join(format!("wide-acceptance-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn verdict(criterion: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {criterion}: {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Sweep configs carry several eps entries; everything else is a solve.
fn subcommand_for(config: &serde_json::Value) -> &'static str {
    if config["epsilons"].as_array().map(|a| a.len()).unwrap_or(1) > 1 {
        "sweep"
    } else {
        "solve"
    }
}

#[test]
fn criterion_2_minimality_on_every_shipped_instance() {
    let root = workspace_root();
    let configs_dir = root.join("configs");
    let mut names: Vec<PathBuf> = fs::read_dir(&configs_dir)
        .expect("configs directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
        .collect();
    names.sort();
    assert!(!names.is_empty(), "no shipped configs found");

    let mut detail = String::new();
    let mut pass = true;
    for config_path in &names {
        let config: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(config_path).unwrap()).unwrap();
        let stem = config_path
            .file_stem()
            .unwrap()
            .to_string_lossy()
            .to_string();
        let out = temp_dir(&format!("c2-{stem}"));
        let status = wide()
            .arg(subcommand_for(&config))
            .arg("--config")
            .arg(config_path)
            .arg("--out")
            .arg(&out)
            .output()
            .expect("run wide");
        let ok = status.status.code() == Some(0);
        pass &= ok;
        if !ok {
            detail.push_str(&format!(
                "{stem}: exit {:?} ({}); ",
                status.status.code(),
                String::from_utf8_lossy(&status.stderr).trim()
            ));
            continue;
        }
        // every minimality and level-bound check in the report must pass
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
        for entry in report["entries"].as_array().unwrap() {
            for check in entry["checks"].as_array().unwrap() {
                let name = check["name"].as_str().unwrap();
                if name == "minimality" || name == "level-bound" {
                    let ok = check["status"] == "pass" || check["status"] == "skipped";
                    pass &= ok;
                    if !ok {
                        detail.push_str(&format!("{stem} eps={}: {name} failed; ", entry["eps"]));
                    }
                }
            }
        }
        detail.push_str(&format!("{stem}: ok; "));
        let _ = fs::remove_dir_all(&out);
    }
    verdict(
        "2 (discrete minimality on shipped instances)",
        pass,
        &format!(
            "{} configs, F(minimizer) <= F(competitor) + 1e-10 (1 + |F|) and J <= G(w0) + \
             10 eps (1 + G(w0)) everywhere: {detail}",
            names.len()
        ),
    );
}

#[test]
fn criterion_10_reproducibility_bit_identical_runs() {
    let root = workspace_root();
    let config = root.join("configs").join("wave_mode1.json");
    let out_a = temp_dir("c10-a");
    let out_b = temp_dir("c10-b");
    for out in [&out_a, &out_b] {
        let status = wide()
            .arg("solve")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(out)
            .arg("--seed")
            .arg("42")
            .status()
            .expect("run wide");
        assert_eq!(status.code(), Some(0));
    }
    let mut pass = true;
    let mut detail = String::new();
    for name in ["field.csv", "energy.csv", "approx_energy.csv"] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        let same = a == b;
        pass &= same;
        detail.push_str(&format!(
            "{name}: {}; ",
            if same { "bit-identical" } else { "DIFFERS" }
        ));
    }
    // reports agree except the wall times
    let strip = |p: &Path| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(p.join("report.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_ms");
        for entry in v["entries"].as_array_mut().unwrap() {
            if let Some(stats) = entry.get_mut("stats").and_then(|s| s.as_object_mut()) {
                stats.remove("wall_time_ms");
            }
        }
        v
    };
    let same_report = strip(&out_a) == strip(&out_b);
    pass &= same_report;
    detail.push_str(&format!(
        "report.json (minus wall times): {}",
        if same_report { "identical" } else { "DIFFERS" }
    ));
    let _ = fs::remove_dir_all(&out_a);
    let _ = fs::remove_dir_all(&out_b);
    verdict("10 (reproducibility)", pass, &detail);
}
