use std::fs;
use std::path::Path;
use std::process::Command;

use ctsim::experiment::{aggregate, parse_config, CONFORMITY_HEATMAP, INIT_FINAL, SEMANTIC_TRENDS};

const SMALL: &str = "replications: 2
simulation:
  n_agents: 40
  max_epochs: 6
  master_seed: 5
";

fn simulate() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_simulate"));
    cmd.env_remove("CTSIM_OUT_DIR");
    cmd
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("experiment.yaml");
    fs::write(&path, text).unwrap();
    path
}

fn csv_files(root: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "csv") {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

#[test]
fn baseline_run_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let status = simulate()
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));

    let trends = fs::read_to_string(out.join(SEMANTIC_TRENDS)).unwrap();
    assert!(trends.starts_with("epoch,value,mean_distance,subpopulation,"));
    let init = fs::read_to_string(out.join(INIT_FINAL)).unwrap();
    assert!(init.starts_with("config,value,initial_mean,final_mean,public_transit_pct,"));
    assert_eq!(init.lines().count(), 1 + 4);
    for rep in 0..2 {
        let run = out.join("runs").join(format!("baseline-r{rep}"));
        for f in ["trips.csv", "epochs.csv", "summary.csv"] {
            assert!(run.join(f).is_file(), "{f}");
        }
    }
    let leftovers: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with(".staging")
        })
        .collect();
    assert!(leftovers.is_empty());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let seeds: Vec<u64> = manifest["runs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["master_seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, vec![5, 6]);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn manifest_replays_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let status = simulate()
        .arg(&config)
        .args(["--out"])
        .arg(&first)
        .args([
            "--seed",
            "31",
            "--experiment",
            "init",
            "--replications",
            "1",
        ])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let status = simulate()
        .arg(first.join("manifest.json"))
        .arg("--out")
        .arg(&second)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));

    let files = csv_files(&first);
    assert_eq!(files, csv_files(&second));
    assert!(files.len() > 4);
    for f in files {
        assert_eq!(
            fs::read(first.join(&f)).unwrap(),
            fs::read(second.join(&f)).unwrap(),
            "{f:?}"
        );
    }
}

#[test]
fn aggregates_recompute_from_run_files() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "experiment: conformity\ncf_grid: [0, 0.5, 1]\nsimulation:\n  n_agents: 30\n  max_epochs: 3\n",
    );
    let out = tmp.path().join("out");
    let status = simulate()
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let heatmap = fs::read(out.join(CONFORMITY_HEATMAP)).unwrap();
    let text = String::from_utf8(heatmap.clone()).unwrap();
    assert!(text.starts_with("init_config,cf,public_transit_pct,"));
    assert_eq!(text.lines().count(), 1 + 4 * 3);

    let spec = parse_config(&out.join("manifest.json")).unwrap();
    fs::remove_file(out.join(CONFORMITY_HEATMAP)).unwrap();
    aggregate(&spec, &out).unwrap();
    assert_eq!(fs::read(out.join(CONFORMITY_HEATMAP)).unwrap(), heatmap);
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("from-env");
    let status = simulate()
        .arg(&config)
        .env("CTSIM_OUT_DIR", &out)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    let bad = write_config(tmp.path(), "simulation:\n  n_agents: -5\n");
    let result = simulate()
        .arg(&bad)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("n_agents"));
    assert!(!out.exists());

    let config = write_config(tmp.path(), SMALL);
    let result = simulate()
        .arg(&config)
        .args(["--experiment", "everything"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));

    let result = simulate()
        .arg(&config)
        .args(["--replications", "0"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("replications"));

    // output path blocked by a regular file
    let blocked = tmp.path().join("blocked");
    fs::write(&blocked, "").unwrap();
    let result = simulate()
        .arg(&config)
        .arg("--out")
        .arg(&blocked)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert_eq!(seen, 3);
}

#[test]
fn readme_example_lists_the_defaults() {
    let readme =
        fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap();
    let block: String = readme
        .split("```yaml\n")
        .nth(1)
        .and_then(|rest| rest.split("```").next())
        .unwrap()
        .to_string();
    let spec = ctsim::experiment::parse_config_str(&block, Path::new("README.md")).unwrap();
    assert_eq!(spec, ctsim::ExperimentSpec::default());
}
