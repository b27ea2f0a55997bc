mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nlse_transport::config::to_toml;
use nlse_transport::output::{Artifact, MANIFEST_NAME};
use nlse_transport::parse_config;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlse-transport"))
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn invoke(mode: &str, config: &Path, out: &Path) -> Output {
    bin()
        .args([mode, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .env_remove(nlse_transport::WORKERS_ENV)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn linear_preset_exits_cleanly_and_peaks_on_resonance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let result = invoke("linear", &preset("linear.toml"), &out);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));

    let text = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let mut rows = text.lines();
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    assert_eq!(header[0], "delta");
    let t_col = header.iter().position(|h| *h == "transmission").unwrap();
    let points: Vec<(f64, f64)> = rows
        .map(|r| {
            let cells: Vec<&str> = r.split(',').collect();
            (cells[0].parse().unwrap(), cells[t_col].parse().unwrap())
        })
        .collect();
    let step = points[1].0 - points[0].0;
    let target = (std::f64::consts::PI / 30.0).powi(2);
    // Below the midpoint to the second resonance, which also reaches |T|² = 1.
    let (peak, _) = points.iter().copied().filter(|p| p.0 < 2.5 * target).fold((f64::NAN, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best });
    assert!((peak - target).abs() <= step, "peak {peak} vs {target}");
}

#[test]
fn manifest_checksums_match_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let result = invoke("modes", &preset("modes.toml"), &out);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join(MANIFEST_NAME)).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    let on_disk = common::data_files(&out);
    assert_eq!(outputs.len(), on_disk.len());
    for o in outputs {
        let path = o["path"].as_str().unwrap();
        let bytes = &on_disk[path];
        assert_eq!(o["sha256"].as_str().unwrap(), Artifact::new(path, bytes.clone()).sha256(), "{path}");
        assert_eq!(o["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    assert!(manifest["timings"]["total_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn both_parameter_blocks_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "mode = \"linear\"\n[dimensionless]\nd = 30.0\n[physical]\ngamma1d_over_gamma = 0.1\n\
         delta1_over_gamma = -10.0\ndelta2_over_gamma = 5.0\nod = 100.0\n",
    );
    let out = dir.path().join("out");
    let result = invoke("linear", &config, &out);
    assert_eq!(result.status.code(), Some(1));
    let err = String::from_utf8_lossy(&result.stderr);
    assert!(err.contains("physical") && err.contains("dimensionless"), "{err}");
    assert!(!out.exists());
}

#[test]
fn unknown_key_exits_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "mode = \"linear\"\n[dimensionless]\nd = 30.0\nkapa = 0.1\n");
    let result = invoke("linear", &config, &dir.path().join("out"));
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("dimensionless"));
}

#[test]
fn empty_sweep_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "mode = \"sweep\"\n[dimensionless]\nd = 30.0\n[sweep]\nmode = \"linear\"\naxis = \"dimensionless.d\"\nvalues = []\n",
    );
    let out = dir.path().join("out");
    let result = invoke("sweep", &config, &out);
    assert_eq!(result.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn unsettled_quantum_run_writes_series_and_exits_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "mode = \"quantum\"\n[dimensionless]\nd = 8.0\nkappa = 0.5\n[quantum]\nwindow = 1.0\nhorizon = 1.0\ntaus = []\n",
    );
    let out = dir.path().join("out");
    let result = invoke("quantum", &config, &out);
    assert_eq!(result.status.code(), Some(2), "{}", String::from_utf8_lossy(&result.stderr));
    assert!(out.join("series.csv").exists());
    assert!(out.join(MANIFEST_NAME).exists());
}

#[test]
fn workers_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "mode = \"sweep\"\n[dimensionless]\nd = 30.0\n[linear]\ndeltas = [0.01, 0.011]\n\
         [sweep]\nmode = \"linear\"\naxis = \"dimensionless.d\"\nvalues = [20.0, 30.0, 40.0]\n",
    );
    let serial = dir.path().join("serial");
    let parallel = dir.path().join("parallel");
    let a = bin().args(["sweep", "--config"]).arg(&config).arg("--out").arg(&serial).env(nlse_transport::WORKERS_ENV, "1").output().unwrap();
    let b = bin().args(["sweep", "--config"]).arg(&config).arg("--out").arg(&parallel).env(nlse_transport::WORKERS_ENV, "3").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(common::data_files(&serial), common::data_files(&parallel));
}

#[test]
fn presets_round_trip_through_serialization() {
    for entry in fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let first = parse_config(&fs::read_to_string(&path).unwrap()).unwrap();
        let text = to_toml(&first).unwrap();
        let second = parse_config(&text).unwrap();
        assert_eq!(first, second, "{}", path.display());
        assert_eq!(to_toml(&second).unwrap(), text);
    }
}

#[test]
fn repeated_runs_are_identical() {
    if let Err(e) = common::repeated_runs_identical(12) {
        panic!("{e}");
    }
}

#[test]
fn sweep_output_ignores_worker_count() {
    if let Err(e) = common::sweep_order_independent(8) {
        panic!("{e}");
    }
}

#[test]
fn quantum_sweep_ignores_worker_count() {
    let text = "mode = \"sweep\"\n[dimensionless]\nd = 8.0\nkappa = 0.0\n[quantum]\ntaus = [0.0, 1.0]\n\
                [sweep]\nmode = \"quantum\"\naxis = \"dimensionless.kappa\"\nvalues = [0.5, 0.0]\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    common::run_text(text, None, a.path(), Some(1)).unwrap();
    common::run_text(text, None, b.path(), Some(2)).unwrap();
    assert_eq!(common::data_files(a.path()), common::data_files(b.path()));
}
