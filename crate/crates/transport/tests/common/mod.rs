//! Helpers shared by the integration targets: run a config into a scratch
//! directory and compare what landed on disk.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::AtomicBool;

use nlse_transport::output::MANIFEST_NAME;
use nlse_transport::{parse_config, run, Mode, RunManifest, RunOptions, TransportError};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

/// Every file under `dir` except the manifest, keyed by relative path.
pub fn data_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).expect("readable output directory") {
            let path = entry.expect("directory entry").path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).expect("inside root").to_string_lossy().replace('\\', "/");
                if rel != MANIFEST_NAME {
                    out.insert(rel, fs::read(&path).expect("readable output file"));
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Parses `text` and runs it into `dir`.
pub fn run_text(text: &str, mode: Option<Mode>, dir: &Path, workers: Option<usize>) -> Result<RunManifest, TransportError> {
    let config = parse_config(text)?;
    let mode = config.resolve_mode(mode)?;
    let opts = RunOptions { out_dir: Some(dir.to_path_buf()), workers };
    run(&config, mode, &opts, &AtomicBool::new(false))
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn fail(e: impl ToString) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

/// A small config of a randomly chosen cheap mode.
fn small_config() -> impl Strategy<Value = String> {
    let linear = (10.0..80.0f64, 0.0..3.0f64, 11usize..200).prop_map(|(d, beta, count)| {
        format!(
            "mode = \"linear\"\n[dimensionless]\nd = {d:?}\n[linear]\nbeta = {beta:?}\nprofile_points = 33\n\
             deltas = {{ start = 0.0, stop = {:?}, count = {count} }}\n",
            4.0 * (std::f64::consts::PI / d).powi(2)
        )
    });
    let modes = (10.0..60.0f64, -1.0..1.0f64).prop_map(|(d, kappa)| {
        let bound = if kappa < 0.0 { "[1]" } else { "[]" };
        format!(
            "mode = \"modes\"\n[dimensionless]\nd = {d:?}\nkappa = {kappa:?}\n\
             [modes]\nsingles = 3\npairs = [[1, 2]]\nbound = {bound}\nwavefunction_points = 21\n"
        )
    });
    let saturation = (10.0..40.0f64, 0.01..0.2f64).prop_map(|(d, kappa)| {
        format!(
            "mode = \"semiclassical\"\n[dimensionless]\nd = {d:?}\nkappa = {kappa:?}\n\
             [semiclassical]\nkind = \"saturation\"\nphoton_numbers = [0.1, 0.5, 1.0, 2.0]\n"
        )
    });
    let bandgap = (5.0..20.0f64, -30.0..-10.0f64, 50.0..500.0f64).prop_map(|(omega, delta1, od)| {
        format!(
            "mode = \"bandgap\"\n[physical]\ngamma1d_over_gamma = 0.1\ndelta1_over_gamma = {delta1:?}\n\
             delta2_over_gamma = 0.0\nod = {od:?}\nomega_over_gamma = {omega:?}\n\
             [bandgap]\ndelta3 = {{ start = -20.0, stop = 5.0, count = 101 }}\n"
        )
    });
    prop_oneof![linear, modes, saturation, bandgap]
}

/// Two runs of the same config write byte-identical data files, and their
/// manifests list the same checksums.
pub fn repeated_runs_identical(cases: u32) -> Result<(), String> {
    runner(cases)
        .run(&small_config(), |text| {
            let a = tempfile::tempdir().map_err(fail)?;
            let b = tempfile::tempdir().map_err(fail)?;
            let ma = run_text(&text, None, a.path(), None).map_err(fail)?;
            let mb = run_text(&text, None, b.path(), None).map_err(fail)?;
            prop_assert_eq!(&ma.outputs, &mb.outputs);
            prop_assert!(data_files(a.path()) == data_files(b.path()), "data files differ");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// A sweep writes the same bytes whatever the worker count, with rows in
/// the order the axis values were given.
pub fn sweep_order_independent(cases: u32) -> Result<(), String> {
    let strategy = (proptest::collection::vec(10.0..60.0f64, 2..7), 2usize..5);
    runner(cases)
        .run(&strategy, |(lengths, workers)| {
            let list = lengths.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ");
            let text = format!(
                "mode = \"sweep\"\n[dimensionless]\nd = 30.0\n[linear]\ndeltas = [0.005, 0.01, 0.02]\nprofile_points = 9\n\
                 [sweep]\nmode = \"linear\"\naxis = \"dimensionless.d\"\nvalues = [{list}]\n"
            );
            let serial = tempfile::tempdir().map_err(fail)?;
            let parallel = tempfile::tempdir().map_err(fail)?;
            run_text(&text, None, serial.path(), Some(1)).map_err(fail)?;
            run_text(&text, None, parallel.path(), Some(workers)).map_err(fail)?;
            let files = data_files(serial.path());
            prop_assert!(files == data_files(parallel.path()), "worker count changed the output");
            let merged = String::from_utf8(files["sweep.csv"].clone()).map_err(fail)?;
            let mut seen: Vec<f64> = Vec::new();
            for line in merged.lines().skip(1) {
                let v: f64 = line.split(',').next().unwrap_or("").parse().map_err(fail)?;
                if seen.last() != Some(&v) {
                    seen.push(v);
                }
            }
            prop_assert_eq!(seen, lengths);
            Ok(())
        })
        .map_err(|e| e.to_string())
}
