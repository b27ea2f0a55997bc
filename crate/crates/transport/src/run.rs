//! Mode dispatch, sweeps and run orchestration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use nlse_core::linear::{analytic_spectrum, bandgap_spectrum, linear_fields, lossy_mass, SusceptibilityParams};
use nlse_core::quantum::{
    evolve_to_steady, g2_tau, intensity_profile, observables, ObservableSeries, Observables, QuantumError,
};
use nlse_core::semiclassical::{nonlinear_spectrum_with, transmission_vs_photon_number, SemiclassicalError, ShootingOptions};
use nlse_core::spectral::{
    bound_pair_seed, root_continuation, single_particle_modes, two_particle_roots, two_particle_wavefunction,
    EigenSolution,
};
use nlse_core::{DimensionlessParams, SpectrumTable, C64};
use rayon::prelude::*;

use crate::config::{to_toml, ExperimentConfig, Mode, SemiclassicalKind};
use crate::error::TransportError;
use crate::output::{format_float, json_bytes, matrix_csv, text_csv, write_run, Artifact, RunManifest, Timings};

/// Flag values of the merged sweep table.
pub const FLAG_OK: f64 = 0.0;
pub const FLAG_NOT_CONVERGED: f64 = 1.0;
pub const FLAG_FAILED: f64 = 2.0;

/// Everything one mode produced.
#[derive(Debug, Clone)]
pub struct ModeResult {
    pub artifacts: Vec<Artifact>,
    /// The table a sweep merges.
    pub summary: SpectrumTable,
    pub status: BTreeMap<String, String>,
    /// Set when the mode finished but its result is not trustworthy.
    pub incomplete: Option<String>,
}

impl ModeResult {
    fn new(summary: SpectrumTable) -> Self {
        ModeResult { artifacts: Vec::new(), summary, status: BTreeMap::new(), incomplete: None }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's output directory.
    pub out_dir: Option<PathBuf>,
    /// Sweep worker count; `None` uses the pool default.
    pub workers: Option<usize>,
}

pub const DEFAULT_OUT_DIR: &str = "out";

/// Validates, computes and writes a run, returning the manifest. A run
/// whose numerics did not settle is still written, then reported as an error.
pub fn run(
    config: &ExperimentConfig,
    mode: Mode,
    opts: &RunOptions,
    cancel: &AtomicBool,
) -> Result<RunManifest, TransportError> {
    let started = Instant::now();
    config.validate(mode)?;
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let (result, cell_seconds) = match mode {
        Mode::Sweep => run_sweep(config, opts.workers, cancel)?,
        m => (compute(config, m, Some(cancel))?, Vec::new()),
    };

    let mut snapshot = config.clone();
    snapshot.mode = Some(mode);
    let mut manifest = RunManifest {
        run_id: run_id(&snapshot)?,
        mode: mode.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: serde_json::to_value(&snapshot)
            .map_err(|e| TransportError::Invalid(format!("cannot record config: {e}")))?,
        outputs: Vec::new(),
        timings: Timings { total_seconds: 0.0, cell_seconds },
        status: result.status.clone(),
    };
    manifest.timings.total_seconds = started.elapsed().as_secs_f64();
    write_run(&out_dir, &result.artifacts, &mut manifest)?;
    match result.incomplete {
        Some(why) => Err(TransportError::Numerical(why)),
        None => Ok(manifest),
    }
}

/// The configured run id, or a digest of the config text.
pub fn run_id(config: &ExperimentConfig) -> Result<String, TransportError> {
    if let Some(id) = &config.run_id {
        return Ok(id.clone());
    }
    let text = to_toml(config)?;
    Ok(Artifact::new("", text.into_bytes()).sha256()[..12].to_string())
}

/// Runs one non-sweep mode.
pub fn compute(config: &ExperimentConfig, mode: Mode, cancel: Option<&AtomicBool>) -> Result<ModeResult, TransportError> {
    let p = config.params()?;
    match mode {
        Mode::Linear => linear(config, &p),
        Mode::Bandgap => bandgap(config),
        Mode::Semiclassical => semiclassical(config, &p, cancel),
        Mode::Modes => modes(config, &p),
        Mode::Quantum => quantum(config, &p, cancel),
        Mode::Sweep => Err(TransportError::Invalid("a sweep cannot run sweeps".into())),
    }
}

fn linear(config: &ExperimentConfig, p: &DimensionlessParams) -> Result<ModeResult, TransportError> {
    let deltas = config.linear_deltas(p.d)?;
    let beta = config.linear_beta()?;
    let table = analytic_spectrum(p, &deltas, beta).map_err(TransportError::numerical)?;
    let mut out = ModeResult::new(table.clone());
    out.artifacts.push(Artifact::table("spectrum", &table)?);
    out.artifacts.push(Artifact::sidecar("spectrum", &table, p)?);

    let points = config.linear.profile_points;
    if points >= 2 {
        let m = lossy_mass(p.d, beta);
        let zs: Vec<f64> = (0..points).map(|i| p.d * i as f64 / (points - 1) as f64).collect();
        match zs.iter().map(|&z| linear_fields(p.d, m, p.delta, z)).collect::<Result<Vec<_>, _>>() {
            Ok(fields) => {
                let mut t = SpectrumTable::new("z", zs);
                let col = |f: &dyn Fn(&nlse_core::linear::FieldPair) -> f64| fields.iter().map(f).collect();
                t.push_column("forward_re", col(&|f| f.forward.re)).expect("lengths match");
                t.push_column("forward_im", col(&|f| f.forward.im)).expect("lengths match");
                t.push_column("backward_re", col(&|f| f.backward.re)).expect("lengths match");
                t.push_column("backward_im", col(&|f| f.backward.im)).expect("lengths match");
                t.push_column("intensity", col(&|f| f.forward.norm_sqr() + f.backward.norm_sqr()))
                    .expect("lengths match");
                t.set_meta("delta", p.delta);
                t.set_meta("normalization", "unit drive amplitude");
                out.artifacts.push(Artifact::table("profile", &t)?);
            }
            Err(e) => {
                out.status.insert("profile".into(), format!("skipped: {e}"));
            }
        }
    }
    Ok(out)
}

fn bandgap(config: &ExperimentConfig) -> Result<ModeResult, TransportError> {
    let phys = config
        .physical
        .as_ref()
        .ok_or_else(|| TransportError::Invalid("bandgap mode needs the physical block".into()))?;
    let mut s = SusceptibilityParams::new(phys.omega_over_gamma, phys.delta1_over_gamma, phys.gamma0_over_gamma, phys.od);
    s.keep_free_phase = config.bandgap.keep_free_phase;
    s.group_velocity_ratio = config.bandgap.group_velocity_ratio;
    let table = bandgap_spectrum(&s, &config.bandgap_deltas()?).map_err(TransportError::numerical)?;
    let mut out = ModeResult::new(table.clone());
    out.artifacts.push(Artifact::table("bandgap", &table)?);
    out.artifacts.push(Artifact::sidecar("bandgap", &table, &s)?);
    Ok(out)
}

fn semiclassical(
    config: &ExperimentConfig,
    p: &DimensionlessParams,
    cancel: Option<&AtomicBool>,
) -> Result<ModeResult, TransportError> {
    let lift = |e: SemiclassicalError| match e {
        SemiclassicalError::Cancelled => TransportError::Cancelled,
        e => TransportError::numerical(e),
    };
    let (name, table) = match config.semiclassical.kind {
        SemiclassicalKind::Spectrum => {
            let deltas = config.semiclassical_deltas(p.d)?;
            let intensities = config.semiclassical.intensities.clone().unwrap_or_else(|| vec![p.alpha.norm_sqr()]);
            let t = nonlinear_spectrum_with(p, &deltas, &intensities, &ShootingOptions::default(), cancel).map_err(lift)?;
            ("spectrum", t)
        }
        SemiclassicalKind::Saturation => {
            ("saturation", transmission_vs_photon_number(p, &config.photon_numbers()?).map_err(lift)?)
        }
    };
    let mut out = ModeResult::new(table.clone());
    out.artifacts.push(Artifact::table(name, &table)?);
    out.artifacts.push(Artifact::sidecar(name, &table, p)?);
    Ok(out)
}

/// Steps used to bring a scattering pair from weak interaction to the target.
const CONTINUATION_STEPS: usize = 20;

/// Polishes a scattering pair from free roots, first directly at the target
/// interaction and then by continuation from weak interaction.
fn scattering_pair(d: f64, kappa: C64, seed: (C64, C64)) -> Result<EigenSolution, String> {
    let direct = two_particle_roots(d, kappa, seed).map_err(|e| e.to_string());
    if direct.is_ok() || kappa.norm() == 0.0 {
        return direct;
    }
    let path: Vec<C64> = (1..=CONTINUATION_STEPS).map(|j| kappa * (j as f64 / CONTINUATION_STEPS as f64)).collect();
    let start = two_particle_roots(d, path[0], seed).map_err(|e| e.to_string())?;
    let mut track = root_continuation(d, &path[1..], &start).map_err(|e| e.to_string())?;
    Ok(track.pop().unwrap_or(start))
}

fn modes(config: &ExperimentConfig, p: &DimensionlessParams) -> Result<ModeResult, TransportError> {
    let m = &config.modes;
    let highest = m.pairs.iter().flat_map(|pair| pair.iter().copied()).max().unwrap_or(0).max(m.singles);
    let singles = if highest > 0 { single_particle_modes(p.d, highest).map_err(TransportError::numerical)? } else { Vec::new() };

    // (kind, request, outcome)
    let mut solved: Vec<(&str, String, Result<EigenSolution, String>)> = Vec::new();
    for s in singles.iter().take(m.singles as usize) {
        solved.push(("single", s.branch.label(), Ok(s.clone())));
    }
    for &[a, b] in &m.pairs {
        let seed = (singles[a as usize - 1].ks[0], singles[b as usize - 1].ks[0]);
        solved.push(("pair", format!("({a},{b})"), scattering_pair(p.d, p.kappa, seed)));
    }
    for &n in &m.bound {
        let seed = bound_pair_seed(p.d, p.kappa.norm(), n);
        solved.push(("bound", format!("{n}"), two_particle_roots(p.d, p.kappa, seed).map_err(|e| e.to_string())));
    }

    let nan = f64::NAN;
    let mut rows = Vec::with_capacity(solved.len());
    let mut numeric: Vec<[f64; 8]> = Vec::with_capacity(solved.len());
    for (kind, request, outcome) in &solved {
        let (vals, branch, status) = match outcome {
            Ok(s) => {
                let k2 = s.ks.get(1).copied().unwrap_or(C64::new(nan, nan));
                let v = [s.ks[0].re, s.ks[0].im, k2.re, k2.im, s.energy.re, s.energy.im, s.residual, FLAG_OK];
                (v, s.branch.label(), "ok".to_string())
            }
            Err(e) => ([nan, nan, nan, nan, nan, nan, nan, FLAG_FAILED], String::new(), format!("failed: {e}")),
        };
        let mut row = vec![kind.to_string(), request.clone()];
        row.extend(vals[..7].iter().map(|&v| format_float(v)));
        row.push(branch);
        row.push(status);
        rows.push(row);
        numeric.push(vals);
    }
    let header = ["kind", "request", "re_k1", "im_k1", "re_k2", "im_k2", "re_energy", "im_energy", "residual", "branch", "status"];

    let mut summary = SpectrumTable::new("root", (0..numeric.len()).map(|i| i as f64).collect());
    let names = ["re_k1", "im_k1", "re_k2", "im_k2", "re_energy", "im_energy", "residual", "flag"];
    for (c, name) in names.iter().enumerate() {
        summary.push_column(name, numeric.iter().map(|r| r[c]).collect()).expect("lengths match");
    }
    summary.set_meta("d", p.d);
    summary.set_meta("kappa", p.kappa);

    let mut out = ModeResult::new(summary);
    out.artifacts.push(Artifact::new("roots.csv", text_csv(&header, rows)?));
    let failed = solved.iter().filter(|s| s.2.is_err()).count();
    out.status.insert("roots_failed".into(), failed.to_string());

    let points = m.wavefunction_points;
    if points >= 2 {
        let grid: Vec<f64> = (0..points).map(|i| p.d * i as f64 / (points - 1) as f64).collect();
        for (index, (kind, _, outcome)) in solved.iter().enumerate() {
            let Ok(s) = outcome else { continue };
            if s.ks.len() != 2 {
                continue;
            }
            match two_particle_wavefunction(s, &grid) {
                Ok(wf) => {
                    let bytes = matrix_csv(points, points, |i, j| wf.at(i, j).norm())?;
                    out.artifacts.push(Artifact::new(format!("wavefunction_{index:03}_{kind}.csv"), bytes));
                }
                Err(e) => {
                    out.status.insert(format!("wavefunction_{index:03}"), format!("skipped: {e}"));
                }
            }
        }
    }
    Ok(out)
}

fn observables_table(time: f64, o: &Observables, converged: bool) -> SpectrumTable {
    let mut t = SpectrumTable::new("time", vec![time]);
    t.push_column("g2_0", vec![o.g2_0.unwrap_or(f64::NAN)]).expect("lengths match");
    t.push_column("t1", vec![o.t1]).expect("lengths match");
    t.push_column("t2", vec![o.t2]).expect("lengths match");
    t.push_column("converged", vec![if converged { 1.0 } else { 0.0 }]).expect("lengths match");
    t
}

fn series_table(s: &ObservableSeries) -> SpectrumTable {
    let mut t = SpectrumTable::new("time", s.times.clone());
    t.push_column("t1", s.t1.clone()).expect("lengths match");
    t.push_column("t2", s.t2.clone()).expect("lengths match");
    t.push_column("g2_0", s.g2_0.clone()).expect("lengths match");
    t
}

fn quantum(config: &ExperimentConfig, p: &DimensionlessParams, cancel: Option<&AtomicBool>) -> Result<ModeResult, TransportError> {
    let g = config.grid_spec(p.d)?;
    let opts = config.quantum.options(p.d);
    let (state, series) = match evolve_to_steady(p, &g, &opts, cancel) {
        Ok(done) => done,
        Err(QuantumError::NotConverged { horizon, series }) => {
            let last = series.last().unwrap_or(Observables { t1: f64::NAN, t2: f64::NAN, g2_0: None });
            let mut out = ModeResult::new(observables_table(horizon, &last, false));
            let table = series_table(&series);
            out.artifacts.push(Artifact::table("series", &table)?);
            out.status.insert("converged".into(), "false".into());
            out.incomplete = Some(format!("no steady state within horizon {horizon}"));
            return Ok(out);
        }
        Err(QuantumError::Cancelled) => return Err(TransportError::Cancelled),
        Err(e) => return Err(TransportError::numerical(e)),
    };
    let o = observables(&state, p, &g);
    let mut out = ModeResult::new(observables_table(series.converged_at.unwrap_or(state.time), &o, true));
    out.status.insert("converged".into(), "true".into());
    out.status.insert("t1".into(), format_float(o.t1));
    out.status.insert("t2".into(), format_float(o.t2));
    out.status.insert("g2_0".into(), o.g2_0.map_or("undefined".into(), format_float));

    let series = series_table(&series);
    out.artifacts.push(Artifact::table("series", &series)?);
    out.artifacts.push(Artifact::sidecar("series", &series, p)?);

    let n = g.n_z;
    let mut theta = SpectrumTable::new("z", (1..=n).map(|j| g.position(j)).collect());
    let cells: Vec<C64> = (1..=n).map(|j| state.theta_cell(j)).collect();
    theta.push_column("abs", cells.iter().map(|c| c.norm()).collect()).expect("lengths match");
    theta.push_column("re", cells.iter().map(|c| c.re).collect()).expect("lengths match");
    theta.push_column("im", cells.iter().map(|c| c.im).collect()).expect("lengths match");
    out.artifacts.push(Artifact::table("theta", &theta)?);
    out.artifacts.push(Artifact::new("phi_abs.csv", matrix_csv(n, n, |i, j| state.phi_cell(i + 1, j + 1).norm())?));

    let profile = intensity_profile(&state, p, &g);
    let mut prof = SpectrumTable::new("z", profile.z);
    prof.push_column("intensity", profile.intensity).expect("lengths match");
    prof.push_column("g2", profile.g2).expect("lengths match");
    out.artifacts.push(Artifact::table("profile", &prof)?);

    let taus = &config.quantum.taus;
    if !taus.is_empty() {
        let g2 = g2_tau(&state, p, &g, taus).map_err(TransportError::numerical)?;
        let mut t = SpectrumTable::new("tau", taus.clone());
        t.push_column("g2", g2).expect("lengths match");
        out.artifacts.push(Artifact::table("g2_tau", &t)?);
    }
    Ok(out)
}

/// Runs every sweep cell on a bounded pool and merges the summaries in
/// axis order. Cell failures become flags; cancellation aborts the sweep.
pub fn run_sweep(
    config: &ExperimentConfig,
    workers: Option<usize>,
    cancel: &AtomicBool,
) -> Result<(ModeResult, Vec<f64>), TransportError> {
    let sweep = config.sweep.as_ref().ok_or_else(|| TransportError::Invalid("sweep mode needs a sweep block".into()))?;
    let cells = config.sweep_cells()?;
    let values = sweep.values.expand();
    let inner = sweep.mode;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| TransportError::Invalid(format!("cannot start workers: {e}")))?;
    let outcomes: Vec<(Result<ModeResult, TransportError>, f64)> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                if cancel.load(Ordering::Relaxed) {
                    return (Err(TransportError::Cancelled), 0.0);
                }
                let t0 = Instant::now();
                let r = compute(cell, inner, Some(cancel));
                (r, t0.elapsed().as_secs_f64())
            })
            .collect()
    });
    if cancel.load(Ordering::Relaxed) || outcomes.iter().any(|(r, _)| matches!(r, Err(TransportError::Cancelled))) {
        return Err(TransportError::Cancelled);
    }
    let seconds = outcomes.iter().map(|(_, s)| *s).collect();
    let results: Vec<Result<ModeResult, TransportError>> = outcomes.into_iter().map(|(r, _)| r).collect();
    Ok((merge(&sweep.axis, inner, &values, results)?, seconds))
}

/// Long-format merge: one block of rows per cell, led by the sweep value and
/// the cell's own axis, closed by a flag column.
fn merge(
    axis: &str,
    inner: Mode,
    values: &[f64],
    results: Vec<Result<ModeResult, TransportError>>,
) -> Result<ModeResult, TransportError> {
    let template = results.iter().find_map(|r| r.as_ref().ok()).map(|r| &r.summary);
    let cell_axis = template.map_or_else(|| "cell_axis".to_string(), |t| t.axis_name.clone());
    let names: Vec<String> = template.map_or_else(Vec::new, |t| t.columns.iter().map(|c| c.name.clone()).collect());

    let mut sweep_axis = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len() + 2];
    let mut artifacts = Vec::new();
    let mut status = BTreeMap::new();
    let mut failed = 0usize;
    let mut unsettled = 0usize;
    for (index, (value, result)) in values.iter().zip(results).enumerate() {
        match result {
            Ok(r) => {
                let flag = if r.incomplete.is_some() { FLAG_NOT_CONVERGED } else { FLAG_OK };
                unsettled += r.incomplete.is_some() as usize;
                let t = &r.summary;
                for i in 0..t.len() {
                    sweep_axis.push(*value);
                    columns[0].push(t.axis[i]);
                    for (c, name) in names.iter().enumerate() {
                        columns[c + 1].push(t.column(name).map_or(f64::NAN, |v| v[i]));
                    }
                    columns[names.len() + 1].push(flag);
                }
                for a in r.artifacts {
                    artifacts.push(Artifact::new(format!("cells/{index:04}/{}", a.name), a.bytes));
                }
            }
            Err(e) => {
                failed += 1;
                sweep_axis.push(*value);
                columns[0].push(f64::NAN);
                for col in columns[1..=names.len()].iter_mut() {
                    col.push(f64::NAN);
                }
                columns[names.len() + 1].push(FLAG_FAILED);
                status.insert(format!("cell_{index:04}"), e.to_string());
            }
        }
    }
    let mut table = SpectrumTable::new(axis, sweep_axis);
    let mut all = vec![cell_axis];
    all.extend(names);
    all.push("flag".into());
    for (name, values) in all.iter().zip(columns) {
        table.push_column(name, values).map_err(|e| TransportError::Invalid(e.to_string()))?;
    }
    table.set_meta("cell_mode", inner.name());
    table.set_meta("flag_codes", "0 ok, 1 not converged, 2 failed");
    status.insert("cells".into(), values.len().to_string());
    status.insert("cells_failed".into(), failed.to_string());
    status.insert("cells_not_converged".into(), unsettled.to_string());

    let mut sidecar = serde_json::Map::new();
    sidecar.insert("axis".into(), axis.into());
    sidecar.insert("cell_mode".into(), inner.name().into());
    sidecar.insert("columns".into(), all.iter().map(|s| serde_json::Value::from(s.as_str())).collect());
    let mut out = ModeResult::new(table.clone());
    out.artifacts.push(Artifact::table("sweep", &table)?);
    out.artifacts.push(Artifact::new("sweep.json", json_bytes(&sidecar)?));
    out.artifacts.extend(artifacts);
    out.status = status;
    Ok(out)
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, TransportError> {
    let text = std::fs::read_to_string(path).map_err(|source| TransportError::Io { path: path.to_path_buf(), source })?;
    crate::config::parse_config(&text)
}
