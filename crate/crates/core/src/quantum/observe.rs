// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};
use core::sync::atomic::{AtomicBool, Ordering};

use super::{GridSpec, Propagator, QuantumError, QuantumState};
use crate::linear::linear_fields;
use crate::params::DimensionlessParams;
use crate::table::SpectrumTable;
use crate::C64;

/// Intensities below this are treated as zero when normalizing `g2`.
const INTENSITY_FLOOR: f64 = 1e-30;

/// Transmitted observables of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Observables {
    /// One-photon intensity transmission. NaN without drive.
    pub t1: f64,
    /// Two-photon intensity transmission. NaN without drive or one-photon weight.
    pub t2: f64,
    /// Equal-time correlation at the output, `None` when no light arrives.
    pub g2_0: Option<f64>,
}

/// Time series of the observables during a run.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// NaN where undefined.
    pub g2_0: Vec<f64>,
    /// Time at which the steady state was declared.
    pub converged_at: Option<f64>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn converged(&self) -> bool {
        self.converged_at.is_some()
    }

    pub fn last(&self) -> Option<Observables> {
        let i = self.len().checked_sub(1)?;
        let g = self.g2_0[i];
        Some(Observables { t1: self.t1[i], t2: self.t2[i], g2_0: (!g.is_nan()).then_some(g) })
    }

    fn push(&mut self, time: f64, o: Observables) {
        self.times.push(time);
        self.t1.push(o.t1);
        self.t2.push(o.t2);
        self.g2_0.push(o.g2_0.unwrap_or(f64::NAN));
    }

    /// True when every observable varies by less than `tol` (relative to its
    /// latest value) over samples with time in `[t_last − window, t_last]`.
    fn flat_over(&self, window: f64, tol: f64) -> bool {
        let Some(&t_last) = self.times.last() else { return false };
        if t_last < window {
            return false;
        }
        let start = self.times.partition_point(|&t| t < t_last - window);
        if self.len() - start < 2 {
            return false;
        }
        [&self.t1, &self.t2, &self.g2_0].iter().all(|s| {
            let tail = &s[start..];
            let last = *tail.last().unwrap_or(&f64::NAN);
            if tail.iter().all(|v| v.is_nan()) {
                return true;
            }
            if tail.iter().any(|v| !v.is_finite()) {
                return false;
            }
            let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            hi - lo <= tol * last.abs()
        })
    }
}

/// Run controls for [`evolve_to_steady`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SteadyOptions {
    pub horizon: f64,
    /// Trailing window of the flatness test.
    pub window: f64,
    /// Relative tolerance of the flatness test.
    pub tol: f64,
    /// Observables are recorded this many times per window.
    pub samples_per_window: u32,
    /// Duration of the smooth drive switch-on.
    pub ramp: f64,
    /// Evolve only the one-photon amplitude (the implicit scheme only).
    pub one_photon_only: bool,
}

impl SteadyOptions {
    /// Window of one inverse bandwidth `(d/π)³`, horizon of 25 windows, a
    /// relative tolerance of `1e−3` and a switch-on over a tenth of a window.
    pub fn for_length(d: f64) -> Self {
        let window = (d / PI).powi(3);
        SteadyOptions { horizon: 25.0 * window, window, tol: 1e-3, samples_per_window: 50, ramp: 0.1 * window, one_photon_only: false }
    }

    /// Checks that durations and tolerances are usable.
    pub fn validate(&self) -> Result<(), QuantumError> {
        if !(self.window > 0.0) || !(self.horizon >= self.window) || !(self.tol > 0.0) {
            return Err(QuantumError::InvalidArgument("need 0 < window ≤ horizon and tol > 0"));
        }
        if !(self.ramp >= 0.0) || self.ramp > self.horizon {
            return Err(QuantumError::InvalidArgument("ramp must lie within the horizon"));
        }
        if self.samples_per_window < 2 {
            return Err(QuantumError::InvalidArgument("need at least two samples per window"));
        }
        Ok(())
    }
}

fn edge_factor(p: &DimensionlessParams, g: &GridSpec) -> C64 {
    let t = C64::new(0.0, 1.0) / (p.m * 2.0 * g.h);
    (C64::new(1.0, 0.0) + (t - 0.5) / (t + 0.5)) * 0.5
}

struct EdgeValues {
    /// `θ(d)`.
    theta_d: C64,
    /// `φ(d, d)`.
    phi_dd: C64,
    /// `∫|φ(z', d)|²dz'`.
    phi_edge: f64,
    /// `∫|θ|²dz`.
    theta_norm: f64,
}

fn edge_values(s: &QuantumState, p: &DimensionlessParams, g: &GridSpec) -> EdgeValues {
    let n = g.n_z;
    let w = n + 2;
    let f = edge_factor(p, g);
    let phi_edge = (1..=n).map(|i| s.phi[i * w + n].norm_sqr()).sum::<f64>() * f.norm_sqr() * g.h;
    let theta_norm = (1..=n).map(|j| s.theta[j].norm_sqr()).sum::<f64>() * g.h;
    EdgeValues { theta_d: f * s.theta[n], phi_dd: f * f * s.phi[n * w + n], phi_edge, theta_norm }
}

/// Output intensity `⟨Ψ₊†Ψ₊⟩` at `z = d`.
fn output_intensity(e: &EdgeValues) -> f64 {
    2.0 * e.theta_d.norm_sqr() + 8.0 * e.phi_edge
}

/// Transmissions and the equal-time output correlation.
pub fn observables(s: &QuantumState, p: &DimensionlessParams, g: &GridSpec) -> Observables {
    let e = edge_values(s, p, g);
    let drive = p.alpha.norm_sqr();
    let t1 = if drive > 0.0 { 2.0 * e.theta_d.norm_sqr() / drive } else { f64::NAN };
    let input2 = drive * e.theta_norm;
    let t2 = if input2 > 0.0 { 8.0 * e.phi_edge / input2 } else { f64::NAN };
    let den = e.theta_d.norm_sqr() + 4.0 * e.phi_edge;
    let g2_0 = (den >= INTENSITY_FLOOR).then(|| 4.0 * e.phi_dd.norm_sqr() / (den * den));
    Observables { t1, t2, g2_0 }
}

/// Integrates from vacuum until the observables are flat over the trailing
/// window.
pub fn evolve_to_steady(
    p: &DimensionlessParams,
    g: &GridSpec,
    opts: &SteadyOptions,
    cancel: Option<&AtomicBool>,
) -> Result<(QuantumState, ObservableSeries), QuantumError> {
    opts.validate()?;
    let mut prop = Propagator::new(p, g)?;
    prop.set_one_photon_only(opts.one_photon_only);
    let mut state = QuantumState::vacuum(g);
    let stride = ((opts.window / (opts.samples_per_window as f64 * g.k)).floor() as u64).max(1);
    let total = (opts.horizon / g.k).ceil() as u64;
    let mut series = ObservableSeries::default();
    series.push(0.0, observables(&state, p, g));
    // The drive is switched on smoothly so that grid-scale modes, which the
    // implicit scheme damps only weakly, are not excited.
    let ramp_steps = ((opts.ramp / g.k).ceil() as u64).min(total);
    for s in 0..ramp_steps {
        let x = ((s as f64 + 0.5) / ramp_steps as f64).min(1.0);
        let r = (0.5 * PI * x).sin();
        prop.set_drive(p.alpha * (r * r));
        prop.step(&mut state)?;
    }
    prop.set_drive(p.alpha);
    let mut done = ramp_steps;
    while done < total {
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Err(QuantumError::Cancelled);
        }
        let n = stride.min(total - done);
        prop.advance(&mut state, n)?;
        done += n;
        series.push(state.time, observables(&state, p, g));
        if series.flat_over(opts.window, opts.tol) {
            series.converged_at = Some(state.time);
            return Ok((state, series));
        }
    }
    Err(QuantumError::NotConverged { horizon: opts.horizon, series })
}

/// `g2(d, τ)` from detecting one photon at the output of `state` and
/// evolving the remainder under the same drive. Each `τ` is rounded to the
/// nearest multiple of the time step; `taus` must be non-decreasing.
pub fn g2_tau(
    state: &QuantumState,
    p: &DimensionlessParams,
    g: &GridSpec,
    taus: &[f64],
) -> Result<Vec<f64>, QuantumError> {
    if taus.iter().any(|t| !(*t >= 0.0)) || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(QuantumError::InvalidArgument("delays must be non-negative and sorted"));
    }
    let n = g.n_z;
    if state.n_z() != n {
        return Err(QuantumError::InvalidArgument("state does not match the grid"));
    }
    let w = n + 2;
    let e = edge_values(state, p, g);
    let reference = output_intensity(&e);
    if reference < INTENSITY_FLOOR {
        return Err(QuantumError::InvalidArgument("no output intensity to normalize by"));
    }
    let f = edge_factor(p, g);
    let theta: Vec<C64> = (1..=n).map(|j| f * state.phi[n * w + j] * (2.0 * SQRT_2)).collect();
    let phi = vec![C64::new(0.0, 0.0); n * n];
    let mut collapsed = QuantumState::from_cells(p, g, e.theta_d * SQRT_2, &theta, &phi)?;
    let mut prop = Propagator::new(p, g)?;
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        let target = (tau / g.k).round() as u64;
        let pending = target - collapsed.steps;
        prop.advance(&mut collapsed, pending)?;
        out.push(output_intensity(&edge_values(&collapsed, p, g)) / (reference * reference));
    }
    Ok(out)
}

/// Forward intensity and equal-time correlation inside the medium.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Profile {
    /// Cell faces `0, h, …, d`.
    pub z: Vec<f64>,
    pub intensity: Vec<f64>,
    /// NaN where the intensity vanishes.
    pub g2: Vec<f64>,
}

/// Forward-field intensity `⟨Ψ₊†Ψ₊⟩` and `g2(z, 0)` on cell faces, built
/// from face averages and centred differences across each face.
pub fn intensity_profile(s: &QuantumState, p: &DimensionlessParams, g: &GridSpec) -> Profile {
    let n = g.n_z;
    let w = n + 2;
    let h = g.h;
    let a = C64::new(0.0, 1.0) / (p.m * 2.0);
    let forward = |lo: C64, hi: C64| (lo + hi) * 0.5 - a * (hi - lo) / h;
    let mut out = Profile::default();
    for f in 0..=n {
        let (j, jp) = (f, f + 1);
        let one = forward(s.theta[j], s.theta[jp]);
        let two: f64 = (1..=n).map(|i| forward(s.phi[i * w + j], s.phi[i * w + jp]).norm_sqr()).sum::<f64>() * h;
        let intensity = 0.5 * one.norm_sqr() + 2.0 * two;
        // Forward projection applied along both coordinates at the corner.
        let row_lo = forward(s.phi[j * w + j], s.phi[j * w + jp]);
        let row_hi = forward(s.phi[jp * w + j], s.phi[jp * w + jp]);
        let pair = forward(row_lo, row_hi);
        let g2 = if intensity >= INTENSITY_FLOOR { pair.norm_sqr() / (intensity * intensity) } else { f64::NAN };
        out.z.push(f as f64 * h);
        out.intensity.push(intensity);
        out.g2.push(g2);
    }
    out
}

/// One-photon probability currents `(into z = 0, out of z = d)`, taken as
/// `|Ψ₊|² − |Ψ₋|²` of the one-photon amplitude at the two faces.
pub fn boundary_currents(s: &QuantumState, p: &DimensionlessParams, g: &GridSpec) -> (f64, f64) {
    let n = g.n_z;
    let a = C64::new(0.0, 1.0) / (p.m * 2.0);
    let current = |lo: C64, hi: C64| {
        let mid = (lo + hi) * 0.5;
        let slope = (hi - lo) / g.h;
        0.5 * ((mid - a * slope).norm_sqr() - (mid + a * slope).norm_sqr())
    };
    (current(s.theta[0], s.theta[1]), current(s.theta[n], s.theta[n + 1]))
}

/// Fraction of the two-photon weight within one interaction width of the
/// diagonal.
pub fn steady_diagonal_fraction(s: &QuantumState, g: &GridSpec) -> f64 {
    let n = g.n_z;
    let w = n + 2;
    let band = g.sigma / g.h;
    let (mut near, mut total) = (0.0, 0.0);
    for i in 1..=n {
        for j in 1..=n {
            let v = s.phi[i * w + j].norm_sqr();
            total += v;
            if (i as f64 - j as f64).abs() <= band {
                near += v;
            }
        }
    }
    if total > 0.0 { near / total } else { f64::NAN }
}

/// Closed-form steady one-photon amplitude `θ(z)` at zero interaction, for
/// the mass, detuning and drive of `p`.
pub fn linear_one_photon_profile(p: &DimensionlessParams, z: f64) -> Result<C64, QuantumError> {
    let f = linear_fields(p.d, p.m, p.delta, z).map_err(|_| QuantumError::InvalidArgument("linear profile undefined"))?;
    Ok(p.alpha * (f.forward + f.backward) / SQRT_2)
}

/// Steady-state record of one interaction strength.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SteadyPoint {
    pub kappa: f64,
    pub observables: Observables,
    pub converged: bool,
    /// Convergence time, or the horizon when not converged.
    pub time: f64,
}

/// Runs one interaction strength to steady state with the drive on the
/// first linear resonance. Non-convergence is recorded, not raised.
pub fn steady_point(
    template: &DimensionlessParams,
    g: &GridSpec,
    kappa: f64,
    opts: &SteadyOptions,
    cancel: Option<&AtomicBool>,
) -> Result<SteadyPoint, QuantumError> {
    let p = template.with_kappa(C64::new(kappa, 0.0)).with_delta((PI / template.d).powi(2));
    match evolve_to_steady(&p, g, opts, cancel) {
        Ok((state, series)) => Ok(SteadyPoint {
            kappa,
            observables: observables(&state, &p, g),
            converged: true,
            time: series.converged_at.unwrap_or(state.time),
        }),
        Err(QuantumError::NotConverged { horizon, series }) => Ok(SteadyPoint {
            kappa,
            observables: series.last().unwrap_or(Observables { t1: f64::NAN, t2: f64::NAN, g2_0: None }),
            converged: false,
            time: horizon,
        }),
        Err(e) => Err(e),
    }
}

/// Assembles steady points into a table with columns `g2_0`, `t1`, `t2`,
/// `converged` (1 or 0) and `time`.
pub fn correlation_table(points: &[SteadyPoint], d: f64) -> SpectrumTable {
    let mut t = SpectrumTable::new("kappa", points.iter().map(|q| q.kappa).collect());
    let col = |f: &dyn Fn(&SteadyPoint) -> f64| points.iter().map(f).collect::<Vec<_>>();
    let cols = [
        ("g2_0", col(&|q| q.observables.g2_0.unwrap_or(f64::NAN))),
        ("t1", col(&|q| q.observables.t1)),
        ("t2", col(&|q| q.observables.t2)),
        ("converged", col(&|q| if q.converged { 1.0 } else { 0.0 })),
        ("time", col(&|q| q.time)),
    ];
    for (name, values) in cols {
        // Lengths match the axis by construction.
        let _ = t.push_column(name, values);
    }
    t.set_meta("d", d);
    t.set_meta("delta", (PI / d).powi(2));
    t
}

/// Steady-state `g2_0`, `T1` and `T2` for each interaction strength.
pub fn correlation_vs_kappa(
    template: &DimensionlessParams,
    g: &GridSpec,
    kappas: &[f64],
    opts: &SteadyOptions,
) -> Result<SpectrumTable, QuantumError> {
    let points = kappas
        .iter()
        .map(|&k| steady_point(template, g, k, opts, None))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(correlation_table(&points, template.d))
}
