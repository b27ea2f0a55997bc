//! Stationary classical fields of the nonlinear coupled-mode equations with a
//! driven left boundary and an undriven right boundary.
//!
//! The right end fixes `Φ−(d) = 0`, so a guess for the transmitted amplitude
//! turns the boundary-value problem into an initial-value problem integrated
//! from `d` back to `0`. Newton iteration on that guess matches `Φ+(0) = α`.

// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::sync::atomic::{AtomicBool, Ordering};

use crate::linear::transmission_reflection;
use crate::ode::{integrate, OdeError, Tolerance};
use crate::params::{DimensionlessParams, ParamError};
use crate::table::SpectrumTable;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum SemiclassicalError {
    Params(ParamError),
    Integration(OdeError),
    /// Newton iteration did not reach the boundary tolerance.
    NonConvergence { residual: f64, iterations: usize },
    /// Several distinct stationary solutions were found for the same drive.
    Bistable { transmitted: Vec<C64> },
    InvalidArgument(&'static str),
    Cancelled,
}

impl fmt::Display for SemiclassicalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemiclassicalError::Params(e) => write!(f, "{e}"),
            SemiclassicalError::Integration(e) => write!(f, "integration failed: {e}"),
            SemiclassicalError::NonConvergence { residual, iterations } => write!(
                f,
                "shooting did not converge after {iterations} iterations (residual {residual:e})"
            ),
            SemiclassicalError::Bistable { transmitted } => {
                write!(f, "{} distinct stationary solutions", transmitted.len())
            }
            SemiclassicalError::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            SemiclassicalError::Cancelled => write!(f, "cancelled"),
        }
    }
}

impl core::error::Error for SemiclassicalError {}

impl From<ParamError> for SemiclassicalError {
    fn from(e: ParamError) -> Self {
        SemiclassicalError::Params(e)
    }
}

impl From<OdeError> for SemiclassicalError {
    fn from(e: OdeError) -> Self {
        SemiclassicalError::Integration(e)
    }
}

/// Forward and backward amplitudes sampled on a grid spanning `[0, d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalField {
    pub grid: Vec<f64>,
    pub phi_plus: Vec<C64>,
    pub phi_minus: Vec<C64>,
    pub params: DimensionlessParams,
}

impl ClassicalField {
    pub fn transmitted(&self) -> C64 {
        *self.phi_plus.last().expect("grid is never empty")
    }

    pub fn reflected(&self) -> C64 {
        self.phi_minus[0]
    }

    pub fn transmission(&self) -> f64 {
        let a = self.params.alpha.norm_sqr();
        if a == 0.0 {
            0.0
        } else {
            self.transmitted().norm_sqr() / a
        }
    }

    pub fn reflection(&self) -> f64 {
        let a = self.params.alpha.norm_sqr();
        if a == 0.0 {
            0.0
        } else {
            self.reflected().norm_sqr() / a
        }
    }

    /// `|Φ+|² − |Φ−|²` at each grid point.
    pub fn current(&self) -> Vec<f64> {
        self.phi_plus
            .iter()
            .zip(&self.phi_minus)
            .map(|(p, m)| p.norm_sqr() - m.norm_sqr())
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    pub grid_points: usize,
    pub tolerance: Tolerance,
    pub max_iterations: usize,
    /// Boundary mismatch accepted, relative to `|α|`.
    pub boundary_tol: f64,
    /// Try the 0.5x and 2x starts and report distinct solutions.
    pub multi_start: bool,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            grid_points: 257,
            tolerance: Tolerance::default(),
            max_iterations: 60,
            boundary_tol: 1e-10,
            multi_start: true,
        }
    }
}

fn rhs(p: &DimensionlessParams, y: &[C64; 2]) -> [C64; 2] {
    let i = C64::new(0.0, 1.0);
    let (fwd, bwd) = (y[0], y[1]);
    let s = fwd + bwd;
    let power = fwd.norm_sqr() + bwd.norm_sqr();
    let s2 = s.norm_sqr();
    let half_k = p.kappa * 0.5;
    let linear_s = i * 0.5 * p.delta * s;
    let mass = i * p.m * (fwd - bwd);
    let d_fwd = linear_s + mass - i * half_k * (s * power + fwd * s2);
    let d_bwd = -(linear_s - mass - i * half_k * (s * power + bwd * s2));
    [d_fwd, d_bwd]
}

fn shoot(p: &DimensionlessParams, transmitted: C64, tol: Tolerance) -> Result<[C64; 2], OdeError> {
    integrate(|_, y| rhs(p, y), p.d, [transmitted, C64::new(0.0, 0.0)], 0.0, tol)
}

fn newton(
    p: &DimensionlessParams,
    start: C64,
    opts: &ShootingOptions,
) -> Result<C64, SemiclassicalError> {
    let alpha = p.alpha;
    let target = opts.boundary_tol * alpha.norm();
    let mut t = start;
    let mut f = shoot(p, t, opts.tolerance)?[0] - alpha;
    for it in 0..opts.max_iterations {
        if f.norm() <= target {
            return Ok(t);
        }
        let h = 1e-7 * t.norm().max(alpha.norm() * 1e-3);
        let fx = (shoot(p, t + h, opts.tolerance)?[0] - alpha - f) / h;
        let fy = (shoot(p, t + C64::new(0.0, h), opts.tolerance)?[0] - alpha - f) / h;
        // Real 2x2 Jacobian: columns are responses to Re and Im of t.
        let det = fx.re * fy.im - fy.re * fx.im;
        if det == 0.0 || !det.is_finite() {
            return Err(SemiclassicalError::NonConvergence { residual: f.norm(), iterations: it });
        }
        let dx = -(fy.im * f.re - fy.re * f.im) / det;
        let dy = -(-fx.im * f.re + fx.re * f.im) / det;
        let step = C64::new(dx, dy);
        let mut lambda = 1.0;
        loop {
            let trial = t + step * lambda;
            let ft = shoot(p, trial, opts.tolerance).map(|y| y[0] - alpha);
            match ft {
                Ok(ft) if ft.norm() < f.norm() || lambda < 1e-3 => {
                    t = trial;
                    f = ft;
                    break;
                }
                _ if lambda < 1e-3 => {
                    return Err(SemiclassicalError::NonConvergence {
                        residual: f.norm(),
                        iterations: it,
                    })
                }
                _ => lambda *= 0.5,
            }
        }
    }
    if f.norm() <= target {
        Ok(t)
    } else {
        Err(SemiclassicalError::NonConvergence { residual: f.norm(), iterations: opts.max_iterations })
    }
}

/// Transmitted amplitude of the stationary solution.
pub fn solve_transmitted(
    p: &DimensionlessParams,
    opts: &ShootingOptions,
) -> Result<C64, SemiclassicalError> {
    p.validate()?;
    if p.alpha.norm() == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let guess = match transmission_reflection(p.d, p.m, p.delta) {
        Ok((t, _)) => t * p.alpha,
        Err(_) => p.alpha,
    };
    let starts: &[f64] = if opts.multi_start { &[1.0, 0.5, 2.0] } else { &[1.0] };
    let mut found: Vec<C64> = Vec::new();
    let mut last_err = None;
    for &s in starts {
        match newton(p, guess * s, opts) {
            Ok(t) => {
                let scale = t.norm().max(p.alpha.norm() * 1e-6);
                if !found.iter().any(|f| (f - t).norm() <= 1e-6 * scale) {
                    found.push(t);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match found.len() {
        0 => Err(last_err.unwrap_or(SemiclassicalError::NonConvergence {
            residual: f64::NAN,
            iterations: 0,
        })),
        1 => Ok(found[0]),
        _ => Err(SemiclassicalError::Bistable { transmitted: found }),
    }
}

/// Stationary field for the drive and detuning in `p`.
pub fn steady_state(p: &DimensionlessParams) -> Result<ClassicalField, SemiclassicalError> {
    steady_state_with(p, &ShootingOptions::default())
}

pub fn steady_state_with(
    p: &DimensionlessParams,
    opts: &ShootingOptions,
) -> Result<ClassicalField, SemiclassicalError> {
    if opts.grid_points < 2 {
        return Err(SemiclassicalError::InvalidArgument("grid needs at least two points"));
    }
    let t = solve_transmitted(p, opts)?;
    let n = opts.grid_points;
    let grid: Vec<f64> = (0..n).map(|j| p.d * j as f64 / (n - 1) as f64).collect();
    let mut fwd = alloc::vec![C64::new(0.0, 0.0); n];
    let mut bwd = alloc::vec![C64::new(0.0, 0.0); n];
    let mut y = [t, C64::new(0.0, 0.0)];
    fwd[n - 1] = y[0];
    bwd[n - 1] = y[1];
    for j in (0..n - 1).rev() {
        y = integrate(|_, y| rhs(p, y), grid[j + 1], y, grid[j], opts.tolerance)?;
        fwd[j] = y[0];
        bwd[j] = y[1];
    }
    Ok(ClassicalField { grid, phi_plus: fwd, phi_minus: bwd, params: *p })
}

fn check_cancel(cancel: Option<&AtomicBool>) -> Result<(), SemiclassicalError> {
    match cancel {
        Some(flag) if flag.load(Ordering::Relaxed) => Err(SemiclassicalError::Cancelled),
        _ => Ok(()),
    }
}

/// Column label for a drive intensity.
pub fn intensity_label(prefix: &str, intensity: f64) -> alloc::string::String {
    format!("{prefix}@{intensity:e}")
}

/// `|T|²` versus detuning for each drive intensity `|α|²`. Points without a
/// unique stationary solution are NaN with the matching `flag@` column set.
pub fn nonlinear_spectrum(
    p: &DimensionlessParams,
    deltas: &[f64],
    intensities: &[f64],
) -> Result<SpectrumTable, SemiclassicalError> {
    nonlinear_spectrum_with(p, deltas, intensities, &ShootingOptions::default(), None)
}

pub fn nonlinear_spectrum_with(
    p: &DimensionlessParams,
    deltas: &[f64],
    intensities: &[f64],
    opts: &ShootingOptions,
    cancel: Option<&AtomicBool>,
) -> Result<SpectrumTable, SemiclassicalError> {
    p.validate()?;
    if deltas.is_empty() || intensities.is_empty() {
        return Err(SemiclassicalError::InvalidArgument("empty sweep"));
    }
    if intensities.iter().any(|&x| !(x >= 0.0)) {
        return Err(SemiclassicalError::InvalidArgument("intensities must be non-negative"));
    }
    let mut table = SpectrumTable::new("delta", deltas.to_vec());
    let single = ShootingOptions { grid_points: 2, ..*opts };
    for &intensity in intensities {
        let mut t2 = Vec::with_capacity(deltas.len());
        let mut flags = Vec::with_capacity(deltas.len());
        for &delta in deltas {
            check_cancel(cancel)?;
            let q = p.with_delta(delta).with_alpha(C64::new(intensity.sqrt(), 0.0));
            match solve_transmitted(&q, &single) {
                Ok(t) => {
                    t2.push(if intensity == 0.0 {
                        transmission_reflection(q.d, q.m, delta).map(|(t, _)| t.norm_sqr()).unwrap_or(f64::NAN)
                    } else {
                        t.norm_sqr() / intensity
                    });
                    flags.push(0.0);
                }
                Err(SemiclassicalError::Bistable { .. }) => {
                    t2.push(f64::NAN);
                    flags.push(1.0);
                }
                Err(SemiclassicalError::NonConvergence { .. }) => {
                    t2.push(f64::NAN);
                    flags.push(2.0);
                }
                Err(e) => return Err(e),
            }
        }
        table.push_column(&intensity_label("transmission", intensity), t2).expect("lengths match");
        table.push_column(&intensity_label("flag", intensity), flags).expect("lengths match");
    }
    table.set_meta("solver", "backward shooting");
    table.set_meta("d", p.d);
    table.set_meta("kappa", p.kappa);
    table.set_meta("m", p.m);
    table.set_meta("flag_codes", "0 ok, 1 bistable, 2 no convergence");
    Ok(table)
}

/// `|T|²` on the first linear resonance versus incident photon number, with
/// `|α|² = N (π/d)³`.
pub fn transmission_vs_photon_number(
    p: &DimensionlessParams,
    photon_numbers: &[f64],
) -> Result<SpectrumTable, SemiclassicalError> {
    p.validate()?;
    if photon_numbers.is_empty() {
        return Err(SemiclassicalError::InvalidArgument("empty photon-number list"));
    }
    if photon_numbers.iter().any(|&n| !(n > 0.0)) {
        return Err(SemiclassicalError::InvalidArgument("photon numbers must be positive"));
    }
    let delta0 = (PI / p.d).powi(2);
    let per_photon = (PI / p.d).powi(3);
    let single = ShootingOptions { grid_points: 2, ..ShootingOptions::default() };
    let mut t2 = Vec::with_capacity(photon_numbers.len());
    let mut flags = Vec::with_capacity(photon_numbers.len());
    for &n in photon_numbers {
        let intensity = n * per_photon;
        let q = p.with_delta(delta0).with_alpha(C64::new(intensity.sqrt(), 0.0));
        match solve_transmitted(&q, &single) {
            Ok(t) => {
                t2.push(t.norm_sqr() / intensity);
                flags.push(0.0);
            }
            Err(SemiclassicalError::Bistable { .. }) => {
                t2.push(f64::NAN);
                flags.push(1.0);
            }
            Err(SemiclassicalError::NonConvergence { .. }) => {
                t2.push(f64::NAN);
                flags.push(2.0);
            }
            Err(e) => return Err(e),
        }
    }
    let mut table = SpectrumTable::new("photons", photon_numbers.to_vec());
    table.push_column("transmission", t2).expect("lengths match");
    table.push_column("flag", flags).expect("lengths match");
    table.set_meta("solver", "backward shooting");
    table.set_meta("delta", delta0);
    table.set_meta("intensity_per_photon", per_photon);
    Ok(table)
}

/// Detuning of maximal transmission inside `[lo, hi]` by golden-section search.
pub fn peak_detuning(
    p: &DimensionlessParams,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), SemiclassicalError> {
    let opts = ShootingOptions { grid_points: 2, ..ShootingOptions::default() };
    let intensity = p.alpha.norm_sqr();
    let t2 = |delta: f64| -> Result<f64, SemiclassicalError> {
        let q = p.with_delta(delta);
        if intensity == 0.0 {
            return Ok(transmission_reflection(q.d, q.m, delta)
                .map(|(t, _)| t.norm_sqr())
                .unwrap_or(0.0));
        }
        Ok(solve_transmitted(&q, &opts)?.norm_sqr() / intensity)
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = t2(x1)?;
    let mut f2 = t2(x2)?;
    while (b - a).abs() > tol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = t2(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = t2(x2)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, t2(x)?))
}
