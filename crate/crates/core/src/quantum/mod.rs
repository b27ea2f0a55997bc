//! Driven few-photon Schrodinger-picture dynamics, truncated at two photons.
//!
//! Cells are centred: cell `j` (1-based) sits at `z = (j − ½)h`, and the two
//! ghost cells `0` and `N + 1` carry the mixed boundary conditions at the
//! faces `z = 0` and `z = d = Nh`. Amplitudes are kept in the frame rotating
//! with the drive, so a steady state is time independent.
//!
//! Two time integrators share this discretization. The default alternating
//! direction Crank-Nicolson scheme is unconditionally stable and its fixed
//! point is exactly the discrete steady state. The explicit Du Fort-Frankel
//! scheme is kept for comparison; with the open boundaries its two-level
//! structure turns boundary damping into a growing mode, which surfaces as
//! [`QuantumError::Unstable`].

mod adi;
mod dff;
mod observe;

pub use observe::{
    boundary_currents, correlation_table, correlation_vs_kappa, evolve_to_steady, g2_tau,
    intensity_profile, linear_one_photon_profile, observables, steady_diagonal_fraction,
    steady_point, ObservableSeries, Observables, Profile, SteadyOptions, SteadyPoint,
};

// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};
use core::fmt;

use crate::params::{DimensionlessParams, ParamError};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumError {
    Params(ParamError),
    InvalidGrid(&'static str),
    InvalidArgument(&'static str),
    /// Non-finite amplitudes appeared; the run diverged.
    Unstable { time: f64 },
    NotConverged { horizon: f64, series: ObservableSeries },
    Cancelled,
}

impl fmt::Display for QuantumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantumError::Params(e) => write!(f, "{e}"),
            QuantumError::InvalidGrid(w) => write!(f, "invalid grid: {w}"),
            QuantumError::InvalidArgument(w) => write!(f, "invalid argument: {w}"),
            QuantumError::Unstable { time } => write!(f, "non-finite amplitudes at t = {time}"),
            QuantumError::NotConverged { horizon, .. } => {
                write!(f, "no steady state within horizon {horizon}")
            }
            QuantumError::Cancelled => write!(f, "cancelled"),
        }
    }
}

impl core::error::Error for QuantumError {}

impl From<ParamError> for QuantumError {
    fn from(e: ParamError) -> Self {
        QuantumError::Params(e)
    }
}

/// Time integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Scheme {
    /// Crank-Nicolson for the one-photon amplitude, Peaceman-Rachford
    /// alternating directions for the two-photon amplitude.
    #[default]
    ImplicitAdi,
    /// Explicit two-level Du Fort-Frankel updates.
    DuFortFrankel,
}

/// Space-time discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub n_z: usize,
    pub h: f64,
    pub k: f64,
    /// Width of the Gaussian standing in for the contact interaction.
    pub sigma: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub scheme: Scheme,
}

impl GridSpec {
    /// Grid of `n_z` cells over `[0, d]` with time step `k_over_h · h`. The
    /// interaction width defaults to `max(4h, d/200)`.
    pub fn new(d: f64, n_z: usize, k_over_h: f64, sigma: Option<f64>) -> Result<Self, QuantumError> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(QuantumError::Params(ParamError::NonPositiveLength(d)));
        }
        if n_z < 4 {
            return Err(QuantumError::InvalidGrid("need at least four cells"));
        }
        let h = d / n_z as f64;
        let g = GridSpec {
            n_z,
            h,
            k: k_over_h * h,
            sigma: sigma.unwrap_or((4.0 * h).max(d / 200.0)),
            scheme: Scheme::default(),
        };
        g.validate(d)?;
        Ok(g)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn length(&self) -> f64 {
        self.n_z as f64 * self.h
    }

    pub fn validate(&self, d: f64) -> Result<(), QuantumError> {
        if !(self.h > 0.0) || !(self.k > 0.0) || !(self.sigma > 0.0) {
            return Err(QuantumError::InvalidGrid("steps and width must be positive"));
        }
        if (self.length() - d).abs() > 1e-9 * d {
            return Err(QuantumError::InvalidGrid("n_z · h must equal the medium length"));
        }
        if self.k / self.h > 0.5 + 1e-12 {
            return Err(QuantumError::InvalidGrid("k/h must not exceed 0.5"));
        }
        if self.h > self.sigma / 4.0 * (1.0 + 1e-12) {
            return Err(QuantumError::InvalidGrid("interaction width must span at least four cells"));
        }
        if self.sigma > d / 50.0 * (1.0 + 1e-12) {
            return Err(QuantumError::InvalidGrid("interaction width must be at most d/50"));
        }
        Ok(())
    }

    pub(crate) fn width(&self) -> usize {
        self.n_z + 2
    }

    /// Centre of cell `j`.
    pub fn position(&self, j: usize) -> f64 {
        (j as f64 - 0.5) * self.h
    }

    /// Normalized Gaussian interaction kernel at separation `r` cells.
    pub(crate) fn kernel(&self, r: usize) -> f64 {
        let x = r as f64 * self.h / self.sigma;
        (-0.5 * x * x).exp() / (self.sigma * (2.0 * PI).sqrt())
    }
}

/// Vacuum, one- and two-photon amplitudes. Arrays include ghost cells;
/// `phi` is row-major over `(N + 2)²`. The previous time level is only used
/// by the two-level explicit scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub epsilon: C64,
    pub theta: Vec<C64>,
    pub theta_prev: Vec<C64>,
    pub phi: Vec<C64>,
    pub phi_prev: Vec<C64>,
    pub time: f64,
    pub steps: u64,
    n_z: usize,
}

impl QuantumState {
    pub fn vacuum(g: &GridSpec) -> Self {
        let w = g.width();
        QuantumState {
            epsilon: C64::new(1.0, 0.0),
            theta: vec![C64::new(0.0, 0.0); w],
            theta_prev: vec![C64::new(0.0, 0.0); w],
            phi: vec![C64::new(0.0, 0.0); w * w],
            phi_prev: vec![C64::new(0.0, 0.0); w * w],
            time: 0.0,
            steps: 0,
            n_z: g.n_z,
        }
    }

    /// State built from cell values (`theta` of length N, `phi` row-major
    /// N × N). Ghosts are filled from the boundary conditions.
    pub fn from_cells(
        p: &DimensionlessParams,
        g: &GridSpec,
        epsilon: C64,
        theta: &[C64],
        phi: &[C64],
    ) -> Result<Self, QuantumError> {
        let n = g.n_z;
        if theta.len() != n || phi.len() != n * n {
            return Err(QuantumError::InvalidArgument("cell arrays do not match the grid"));
        }
        let mut s = QuantumState::vacuum(g);
        s.epsilon = epsilon;
        let w = g.width();
        s.theta[1..=n].copy_from_slice(theta);
        for i in 0..n {
            s.phi[(i + 1) * w + 1..(i + 1) * w + 1 + n].copy_from_slice(&phi[i * n..(i + 1) * n]);
        }
        let b = Boundary::new(p, g);
        b.theta_ghosts(&mut s.theta, p.alpha * epsilon);
        b.phi_ghosts(&mut s.phi, &s.theta, p.alpha, n);
        s.theta_prev.clone_from(&s.theta);
        s.phi_prev.clone_from(&s.phi);
        Ok(s)
    }

    pub fn n_z(&self) -> usize {
        self.n_z
    }

    /// One-photon amplitude in cell `j` (1-based).
    pub fn theta_cell(&self, j: usize) -> C64 {
        self.theta[j]
    }

    /// Two-photon amplitude in cells `(i, j)` (1-based).
    pub fn phi_cell(&self, i: usize, j: usize) -> C64 {
        self.phi[i * (self.n_z + 2) + j]
    }

    /// Largest `|φ(x, y) − φ(y, x)|` over the grid.
    pub fn asymmetry(&self) -> f64 {
        let w = self.n_z + 2;
        let mut worst = 0.0f64;
        for i in 0..w {
            for j in i + 1..w {
                worst = worst.max((self.phi[i * w + j] - self.phi[j * w + i]).norm());
            }
        }
        worst
    }
}

/// Coefficients of the discrete mixed boundary conditions: the face value is
/// the mean of ghost and edge cell, the face derivative their difference.
pub(crate) struct Boundary {
    /// `½ + i/(2mh)`.
    outer: C64,
    /// `−½ + i/(2mh)`.
    inner: C64,
    /// Ghost/edge ratio of an undriven face.
    reflect: C64,
}

impl Boundary {
    pub(crate) fn new(p: &DimensionlessParams, g: &GridSpec) -> Self {
        let t = I / (p.m * 2.0 * g.h);
        let outer = t + 0.5;
        let inner = t - 0.5;
        Boundary { outer, inner, reflect: inner / outer }
    }

    /// Ghost contribution of the drive: `ghost = reflect · edge + source(s)`.
    pub(crate) fn source(&self, s: C64) -> C64 {
        s / self.outer
    }

    pub(crate) fn theta_ghosts(&self, theta: &mut [C64], drive: C64) {
        let n = theta.len() - 2;
        theta[0] = (drive * SQRT_2 + self.inner * theta[1]) / self.outer;
        theta[n + 1] = self.reflect * theta[n];
    }

    pub(crate) fn phi_ghosts(&self, phi: &mut [C64], theta: &[C64], alpha: C64, n: usize) {
        let w = n + 2;
        let src = alpha / SQRT_2;
        for y in 0..w {
            let left = (src * theta[y] + self.inner * phi[w + y]) / self.outer;
            phi[y] = left;
            phi[y * w] = left;
        }
        for y in 0..w {
            let right = self.reflect * phi[n * w + y];
            phi[(n + 1) * w + y] = right;
            phi[y * w + n + 1] = right;
        }
    }
}

enum Engine {
    Adi(adi::AdiPropagator),
    Dff(dff::DffPropagator),
}

/// Time stepper for one parameter set and grid. Holds precomputed
/// coefficients and scratch space.
pub struct Propagator {
    grid: GridSpec,
    engine: Engine,
    one_photon_only: bool,
}

impl Propagator {
    pub fn new(p: &DimensionlessParams, g: &GridSpec) -> Result<Self, QuantumError> {
        p.validate()?;
        g.validate(p.d)?;
        let engine = match g.scheme {
            Scheme::ImplicitAdi => Engine::Adi(adi::AdiPropagator::new(p, g)),
            Scheme::DuFortFrankel => Engine::Dff(dff::DffPropagator::new(p, g)),
        };
        Ok(Propagator { grid: *g, engine, one_photon_only: false })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Restricts the implicit scheme to the one-photon amplitude, which never
    /// depends on the two-photon one. The explicit scheme ignores this.
    pub fn set_one_photon_only(&mut self, on: bool) {
        self.one_photon_only = on;
    }

    /// `max|φ − φᵀ|` of the last two-photon update before it was
    /// symmetrized. The explicit stencil is symmetric term by term and is
    /// reported as exact.
    pub fn raw_asymmetry(&self) -> f64 {
        match &self.engine {
            Engine::Adi(e) => e.raw_asymmetry,
            Engine::Dff(_) => 0.0,
        }
    }

    /// Replaces the drive amplitude for subsequent steps.
    pub fn set_drive(&mut self, alpha: C64) {
        match &mut self.engine {
            Engine::Adi(e) => e.set_drive(alpha),
            Engine::Dff(e) => e.set_drive(alpha),
        }
    }

    /// Advances `state` by one time step.
    pub fn step(&mut self, state: &mut QuantumState) -> Result<(), QuantumError> {
        let n = self.grid.n_z;
        if state.n_z != n {
            return Err(QuantumError::InvalidArgument("state does not match the grid"));
        }
        match &mut self.engine {
            Engine::Adi(e) => e.step(state, self.one_photon_only),
            Engine::Dff(e) => e.step(state),
        }
        state.time += self.grid.k;
        state.steps += 1;
        let w = n + 2;
        let edge = state.theta[n].norm() + state.phi[n * w + n].norm() + state.phi[w + n].norm();
        if !edge.is_finite() {
            return Err(QuantumError::Unstable { time: state.time });
        }
        Ok(())
    }

    /// Advances `steps` times, scanning the full state for non-finite values
    /// at the end.
    pub fn advance(&mut self, state: &mut QuantumState, steps: u64) -> Result<(), QuantumError> {
        for _ in 0..steps {
            self.step(state)?;
        }
        if state.phi.iter().chain(&state.theta).any(|v| !v.is_finite()) {
            return Err(QuantumError::Unstable { time: state.time });
        }
        Ok(())
    }
}

/// Advances `state` by one step with freshly built coefficients. Loops should
/// build a [`Propagator`] once instead.
pub fn step(state: &mut QuantumState, p: &DimensionlessParams, g: &GridSpec) -> Result<(), QuantumError> {
    Propagator::new(p, g)?.step(state)
}
