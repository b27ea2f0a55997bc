//! Open-boundary Bethe-ansatz eigenproblem for one, two and three particles.

pub(crate) mod roots;
mod single;
mod wavefunction;

pub use roots::{
    characteristic_residual, family_residual, many_body_roots, residual, root_continuation, two_particle_roots,
};
pub use single::{mode_function, mode_norm_squared, single_particle_modes};
pub use wavefunction::{
    diagonal_fraction, gaudin_wavefunction, hardcore_wavefunction, two_particle_wavefunction,
    WavefunctionGrid2D,
};

// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    InvalidArgument(&'static str),
    /// Newton iteration stalled; carries the seed it started from.
    NoConvergence { seed: Vec<C64>, residual: f64 },
    /// The iteration landed on a solution with a vanishing wavefunction.
    ConvergedToTrivial { ks: Vec<C64> },
    /// Continuation moved much further than predicted.
    BranchJump { index: usize, kappa: C64 },
    /// A Gaudin coefficient has a zero denominator.
    CoefficientPole,
    DimensionMismatch { ks: usize, zs: usize },
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::InvalidArgument(w) => write!(f, "invalid argument: {w}"),
            SpectralError::NoConvergence { seed, residual } => {
                write!(f, "root polishing from seed {seed:?} stalled at residual {residual:e}")
            }
            SpectralError::ConvergedToTrivial { ks } => {
                write!(f, "converged to trivial solution {ks:?}")
            }
            SpectralError::BranchJump { index, kappa } => {
                write!(f, "branch jump at path point {index} (kappa = {kappa})")
            }
            SpectralError::CoefficientPole => write!(f, "pole in a wavefunction coefficient"),
            SpectralError::DimensionMismatch { ks, zs } => {
                write!(f, "{ks} wavenumbers but {zs} coordinates")
            }
        }
    }
}

impl core::error::Error for SpectralError {}

/// Which family of solutions a root set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Branch {
    Single(u32),
    /// Two particles near distinct single-particle modes `(m, n)`.
    Fermionized(u32, u32),
    /// Pair bound in the relative coordinate, centre-of-mass momentum near `2nπ/d`.
    BoundTypeI(u32),
    /// Pair bound in the relative coordinate, centre-of-mass momentum near `√2 nπ/d`.
    BoundTypeII(u32),
    /// Bound pair whose type-I and type-II readings are equally close.
    BoundAmbiguous(u32, u32),
    ManyBody,
}

impl Branch {
    pub fn is_bound(&self) -> bool {
        matches!(self, Branch::BoundTypeI(_) | Branch::BoundTypeII(_) | Branch::BoundAmbiguous(..))
    }

    pub fn label(&self) -> alloc::string::String {
        use alloc::format;
        match self {
            Branch::Single(n) => format!("single({n})"),
            Branch::Fermionized(m, n) => format!("fermionized({m},{n})"),
            Branch::BoundTypeI(n) => format!("bound_I({n})"),
            Branch::BoundTypeII(n) => format!("bound_II({n})"),
            Branch::BoundAmbiguous(a, b) => format!("bound_ambiguous({a},{b})"),
            Branch::ManyBody => "many_body".into(),
        }
    }
}

/// A set of wavenumbers solving the open-boundary equations.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenSolution {
    pub ks: Vec<C64>,
    /// `Σ k_i²`.
    pub energy: C64,
    pub branch: Branch,
    pub residual: f64,
    pub d: f64,
    pub kappa: C64,
    /// Interaction-to-kinetic ratio `κd/4`.
    pub gamma: C64,
    /// For bound pairs, `k1 − k2 + iκ` carried at full relative precision.
    pub bound_gap: Option<C64>,
}

impl EigenSolution {
    pub(crate) fn new(ks: Vec<C64>, branch: Branch, residual: f64, d: f64, kappa: C64) -> Self {
        let energy = ks.iter().map(|k| k * k).sum();
        EigenSolution { ks, energy, branch, residual, d, kappa, gamma: kappa * d / 4.0, bound_gap: None }
    }
}

/// Which estimate of the centre-of-mass momentum a bound pair follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BoundType {
    I,
    II,
}

impl BoundType {
    fn factor(self) -> f64 {
        match self {
            BoundType::I => 2.0,
            BoundType::II => 1.0,
        }
    }
}

/// Closed-form estimate of a bound-pair energy.
pub fn bound_state_energy_estimate(d: f64, kappa_mag: f64, n: u32, kind: BoundType) -> f64 {
    let x = n as f64 * PI / d;
    kind.factor() * x * x - 0.5 * kappa_mag * kappa_mag
}

/// `|κ|` at which the estimated bound energy equals `2δ`, if any.
pub fn bound_resonance_kappa(d: f64, delta: f64, n: u32, kind: BoundType) -> Option<f64> {
    let x = n as f64 * PI / d;
    let v = 2.0 * (kind.factor() * x * x - 2.0 * delta);
    (v > 0.0).then(|| v.sqrt())
}

/// Seed pair `(c + i|κ|/2, c − i|κ|/2)` with the centre at the type's estimate.
pub fn bound_seed(d: f64, kappa_mag: f64, n: u32, kind: BoundType) -> (C64, C64) {
    let centre = match kind {
        BoundType::I => n as f64 * PI / d,
        BoundType::II => n as f64 * PI / (core::f64::consts::SQRT_2 * d),
    };
    (C64::new(centre, 0.5 * kappa_mag), C64::new(centre, -0.5 * kappa_mag))
}

/// Seed for the exact bound branch whose centre-of-mass momentum is close to
/// `mπ/(d − 2/|κ|)`; its amplitude has `m` maxima along the diagonal.
pub fn bound_pair_seed(d: f64, kappa_mag: f64, m: u32) -> (C64, C64) {
    let effective = if d * kappa_mag > 4.0 { d - 2.0 / kappa_mag } else { d };
    let centre = m as f64 * PI / (2.0 * effective);
    (C64::new(centre, 0.5 * kappa_mag), C64::new(centre, -0.5 * kappa_mag))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimates() {
        let d = 30.0;
        let x = PI / d;
        assert!((bound_state_energy_estimate(d, 0.0, 2, BoundType::I) - 8.0 * x * x).abs() < 1e-15);
        assert!((bound_state_energy_estimate(d, 0.2, 1, BoundType::II) - (x * x - 0.02)).abs() < 1e-15);
        let k = bound_resonance_kappa(d, x * x, 3, BoundType::II).unwrap();
        let e = bound_state_energy_estimate(d, k, 3, BoundType::II);
        assert!((e - 2.0 * x * x).abs() < 1e-14);
        assert!(bound_resonance_kappa(d, x * x, 1, BoundType::II).is_none());
    }
}
