//! Physical atomic/waveguide parameters and their dimensionless counterparts.
//!
//! All rates are measured in units of the total spontaneous emission rate, so
//! the stored `gamma` only records the scale the caller had in mind.

// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;
use core::fmt;

use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamError {
    /// One-photon detuning is zero; the effective mass is undefined.
    ZeroDetuning,
    /// Positive one-photon detuning is outside the supported branch.
    PositiveDetuning(f64),
    NonPositiveOpticalDepth(f64),
    CouplingRatioOutOfRange(f64),
    NonPositiveLength(f64),
    /// The critical photon number needs a dispersive (real) part of the nonlinearity.
    PurelyAbsorptive,
    InvalidField { name: &'static str, value: f64 },
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::ZeroDetuning => write!(f, "one-photon detuning must be nonzero"),
            ParamError::PositiveDetuning(v) => {
                write!(f, "one-photon detuning must be negative, got {v}")
            }
            ParamError::NonPositiveOpticalDepth(v) => {
                write!(f, "optical depth must be positive, got {v}")
            }
            ParamError::CouplingRatioOutOfRange(v) => {
                write!(f, "guided-mode coupling ratio must lie in (0, 1], got {v}")
            }
            ParamError::NonPositiveLength(v) => write!(f, "system length must be positive, got {v}"),
            ParamError::PurelyAbsorptive => {
                write!(f, "nonlinearity has no dispersive part; critical photon number is infinite")
            }
            ParamError::InvalidField { name, value } => write!(f, "invalid {name}: {value}"),
        }
    }
}

impl core::error::Error for ParamError {}

/// Atomic and waveguide parameters, rates normalized to the total decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalParams {
    pub gamma: f64,
    pub gamma1d_over_gamma: f64,
    pub delta1_over_gamma: f64,
    pub delta2_over_gamma: f64,
    pub od: f64,
    pub omega_over_gamma: f64,
    pub gamma0_over_gamma: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            gamma: 1.0,
            gamma1d_over_gamma: 0.1,
            delta1_over_gamma: -10.0,
            delta2_over_gamma: 5.0,
            od: 100.0,
            omega_over_gamma: 1.0,
            gamma0_over_gamma: 0.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let finite = [
            ("gamma", self.gamma),
            ("gamma1d_over_gamma", self.gamma1d_over_gamma),
            ("delta1_over_gamma", self.delta1_over_gamma),
            ("delta2_over_gamma", self.delta2_over_gamma),
            ("od", self.od),
            ("omega_over_gamma", self.omega_over_gamma),
            ("gamma0_over_gamma", self.gamma0_over_gamma),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(ParamError::InvalidField { name, value });
            }
        }
        if self.gamma <= 0.0 {
            return Err(ParamError::InvalidField { name: "gamma", value: self.gamma });
        }
        if !(self.gamma1d_over_gamma > 0.0 && self.gamma1d_over_gamma <= 1.0) {
            return Err(ParamError::CouplingRatioOutOfRange(self.gamma1d_over_gamma));
        }
        if self.od <= 0.0 {
            return Err(ParamError::NonPositiveOpticalDepth(self.od));
        }
        if self.delta1_over_gamma == 0.0 {
            return Err(ParamError::ZeroDetuning);
        }
        if self.delta1_over_gamma > 0.0 {
            return Err(ParamError::PositiveDetuning(self.delta1_over_gamma));
        }
        if self.omega_over_gamma < 0.0 {
            return Err(ParamError::InvalidField {
                name: "omega_over_gamma",
                value: self.omega_over_gamma,
            });
        }
        if self.gamma0_over_gamma < 0.0 {
            return Err(ParamError::InvalidField {
                name: "gamma0_over_gamma",
                value: self.gamma0_over_gamma,
            });
        }
        Ok(())
    }
}

/// Parameters of the dimensionless driven NLSE.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimensionlessParams {
    /// Effective polariton mass (complex when the one-photon detuning is finite).
    pub m: C64,
    pub kappa: C64,
    /// Length in coherence lengths.
    pub d: f64,
    /// Drive detuning.
    pub delta: f64,
    /// Drive amplitude at the input boundary.
    pub alpha: C64,
    /// Physical record this set was derived from, if any.
    pub source: Option<PhysicalParams>,
}

impl DimensionlessParams {
    /// Lossless parameters with `m = 1/2`.
    pub fn lossless(d: f64, kappa: C64, delta: f64, alpha: C64) -> Self {
        DimensionlessParams { m: C64::new(0.5, 0.0), kappa, d, delta, alpha, source: None }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.d > 0.0) || !self.d.is_finite() {
            return Err(ParamError::NonPositiveLength(self.d));
        }
        let parts = [
            ("m.re", self.m.re),
            ("m.im", self.m.im),
            ("kappa.re", self.kappa.re),
            ("kappa.im", self.kappa.im),
            ("delta", self.delta),
            ("alpha.re", self.alpha.re),
            ("alpha.im", self.alpha.im),
        ];
        for (name, value) in parts {
            if !value.is_finite() {
                return Err(ParamError::InvalidField { name, value });
            }
        }
        if self.m.norm() == 0.0 {
            return Err(ParamError::InvalidField { name: "m", value: 0.0 });
        }
        Ok(())
    }

    pub fn with_kappa(mut self, kappa: C64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_alpha(mut self, alpha: C64) -> Self {
        self.alpha = alpha;
        self
    }
}

/// Maps physical parameters onto the NLSE parameters.
pub fn derive_dimensionless(
    phys: &PhysicalParams,
    delta: f64,
    alpha: C64,
) -> Result<DimensionlessParams, ParamError> {
    phys.validate()?;
    let detuning = phys.delta1_over_gamma.abs();
    let m = C64::new(0.5, 0.25 / detuning);
    let kappa = C64::new(phys.gamma1d_over_gamma, 0.0)
        / (C64::new(phys.delta2_over_gamma, 0.5) * 4.0);
    let d = phys.od / detuning;
    Ok(DimensionlessParams { m, kappa, d, delta, alpha, source: Some(*phys) })
}

/// Number of polaritons at which the nonlinear shift reaches half the
/// linear resonance width.
pub fn critical_photon_number(p: &DimensionlessParams) -> Result<f64, ParamError> {
    p.validate()?;
    let re = p.kappa.re.abs();
    if re == 0.0 {
        return Err(ParamError::PurelyAbsorptive);
    }
    Ok(PI.powi(3) / (4.0 * p.d * p.d * re))
}

/// Linear loss parameter `OD (Γ/Δ1)²`.
pub fn loss_beta(p: &PhysicalParams) -> Result<f64, ParamError> {
    p.validate()?;
    Ok(p.od / (p.delta1_over_gamma * p.delta1_over_gamma))
}

/// Loss parameter from a dimensionless length and a one-photon detuning.
pub fn loss_beta_from_length(d: f64, delta1_over_gamma: f64) -> f64 {
    d / delta1_over_gamma.abs()
}

/// Magnitude of the one-photon detuning that yields loss `beta` at depth `od`.
pub fn detuning_for_loss(od: f64, beta: f64) -> Result<f64, ParamError> {
    if od <= 0.0 {
        return Err(ParamError::NonPositiveOpticalDepth(od));
    }
    if !(beta > 0.0) {
        return Err(ParamError::InvalidField { name: "beta", value: beta });
    }
    Ok((od / beta).sqrt())
}

/// Squared length at which one polariton reaches the critical photon number
/// in the dispersive limit.
pub fn single_photon_length_squared(gamma1d_over_gamma: f64, delta2_over_gamma: f64) -> f64 {
    PI.powi(3) * delta2_over_gamma / gamma1d_over_gamma
}

/// Optical depth needed for single-photon nonlinearity at a given loss `beta`.
pub fn single_photon_optical_depth(
    gamma1d_over_gamma: f64,
    delta2_over_gamma: f64,
    beta: f64,
) -> f64 {
    single_photon_length_squared(gamma1d_over_gamma, delta2_over_gamma) / beta
}

/// Coherence-length count `OD/|Δ1|` for an optical depth and detuning.
pub fn length_from_optical_depth(od: f64, delta1_over_gamma: f64) -> f64 {
    od / delta1_over_gamma.abs()
}
