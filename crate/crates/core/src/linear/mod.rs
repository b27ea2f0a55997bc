//! Linear transport: closed-form forward/backward profiles of the driven
//! medium and the full-susceptibility band-gap problem.

mod bandgap;

pub use bandgap::{bandgap_coefficients, bandgap_spectrum, optical_depth_for_length, shoot_bandgap, SusceptibilityParams};

// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::numeric::{integrate, sinc};
use crate::params::{DimensionlessParams, ParamError};
use crate::table::SpectrumTable;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum LinearError {
    Params(ParamError),
    PositionOutOfRange { z: f64, d: f64 },
    /// The closed-form denominator is numerically zero.
    Antiresonance { delta: f64 },
    InvalidArgument(&'static str),
    /// `Γ'Γ0 + 2Ω² = 0`: the susceptibilities diverge.
    SusceptibilityPole { delta3: f64 },
}

impl fmt::Display for LinearError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinearError::Params(e) => write!(f, "{e}"),
            LinearError::PositionOutOfRange { z, d } => {
                write!(f, "position {z} outside medium [0, {d}]")
            }
            LinearError::Antiresonance { delta } => {
                write!(f, "closed-form denominator vanishes at detuning {delta}")
            }
            LinearError::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            LinearError::SusceptibilityPole { delta3 } => {
                write!(f, "susceptibility pole at two-photon detuning {delta3}")
            }
        }
    }
}

impl core::error::Error for LinearError {}

impl From<ParamError> for LinearError {
    fn from(e: ParamError) -> Self {
        LinearError::Params(e)
    }
}

/// Forward and backward amplitudes at one position, normalized to the drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPair {
    pub forward: C64,
    pub backward: C64,
}

fn denominator(d: f64, m: C64, delta: f64) -> C64 {
    let k = (m * 2.0 * delta).sqrt();
    C64::new(0.0, 2.0) * (k * d).cos() + (m * 2.0 + delta) * d * sinc(k * d)
}

/// Linear coupled-mode solution for mass `m` at detuning `delta`, evaluated
/// at `z`, with unit drive and an undriven right end.
pub fn linear_fields(d: f64, m: C64, delta: f64, z: f64) -> Result<FieldPair, LinearError> {
    if !(d > 0.0) {
        return Err(LinearError::Params(ParamError::NonPositiveLength(d)));
    }
    if !(0.0..=d).contains(&z) {
        return Err(LinearError::PositionOutOfRange { z, d });
    }
    let den = denominator(d, m, delta);
    let scale = 1.0 + (m * 2.0 + delta).norm() * d;
    if !(den.norm() > 1e-13 * scale) {
        return Err(LinearError::Antiresonance { delta });
    }
    let k = (m * 2.0 * delta).sqrt();
    let u = d - z;
    let s = u * sinc(k * u);
    let forward = (C64::new(0.0, 2.0) * (k * u).cos() + (m * 2.0 + delta) * s) / den;
    let backward = (m * 2.0 - delta) * s / den;
    Ok(FieldPair { forward, backward })
}

/// Transmitted and reflected amplitudes `(T, R)` for mass `m`.
pub fn transmission_reflection(d: f64, m: C64, delta: f64) -> Result<(C64, C64), LinearError> {
    let out = linear_fields(d, m, delta, d)?;
    let back = linear_fields(d, m, delta, 0.0)?;
    Ok((out.forward, back.backward))
}

/// Forward profile `Φ+(z)/α` of the lossless medium.
pub fn analytic_profile(p: &DimensionlessParams, z: f64) -> Result<C64, LinearError> {
    p.validate()?;
    Ok(linear_fields(p.d, C64::new(0.5, 0.0), p.delta, z)?.forward)
}

/// Position and full width of a transmission resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub delta0: f64,
    pub full_width: f64,
    /// True when the width is the `(nπ/d)³` generalization beyond the first resonance.
    pub extrapolated: bool,
}

pub fn resonance_and_width(d: f64, n: u32) -> Result<Resonance, LinearError> {
    if !(d > 0.0) {
        return Err(LinearError::Params(ParamError::NonPositiveLength(d)));
    }
    if n == 0 {
        return Err(LinearError::InvalidArgument("resonance index starts at 1"));
    }
    let x = n as f64 * PI / d;
    Ok(Resonance { delta0: x * x, full_width: x * x * x, extrapolated: n > 1 })
}

/// Estimated polariton number on the first resonance.
pub fn polariton_number(p: &DimensionlessParams) -> Result<f64, LinearError> {
    p.validate()?;
    let d = p.d;
    let pi2 = PI * PI;
    Ok((d * d + pi2).powi(2) / (4.0 * d * pi2) * p.alpha.norm_sqr())
}

/// Intracavity intensity `(1/d)∫(|Φ+|²+|Φ−|²)dz` per unit drive intensity.
pub fn average_intensity_gain(d: f64, m: C64, delta: f64) -> Result<f64, LinearError> {
    linear_fields(d, m, delta, 0.0)?;
    let panels = (d.ceil() as usize).clamp(16, 4096);
    let total = integrate(
        |z| {
            let f = linear_fields(d, m, delta, z.clamp(0.0, d)).expect("checked above");
            f.forward.norm_sqr() + f.backward.norm_sqr()
        },
        0.0,
        d,
        panels,
    );
    Ok(total / d)
}

/// Effective mass that reproduces a loss parameter `beta` at length `d`.
pub fn lossy_mass(d: f64, beta: f64) -> C64 {
    C64::new(0.5, 0.25 * beta / d)
}

/// Linear transmission spectrum with loss parameter `beta`.
///
/// Loss enters through the complex effective mass `½(1 + iβ/2d)`, which
/// attenuates each round trip in proportion to the intracavity intensity.
pub fn analytic_spectrum(
    p: &DimensionlessParams,
    deltas: &[f64],
    beta: f64,
) -> Result<SpectrumTable, LinearError> {
    p.validate()?;
    if deltas.is_empty() {
        return Err(LinearError::InvalidArgument("empty detuning list"));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(LinearError::InvalidArgument("loss parameter must be finite and non-negative"));
    }
    let m = lossy_mass(p.d, beta);
    let n = deltas.len();
    let (mut t2, mut r2, mut tph, mut rph, mut masked) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for &delta in deltas {
        match transmission_reflection(p.d, m, delta) {
            Ok((t, r)) => {
                t2.push(t.norm_sqr());
                r2.push(r.norm_sqr());
                tph.push(t.arg());
                rph.push(r.arg());
                masked.push(0.0);
            }
            Err(LinearError::Antiresonance { .. }) => {
                for c in [&mut t2, &mut r2, &mut tph, &mut rph] {
                    c.push(f64::NAN);
                }
                masked.push(1.0);
            }
            Err(e) => return Err(e),
        }
    }
    let mut table = SpectrumTable::new("delta", deltas.to_vec());
    table.push_column("transmission", t2).expect("lengths match");
    table.push_column("reflection", r2).expect("lengths match");
    table.push_column("transmission_phase", tph).expect("lengths match");
    table.push_column("reflection_phase", rph).expect("lengths match");
    table.push_column("masked", masked).expect("lengths match");
    table.set_meta("solver", "closed-form coupled modes");
    table.set_meta("d", p.d);
    table.set_meta("beta", beta);
    table.set_meta("mass_im", m.im);
    Ok(table)
}

/// Full width at half maximum of `|T|²` around a peak, located by bisection on
/// the closed form. Returns `None` if the half level is not crossed within
/// `search` on either side.
pub fn measured_full_width(d: f64, m: C64, peak: f64, search: f64) -> Option<f64> {
    let t2 = |x: f64| transmission_reflection(d, m, x).map(|(t, _)| t.norm_sqr()).ok();
    let top = t2(peak)?;
    let half = 0.5 * top;
    let edge = |dir: f64| -> Option<f64> {
        let steps = 400;
        let mut inside = peak;
        for i in 1..=steps {
            let x = peak + dir * search * i as f64 / steps as f64;
            if t2(x)? < half {
                let mut outside = x;
                for _ in 0..100 {
                    let mid = 0.5 * (inside + outside);
                    if t2(mid)? >= half {
                        inside = mid;
                    } else {
                        outside = mid;
                    }
                }
                return Some(0.5 * (inside + outside));
            }
            inside = x;
        }
        None
    };
    Some(edge(1.0)? - edge(-1.0)?)
}
