//! Counter-propagating probe fields coupled through the full self- and
//! cross-susceptibilities of a standing-wave control field.

use alloc::vec::Vec;

use super::LinearError;
use crate::numeric::sinhc;
use crate::table::SpectrumTable;
use crate::C64;

/// Rates in units of the total decay rate; `length` in absorption lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SusceptibilityParams {
    pub omega: f64,
    pub delta1: f64,
    pub gamma0: f64,
    /// Two-photon detuning used by single-point evaluations.
    pub delta3: f64,
    pub length: f64,
    /// Keep the free-propagation phase `Δ̃3` next to the susceptibilities.
    pub keep_free_phase: bool,
    /// Group velocity over vacuum light speed; scales the free-propagation phase.
    pub group_velocity_ratio: f64,
}

impl SusceptibilityParams {
    pub fn new(omega: f64, delta1: f64, gamma0: f64, length: f64) -> Self {
        SusceptibilityParams {
            omega,
            delta1,
            gamma0,
            delta3: 0.0,
            length,
            keep_free_phase: true,
            group_velocity_ratio: 1e-5,
        }
    }

    fn validate(&self) -> Result<(), LinearError> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(LinearError::InvalidArgument("control Rabi frequency must be positive"));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(LinearError::InvalidArgument("medium length must be positive"));
        }
        if !(self.gamma0 >= 0.0) || !self.delta1.is_finite() {
            return Err(LinearError::InvalidArgument("decay and detuning must be finite, decay >= 0"));
        }
        if !(self.group_velocity_ratio >= 0.0) {
            return Err(LinearError::InvalidArgument("group velocity ratio must be non-negative"));
        }
        Ok(())
    }

    /// Self susceptibility, cross susceptibility, and free phase at `delta3`.
    pub fn susceptibilities(&self, delta3: f64) -> Result<(C64, C64, f64), LinearError> {
        let i = C64::new(0.0, 1.0);
        let gp = C64::new(0.5, -self.delta1 - delta3);
        let g0 = C64::new(self.gamma0, -delta3);
        let w2 = self.omega * self.omega;
        let den = gp * g0 + 2.0 * w2;
        if !(den.norm() > 1e-14 * (1.0 + w2)) {
            return Err(LinearError::SusceptibilityPole { delta3 });
        }
        let chi_s = i / gp * (gp * g0 + w2) / den;
        let chi_c = -i / gp * w2 / den;
        let free = if self.keep_free_phase {
            delta3 * self.group_velocity_ratio / w2
        } else {
            0.0
        };
        Ok((chi_s, chi_c, free))
    }
}

/// Transmitted and reflected amplitudes at `delta3` by exact exponentiation
/// of the constant-coefficient transfer matrix.
pub fn bandgap_coefficients(s: &SusceptibilityParams, delta3: f64) -> Result<(C64, C64), LinearError> {
    s.validate()?;
    let (chi_s, chi_c, free) = s.susceptibilities(delta3)?;
    let i = C64::new(0.0, 1.0);
    let a = chi_s + free;
    let c = chi_c;
    // d/dz (E+, E-) = M (E+, E-),  M = [[iA, iC], [-iC, -iA]],  M² = λ² I.
    let m = [[i * a, i * c], [-i * c, -i * a]];
    let mut lambda = (c * c - a * a).sqrt();
    if lambda.re < 0.0 {
        lambda = -lambda;
    }
    let l = s.length;
    let one = C64::new(1.0, 0.0);
    let (u21, u22, scale) = if (lambda * l).norm() < 1.0 {
        let ch = (lambda * l).cosh();
        let sh = sinhc(lambda * l) * l;
        (sh * m[1][0], ch + sh * m[1][1], one)
    } else {
        // U = e^{λL} [½(I + M/λ) + ½e^{-2λL}(I - M/λ)]
        let decay = (-lambda * 2.0 * l).exp();
        let u = |row: usize, col: usize| {
            let id = if row == col { one } else { C64::new(0.0, 0.0) };
            (id + m[row][col] / lambda) * 0.5 + (id - m[row][col] / lambda) * decay * 0.5
        };
        (u(1, 0), u(1, 1), (-lambda * l).exp())
    };
    let r = -u21 / u22;
    let t = scale / u22;
    Ok((t, r))
}

/// Same boundary-value problem solved by fixed-step RK4 shooting. Intended as
/// an independent check at moderate `length`.
pub fn shoot_bandgap(
    s: &SusceptibilityParams,
    delta3: f64,
    steps: usize,
) -> Result<(C64, C64), LinearError> {
    s.validate()?;
    let (chi_s, chi_c, free) = s.susceptibilities(delta3)?;
    let i = C64::new(0.0, 1.0);
    let a = chi_s + free;
    let rhs = |y: [C64; 2]| [i * a * y[0] + i * chi_c * y[1], -i * chi_c * y[0] - i * a * y[1]];
    let h = s.length / steps as f64;
    let integrate = |mut y: [C64; 2]| {
        for _ in 0..steps {
            let k1 = rhs(y);
            let k2 = rhs([y[0] + k1[0] * (h / 2.0), y[1] + k1[1] * (h / 2.0)]);
            let k3 = rhs([y[0] + k2[0] * (h / 2.0), y[1] + k2[1] * (h / 2.0)]);
            let k4 = rhs([y[0] + k3[0] * h, y[1] + k3[1] * h]);
            for j in 0..2 {
                y[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
            }
        }
        y
    };
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let p = integrate([one, zero]);
    let q = integrate([zero, one]);
    // E-(L) = p[1] + r q[1] = 0
    let r = -p[1] / q[1];
    Ok((p[0] + r * q[0], r))
}

/// `|T|²` and `|R|²` over a list of two-photon detunings.
pub fn bandgap_spectrum(s: &SusceptibilityParams, delta3s: &[f64]) -> Result<SpectrumTable, LinearError> {
    s.validate()?;
    if delta3s.is_empty() {
        return Err(LinearError::InvalidArgument("empty detuning list"));
    }
    let mut t2 = Vec::with_capacity(delta3s.len());
    let mut r2 = Vec::with_capacity(delta3s.len());
    let mut masked = Vec::with_capacity(delta3s.len());
    for &x in delta3s {
        match bandgap_coefficients(s, x) {
            Ok((t, r)) => {
                t2.push(t.norm_sqr());
                r2.push(r.norm_sqr());
                masked.push(0.0);
            }
            Err(LinearError::SusceptibilityPole { .. }) => {
                t2.push(f64::NAN);
                r2.push(f64::NAN);
                masked.push(1.0);
            }
            Err(e) => return Err(e),
        }
    }
    let mut table = SpectrumTable::new("delta3", delta3s.to_vec());
    table.push_column("transmission", t2).expect("lengths match");
    table.push_column("reflection", r2).expect("lengths match");
    table.push_column("masked", masked).expect("lengths match");
    table.set_meta("solver", "transfer matrix");
    table.set_meta("omega", s.omega);
    table.set_meta("delta1", s.delta1);
    table.set_meta("gamma0", s.gamma0);
    table.set_meta("length", s.length);
    table.set_meta("keep_free_phase", s.keep_free_phase);
    table.set_meta("group_velocity_ratio", s.group_velocity_ratio);
    Ok(table)
}

/// Length in absorption lengths equivalent to `d` coherence lengths: the
/// optical depth seen at detuning `delta1`, `OD = d(Δ1² + ¼)/|Δ1|`.
pub fn optical_depth_for_length(d: f64, delta1: f64) -> f64 {
    d * (delta1 * delta1 + 0.25) / delta1.abs()
}
