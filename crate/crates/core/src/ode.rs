//! Adaptive Dormand-Prince 5(4) integration of small complex systems.

// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use core::fmt;

use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeError {
    StepSizeUnderflow { at: f64 },
    TooManySteps { at: f64 },
    NonFinite { at: f64 },
}

impl fmt::Display for OdeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OdeError::StepSizeUnderflow { at } => write!(f, "step size underflow at {at}"),
            OdeError::TooManySteps { at } => write!(f, "step budget exhausted at {at}"),
            OdeError::NonFinite { at } => write!(f, "non-finite state at {at}"),
        }
    }
}

impl core::error::Error for OdeError {}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-11, atol: 1e-14, max_steps: 200_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [C64; N],
    t1: f64,
    tol: Tolerance,
) -> Result<[C64; N], OdeError>
where
    F: FnMut(f64, &[C64; N]) -> [C64; N],
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * (span.abs() * 1e-3).clamp(1e-6, 0.1);
    let mut k1 = f(t, &y);
    for _ in 0..tol.max_steps {
        if (t1 - t) * dir <= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let k2 = f(t + C2 * h, &combine(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &combine(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combine(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_new);
        let mut err = 0.0f64;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let scale = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            let r = e.norm() / scale;
            err += r * r;
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            return Err(OdeError::NonFinite { at: t });
        }
        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(OdeError::StepSizeUnderflow { at: t });
        }
    }
    Err(OdeError::TooManySteps { at: t })
}
