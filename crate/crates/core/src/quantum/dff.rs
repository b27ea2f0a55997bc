use alloc::vec::Vec;

use super::{Boundary, GridSpec, QuantumState, I};
use crate::params::DimensionlessParams;
use crate::C64;

/// Explicit two-level updates. With `a = ik/(mh²)`,
/// `(1+a)θ⁺ = (1−a)θ⁻ + a(θ_{j+1}+θ_{j−1}) + 2ikδθ` and the analogous 2D
/// stencil for φ. The first step from a single level is forward Euler.
pub(crate) struct DffPropagator {
    n: usize,
    k: f64,
    alpha: C64,
    boundary: Boundary,
    a: C64,
    one_theta: C64,
    keep_theta: C64,
    one_phi: C64,
    keep_phi: C64,
    /// `2ikδ` on the current level of θ.
    pot_theta: C64,
    /// Current-level coefficient of φ indexed by `|i − j|`.
    pot_phi: Vec<C64>,
    /// Continuous-time rates for the bootstrap step.
    hop: C64,
    rate_theta: C64,
    rate_phi: Vec<C64>,
}

impl DffPropagator {
    pub(crate) fn new(p: &DimensionlessParams, g: &GridSpec) -> Self {
        let (h, k) = (g.h, g.k);
        let a = I * k / (p.m * h * h);
        let kernel: Vec<f64> = (0..g.n_z + 2).map(|r| g.kernel(r)).collect();
        DffPropagator {
            n: g.n_z,
            k,
            alpha: p.alpha,
            boundary: Boundary::new(p, g),
            a,
            one_theta: (a + 1.0).inv(),
            keep_theta: C64::new(1.0, 0.0) - a,
            one_phi: (a * 2.0 + 1.0).inv(),
            keep_phi: C64::new(1.0, 0.0) - a * 2.0,
            pot_theta: I * (2.0 * k * p.delta),
            pot_phi: kernel.iter().map(|&v| I * k * (4.0 * p.delta) - I * p.kappa * (4.0 * k * v)).collect(),
            hop: I / (p.m * 2.0 * h * h),
            rate_theta: I * p.delta,
            rate_phi: kernel.iter().map(|&v| I * (2.0 * p.delta) - I * p.kappa * (2.0 * v)).collect(),
        }
    }

    pub(crate) fn set_drive(&mut self, alpha: C64) {
        self.alpha = alpha;
    }

    pub(crate) fn step(&mut self, state: &mut QuantumState) {
        let n = self.n;
        let w = n + 2;
        let bootstrap = state.steps == 0;
        // The previous level is overwritten in place with the next one.
        {
            let cur = &state.theta;
            let next = &mut state.theta_prev;
            for j in 1..=n {
                next[j] = if bootstrap {
                    let lap = cur[j + 1] + cur[j - 1] - cur[j] * 2.0;
                    cur[j] + (self.hop * lap + self.rate_theta * cur[j]) * self.k
                } else {
                    (self.keep_theta * next[j] + self.a * (cur[j + 1] + cur[j - 1]) + self.pot_theta * cur[j])
                        * self.one_theta
                };
            }
            self.boundary.theta_ghosts(next, self.alpha * state.epsilon);
        }
        {
            let cur = &state.phi;
            let next = &mut state.phi_prev;
            // Upper triangle only; the mirror write keeps φ exactly symmetric.
            for i in 1..=n {
                let row = i * w;
                for j in i..=n {
                    let c = cur[row + j];
                    let across = cur[row + w + j] + cur[row - w + j];
                    let along = cur[row + j + 1] + cur[row + j - 1];
                    let v = if bootstrap {
                        let lap = across + along - c * 4.0;
                        c + (self.hop * lap + self.rate_phi[j - i] * c) * self.k
                    } else {
                        (self.keep_phi * next[row + j] + self.a * (across + along) + self.pot_phi[j - i] * c)
                            * self.one_phi
                    };
                    next[row + j] = v;
                    next[j * w + i] = v;
                }
            }
            self.boundary.phi_ghosts(next, &state.theta_prev, self.alpha, n);
        }
        core::mem::swap(&mut state.theta, &mut state.theta_prev);
        core::mem::swap(&mut state.phi, &mut state.phi_prev);
    }
}
