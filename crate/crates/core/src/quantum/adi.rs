use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use super::{Boundary, GridSpec, QuantumState, I};
use crate::params::DimensionlessParams;
use crate::C64;

/// Thomas factors of a constant-off-diagonal tridiagonal matrix.
fn factor(diag: impl Iterator<Item = C64>, off: C64, inv: &mut [C64], cp: &mut [C64]) {
    let mut prev = C64::new(0.0, 0.0);
    for (j, b) in diag.enumerate() {
        inv[j] = (b - off * prev).inv();
        cp[j] = off * inv[j];
        prev = cp[j];
    }
}

/// Crank-Nicolson for θ and Peaceman-Rachford for φ, both with the ghost
/// cells eliminated through the mixed boundary conditions. The two-photon
/// potential is applied in pointwise Crank-Nicolson half steps on either
/// side of the kinetic step (Strang splitting). The two directional kinetic
/// operators then commute, so a symmetric φ stays symmetric up to rounding;
/// the final transpose average only removes that rounding.
pub(crate) struct AdiPropagator {
    n: usize,
    alpha: C64,
    boundary: Boundary,
    /// `k/2`.
    half: f64,
    /// `i/(2mh²)`.
    hop: C64,
    /// `−(k/2)·hop`, the off-diagonal of every implicit matrix.
    off: C64,
    reflect: C64,
    /// Diagonal of the explicit half-step kinetic operator.
    explicit_diag: C64,
    /// Pointwise factor of a half-step potential update, by `|x − y|`.
    pot_phase: Vec<C64>,
    /// One-photon potential `iδ`.
    pot_theta: C64,
    theta_inv: Vec<C64>,
    theta_cp: Vec<C64>,
    /// Pivots of the kinetic line solve, shared by every line; the
    /// superdiagonal factors are `off` times these and are not stored.
    line_inv: Vec<C64>,
    work: Vec<C64>,
    mid: Vec<C64>,
    theta_old: Vec<C64>,
    source: Vec<C64>,
    /// `max|φ − φᵀ|` of the last two-photon update before symmetrization.
    pub(crate) raw_asymmetry: f64,
}

impl AdiPropagator {
    pub(crate) fn new(p: &DimensionlessParams, g: &GridSpec) -> Self {
        let n = g.n_z;
        let half = 0.5 * g.k;
        let hop = I / (p.m * 2.0 * g.h * g.h);
        let off = -hop * half;
        let boundary = Boundary::new(p, g);
        let reflect = boundary.reflect;
        let pot_phase: Vec<C64> = (0..n)
            .map(|r| {
                let q = (I * p.delta - I * p.kappa * g.kernel(r)) * (0.5 * g.k);
                (C64::new(1.0, 0.0) + q) / (C64::new(1.0, 0.0) - q)
            })
            .collect();
        let pot_theta = I * p.delta;
        let edge = |j: usize| if j == 0 || j == n - 1 { reflect } else { C64::new(0.0, 0.0) };

        let mut theta_inv = vec![C64::new(0.0, 0.0); n];
        let mut theta_cp = vec![C64::new(0.0, 0.0); n];
        factor(
            (0..n).map(|j| C64::new(1.0, 0.0) - (hop * (edge(j) - 2.0) + pot_theta) * half),
            off,
            &mut theta_inv,
            &mut theta_cp,
        );

        let mut line_inv = vec![C64::new(0.0, 0.0); n];
        let mut line_cp = vec![C64::new(0.0, 0.0); n];
        factor(
            (0..n).map(|j| C64::new(1.0, 0.0) - hop * (edge(j) - 2.0) * half),
            off,
            &mut line_inv,
            &mut line_cp,
        );
        AdiPropagator {
            n,
            alpha: p.alpha,
            half,
            hop,
            off,
            reflect,
            explicit_diag: C64::new(1.0, 0.0) - hop * 2.0 * half,
            pot_phase,
            pot_theta,
            theta_inv,
            theta_cp,
            line_inv,
            boundary,
            work: vec![C64::new(0.0, 0.0); n * n],
            mid: vec![C64::new(0.0, 0.0); n * n],
            theta_old: vec![C64::new(0.0, 0.0); n],
            source: vec![C64::new(0.0, 0.0); n],
            raw_asymmetry: 0.0,
        }
    }

    pub(crate) fn set_drive(&mut self, alpha: C64) {
        self.alpha = alpha;
    }

    pub(crate) fn step(&mut self, state: &mut QuantumState, one_photon_only: bool) {
        self.step_theta(state);
        if !one_photon_only {
            self.step_phi(state);
        }
    }

    fn step_theta(&mut self, state: &mut QuantumState) {
        let n = self.n;
        let (half, hop, off) = (self.half, self.hop, self.off);
        let src = self.boundary.source(self.alpha * state.epsilon * SQRT_2);
        let t = &mut state.theta;
        self.theta_old.copy_from_slice(&t[1..=n]);
        let old = &self.theta_old;
        // Right-hand side, forward elimination, then back substitution.
        let mut prev = C64::new(0.0, 0.0);
        for j in 0..n {
            let left = if j == 0 { self.reflect * old[0] + src } else { old[j - 1] };
            let right = if j == n - 1 { self.reflect * old[n - 1] } else { old[j + 1] };
            let mut rhs = old[j] + (hop * (left + right - old[j] * 2.0) + self.pot_theta * old[j]) * half;
            if j == 0 {
                rhs += hop * src * half;
            }
            prev = (rhs - off * prev) * self.theta_inv[j];
            t[j + 1] = prev;
        }
        for j in (0..n - 1).rev() {
            t[j + 1] = t[j + 1] - self.theta_cp[j] * t[j + 2];
        }
        self.boundary.theta_ghosts(t, self.alpha * state.epsilon);
    }

    /// Half-step potential update of the interior cells.
    fn kick(&self, phi: &mut [C64]) {
        let (n, w) = (self.n, self.n + 2);
        for x in 0..n {
            let row = &mut phi[(x + 1) * w + 1..(x + 1) * w + 1 + n];
            for (y, v) in row.iter_mut().enumerate() {
                *v *= self.pot_phase[x.abs_diff(y)];
            }
        }
    }

    fn step_phi(&mut self, state: &mut QuantumState) {
        let n = self.n;
        let w = n + 2;
        let (hh, off, reflect) = (self.hop * self.half, self.off, self.reflect);
        // Drive of the two-photon boundary from the time-centred θ.
        let drive = self.alpha / SQRT_2;
        for y in 0..n {
            let mean = (self.theta_old[y] + state.theta[y + 1]) * 0.5;
            self.source[y] = self.boundary.source(drive * mean) * hh;
        }
        self.kick(&mut state.phi);
        let s = &self.source;
        let inv = &self.line_inv;
        let dy = self.explicit_diag;
        let edge = reflect * hh;

        // First half: explicit along y, implicit along x, with the forward
        // elimination fused into the row loop.
        let mid = &mut self.mid;
        for x in 0..n {
            let src = &state.phi[(x + 1) * w + 1..(x + 1) * w + 1 + n];
            let (done, rest) = mid.split_at_mut(x * n);
            let out = &mut rest[..n];
            for (o, win) in out[1..n - 1].iter_mut().zip(src.windows(3)) {
                *o = dy * win[1] + hh * (win[0] + win[2]);
            }
            out[0] = (dy + edge) * src[0] + hh * src[1] + s[x];
            out[n - 1] = (dy + edge) * src[n - 1] + hh * src[n - 2];
            let iv = inv[x];
            if x == 0 {
                for (o, &sy) in out.iter_mut().zip(s) {
                    *o = (*o + sy) * iv;
                }
            } else {
                let above = &done[(x - 1) * n..x * n];
                for (o, &a) in out.iter_mut().zip(above) {
                    *o = (*o - off * a) * iv;
                }
            }
        }
        for x in (0..n - 1).rev() {
            let (head, tail) = mid.split_at_mut((x + 1) * n);
            let row = &mut head[x * n..];
            let below = &tail[..n];
            let f = off * inv[x];
            for (r, &b) in row[..n].iter_mut().zip(below) {
                *r -= f * b;
            }
        }

        // Second half: explicit along x, implicit along y.
        let work = &mut self.work;
        for x in 0..n {
            let c = &mid[x * n..(x + 1) * n];
            let out = &mut work[x * n..(x + 1) * n];
            if x == 0 {
                let hi = &mid[n..2 * n];
                for (((o, &cy), &h), &sy) in out.iter_mut().zip(c).zip(hi).zip(s) {
                    *o = (dy + edge) * cy + hh * h + sy;
                }
            } else if x == n - 1 {
                let lo = &mid[(x - 1) * n..x * n];
                for ((o, &cy), &l) in out.iter_mut().zip(c).zip(lo) {
                    *o = (dy + edge) * cy + hh * l;
                }
            } else {
                let lo = &mid[(x - 1) * n..x * n];
                let hi = &mid[(x + 1) * n..(x + 2) * n];
                for (((o, &cy), &l), &h) in out.iter_mut().zip(c).zip(lo).zip(hi) {
                    *o = dy * cy + hh * (l + h);
                }
            }
            out[0] += s[x];
            let mut prev = C64::new(0.0, 0.0);
            for (o, &iv) in out.iter_mut().zip(inv) {
                prev = (*o - off * prev) * iv;
                *o = prev;
            }
            let mut next = out[n - 1];
            for (o, &iv) in out[..n - 1].iter_mut().zip(inv).rev() {
                next = *o - off * iv * next;
                *o = next;
            }
        }

        let phi = &mut state.phi;
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in x..n {
                let (a, b) = (work[x * n + y], work[y * n + x]);
                worst = worst.max((a - b).norm_sqr());
                let v = (a + b) * 0.5;
                phi[(x + 1) * w + y + 1] = v;
                phi[(y + 1) * w + x + 1] = v;
            }
        }
        self.raw_asymmetry = worst.sqrt();
        self.kick(&mut state.phi);
        self.boundary.phi_ghosts(&mut state.phi, &state.theta, self.alpha, n);
    }
}
