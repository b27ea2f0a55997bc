// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Branch, EigenSolution, SpectralError};
use crate::C64;

/// `sin(kz) + ik cos(kz)`, the one-particle mode obeying the left boundary.
pub fn mode_function(k: C64, z: f64) -> C64 {
    let kz = k * z;
    kz.sin() + C64::new(0.0, 1.0) * k * kz.cos()
}

/// Normalization `4k / (2dk(1+k²) + (k²−1) sin 2dk)`, making
/// `A²∫|η_k|² = 1` for real `k`.
pub fn mode_norm_squared(k: C64, d: f64) -> C64 {
    let one = C64::new(1.0, 0.0);
    k * 4.0 / (k * d * 2.0 * (one + k * k) + (k * k - one) * (k * d * 2.0).sin())
}

pub(crate) fn wrap(g: C64) -> C64 {
    let turns = (g.im / (2.0 * PI)).round();
    C64::new(g.re, g.im - 2.0 * PI * turns)
}

fn log_ratio(k: C64) -> C64 {
    ((k + 1.0) / (k - 1.0)).ln()
}

fn single_log_residual(k: C64, d: f64) -> C64 {
    wrap(C64::new(0.0, 2.0 * d) * k - log_ratio(k) * 2.0)
}

pub(crate) fn polish_single(seed: C64, d: f64) -> Result<C64, SpectralError> {
    let mut k = seed;
    for _ in 0..100 {
        let g = single_log_residual(k, d);
        let dg = C64::new(0.0, 2.0 * d) + 4.0 / (k * k - 1.0);
        let step = g / dg;
        k -= step;
        if step.norm() < 1e-15 * k.norm().max(1e-3) {
            break;
        }
    }
    let r = exp_residual(k, d);
    if r < 1e-9 && k.is_finite() {
        Ok(k)
    } else {
        Err(SpectralError::NoConvergence { seed: vec![seed], residual: r })
    }
}

/// `|e^{2ikd} − ((k+1)/(k−1))²|`.
pub(crate) fn exp_residual(k: C64, d: f64) -> f64 {
    let ratio = (k + 1.0) / (k - 1.0);
    ((C64::new(0.0, 2.0 * d) * k).exp() - ratio * ratio).norm()
}

/// The first `n_max` one-particle roots ordered by real part.
pub fn single_particle_modes(d: f64, n_max: u32) -> Result<Vec<EigenSolution>, SpectralError> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(SpectralError::InvalidArgument("length must be positive"));
    }
    if n_max == 0 {
        return Err(SpectralError::InvalidArgument("need at least one mode"));
    }
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let seed = C64::new(n as f64 * PI, 0.0) / C64::new(d, 2.0);
        let k = polish_single(seed, d)?;
        let r = exp_residual(k, d);
        out.push(EigenSolution::new(vec![k], Branch::Single(n), r, d, C64::new(0.0, 0.0)));
    }
    out.sort_by(|a, b| a.ks[0].re.total_cmp(&b.ks[0].re));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    #[test]
    fn lowest_mode_long_medium() {
        let modes = single_particle_modes(100.0, 3).unwrap();
        let k = modes[0].ks[0];
        assert!((k.re - 0.0314).abs() < 1e-4 && (k.im + 0.00063).abs() < 1e-4, "{k}");
        for m in &modes {
            assert!(m.residual < 1e-9);
            assert!(m.energy.im <= 0.0);
        }
    }

    #[test]
    fn roots_approach_box_values() {
        let d = 2000.0;
        let modes = single_particle_modes(d, 4).unwrap();
        for (n, m) in modes.iter().enumerate() {
            let box_k = (n + 1) as f64 * PI / d;
            assert!((m.ks[0].re - box_k).abs() < 1e-3 * box_k);
        }
    }

    #[test]
    fn normalization_matches_quadrature() {
        let d = 100.0;
        let norm = |k: C64| {
            let q = integrate(|z| mode_function(k, z).norm_sqr(), 0.0, d, 200);
            mode_norm_squared(k, d) * q
        };
        // Exact for real wavenumbers, and close for the weakly leaky roots.
        assert!((norm(C64::new(0.3, 0.0)) - 1.0).norm() < 1e-10);
        let k = single_particle_modes(d, 1).unwrap()[0].ks[0];
        assert!((norm(k) - 1.0).norm() < 0.05);
    }

    #[test]
    fn left_boundary_condition() {
        let k = C64::new(0.3, -0.02);
        let h = 1e-6;
        let deriv = (mode_function(k, h) - mode_function(k, -h)) / (2.0 * h);
        assert!((mode_function(k, 0.0) - C64::new(0.0, 1.0) * deriv).norm() < 1e-9);
    }
}
