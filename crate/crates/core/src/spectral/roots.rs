// Shadowed by the inherent methods whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use super::single::{exp_residual, wrap};
use super::wavefunction::is_trivial;
use super::{Branch, EigenSolution, SpectralError};
use crate::numeric::solve_complex;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
const ACCEPT: f64 = 1e-9;

fn ln_ratio(k: C64) -> C64 {
    ((k + 1.0) / (k - 1.0)).ln()
}

/// Wrapped log-form residuals `2ik_i d − log(RHS_i)` of the coupled equations.
fn log_residuals(ks: &[C64], d: f64, kappa: C64) -> Vec<C64> {
    let ik = I * kappa;
    (0..ks.len())
        .map(|i| {
            let k = ks[i];
            let mut g = I * k * (2.0 * d) - ln_ratio(k) * 2.0;
            for (j, &kj) in ks.iter().enumerate() {
                if j != i {
                    g -= (k - kj + ik).ln() + (k + kj + ik).ln()
                        - (k - kj - ik).ln()
                        - (k + kj - ik).ln();
                }
            }
            wrap(g)
        })
        .collect()
}

fn log_jacobian(ks: &[C64], d: f64, kappa: C64) -> Vec<C64> {
    let n = ks.len();
    let ik = I * kappa;
    let mut jac = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        let k = ks[i];
        let mut diag = I * (2.0 * d) + 4.0 / (k * k - 1.0);
        for (j, &kj) in ks.iter().enumerate() {
            if j == i {
                continue;
            }
            let (a, b, c, e) = (k - kj + ik, k + kj + ik, k - kj - ik, k + kj - ik);
            diag -= a.inv() + b.inv() - c.inv() - e.inv();
            jac[i * n + j] = -(-a.inv() + b.inv() + c.inv() - e.inv());
        }
        jac[i * n + i] = diag;
    }
    jac
}

/// Largest wrapped log-form residual of the coupled open-boundary equations.
pub fn residual(ks: &[C64], d: f64, kappa: C64) -> f64 {
    log_residuals(ks, d, kappa).iter().map(|g| g.norm()).fold(0.0, f64::max)
}

/// Residual of the sign-flipped pair `(s1·k1, s2·k2)` of a two-particle
/// solution. For bound pairs the factor that carries the gap is rebuilt from
/// `bound_gap`, so the residual keeps its meaning when the gap is far below
/// the rounding of `k1 − k2`.
pub fn family_residual(sol: &EigenSolution, signs: (f64, f64)) -> f64 {
    let (k1, k2) = (sol.ks[0] * signs.0, sol.ks[1] * signs.1);
    let Some(eps) = sol.bound_gap.filter(|_| sol.ks.len() == 2) else {
        return residual(&[k1, k2], sol.d, sol.kappa);
    };
    let ik = I * sol.kappa;
    // Stored so that `a − b + iκ = ε`; `k1`, `k2` as coefficients of `(a, b)`.
    let swapped = pair_swapped(sol);
    let (a, b) = if swapped { (sol.ks[1], sol.ks[0]) } else { (sol.ks[0], sol.ks[1]) };
    let (c1, c2) = if swapped { ((0.0, signs.0), (signs.1, 0.0)) } else { ((signs.0, 0.0), (0.0, signs.1)) };
    // `x·a + y·b + τ·iκ`, exact when it is `±ε`.
    let factor = |x: f64, y: f64, tau: f64| -> C64 {
        if x == 1.0 && y == -1.0 && tau == 1.0 {
            eps
        } else if x == -1.0 && y == 1.0 && tau == -1.0 {
            -eps
        } else {
            a * x + b * y + ik * tau
        }
    };
    let d = sol.d;
    let g = |own: (f64, f64), other: (f64, f64), k: C64| -> C64 {
        let mut v = I * k * (2.0 * d) - ln_ratio(k) * 2.0;
        let plus = (own.0 + other.0, own.1 + other.1);
        let minus = (own.0 - other.0, own.1 - other.1);
        v -= factor(minus.0, minus.1, 1.0).ln() + factor(plus.0, plus.1, 1.0).ln()
            - factor(minus.0, minus.1, -1.0).ln()
            - factor(plus.0, plus.1, -1.0).ln();
        wrap(v)
    };
    g(c1, c2, k1).norm().max(g(c2, c1, k2).norm())
}

/// `|e^{2ikd} − ((k+1)/(k−1))²|`, the non-interacting one-particle residual.
pub fn characteristic_residual(k: C64, d: f64) -> f64 {
    exp_residual(k, d)
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|g| g.norm()).fold(0.0, f64::max)
}

fn newton_general(seed: &[C64], d: f64, kappa: C64) -> Result<Vec<C64>, SpectralError> {
    let n = seed.len();
    let mut ks = seed.to_vec();
    let mut g = log_residuals(&ks, d, kappa);
    let mut norm = max_norm(&g);
    for _ in 0..200 {
        if norm < 1e-14 {
            break;
        }
        let mut jac = log_jacobian(&ks, d, kappa);
        let mut step: Vec<C64> = g.iter().map(|v| -v).collect();
        if solve_complex(&mut jac, &mut step, n).is_none() {
            break;
        }
        let mut lambda = 1.0;
        let mut moved = false;
        while lambda > 1e-4 {
            let trial: Vec<C64> = ks.iter().zip(&step).map(|(k, s)| k + s * lambda).collect();
            let tg = log_residuals(&trial, d, kappa);
            let tn = max_norm(&tg);
            if tn.is_finite() && tn < norm {
                ks = trial;
                g = tg;
                norm = tn;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        let scale = ks.iter().map(|k| k.norm()).fold(1e-3, f64::max);
        if !moved || max_norm(&step) * lambda < 1e-15 * scale {
            break;
        }
    }
    if norm < ACCEPT && ks.iter().all(|k| k.is_finite()) {
        Ok(ks)
    } else {
        Err(SpectralError::NoConvergence { seed: seed.to_vec(), residual: norm })
    }
}

/// Residual of a bound pair evaluated with the exact gap `ε = k1 − k2 + iκ`.
fn pair_residual(k1: C64, k2: C64, eps: C64, d: f64, kappa: C64) -> f64 {
    let ik = I * kappa;
    let big_k = k1 + k2;
    let t = eps / (eps - ik * 2.0);
    let com = ((big_k + ik) / (big_k - ik)).ln();
    let g1 = wrap(I * k1 * (2.0 * d) - ln_ratio(k1) * 2.0 - t.ln() - com);
    let g2 = wrap(I * k2 * (2.0 * d) - ln_ratio(k2) * 2.0 + t.ln() - com);
    g1.norm().max(g2.norm())
}

/// Newton in pair coordinates `(K = k1 + k2, ε = k1 − k2 + iκ)`, which keeps the
/// vanishing gap of a tightly bound pair at full relative precision.
fn newton_pair(
    big_k0: C64,
    eps0: C64,
    d: f64,
    kappa: C64,
) -> Result<(C64, C64, C64), SpectralError> {
    let ik = I * kappa;
    let split = |big_k: C64, eps: C64| ((big_k + eps - ik) * 0.5, (big_k - eps + ik) * 0.5);
    let funcs = |big_k: C64, eps: C64| {
        let (k1, k2) = split(big_k, eps);
        let f1 = wrap(
            I * big_k * (2.0 * d)
                - ln_ratio(k1) * 2.0
                - ln_ratio(k2) * 2.0
                - ((big_k + ik) / (big_k - ik)).ln() * 2.0,
        );
        let r = (k1 - 1.0) / (k1 + 1.0);
        let p = (I * k1 * (2.0 * d)).exp() * r * r * (eps - ik * 2.0) * (big_k - ik) / (big_k + ik);
        (f1, eps - p, p, k1, k2)
    };
    let (mut big_k, mut eps) = (big_k0, eps0);
    for _ in 0..200 {
        let (f1, f2, p, k1, k2) = funcs(big_k, eps);
        let a1 = 4.0 / (k1 * k1 - 1.0);
        let a2 = 4.0 / (k2 * k2 - 1.0);
        let j11 = I * (2.0 * d) + (a1 + a2) * 0.5 - ((big_k + ik).inv() - (big_k - ik).inv()) * 2.0;
        let j12 = (a1 - a2) * 0.5;
        let half_dlnp = (I * (2.0 * d) + a1) * 0.5;
        let j21 = -p * (half_dlnp + (big_k - ik).inv() - (big_k + ik).inv());
        let j22 = C64::new(1.0, 0.0) - p * (half_dlnp + (eps - ik * 2.0).inv());
        let det = j11 * j22 - j12 * j21;
        if det.norm() == 0.0 || !det.is_finite() {
            break;
        }
        let dk = -(f1 * j22 - j12 * f2) / det;
        let de = -(j11 * f2 - j21 * f1) / det;
        big_k += dk;
        eps += de;
        if !big_k.is_finite() || !eps.is_finite() {
            break;
        }
        if dk.norm() < 1e-15 * big_k.norm().max(1e-3) && de.norm() <= 1e-14 * eps.norm() {
            break;
        }
    }
    let (k1, k2) = split(big_k, eps);
    let r = pair_residual(k1, k2, eps, d, kappa);
    if r < ACCEPT {
        Ok((k1, k2, eps))
    } else {
        Err(SpectralError::NoConvergence { seed: vec![split(big_k0, eps0).0, split(big_k0, eps0).1], residual: r })
    }
}

fn mode_index(k: C64, d: f64) -> u32 {
    // Open-boundary roots sit near nπ/(d + 2i), whose real part is nπd/(d² + 4).
    ((k.re * (d * d + 4.0) / (PI * d)).round().max(1.0)) as u32
}

fn classify_bound(big_k: C64, d: f64) -> Branch {
    let half = big_k.re * 0.5;
    let x_one = half * d / PI;
    let x_two = half * SQRT_2 * d / PI;
    let n_one = x_one.round().max(1.0);
    let n_two = x_two.round().max(1.0);
    let e_one = (x_one - n_one).abs();
    let e_two = (x_two - n_two).abs();
    if (e_one - e_two).abs() < 0.05 {
        Branch::BoundAmbiguous(n_one as u32, n_two as u32)
    } else if e_one < e_two {
        Branch::BoundTypeI(n_one as u32)
    } else {
        Branch::BoundTypeII(n_two as u32)
    }
}

fn check_distinct(ks: &[C64]) -> Result<(), SpectralError> {
    let tiny = 1e-8;
    for (i, a) in ks.iter().enumerate() {
        if a.norm() < tiny {
            return Err(SpectralError::ConvergedToTrivial { ks: ks.to_vec() });
        }
        for b in &ks[i + 1..] {
            if (a - b).norm() < tiny || (a + b).norm() < tiny {
                return Err(SpectralError::ConvergedToTrivial { ks: ks.to_vec() });
            }
        }
    }
    Ok(())
}

fn validate(d: f64, kappa: C64) -> Result<(), SpectralError> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(SpectralError::InvalidArgument("length must be positive"));
    }
    if !kappa.is_finite() {
        return Err(SpectralError::InvalidArgument("interaction must be finite"));
    }
    Ok(())
}

/// Whether a seed lies close to the pole `k1 − k2 = ∓iκ` of a bound pair.
/// Returns the orientation to use (`true` means swap the pair).
fn bound_orientation(seed: (C64, C64), kappa: C64) -> Option<bool> {
    if kappa.norm() == 0.0 {
        return None;
    }
    let q = seed.0 - seed.1;
    let ik = I * kappa;
    let near = 0.25 * kappa.norm();
    if (q + ik).norm() < near {
        Some(false)
    } else if (q - ik).norm() < near {
        Some(true)
    } else {
        None
    }
}

fn solve_pair_bound(
    d: f64,
    kappa: C64,
    big_k: C64,
    eps: C64,
    swapped: bool,
) -> Result<EigenSolution, SpectralError> {
    let (k1, k2, eps) = newton_pair(big_k, eps, d, kappa)?;
    let r = pair_residual(k1, k2, eps, d, kappa);
    let ks = if swapped { vec![k2, k1] } else { vec![k1, k2] };
    check_distinct(&ks)?;
    let mut sol = EigenSolution::new(ks, classify_bound(k1 + k2, d), r, d, kappa);
    sol.bound_gap = Some(eps);
    if is_trivial(&sol) {
        return Err(SpectralError::ConvergedToTrivial { ks: sol.ks });
    }
    Ok(sol)
}

/// For a bound pair, whether `ks` is stored as `(b, a)` with `a − b ≈ −iκ`.
pub(crate) fn pair_swapped(sol: &EigenSolution) -> bool {
    let ik = I * sol.kappa;
    (sol.ks[0] - sol.ks[1] + ik).norm() > (sol.ks[1] - sol.ks[0] + ik).norm()
}

/// Polishes a two-particle root pair from `seed`.
///
/// Seeds near `k1 − k2 = ∓iκ` are solved in pair coordinates so that tightly
/// bound pairs keep their exponentially small gap. The pair is returned in the
/// seed's order and `bound_gap` holds `a − b + iκ` for the orientation with
/// `a − b ≈ −iκ`.
pub fn two_particle_roots(
    d: f64,
    kappa: C64,
    seed: (C64, C64),
) -> Result<EigenSolution, SpectralError> {
    validate(d, kappa)?;
    check_distinct(&[seed.0, seed.1])
        .map_err(|_| SpectralError::InvalidArgument("seed lies on a trivial manifold"))?;
    if let Some(swapped) = bound_orientation(seed, kappa) {
        let (a, b) = if swapped { (seed.1, seed.0) } else { seed };
        let eps = a - b + I * kappa;
        // Start the gap from zero: the pole itself is the natural initial guess.
        let eps0 = if eps.norm() < 0.05 * kappa.norm() { C64::new(0.0, 0.0) } else { eps };
        if let Ok(sol) = solve_pair_bound(d, kappa, a + b, eps0, swapped) {
            return Ok(sol);
        }
        if eps0 != eps {
            if let Ok(sol) = solve_pair_bound(d, kappa, a + b, eps, swapped) {
                return Ok(sol);
            }
        }
    }
    let ks = newton_general(&[seed.0, seed.1], d, kappa)?;
    finish_general(ks, d, kappa)
}

fn finish_general(ks: Vec<C64>, d: f64, kappa: C64) -> Result<EigenSolution, SpectralError> {
    check_distinct(&ks)?;
    let r = residual(&ks, d, kappa);
    let branch = match ks.len() {
        2 => {
            let (m, n) = (mode_index(ks[0], d), mode_index(ks[1], d));
            if kappa.norm() > 0.0 && (ks[0] - ks[1]).norm() > 0.0 && bound_orientation((ks[0], ks[1]), kappa).is_some() {
                classify_bound(ks[0] + ks[1], d)
            } else {
                Branch::Fermionized(m.min(n), m.max(n))
            }
        }
        _ => Branch::ManyBody,
    };
    let sol = EigenSolution::new(ks, branch, r, d, kappa);
    if is_trivial(&sol) {
        return Err(SpectralError::ConvergedToTrivial { ks: sol.ks });
    }
    Ok(sol)
}

/// Polishes an `n`-particle root set (`n` is 2 or 3).
pub fn many_body_roots(
    n: usize,
    d: f64,
    kappa: C64,
    seeds: &[C64],
) -> Result<EigenSolution, SpectralError> {
    validate(d, kappa)?;
    if !(2..=3).contains(&n) {
        return Err(SpectralError::InvalidArgument("particle number must be 2 or 3"));
    }
    if seeds.len() != n {
        return Err(SpectralError::DimensionMismatch { ks: seeds.len(), zs: n });
    }
    if n == 2 {
        return two_particle_roots(d, kappa, (seeds[0], seeds[1]));
    }
    check_distinct(seeds)
        .map_err(|_| SpectralError::InvalidArgument("seed lies on a trivial manifold"))?;
    let ks = newton_general(seeds, d, kappa)?;
    finish_general(ks, d, kappa)
}

/// Tracks `start` along `kappa_path`, polishing each point from a secant
/// prediction. The branch label of `start` is kept throughout.
pub fn root_continuation(
    d: f64,
    kappa_path: &[C64],
    start: &EigenSolution,
) -> Result<Vec<EigenSolution>, SpectralError> {
    validate(d, start.kappa)?;
    if !(start.residual < ACCEPT) {
        return Err(SpectralError::InvalidArgument("start is not a converged solution"));
    }
    let n = start.ks.len();
    let mut out: Vec<EigenSolution> = Vec::with_capacity(kappa_path.len());
    let mut prev = start.clone();
    let mut prev_prev: Option<EigenSolution> = None;
    for (index, &kappa) in kappa_path.iter().enumerate() {
        validate(d, kappa)?;
        let predicted: Vec<C64> = match &prev_prev {
            Some(pp) if (prev.kappa - pp.kappa).norm() > 0.0 => {
                let s = (kappa - prev.kappa) / (prev.kappa - pp.kappa);
                prev.ks.iter().zip(&pp.ks).map(|(a, b)| a + (a - b) * s).collect()
            }
            _ => prev.ks.clone(),
        };
        let mut sol = match (n, prev.bound_gap) {
            (2, Some(gap)) => {
                let swapped = pair_swapped(&prev);
                let eps_pred = match prev_prev.as_ref().and_then(|pp| pp.bound_gap) {
                    Some(g) if g.norm() > 0.0 => gap * (gap / g),
                    _ => gap,
                };
                let big_k = predicted[0] + predicted[1];
                solve_pair_bound(d, kappa, big_k, eps_pred, swapped)
                    .or_else(|_| solve_pair_bound(d, kappa, big_k, gap, swapped))?
            }
            (2, None) => {
                let ks = newton_general(&predicted, d, kappa)?;
                finish_general(ks, d, kappa)?
            }
            (1, _) => {
                let k = super::single::polish_single(predicted[0], d)?;
                EigenSolution::new(vec![k], start.branch, exp_residual(k, d), d, kappa)
            }
            _ => {
                let ks = newton_general(&predicted, d, kappa)?;
                finish_general(ks, d, kappa)?
            }
        };
        let predicted_move = predicted
            .iter()
            .zip(&prev.ks)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            .max((kappa - prev.kappa).norm())
            .max(1e-12);
        let actual = sol
            .ks
            .iter()
            .zip(&predicted)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if actual > 10.0 * predicted_move {
            return Err(SpectralError::BranchJump { index, kappa });
        }
        sol.branch = start.branch;
        prev_prev = Some(core::mem::replace(&mut prev, sol.clone()));
        out.push(sol);
    }
    Ok(out)
}
