use alloc::vec;
use alloc::vec::Vec;

use super::single::mode_function;
use super::{EigenSolution, SpectralError};
use crate::numeric::determinant;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Two-particle amplitude sampled on a shared grid, stored row-major with
/// `values[i * n + j] = φ(grid[i], grid[j])`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WavefunctionGrid2D {
    pub grid: Vec<f64>,
    pub values: Vec<C64>,
}

impl WavefunctionGrid2D {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.grid.len() + j]
    }
}

/// Scattering phase `t = (k1 − k2 + iκ)/(k1 − k2 − iκ)`, rebuilt from the
/// stored gap when the pair is bound.
fn scattering_phase(sol: &EigenSolution) -> C64 {
    let ik = I * sol.kappa;
    match sol.bound_gap {
        Some(eps) if super::roots::pair_swapped(sol) => (ik * 2.0 - eps) / -eps,
        Some(eps) => eps / (eps - ik * 2.0),
        None => {
            let q = sol.ks[0] - sol.ks[1];
            (q + ik) / (q - ik)
        }
    }
}

/// The two components of the compact form on the ordered region `z1 ≤ z2`.
fn compact_parts(sol: &EigenSolution, t: C64, z1: f64, z2: f64) -> (C64, C64) {
    let (k1, k2, d) = (sol.ks[0], sol.ks[1], sol.d);
    let a = C64::new(4.0, 0.0) / (k1 - 1.0) * (I * k2 * d).exp() / (k2 + 1.0)
        * mode_function(k1, z1)
        * mode_function(k2, d - z2);
    let b = C64::new(4.0, 0.0) / (t * (k2 - 1.0)) * (I * k1 * d).exp() / (k1 + 1.0)
        * mode_function(k2, z1)
        * mode_function(k1, d - z2);
    (a, b)
}

/// Amplitude at `z1 ≤ z2` with a cancellation scale. Bound pairs go through the
/// plane-wave sum with exact gap factors, since the two compact components
/// cancel to exponential accuracy there.
fn pair_amplitude(sol: &EigenSolution, t: C64, z1: f64, z2: f64) -> (C64, f64) {
    if let Some(gap) = gap_of(sol) {
        if let Ok(v) = gaudin_sum(&sol.ks, sol.kappa, Some(gap), &[z1, z2]) {
            return v;
        }
    }
    let (a, b) = compact_parts(sol, t, z1, z2);
    (a + b, a.norm() + b.norm())
}

/// Coarse-grid test for a solution whose amplitude cancels everywhere.
pub(crate) fn is_trivial(sol: &EigenSolution) -> bool {
    let n = 12;
    let step = sol.d / (n - 1) as f64;
    match sol.ks.len() {
        2 => {
            let t = scattering_phase(sol);
            let mut peak = 0.0f64;
            let mut scale = 0.0f64;
            for i in 0..n {
                for j in i..n {
                    let (v, sc) = pair_amplitude(sol, t, i as f64 * step, j as f64 * step);
                    peak = peak.max(v.norm());
                    scale = scale.max(sc);
                }
            }
            !(peak >= 1e-10 * scale) || scale == 0.0
        }
        3 => {
            let mut peak = 0.0f64;
            let mut scale = 0.0f64;
            for i in 0..n {
                for j in i..n {
                    for l in j..n {
                        let zs = [i as f64 * step, j as f64 * step, l as f64 * step];
                        match gaudin_sum(&sol.ks, sol.kappa, None, &zs) {
                            Ok((v, s)) => {
                                peak = peak.max(v.norm());
                                scale = scale.max(s);
                            }
                            Err(_) => return true,
                        }
                    }
                }
            }
            !(peak >= 1e-10 * scale) || scale == 0.0
        }
        _ => false,
    }
}

/// Evaluates the two-particle eigenfunction on `grid × grid`, symmetric by
/// construction and scaled to unit maximum modulus.
pub fn two_particle_wavefunction(
    sol: &EigenSolution,
    grid: &[f64],
) -> Result<WavefunctionGrid2D, SpectralError> {
    if sol.ks.len() != 2 {
        return Err(SpectralError::DimensionMismatch { ks: sol.ks.len(), zs: 2 });
    }
    if grid.is_empty() || grid.iter().any(|z| !z.is_finite()) {
        return Err(SpectralError::InvalidArgument("grid must be non-empty and finite"));
    }
    let n = grid.len();
    let t = scattering_phase(sol);
    let mut values = vec![C64::new(0.0, 0.0); n * n];
    let mut peak = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let (lo, hi) = if grid[i] <= grid[j] { (grid[i], grid[j]) } else { (grid[j], grid[i]) };
            let (v, sc) = pair_amplitude(sol, t, lo, hi);
            values[i * n + j] = v;
            values[j * n + i] = v;
            peak = peak.max(v.norm());
            scale = scale.max(sc);
        }
    }
    if !(peak >= 1e-10 * scale) || !peak.is_finite() {
        return Err(SpectralError::ConvergedToTrivial { ks: sol.ks.clone() });
    }
    for v in &mut values {
        *v /= peak;
    }
    Ok(WavefunctionGrid2D { grid: grid.to_vec(), values })
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = grid[i + 1] - grid[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// `∫|φ(z,z)|² dz / ∫∫|φ|²`, the weight carried on the coincidence line.
pub fn diagonal_fraction(wf: &WavefunctionGrid2D) -> f64 {
    let n = wf.len();
    let w = trapezoid_weights(&wf.grid);
    let mut diag = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        diag += w[i] * wf.at(i, i).norm_sqr();
        for j in 0..n {
            total += w[i] * w[j] * wf.at(i, j).norm_sqr();
        }
    }
    if total > 0.0 {
        diag / total
    } else {
        0.0
    }
}

/// `Π_j 1/(k_j − 1) · det[η_{k_j}(z_l)]`, the amplitude of impenetrable particles.
pub fn hardcore_wavefunction(ks: &[C64], zs: &[f64]) -> Result<C64, SpectralError> {
    let n = ks.len();
    if n != zs.len() {
        return Err(SpectralError::DimensionMismatch { ks: n, zs: zs.len() });
    }
    if n == 0 {
        return Err(SpectralError::InvalidArgument("need at least one particle"));
    }
    let mut m = Vec::with_capacity(n * n);
    for &k in ks {
        for &z in zs {
            m.push(mode_function(k, z));
        }
    }
    let prefactor: C64 = ks.iter().map(|k| (k - 1.0).inv()).product();
    Ok(prefactor * determinant(m, n))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn is_pole(x: C64, scale: f64) -> bool {
    !(x.norm() > 1e-14 * scale)
}

/// Exact pair gap of a bound solution: index of the member `a` with
/// `a − b ≈ −iκ`, and `ε = a − b + iκ`.
fn gap_of(sol: &EigenSolution) -> Option<(usize, C64)> {
    match (sol.ks.len(), sol.bound_gap) {
        (2, Some(eps)) => Some((if super::roots::pair_swapped(sol) { 1 } else { 0 }, eps)),
        _ => None,
    }
}

/// `x = Σ c_i k_i` together with `x + s·iκ`, where the second is rebuilt from
/// the exact gap whenever `x` is `±(a − b)` of a bound pair.
fn shifted(ks: &[C64], c: &[f64], s: f64, ik: C64, gap: Option<(usize, C64)>) -> (C64, C64) {
    if let Some((ia, eps)) = gap {
        let (ca, cb) = (c[ia], c[1 - ia]);
        if ca != 0.0 && ca == -cb {
            return ((eps - ik) * ca, eps * ca + ik * (s - ca));
        }
    }
    let x: C64 = ks.iter().zip(c).map(|(k, ci)| k * *ci).sum();
    (x, x + ik * s)
}

/// Full sign-and-permutation sum on ordered coordinates. Also returns the sum of
/// term magnitudes as a cancellation scale.
fn gaudin_sum(
    ks: &[C64],
    kappa: C64,
    gap: Option<(usize, C64)>,
    zs: &[f64],
) -> Result<(C64, f64), SpectralError> {
    let n = ks.len();
    let ik = I * kappa;
    let scale = ks.iter().map(|k| k.norm()).fold(0.0, f64::max).max(kappa.norm());
    let perms = permutations(n);
    let mut total = C64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    let mut c = [0.0; 3];
    for mask in 0..(1usize << n) {
        let sign = |m: usize| if mask >> m & 1 == 1 { -1.0 } else { 1.0 };
        let mut a = C64::new(1.0, 0.0);
        for m in 0..n {
            let km = ks[m] * sign(m);
            if is_pole(km, scale) {
                return Err(SpectralError::CoefficientPole);
            }
            a *= C64::new(1.0, 0.0) - km.inv();
            for l in m + 1..n {
                c.fill(0.0);
                c[m] = sign(m);
                c[l] = sign(l);
                let (x, num) = shifted(ks, &c[..n], -1.0, ik, gap);
                if is_pole(x, scale) {
                    return Err(SpectralError::CoefficientPole);
                }
                a *= num / x;
            }
        }
        for p in &perms {
            let mut b = C64::new(1.0, 0.0);
            let mut phase = C64::new(0.0, 0.0);
            for i in 0..n {
                phase += ks[p[i]] * (sign(p[i]) * zs[i]);
                for j in i + 1..n {
                    c.fill(0.0);
                    c[p[i]] = sign(p[i]);
                    c[p[j]] = -sign(p[j]);
                    let (x, num) = shifted(ks, &c[..n], 1.0, ik, gap);
                    if is_pole(x, scale) {
                        return Err(SpectralError::CoefficientPole);
                    }
                    b *= num / x;
                }
            }
            let term = a * b * (I * phase).exp();
            magnitude += term.norm();
            total += term;
        }
    }
    Ok((total, magnitude))
}

/// Coordinate-space Bethe amplitude for up to three particles. Coordinates
/// are sorted first, which continues the ordered-region formula symmetrically.
pub fn gaudin_wavefunction(sol: &EigenSolution, zs: &[f64]) -> Result<C64, SpectralError> {
    let n = sol.ks.len();
    if n != zs.len() {
        return Err(SpectralError::DimensionMismatch { ks: n, zs: zs.len() });
    }
    if n == 0 || n > 3 {
        return Err(SpectralError::InvalidArgument("supports one to three particles"));
    }
    let mut ordered = zs.to_vec();
    ordered.sort_by(f64::total_cmp);
    gaudin_sum(&sol.ks, sol.kappa, gap_of(sol), &ordered).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{
        bound_pair_seed, bound_seed, many_body_roots, root_continuation, single_particle_modes, two_particle_roots,
        BoundType,
    };

    fn modes(d: f64, n: u32) -> Vec<C64> {
        single_particle_modes(d, n).unwrap().into_iter().map(|s| s.ks[0]).collect()
    }

    fn fermionized(d: f64, kappa: f64) -> EigenSolution {
        let m = modes(d, 2);
        two_particle_roots(d, C64::new(kappa, 0.0), (m[0], m[1])).unwrap()
    }

    fn compact(sol: &EigenSolution, z1: f64, z2: f64) -> C64 {
        let t = scattering_phase(sol);
        let (a, b) = compact_parts(sol, t, z1.min(z2), z1.max(z2));
        a + b
    }

    #[test]
    fn cusp_condition() {
        for sol in [fermionized(30.0, 0.4), fermionized(30.0, -0.3)] {
            let h = 1e-5;
            for z in [3.0, 11.0, 20.0] {
                let dz2 = (compact(&sol, z, z + 2.0 * h) - compact(&sol, z, z)) / (2.0 * h);
                let dz1 = (compact(&sol, z + h, z + h) - compact(&sol, z - h, z + h)) / (2.0 * h);
                // One-sided derivatives taken just above the diagonal.
                let lhs = dz2 - dz1;
                let rhs = sol.kappa * compact(&sol, z, z);
                assert!((lhs - rhs).norm() < 1e-3 * rhs.norm().max(1e-3), "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn robin_boundaries() {
        let sol = fermionized(30.0, 0.7);
        let h = 1e-6;
        let z = 13.0;
        let left = compact(&sol, 0.0, z) - I * (compact(&sol, h, z) - compact(&sol, 0.0, z)) / h;
        let right =
            compact(&sol, z, sol.d) + I * (compact(&sol, z, sol.d) - compact(&sol, z, sol.d - h)) / h;
        let peak = compact(&sol, 10.0, 20.0).norm();
        assert!(left.norm() < 1e-4 * peak && right.norm() < 1e-4 * peak);
    }

    #[test]
    fn repulsive_diagonal_suppressed() {
        let d = 30.0;
        let grid: Vec<f64> = (0..=60).map(|i| i as f64 * d / 60.0).collect();
        let wf = two_particle_wavefunction(&fermionized(d, 300.0), &grid).unwrap();
        let diag = (0..grid.len()).map(|i| wf.at(i, i).norm()).fold(0.0, f64::max);
        assert!(diag < 1e-2, "{diag}");
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                assert_eq!(wf.at(i, j), wf.at(j, i));
            }
        }
    }

    #[test]
    fn bound_pair_sits_on_diagonal() {
        let d = 60.0;
        let kappa = 2.0;
        let sol = two_particle_roots(d, C64::new(-kappa, 0.0), bound_pair_seed(d, kappa, 3)).unwrap();
        let grid: Vec<f64> = (0..=240).map(|i| i as f64 * d / 240.0).collect();
        let wf = two_particle_wavefunction(&sol, &grid).unwrap();
        let n = grid.len();
        let diag: Vec<f64> = (0..n).map(|i| wf.at(i, i).norm()).collect();
        let peaks: Vec<usize> =
            (1..n - 1).filter(|&i| diag[i] > diag[i - 1] && diag[i] >= diag[i + 1]).collect();
        assert_eq!(peaks.len(), 3);
        let i = peaks[1];
        for j in 0..n {
            assert!(wf.at(i, j).norm() <= diag[i] + 1e-12);
        }
        // Across the diagonal the amplitude decays as exp(-|κ||z1 - z2|/2).
        let r = wf.at(i - 4, i + 4).norm() / wf.at(i, i).norm();
        let expected = (-0.5 * kappa * (grid[i + 4] - grid[i - 4])).exp();
        assert!((r / expected - 1.0).abs() < 1e-3, "{r} vs {expected}");
    }

    #[test]
    fn diagonal_weight_grows_with_attraction() {
        let d = 30.0;
        let start =
            two_particle_roots(d, C64::new(-0.4, 0.0), bound_seed(d, 0.4, 1, BoundType::II)).unwrap();
        let path: Vec<C64> = (1..=15).map(|i| C64::new(-0.4 - 0.04 * i as f64, 0.0)).collect();
        let track = root_continuation(d, &path, &start).unwrap();
        let grid: Vec<f64> = (0..=150).map(|i| i as f64 * d / 150.0).collect();
        let mut last = diagonal_fraction(&two_particle_wavefunction(&start, &grid).unwrap());
        for s in &track {
            let f = diagonal_fraction(&two_particle_wavefunction(s, &grid).unwrap());
            assert!(f > last, "{f} <= {last}");
            last = f;
        }
    }

    fn leibniz(ks: &[C64], zs: &[f64]) -> C64 {
        let n = ks.len();
        let mut total = C64::new(0.0, 0.0);
        for p in permutations(n) {
            let mut inversions = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if p[i] > p[j] {
                        inversions += 1;
                    }
                }
            }
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            let mut term = C64::new(sign, 0.0);
            for j in 0..n {
                term *= mode_function(ks[j], zs[p[j]]);
            }
            total += term;
        }
        total * ks.iter().map(|k| (k - 1.0).inv()).product::<C64>()
    }

    #[test]
    fn hardcore_matches_expansion() {
        let ks = modes(30.0, 3);
        for zs in [[1.0, 7.5, 22.0], [4.0, 4.0, 19.0], [28.0, 2.0, 15.5]] {
            let v = hardcore_wavefunction(&ks, &zs).unwrap();
            let oracle = leibniz(&ks, &zs);
            assert!((v - oracle).norm() < 1e-12 * oracle.norm().max(1.0));
        }
        assert!(hardcore_wavefunction(&ks, &[4.0, 4.0, 19.0]).unwrap().norm() < 1e-12);
        assert!(matches!(
            hardcore_wavefunction(&ks, &[1.0]),
            Err(SpectralError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hardcore_is_strong_interaction_limit() {
        let d = 30.0;
        let ks = modes(d, 2);
        let sol = fermionized(d, 1e6);
        let pts = [(2.0, 9.0), (5.0, 25.0), (13.0, 14.0)];
        let ratios: Vec<C64> =
            pts.iter().map(|&(a, b)| compact(&sol, a, b) / hardcore_wavefunction(&ks, &[a, b]).unwrap()).collect();
        for r in &ratios {
            assert!((r / ratios[0] - 1.0).norm() < 1e-4);
        }
    }

    #[test]
    fn gaudin_matches_compact_form() {
        let sol = fermionized(30.0, 0.6);
        let mut first: Option<C64> = None;
        for (a, b) in [(1.0, 2.0), (3.0, 17.0), (25.0, 8.0), (12.0, 29.5)] {
            let r = gaudin_wavefunction(&sol, &[a, b]).unwrap() / compact(&sol, a, b);
            match first {
                None => first = Some(r),
                Some(f) => assert!((r / f - 1.0).norm() < 1e-8, "{r} vs {f}"),
            }
        }
    }

    #[test]
    fn gaudin_three_body_cusp_and_boundary() {
        let d = 30.0;
        let m = modes(d, 3);
        let kappa = C64::new(0.5, 0.0);
        let sol = many_body_roots(3, d, kappa, &[m[0], m[1], m[2]]).unwrap();
        let f = |a: f64, b: f64, c: f64| gaudin_wavefunction(&sol, &[a, b, c]).unwrap();
        let h = 1e-5;
        let (x, z, w) = (5.0, 12.0, 21.0);
        // Cusp between the two particles meeting at z: move both just above.
        let above = |s: f64| f(x, z, z + s);
        let d2 = (above(2.0 * h) - above(0.0)) / (2.0 * h);
        let d1 = (f(x, z + h, z + h) - f(x, z - h, z + h)) / (2.0 * h);
        let rhs = kappa * f(x, z, z);
        assert!((d2 - d1 - rhs).norm() < 1e-3 * rhs.norm(), "{} vs {rhs}", d2 - d1);
        let left = f(0.0, z, w) - I * (f(h, z, w) - f(0.0, z, w)) / h;
        assert!(left.norm() < 1e-4 * f(x, z, w).norm());
    }

    #[test]
    fn gaudin_pole_reported() {
        let sol = EigenSolution::new(
            vec![C64::new(0.2, 0.0), C64::new(-0.2, 0.0)],
            crate::spectral::Branch::ManyBody,
            0.0,
            30.0,
            C64::new(1.0, 0.0),
        );
        assert_eq!(gaudin_wavefunction(&sol, &[1.0, 2.0]), Err(SpectralError::CoefficientPole));
    }
}
