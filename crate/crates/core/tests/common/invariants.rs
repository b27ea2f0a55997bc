//! Randomized invariant checks. Each runs a deterministic proptest runner and
//! returns the shrunk counterexample on failure, so the same checks serve the
//! property tests and the acceptance report.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::fmt::Debug;

use nlse_core::linear::{
    analytic_spectrum, bandgap_coefficients, lossy_mass, optical_depth_for_length, shoot_bandgap, transmission_reflection,
    LinearError, SusceptibilityParams,
};
use nlse_core::ode::Tolerance;
use nlse_core::params::derive_dimensionless;
use nlse_core::quantum::{boundary_currents, GridSpec, Propagator, QuantumState, Scheme};
use nlse_core::semiclassical::{steady_state_with, ShootingOptions, SemiclassicalError};
use nlse_core::spectral::{
    bound_pair_seed, diagonal_fraction, family_residual, root_continuation, single_particle_modes, two_particle_roots,
    two_particle_wavefunction, EigenSolution,
};
use nlse_core::{DimensionlessParams, PhysicalParams, C64};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn run<S>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S: Strategy,
    S::Value: Debug,
{
    let config = Config { cases, failure_persistence: None, max_global_rejects: 64 * cases, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn lossless(d: f64, kappa: f64, delta: f64, alpha: f64) -> DimensionlessParams {
    DimensionlessParams::lossless(d, C64::new(kappa, 0.0), delta, C64::new(alpha, 0.0))
}

// --- parameters -------------------------------------------------------------

fn physical() -> impl Strategy<Value = PhysicalParams> {
    (0.01..0.5f64, -60.0..-1.0f64, -20.0..20.0f64, 1.0..2000.0f64, 0.1..20.0f64, 0.0..0.2f64).prop_map(
        |(g1d, d1, d2, od, om, g0)| PhysicalParams {
            gamma: 1.0,
            gamma1d_over_gamma: g1d,
            delta1_over_gamma: d1,
            delta2_over_gamma: d2,
            od,
            omega_over_gamma: om,
            gamma0_over_gamma: g0,
        },
    )
}

/// `d·|Δ1| = OD`, `Im κ ≤ 0`, and repeated derivation gives the same value.
pub fn parameter_round_trip(cases: u32) -> Result<(), String> {
    run(cases, (physical(), -1.0..1.0f64), |(phys, delta)| {
        let p = derive_dimensionless(&phys, delta, C64::new(1e-3, 0.0)).map_err(|e| fail(e.to_string()))?;
        let od = p.d * phys.delta1_over_gamma.abs();
        prop_assert!((od - phys.od).abs() <= 1e-12 * phys.od, "d|Δ1| = {od}, OD = {}", phys.od);
        prop_assert!(p.kappa.im <= 0.0, "κ = {}", p.kappa);
        let again = derive_dimensionless(&phys, delta, C64::new(1e-3, 0.0)).map_err(|e| fail(e.to_string()))?;
        prop_assert_eq!(p, again);
        Ok(())
    })
}

// --- linear -----------------------------------------------------------------

/// `|T|² + |R|² = 1` for the lossless closed form.
pub fn lossless_flux(cases: u32) -> Result<(), String> {
    run(cases, (1.0..300.0f64, -0.5..2.0f64), |(d, delta)| {
        match transmission_reflection(d, C64::new(0.5, 0.0), delta) {
            Ok((t, r)) => {
                let total = t.norm_sqr() + r.norm_sqr();
                prop_assert!((total - 1.0).abs() < 1e-10, "|T|²+|R|² = {total}");
                Ok(())
            }
            Err(LinearError::Antiresonance { .. }) => Err(TestCaseError::reject("antiresonance")),
            Err(e) => Err(fail(e.to_string())),
        }
    })
}

/// The peak of the sampled spectrum, refined by a three-point parabola,
/// lies within half a grid step of `(nπ/d)²`.
pub fn linear_peak_positions(cases: u32) -> Result<(), String> {
    run(cases, (20.0..200.0f64, 1u32..4, 0.0..1.0f64, 5usize..40), |(d, n, offset, per_width)| {
        let x = n as f64 * PI / d;
        let centre = x * x;
        let step = x.powi(3) / per_width as f64;
        // Stay within a third of the spacing to the neighbouring resonances.
        let reach = ((2 * n - 1) as f64 * (PI / d).powi(2) / (3.0 * step)).min(40.0) as i32;
        let deltas: Vec<f64> = (-reach..=reach).map(|i| centre + (i as f64 + offset - 0.5) * step).collect();
        let t = analytic_spectrum(&lossless(d, 0.0, centre, 1.0), &deltas, 0.0).map_err(|e| fail(e.to_string()))?;
        let col = t.column("transmission").ok_or_else(|| fail("no column".into()))?;
        let i = t.argmax("transmission").ok_or_else(|| fail("no peak".into()))?;
        prop_assert!(i > 0 && i + 1 < col.len(), "peak on the window edge");
        // Vertex of the parabola through the top sample and its neighbours.
        let (l, c, r) = (col[i - 1], col[i], col[i + 1]);
        let peak = deltas[i] + 0.5 * step * (l - r) / (l - 2.0 * c + r);
        prop_assert!((peak - centre).abs() <= 0.5 * step, "peak {peak} vs {centre}, step {step}");
        Ok(())
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 > f2 { (x1, f1) } else { (x2, f2) }
}

/// The band-gap medium and the lossy closed form agree on the peak
/// transmission of the first resonance within 5% once the detunings and
/// lengths are mapped onto each other.
pub fn bandgap_matches_closed_form(cases: u32) -> Result<(), String> {
    run(cases, (15.0..60.0f64, -40.0..-10.0f64, 0.3..0.9f64), |(d, delta1, ratio)| {
        let omega = ratio * delta1.abs();
        let scale = 2.0 * omega * omega / delta1.abs();
        let mut s = SusceptibilityParams::new(omega, delta1, 0.0, optical_depth_for_length(d, delta1));
        s.keep_free_phase = false;
        let m = lossy_mass(d, d / delta1.abs());
        let delta0 = (PI / d).powi(2);
        let width = (PI / d).powi(3);
        let closed = |x: f64| transmission_reflection(d, m, x).map(|(t, _)| t.norm_sqr()).unwrap_or(0.0);
        let gap = |x: f64| bandgap_coefficients(&s, scale * x).map(|(t, _)| t.norm_sqr()).unwrap_or(0.0);
        let (_, a) = golden_max(closed, delta0 - 2.0 * width, delta0 + 2.0 * width);
        let (_, b) = golden_max(gap, delta0 - 2.0 * width, delta0 + 2.0 * width);
        prop_assert!((a - b).abs() <= 0.05 * a, "closed form {a}, band gap {b}");
        Ok(())
    })
}

/// Transfer matrix and RK4 shooting agree on `T` and `R` to 1e-8.
pub fn transfer_matches_shooting(cases: u32) -> Result<(), String> {
    run(cases, (0.5..5.0f64, -20.0..-2.0f64, 0.0..0.1f64, 1.0..20.0f64, -3.0..2.0f64), |(omega, delta1, g0, length, x)| {
        let s = SusceptibilityParams::new(omega, delta1, g0, length);
        let (t, r) = match bandgap_coefficients(&s, x) {
            Ok(v) => v,
            Err(LinearError::SusceptibilityPole { .. }) => return Err(TestCaseError::reject("pole")),
            Err(e) => return Err(fail(e.to_string())),
        };
        let (ts, rs) = shoot_bandgap(&s, x, 20_000).map_err(|e| fail(e.to_string()))?;
        prop_assert!((t - ts).norm() < 1e-8 && (r - rs).norm() < 1e-8, "T {t} vs {ts}, R {r} vs {rs}");
        Ok(())
    })
}

// --- semiclassical ----------------------------------------------------------

/// Drive with a nonlinear shift of `shift` linewidths at the first resonance.
fn classical_params() -> impl Strategy<Value = DimensionlessParams> {
    (5.0..40.0f64, -0.05..0.05f64, 0.7..1.3f64, 0.0..1.0f64).prop_map(|(d, kappa, detune, shift)| {
        let gain = (d / (2.0 * PI)).powi(2);
        let intensity = shift * (PI / d).powi(3) / (2.0 * kappa.abs() * gain).max(1e-12);
        lossless(d, kappa, detune * (PI / d).powi(2), intensity.min(1.0).sqrt().max(1e-4))
    })
}

fn classical(p: &DimensionlessParams, opts: &ShootingOptions) -> Result<nlse_core::semiclassical::ClassicalField, TestCaseError> {
    match steady_state_with(p, opts) {
        Ok(f) => Ok(f),
        Err(SemiclassicalError::Bistable { .. }) => Err(TestCaseError::reject("bistable")),
        Err(e) => Err(fail(e.to_string())),
    }
}

/// `|Φ+|² − |Φ−|²` is constant along every stationary solution.
pub fn classical_current(cases: u32) -> Result<(), String> {
    run(cases, classical_params(), |p| {
        let f = classical(&p, &ShootingOptions::default())?;
        let j = f.current();
        let (lo, hi) = j.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let spread = (hi - lo) / p.alpha.norm_sqr();
        prop_assert!(spread < 1e-8, "current varies by {spread:e} of the drive");
        Ok(())
    })
}

/// Halving the integrator tolerance moves `|T|²` by less than 1e-6.
pub fn classical_tolerance_halving(cases: u32) -> Result<(), String> {
    run(cases, classical_params(), |p| {
        let base = ShootingOptions { grid_points: 2, ..ShootingOptions::default() };
        let tight = ShootingOptions {
            tolerance: Tolerance { rtol: 0.5 * base.tolerance.rtol, atol: 0.5 * base.tolerance.atol, ..base.tolerance },
            ..base
        };
        let a = classical(&p, &base)?.transmission();
        let b = classical(&p, &tight)?.transmission();
        prop_assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        Ok(())
    })
}

/// At vanishing drive the stationary transmission is the linear one.
pub fn classical_linear_limit(cases: u32) -> Result<(), String> {
    run(cases, (5.0..60.0f64, -1.0..1.0f64, 0.0..2.0f64, -0.2..2.0f64), |(d, kappa, beta, detune)| {
        let delta = detune * (PI / d).powi(2);
        let mut p = lossless(d, kappa, delta, 1e-7);
        p.m = lossy_mass(d, beta);
        let f = classical(&p, &ShootingOptions { grid_points: 2, ..ShootingOptions::default() })?;
        let (t, _) = match transmission_reflection(d, p.m, delta) {
            Ok(v) => v,
            Err(LinearError::Antiresonance { .. }) => return Err(TestCaseError::reject("antiresonance")),
            Err(e) => return Err(fail(e.to_string())),
        };
        prop_assert!((f.transmission() - t.norm_sqr()).abs() < 1e-6, "{} vs {}", f.transmission(), t.norm_sqr());
        Ok(())
    })
}

// --- spectral ---------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub enum PairKind {
    Scattering(u32, u32),
    Bound(u32),
}

#[derive(Debug, Clone, Copy)]
pub struct PairCase {
    pub d: f64,
    pub kappa: f64,
    pub kind: PairKind,
}

fn pair_case() -> impl Strategy<Value = PairCase> {
    let kind = prop_oneof![
        (1u32..4, 1u32..4).prop_filter_map("distinct modes", |(a, b)| (a < b).then_some(PairKind::Scattering(a, b))),
        (1u32..4).prop_map(PairKind::Bound),
    ];
    (5.0..80.0f64, 0.2..60.0f64, any::<bool>(), kind).prop_map(|(d, kd, attractive, kind)| {
        let attractive = attractive || matches!(kind, PairKind::Bound(_));
        let kappa = if attractive { -kd / d } else { kd / d };
        PairCase { d, kappa, kind }
    })
}

fn solve_pair(c: &PairCase) -> Option<EigenSolution> {
    let kappa = C64::new(c.kappa, 0.0);
    match c.kind {
        PairKind::Bound(m) => two_particle_roots(c.d, kappa, bound_pair_seed(c.d, c.kappa.abs(), m)).ok(),
        PairKind::Scattering(a, b) => {
            let free = single_particle_modes(c.d, b).ok()?;
            let seed = (free[a as usize - 1].ks[0], free[b as usize - 1].ks[0]);
            if let Ok(sol) = two_particle_roots(c.d, kappa, seed) {
                return Some(sol);
            }
            let steps = 20;
            let path: Vec<C64> = (1..=steps).map(|j| kappa * (j as f64 / steps as f64)).collect();
            let start = two_particle_roots(c.d, path[0], seed).ok()?;
            root_continuation(c.d, &path[1..], &start).ok()?.pop()
        }
    }
}

fn solved(c: &PairCase) -> Result<EigenSolution, TestCaseError> {
    solve_pair(c).ok_or_else(|| TestCaseError::reject("no root from this seed"))
}

/// Every returned root satisfies the coupled equations to 1e-9 and has
/// `Im E ≤ 0`; the same holds for the one-particle modes.
pub fn root_residuals(cases: u32) -> Result<(), String> {
    run(cases, pair_case(), |c| {
        let sol = solved(&c)?;
        prop_assert!(sol.residual < 1e-9, "residual {:e}", sol.residual);
        prop_assert!(sol.energy.im <= 0.0, "E = {}", sol.energy);
        for m in single_particle_modes(c.d, 3).map_err(|e| fail(e.to_string()))? {
            prop_assert!(m.residual < 1e-9, "mode residual {:e}", m.residual);
            prop_assert!(m.energy.im <= 0.0, "mode E = {}", m.energy);
        }
        Ok(())
    })
}

/// `(±k1, ±k2)` all solve the equations with the same energy.
pub fn sign_families(cases: u32) -> Result<(), String> {
    run(cases, pair_case(), |c| {
        let sol = solved(&c)?;
        let (k1, k2) = (sol.ks[0], sol.ks[1]);
        for (s1, s2) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            let ks = [k1 * s1, k2 * s2];
            let r = family_residual(&sol, (s1, s2));
            prop_assert!(r < 1e-9, "signs ({s1}, {s2}): residual {r:e}");
            let e: C64 = ks.iter().map(|k| k * k).sum();
            prop_assert!((e - sol.energy).norm() <= 1e-12 * sol.energy.norm(), "energy {e} vs {}", sol.energy);
        }
        Ok(())
    })
}

/// `(∂z2 − ∂z1)φ = κφ` just above the diagonal.
pub fn cusp_condition(cases: u32) -> Result<(), String> {
    run(cases, (pair_case(), 0.1..0.9f64), |(c, at)| {
        let sol = solved(&c)?;
        let h = 1e-5 * c.d;
        let z = at * c.d;
        let grid = [z - h, z, z + h, z + 2.0 * h];
        let wf = two_particle_wavefunction(&sol, &grid).map_err(|e| fail(e.to_string()))?;
        let lhs = (wf.at(1, 3) - wf.at(1, 1)) / (2.0 * h) - (wf.at(2, 2) - wf.at(0, 2)) / (2.0 * h);
        let rhs = sol.kappa * wf.at(1, 1);
        // Scale of the one-sided derivatives, for points where φ(z, z) is small.
        let slope = (sol.ks[0].norm() + sol.ks[1].norm() + c.kappa.abs()) * wf.at(1, 2).norm().max(wf.at(1, 1).norm());
        prop_assert!((lhs - rhs).norm() <= 1e-3 * rhs.norm().max(slope), "lhs {lhs}, rhs {rhs}");
        Ok(())
    })
}

/// `φ − i∂z1φ` at `z1 = 0` and `φ + i∂z2φ` at `z2 = d` vanish to
/// `10·(grid step)²` of the peak. Derivatives use a one-sided fourth-order
/// stencil that stays on the `z1 ≤ z2` side of the coincidence line.
pub fn wavefunction_boundaries(cases: u32) -> Result<(), String> {
    run(cases, pair_case(), |c| {
        let sol = solved(&c)?;
        let n = 200;
        let step = c.d / n as f64;
        let grid: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        let wf = two_particle_wavefunction(&sol, &grid).map_err(|e| fail(e.to_string()))?;
        let peak = wf.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let bound = 10.0 * step * step * peak;
        let slope = |f: [C64; 5]| (f[0] * -25.0 + f[1] * 48.0 - f[2] * 36.0 + f[3] * 16.0 - f[4] * 3.0) / (12.0 * step);
        for j in 4..=n - 4 {
            let left = wf.at(0, j) - I * slope([0, 1, 2, 3, 4].map(|i| wf.at(i, j)));
            let right = wf.at(j, n) - I * slope([0, 1, 2, 3, 4].map(|i| wf.at(j, n - i)));
            prop_assert!(left.norm() < bound, "z1 = 0, z2 = {}: {:e}", j as f64 * step, left.norm() / peak);
            prop_assert!(right.norm() < bound, "z1 = {}, z2 = d: {:e}", j as f64 * step, right.norm() / peak);
        }
        Ok(())
    })
}

/// The coincidence weight of a bound pair grows with `|κ|` along a
/// continuation.
pub fn bound_diagonal_growth(cases: u32) -> Result<(), String> {
    run(cases, (10.0..60.0f64, 1u32..4, 3.0..10.0f64), |(d, m, kd)| {
        let kappa = -kd / d;
        let start = two_particle_roots(d, C64::new(kappa, 0.0), bound_pair_seed(d, kappa.abs(), m))
            .map_err(|_| TestCaseError::reject("no bound root"))?;
        let path: Vec<C64> = (1..=12).map(|j| C64::new(kappa * (1.0 + 0.25 * j as f64), 0.0)).collect();
        let track = root_continuation(d, &path, &start).map_err(|e| fail(e.to_string()))?;
        let grid: Vec<f64> = (0..=80).map(|i| i as f64 * d / 80.0).collect();
        let mut last = diagonal_fraction(&two_particle_wavefunction(&start, &grid).map_err(|e| fail(e.to_string()))?);
        for sol in &track {
            let f = diagonal_fraction(&two_particle_wavefunction(sol, &grid).map_err(|e| fail(e.to_string()))?);
            prop_assert!(f > last, "fraction fell from {last} to {f} at κ = {}", sol.kappa);
            last = f;
        }
        Ok(())
    })
}

/// The `(1, 2)` scattering branch at `d = 30` approaches the free-fermion
/// energy `(π/d)² + (2π/d)²` within 5% once `κd ≥ 30`.
pub fn fermionized_energy(cases: u32) -> Result<(), String> {
    let d = 30.0;
    run(cases, 30.0..300.0f64, |kd| {
        let c = PairCase { d, kappa: kd / d, kind: PairKind::Scattering(1, 2) };
        let sol = solved(&c)?;
        let target = 5.0 * (PI / d).powi(2);
        let err = (sol.energy.re - target).abs() / target;
        prop_assert!(err <= 0.05, "κd = {kd}: E = {}, target {target}, off by {:.1}%", sol.energy.re, 100.0 * err);
        Ok(())
    })
}

// --- quantum ----------------------------------------------------------------

fn quantum_case() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (4.0..30.0f64, -1.0..1.0f64, 0.5..1.5f64, 1e-3..0.1f64)
}

fn quantum_setup(d: f64, kappa: f64, detune: f64, alpha: f64, scheme: Scheme) -> Result<(DimensionlessParams, GridSpec), TestCaseError> {
    let p = lossless(d, kappa, detune * (PI / d).powi(2), alpha);
    let g = GridSpec::new(d, 200, 0.5, None).map_err(|e| fail(e.to_string()))?.with_scheme(scheme);
    Ok((p, g))
}

/// `φ` is symmetric after every step, before any averaging, for both schemes.
pub fn quantum_symmetry(cases: u32) -> Result<(), String> {
    run(cases, (quantum_case(), any::<bool>()), |((d, kappa, detune, alpha), explicit)| {
        let scheme = if explicit { Scheme::DuFortFrankel } else { Scheme::ImplicitAdi };
        let (p, g) = quantum_setup(d, kappa, detune, alpha, scheme)?;
        let mut prop = Propagator::new(&p, &g).map_err(|e| fail(e.to_string()))?;
        let mut s = QuantumState::vacuum(&g);
        for step in 0..60 {
            prop.step(&mut s).map_err(|e| fail(e.to_string()))?;
            let raw = prop.raw_asymmetry();
            prop_assert!(raw < 1e-12, "step {step}: raw asymmetry {raw:e}");
            prop_assert!(s.asymmetry() < 1e-12, "step {step}: asymmetry {:e}", s.asymmetry());
        }
        Ok(())
    })
}

/// Without drive, clearing `θ` never changes the later two-photon interior.
pub fn manifold_decoupling(cases: u32) -> Result<(), String> {
    run(cases, (quantum_case(), any::<bool>()), |((d, kappa, detune, alpha), explicit)| {
        let scheme = if explicit { Scheme::DuFortFrankel } else { Scheme::ImplicitAdi };
        let (mut p, g) = quantum_setup(d, kappa, detune, alpha, scheme)?;
        let mut s = QuantumState::vacuum(&g);
        Propagator::new(&p, &g).and_then(|mut q| q.advance(&mut s, 40)).map_err(|e| fail(e.to_string()))?;
        p.alpha = C64::new(0.0, 0.0);
        let mut free = Propagator::new(&p, &g).map_err(|e| fail(e.to_string()))?;
        let mut a = s.clone();
        let mut b = s;
        for v in b.theta.iter_mut().chain(b.theta_prev.iter_mut()) {
            *v = C64::new(0.0, 0.0);
        }
        let n = g.n_z;
        for step in 0..20 {
            free.step(&mut a).map_err(|e| fail(e.to_string()))?;
            free.step(&mut b).map_err(|e| fail(e.to_string()))?;
            for i in 1..=n {
                for j in 1..=n {
                    prop_assert!(a.phi_cell(i, j) == b.phi_cell(i, j), "step {step}, cell ({i}, {j})");
                }
            }
        }
        Ok(())
    })
}

/// The one-photon norm changes by exactly the boundary currents, up to
/// `10·h²` of the exchanged flux per unit time.
pub fn one_photon_flux(cases: u32) -> Result<(), String> {
    run(cases, quantum_case(), |(d, kappa, detune, alpha)| {
        let (p, g) = quantum_setup(d, kappa, detune, alpha, Scheme::ImplicitAdi)?;
        let mut prop = Propagator::new(&p, &g).map_err(|e| fail(e.to_string()))?;
        prop.set_one_photon_only(true);
        let mut s = QuantumState::vacuum(&g);
        let norm = |s: &QuantumState| (1..=g.n_z).map(|j| s.theta_cell(j).norm_sqr()).sum::<f64>() * g.h;
        prop.advance(&mut s, 20).map_err(|e| fail(e.to_string()))?;
        let before = norm(&s);
        let (mut flux, mut exchanged) = (0.0, 0.0);
        let steps = 200;
        for _ in 0..steps {
            let (a, b) = boundary_currents(&s, &p, &g);
            prop.step(&mut s).map_err(|e| fail(e.to_string()))?;
            let (c, e) = boundary_currents(&s, &p, &g);
            flux += 0.5 * (a - b + c - e) * g.k;
            exchanged += 0.5 * (a.abs() + b.abs() + c.abs() + e.abs()) * g.k;
        }
        let change = norm(&s) - before;
        let bound = 10.0 * g.h * g.h * exchanged;
        prop_assert!((change - flux).abs() <= bound, "norm change {change:e}, boundary flux {flux:e}, bound {bound:e}");
        Ok(())
    })
}
