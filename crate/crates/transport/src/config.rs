//! TOML experiment configuration.
//!
//! Every block is optional except one parameter block. Unknown keys are
//! rejected with their full key path, and [`ExperimentConfig::validate`]
//! checks everything a run needs before any computation starts.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use nlse_core::params::{derive_dimensionless, loss_beta, DimensionlessParams, PhysicalParams};
use nlse_core::quantum::{GridSpec, Scheme, SteadyOptions};
use nlse_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::TransportError;

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Linear,
    Bandgap,
    Semiclassical,
    Modes,
    Quantum,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Linear => "linear",
            Mode::Bandgap => "bandgap",
            Mode::Semiclassical => "semiclassical",
            Mode::Modes => "modes",
            Mode::Quantum => "quantum",
            Mode::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Complex {
    Real(f64),
    Parts([f64; 2]),
}

impl Complex {
    pub fn value(self) -> C64 {
        match self {
            Complex::Real(re) => C64::new(re, 0.0),
            Complex::Parts([re, im]) => C64::new(re, im),
        }
    }
}

impl Default for Complex {
    fn default() -> Self {
        Complex::Real(0.0)
    }
}

/// An explicit list of values or `count` evenly spaced points on `[start, stop]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Span { start: f64, stop: f64, count: usize },
}

impl Values {
    pub fn expand(&self) -> Vec<f64> {
        match *self {
            Values::List(ref v) => v.clone(),
            Values::Span { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![start],
                _ => (0..count)
                    .map(|i| if i + 1 == count { stop } else { start + (stop - start) * i as f64 / (count - 1) as f64 })
                    .collect(),
            },
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_alpha() -> Complex {
    Complex::Real(1e-3)
}

/// NLSE parameters given directly. Exactly one of `kappa`/`kappa_d` and at
/// most one of `delta`/`resonance` may be set; without either detuning key
/// the drive sits on the first linear resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionlessBlock {
    pub d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Complex>,
    /// Interaction strength times length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_d: Option<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Linear resonance index `n`, giving `δ = (nπ/d)²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance: Option<u32>,
    #[serde(default = "default_alpha")]
    pub alpha: Complex,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<Complex>,
}

/// Atomic parameters, rates in units of the total decay rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalBlock {
    #[serde(default = "one")]
    pub gamma: f64,
    pub gamma1d_over_gamma: f64,
    pub delta1_over_gamma: f64,
    pub delta2_over_gamma: f64,
    pub od: f64,
    #[serde(default = "one")]
    pub omega_over_gamma: f64,
    #[serde(default)]
    pub gamma0_over_gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance: Option<u32>,
    #[serde(default = "default_alpha")]
    pub alpha: Complex,
}

impl PhysicalBlock {
    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            gamma: self.gamma,
            gamma1d_over_gamma: self.gamma1d_over_gamma,
            delta1_over_gamma: self.delta1_over_gamma,
            delta2_over_gamma: self.delta2_over_gamma,
            od: self.od,
            omega_over_gamma: self.omega_over_gamma,
            gamma0_over_gamma: self.gamma0_over_gamma,
        }
    }
}

fn default_n_z() -> usize {
    200
}

fn default_k_over_h() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default = "default_n_z")]
    pub n_z: usize,
    #[serde(default = "default_k_over_h")]
    pub k_over_h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub scheme: Scheme,
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock { n_z: default_n_z(), k_over_h: default_k_over_h(), sigma: None, scheme: Scheme::default() }
    }
}

fn default_profile_points() -> usize {
    201
}

/// Closed-form spectrum. The default detunings cover `[0, 4(π/d)²]` with 401
/// points. The loss parameter defaults to zero, or to `OD(Γ/Δ1)²` when the
/// physical block is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Values>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Points of the field profile at the configured detuning.
    #[serde(default = "default_profile_points")]
    pub profile_points: usize,
}

impl Default for LinearBlock {
    fn default() -> Self {
        LinearBlock { deltas: None, beta: None, profile_points: default_profile_points() }
    }
}

fn yes() -> bool {
    true
}

fn default_group_velocity_ratio() -> f64 {
    1e-5
}

/// Band-gap medium; atomic parameters come from the physical block. The
/// default detunings cover `[-2Ω, Ω]` with 601 points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandgapBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta3: Option<Values>,
    #[serde(default = "yes")]
    pub keep_free_phase: bool,
    #[serde(default = "default_group_velocity_ratio")]
    pub group_velocity_ratio: f64,
}

impl Default for BandgapBlock {
    fn default() -> Self {
        BandgapBlock { delta3: None, keep_free_phase: true, group_velocity_ratio: default_group_velocity_ratio() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemiclassicalKind {
    /// Transmission against detuning for each drive intensity.
    #[default]
    Spectrum,
    /// Transmission on resonance against photon number.
    Saturation,
}

/// Stationary nonlinear solutions. Default detunings as for the linear
/// spectrum; default intensity is `|α|²`; default photon numbers are
/// 0.1 to 10 in 41 points.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiclassicalBlock {
    #[serde(default)]
    pub kind: SemiclassicalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Values>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photon_numbers: Option<Values>,
}

fn default_singles() -> u32 {
    5
}

/// Open-boundary eigenmodes. `pairs` lists the single-mode indices `(m, n)`
/// of two-particle scattering states; `bound` lists the diagonal maxima
/// count of bound pairs (attractive interaction only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesBlock {
    #[serde(default = "default_singles")]
    pub singles: u32,
    #[serde(default)]
    pub pairs: Vec<[u32; 2]>,
    #[serde(default)]
    pub bound: Vec<u32>,
    /// Side of the sampled two-particle wavefunction grid; 0 disables it.
    #[serde(default)]
    pub wavefunction_points: usize,
}

impl Default for ModesBlock {
    fn default() -> Self {
        ModesBlock { singles: default_singles(), pairs: Vec::new(), bound: Vec::new(), wavefunction_points: 0 }
    }
}

fn default_tol() -> f64 {
    1e-3
}

fn default_samples() -> u32 {
    50
}

fn default_taus() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0]
}

/// Time evolution to the steady state. Unset durations follow the length:
/// window `(d/π)³`, horizon 25 windows, ramp 0.1 window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_samples")]
    pub samples_per_window: u32,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
}

impl Default for QuantumBlock {
    fn default() -> Self {
        QuantumBlock {
            horizon: None,
            window: None,
            ramp: None,
            tol: default_tol(),
            samples_per_window: default_samples(),
            taus: default_taus(),
        }
    }
}

impl QuantumBlock {
    pub fn options(&self, d: f64) -> SteadyOptions {
        let mut o = SteadyOptions::for_length(d);
        if let Some(w) = self.window {
            o.window = w;
            o.horizon = 25.0 * w;
            o.ramp = 0.1 * w;
        }
        if let Some(h) = self.horizon {
            o.horizon = h;
        }
        if let Some(r) = self.ramp {
            o.ramp = r;
        }
        o.tol = self.tol;
        o.samples_per_window = self.samples_per_window;
        o
    }
}

/// One config field stepped through a list of values, each cell running `mode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// Dotted key path, for example `dimensionless.kappa_d`.
    pub axis: String,
    pub values: Values,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Label recorded in the manifest; derived from the config when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensionless: Option<DimensionlessBlock>,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub linear: LinearBlock,
    #[serde(default)]
    pub bandgap: BandgapBlock,
    #[serde(default)]
    pub semiclassical: SemiclassicalBlock,
    #[serde(default)]
    pub modes: ModesBlock,
    #[serde(default)]
    pub quantum: QuantumBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
}

/// Parses a TOML document. Schema violations carry the offending key path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, TransportError> {
    let de = toml::Deserializer::new(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        TransportError::Config { path, message: inner.message().trim().to_string() }
    })?;
    match (&config.physical, &config.dimensionless) {
        (Some(_), Some(_)) => Err(TransportError::ExclusiveBlocks { first: "physical", second: "dimensionless" }),
        (None, None) => Err(TransportError::Config {
            path: ".".into(),
            message: "one of the `physical` or `dimensionless` blocks is required".into(),
        }),
        _ => Ok(config),
    }
}

/// Serializes back to TOML; parsing the result gives an equal config.
pub fn to_toml(config: &ExperimentConfig) -> Result<String, TransportError> {
    toml::to_string(config).map_err(|e| TransportError::Invalid(format!("cannot serialize config: {e}")))
}

fn invalid(path: &str, message: impl Into<String>) -> TransportError {
    TransportError::Config { path: path.into(), message: message.into() }
}

fn check_values(path: &str, v: &Values) -> Result<Vec<f64>, TransportError> {
    if let Values::Span { count: 0, .. } = v {
        return Err(invalid(path, "span needs at least one point"));
    }
    let out = v.expand();
    if out.is_empty() {
        return Err(invalid(path, "value list is empty"));
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err(invalid(path, "values must be finite"));
    }
    Ok(out)
}

fn detuning(path: &str, d: f64, delta: Option<f64>, resonance: Option<u32>) -> Result<f64, TransportError> {
    match (delta, resonance) {
        (Some(_), Some(_)) => Err(TransportError::ExclusiveKeys {
            first: format!("{path}.delta"),
            second: format!("{path}.resonance"),
        }),
        (Some(x), None) => Ok(x),
        (None, Some(0)) => Err(invalid(&format!("{path}.resonance"), "resonance index starts at 1")),
        (None, Some(n)) => Ok((n as f64 * PI / d).powi(2)),
        (None, None) => Ok((PI / d).powi(2)),
    }
}

impl ExperimentConfig {
    /// The run mode, reconciling the command line with the document.
    pub fn resolve_mode(&self, requested: Option<Mode>) -> Result<Mode, TransportError> {
        match (requested, self.mode) {
            (Some(a), Some(b)) if a != b => {
                Err(invalid("mode", format!("command line asks for `{a}` but the config says `{b}`")))
            }
            (Some(a), _) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => Err(invalid("mode", "no mode given on the command line or in the config")),
        }
    }

    /// The dimensionless parameter set, derived from whichever block is present.
    pub fn params(&self) -> Result<DimensionlessParams, TransportError> {
        if let Some(b) = &self.dimensionless {
            if !(b.d > 0.0) || !b.d.is_finite() {
                return Err(invalid("dimensionless.d", "length must be positive and finite"));
            }
            let kappa = match (b.kappa, b.kappa_d) {
                (Some(_), Some(_)) => {
                    return Err(TransportError::ExclusiveKeys {
                        first: "dimensionless.kappa".into(),
                        second: "dimensionless.kappa_d".into(),
                    })
                }
                (Some(k), None) => k.value(),
                (None, Some(kd)) => kd.value() / b.d,
                (None, None) => C64::new(0.0, 0.0),
            };
            let delta = detuning("dimensionless", b.d, b.delta, b.resonance)?;
            let mut p = DimensionlessParams::lossless(b.d, kappa, delta, b.alpha.value());
            if let Some(m) = b.mass {
                p.m = m.value();
            }
            p.validate().map_err(|e| invalid("dimensionless", e.to_string()))?;
            Ok(p)
        } else if let Some(b) = &self.physical {
            let phys = b.params();
            phys.validate().map_err(|e| invalid("physical", e.to_string()))?;
            let d = phys.od / phys.delta1_over_gamma.abs();
            let delta = detuning("physical", d, b.delta, b.resonance)?;
            derive_dimensionless(&phys, delta, b.alpha.value()).map_err(|e| invalid("physical", e.to_string()))
        } else {
            Err(invalid(".", "one of the `physical` or `dimensionless` blocks is required"))
        }
    }

    pub fn grid_spec(&self, d: f64) -> Result<GridSpec, TransportError> {
        let g = &self.grid;
        if g.n_z == 0 {
            return Err(invalid("grid.n_z", "need at least one cell"));
        }
        GridSpec::new(d, g.n_z, g.k_over_h, g.sigma)
            .map(|s| s.with_scheme(g.scheme))
            .map_err(|e| invalid("grid", e.to_string()))
    }

    pub fn linear_deltas(&self, d: f64) -> Result<Vec<f64>, TransportError> {
        match &self.linear.deltas {
            Some(v) => check_values("linear.deltas", v),
            None => Ok(Values::Span { start: 0.0, stop: 4.0 * (PI / d).powi(2), count: 401 }.expand()),
        }
    }

    pub fn linear_beta(&self) -> Result<f64, TransportError> {
        match (self.linear.beta, &self.physical) {
            (Some(b), _) => Ok(b),
            (None, Some(phys)) => loss_beta(&phys.params()).map_err(|e| invalid("physical", e.to_string())),
            (None, None) => Ok(0.0),
        }
    }

    pub fn bandgap_deltas(&self) -> Result<Vec<f64>, TransportError> {
        let omega = self.physical.as_ref().map_or(1.0, |b| b.omega_over_gamma);
        match &self.bandgap.delta3 {
            Some(v) => check_values("bandgap.delta3", v),
            None => Ok(Values::Span { start: -2.0 * omega, stop: omega, count: 601 }.expand()),
        }
    }

    pub fn semiclassical_deltas(&self, d: f64) -> Result<Vec<f64>, TransportError> {
        match &self.semiclassical.deltas {
            Some(v) => check_values("semiclassical.deltas", v),
            None => Ok(Values::Span { start: 0.0, stop: 4.0 * (PI / d).powi(2), count: 401 }.expand()),
        }
    }

    pub fn photon_numbers(&self) -> Result<Vec<f64>, TransportError> {
        let v = match &self.semiclassical.photon_numbers {
            Some(v) => check_values("semiclassical.photon_numbers", v)?,
            None => Values::Span { start: 0.1, stop: 10.0, count: 41 }.expand(),
        };
        if v.iter().any(|&x| !(x > 0.0)) {
            return Err(invalid("semiclassical.photon_numbers", "photon numbers must be positive"));
        }
        Ok(v)
    }

    /// Checks everything `mode` needs, without computing anything.
    pub fn validate(&self, mode: Mode) -> Result<(), TransportError> {
        let p = self.params()?;
        match mode {
            Mode::Linear => {
                self.linear_deltas(p.d)?;
                let beta = self.linear_beta()?;
                if !(beta >= 0.0) || !beta.is_finite() {
                    return Err(invalid("linear.beta", "loss parameter must be finite and non-negative"));
                }
                if self.linear.profile_points == 1 {
                    return Err(invalid("linear.profile_points", "a profile needs 0 or at least 2 points"));
                }
            }
            Mode::Bandgap => {
                if self.physical.is_none() {
                    return Err(invalid("physical", "bandgap mode needs the physical block"));
                }
                self.bandgap_deltas()?;
                if !(self.bandgap.group_velocity_ratio >= 0.0) {
                    return Err(invalid("bandgap.group_velocity_ratio", "must be non-negative"));
                }
            }
            Mode::Semiclassical => match self.semiclassical.kind {
                SemiclassicalKind::Spectrum => {
                    self.semiclassical_deltas(p.d)?;
                    if let Some(v) = &self.semiclassical.intensities {
                        if v.is_empty() || v.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                            return Err(invalid(
                                "semiclassical.intensities",
                                "need at least one finite, non-negative intensity",
                            ));
                        }
                    }
                }
                SemiclassicalKind::Saturation => {
                    self.photon_numbers()?;
                }
            },
            Mode::Modes => {
                let m = &self.modes;
                if m.singles == 0 && m.pairs.is_empty() && m.bound.is_empty() {
                    return Err(invalid("modes", "nothing to solve"));
                }
                if m.pairs.iter().any(|&[a, b]| a == 0 || b == 0 || a == b) {
                    return Err(invalid("modes.pairs", "mode indices start at 1 and must differ"));
                }
                if m.bound.contains(&0) {
                    return Err(invalid("modes.bound", "maxima count starts at 1"));
                }
                if !m.bound.is_empty() && !(p.kappa.re < 0.0) {
                    return Err(invalid("modes.bound", "bound pairs need an attractive (negative) interaction"));
                }
                if m.wavefunction_points == 1 {
                    return Err(invalid("modes.wavefunction_points", "use 0 or at least 2"));
                }
            }
            Mode::Quantum => {
                let g = self.grid_spec(p.d)?;
                g.validate(p.d).map_err(|e| invalid("grid", e.to_string()))?;
                self.quantum.options(p.d).validate().map_err(|e| invalid("quantum", e.to_string()))?;
                let taus = &self.quantum.taus;
                if taus.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || taus.windows(2).any(|w| w[1] < w[0]) {
                    return Err(invalid("quantum.taus", "delays must be finite, non-negative and sorted"));
                }
            }
            Mode::Sweep => {
                let s = self.sweep.as_ref().ok_or_else(|| invalid("sweep", "sweep mode needs a sweep block"))?;
                if s.mode == Mode::Sweep {
                    return Err(invalid("sweep.mode", "a sweep cannot run sweeps"));
                }
                for cell in self.sweep_cells()? {
                    cell.validate(s.mode)?;
                }
            }
        }
        Ok(())
    }

    /// One config per sweep value, with the axis field replaced.
    pub fn sweep_cells(&self) -> Result<Vec<ExperimentConfig>, TransportError> {
        let s = self.sweep.as_ref().ok_or_else(|| invalid("sweep", "sweep mode needs a sweep block"))?;
        let values = check_values("sweep.values", &s.values)?;
        let path: Vec<&str> = s.axis.split('.').collect();
        if path.len() < 2 || path.iter().any(|k| k.is_empty()) || path[0] == "sweep" {
            return Err(invalid("sweep.axis", format!("`{}` is not a parameter field", s.axis)));
        }
        let mut base = toml::Value::try_from(self)
            .map_err(|e| TransportError::Invalid(format!("cannot serialize config: {e}")))?;
        if let Some(t) = base.as_table_mut() {
            t.remove("sweep");
            t.insert("mode".into(), toml::Value::String(s.mode.name().into()));
        }
        values.iter().map(|&v| with_field(&base, &path, v).map_err(|m| invalid("sweep.axis", m))).collect()
    }
}

/// Keys that replace each other when one of them is swept.
const EXCLUSIVE: [(&str, &str); 2] = [("kappa", "kappa_d"), ("delta", "resonance")];

fn with_field(base: &toml::Value, path: &[&str], v: f64) -> Result<ExperimentConfig, String> {
    let mut doc = base.clone();
    let (leaf, parents) = path.split_last().expect("path has two or more keys");
    let mut node = &mut doc;
    for key in parents {
        let table = node.as_table_mut().ok_or_else(|| format!("`{key}` is not a block"))?;
        node = table.get_mut(*key).ok_or_else(|| format!("block `{key}` is not present in the config"))?;
    }
    let table = node.as_table_mut().ok_or_else(|| "axis parent is not a block".to_string())?;
    for (a, b) in EXCLUSIVE {
        if *leaf == a {
            table.remove(b);
        } else if *leaf == b {
            table.remove(a);
        }
    }
    let joined = path.join(".");
    table.insert(leaf.to_string(), toml::Value::Float(v));
    let parsed = ExperimentConfig::deserialize(doc.clone());
    match parsed {
        Ok(c) => Ok(c),
        Err(_) if v.fract() == 0.0 && v.abs() < i64::MAX as f64 => {
            let table = locate(&mut doc, parents);
            table.insert(leaf.to_string(), toml::Value::Integer(v as i64));
            ExperimentConfig::deserialize(doc).map_err(|e| format!("`{joined}` cannot take {v}: {}", e.message()))
        }
        Err(e) => Err(format!("`{joined}` cannot take {v}: {}", e.message())),
    }
}

fn locate<'a>(doc: &'a mut toml::Value, parents: &[&str]) -> &'a mut toml::map::Map<String, toml::Value> {
    let mut node = doc;
    for key in parents {
        node = node.as_table_mut().and_then(|t| t.get_mut(*key)).expect("path checked");
    }
    node.as_table_mut().expect("path checked")
}
