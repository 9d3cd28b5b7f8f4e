//! Experiment configuration files.
//!
//! Frequencies and couplings are in units of the Rabi cavity frequency,
//! loss rates are `f` in `2π × f MHz`.

use serde::{Deserialize, Serialize};

use parity_photons::dynamics::{EvolveOptions, NoiseParams, Tolerances};
use parity_photons::network::{default_truncation, NetworkParams, QrsBasis, DEFAULT_DIM_CAP, DEFAULT_QRS_LEVELS};
use parity_photons::spectrum::{RabiParams, DEFAULT_N_FOCK};
use parity_photons::units::rate_from_mhz;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Spectrum,
    Generate,
    Copies,
    Swap,
    Scaling,
}

impl Experiment {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "spectrum" => Some(Self::Spectrum),
            "generate" => Some(Self::Generate),
            "copies" => Some(Self::Copies),
            "swap" => Some(Self::Swap),
            "scaling" => Some(Self::Scaling),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Generate => "generate",
            Self::Copies => "copies",
            Self::Swap => "swap",
            Self::Scaling => "scaling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub rabi: RabiSection,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub prep: PrepSection,
    #[serde(default)]
    pub generation: GenerationSection,
    #[serde(default)]
    pub swap: SwapSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub scaling: ScalingSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiSection {
    pub omega_q: f64,
    pub g: f64,
    #[serde(default = "default_n_fock")]
    pub n_fock: usize,
}

fn default_n_fock() -> usize {
    DEFAULT_N_FOCK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub cavities: usize,
    /// `ω1`, `ω2` as fractions of `ν20`.
    pub omega_ratios: [f64; 2],
    /// `J1`, `J2` as fractions of `ν20`.
    pub coupling_ratios: [f64; 2],
    pub rwa: bool,
    /// Dressed levels kept; 0 keeps the bare qubit ⊗ field space.
    pub qrs_levels: usize,
    pub mode_dim: Option<usize>,
    pub photon_cutoff: Option<usize>,
    pub dim_cap: usize,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            cavities: 1,
            omega_ratios: [0.25, 0.75],
            coupling_ratios: [0.0075, 0.0053],
            rwa: true,
            qrs_levels: DEFAULT_QRS_LEVELS,
            mode_dim: None,
            photon_cutoff: None,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub kappa_mhz: f64,
    pub gamma_mhz: f64,
    pub gamma_phi_mhz: f64,
    #[serde(default)]
    pub qubit_gamma_mhz: Vec<f64>,
    #[serde(default)]
    pub qubit_gamma_phi_mhz: Vec<f64>,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { kappa_mhz: 0.10, gamma_mhz: 15.0, gamma_phi_mhz: 7.69, qubit_gamma_mhz: vec![], qubit_gamma_phi_mhz: vec![] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrepKind {
    Ideal,
    Driven,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepSection {
    pub mode: PrepKind,
    pub amplitude: f64,
    /// Defaults to `ν20`.
    pub frequency: Option<f64>,
}

impl Default for PrepSection {
    fn default() -> Self {
        Self { mode: PrepKind::Ideal, amplitude: 0.1, frequency: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Full,
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopKind {
    Formula,
    Peak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationSection {
    pub engine: EngineKind,
    pub stop: StopKind,
    /// Recorded window in multiples of the formula time.
    pub window: f64,
    pub points: usize,
}

impl Default for GenerationSection {
    fn default() -> Self {
        Self { engine: EngineKind::Full, stop: StopKind::Formula, window: 2.0, points: 801 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapTargetKind {
    Mode1,
    Mode2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapSection {
    pub target: SwapTargetKind,
    pub lambda: Option<f64>,
    pub park_frequency: Option<f64>,
    pub detune_shift: f64,
}

impl Default for SwapSection {
    fn default() -> Self {
        Self { target: SwapTargetKind::Mode1, lambda: None, park_frequency: None, detune_shift: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub g_min: f64,
    pub g_max: f64,
    pub points: usize,
    pub levels: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { g_min: 0.0, g_max: 1.0, points: 101, levels: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub cavities: Vec<usize>,
    pub engine: EngineKind,
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self { cavities: vec![1, 2, 3, 4], engine: EngineKind::Effective }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Recorded points of master-equation trajectories.
    pub points: usize,
}

impl Default for NumericsSection {
    fn default() -> Self {
        let t = Tolerances::default();
        Self { rtol: t.rtol, atol: t.atol, max_steps: t.max_steps, points: 41 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| schema(e.to_string()))
    }

    /// Fills in truncation defaults so the file fully determines the run.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        if c.experiment == Experiment::Swap {
            c.network.cavities = 2;
        }
        let (md, cut) = default_truncation(c.network.cavities);
        let md = if c.experiment == Experiment::Swap { 2 } else { md };
        c.network.mode_dim.get_or_insert(md);
        if c.network.photon_cutoff.is_none() {
            c.network.photon_cutoff = cut;
        }
        c
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every physical value before anything is computed.
    pub fn validate(&self) -> Result<(), CliError> {
        self.rabi_params().validate().map_err(|e| schema(e.to_string()))?;
        self.noise_params().validate().map_err(|e| schema(e.to_string()))?;
        let n = &self.network;
        let max_cavities = match self.experiment {
            Experiment::Copies => 3,
            _ => 4,
        };
        if self.experiment == Experiment::Swap && n.cavities != 2 {
            return Err(schema("swap uses exactly two cavities"));
        }
        if !(1..=max_cavities).contains(&n.cavities) && self.experiment != Experiment::Spectrum {
            return Err(schema(format!("network.cavities must be in 1..={max_cavities}")));
        }
        if n.omega_ratios.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(schema("network.omega_ratios must be > 0"));
        }
        if n.coupling_ratios.iter().any(|&j| !j.is_finite()) {
            return Err(schema("network.coupling_ratios must be finite"));
        }
        if n.qrs_levels == 1 || n.qrs_levels > 2 * self.rabi.n_fock {
            return Err(schema("network.qrs_levels must be 0 or in 2..=2 n_fock"));
        }
        if n.mode_dim.is_some_and(|d| d < 2) {
            return Err(schema("network.mode_dim must be >= 2"));
        }
        if self.prep.mode == PrepKind::Driven && !(self.prep.amplitude > 0.0 && self.prep.amplitude.is_finite()) {
            return Err(schema("prep.amplitude must be > 0"));
        }
        if self.prep.frequency.is_some_and(|f| !(f > 0.0 && f.is_finite())) {
            return Err(schema("prep.frequency must be > 0"));
        }
        let g = &self.generation;
        if !(g.window > 0.0 && g.window.is_finite()) || g.points < 3 {
            return Err(schema("generation.window must be > 0 and generation.points >= 3"));
        }
        let s = &self.swap;
        if s.lambda.is_some_and(|l| !(l > 0.0 && l.is_finite())) || !(s.detune_shift.is_finite()) {
            return Err(schema("swap.lambda must be > 0 and swap.detune_shift finite"));
        }
        if s.park_frequency.is_some_and(|w| !(w > 0.0 && w.is_finite())) {
            return Err(schema("swap.park_frequency must be > 0"));
        }
        let sp = &self.spectrum;
        if !(sp.g_min >= 0.0 && sp.g_max >= sp.g_min && sp.g_max.is_finite()) || sp.points < 1 || sp.levels < 1 {
            return Err(schema("spectrum needs 0 <= g_min <= g_max, points >= 1, levels >= 1"));
        }
        if sp.levels > 2 * self.rabi.n_fock {
            return Err(schema("spectrum.levels exceeds the truncated space"));
        }
        if self.scaling.cavities.is_empty() || self.scaling.cavities.iter().any(|&k| !(1..=4).contains(&k)) {
            return Err(schema("scaling.cavities must list values in 1..=4"));
        }
        let num = &self.numerics;
        if !(num.rtol > 0.0 && num.atol > 0.0) || num.max_steps == 0 || num.points < 2 {
            return Err(schema("numerics needs rtol, atol, max_steps > 0 and points >= 2"));
        }
        Ok(())
    }

    pub fn rabi_params(&self) -> RabiParams {
        RabiParams { n_fock: self.rabi.n_fock, ..RabiParams::new(self.rabi.omega_q, self.rabi.g) }
    }

    /// Network at the pair resonance of `nu20`.
    pub fn network_params(&self, rabi: RabiParams, nu20: f64) -> NetworkParams {
        let n = &self.network;
        let mut p = NetworkParams::from_ratios(rabi, n.cavities, nu20, n.omega_ratios, n.coupling_ratios);
        let (md, cut) = default_truncation(n.cavities);
        p.mode_dim = n.mode_dim.unwrap_or(md);
        p.photon_cutoff = n.photon_cutoff.or(cut);
        p.rwa = n.rwa;
        p.qrs_basis = if n.qrs_levels == 0 { QrsBasis::Bare } else { QrsBasis::Dressed { levels: n.qrs_levels } };
        p.dim_cap = n.dim_cap;
        p
    }

    pub fn noise_params(&self) -> NoiseParams {
        let n = &self.noise;
        NoiseParams {
            kappa: rate_from_mhz(n.kappa_mhz),
            gamma: rate_from_mhz(n.gamma_mhz),
            gamma_phi: rate_from_mhz(n.gamma_phi_mhz),
            qubit_gamma: n.qubit_gamma_mhz.iter().map(|&f| rate_from_mhz(f)).collect(),
            qubit_gamma_phi: n.qubit_gamma_phi_mhz.iter().map(|&f| rate_from_mhz(f)).collect(),
        }
    }

    pub fn evolve_options(&self, positivity_every: usize) -> EvolveOptions {
        let n = &self.numerics;
        EvolveOptions {
            tolerances: Tolerances { rtol: n.rtol, atol: n.atol, max_steps: n.max_steps },
            positivity_every: Some(positivity_every),
            ..EvolveOptions::default()
        }
    }
}

/// Runnable configuration at the published parameters.
pub fn default_config(experiment: Experiment) -> ExperimentConfig {
    let cavities = match experiment {
        Experiment::Swap | Experiment::Copies => 2,
        _ => 1,
    };
    let generation = match experiment {
        Experiment::Generate | Experiment::Swap => GenerationSection { stop: StopKind::Peak, ..GenerationSection::default() },
        _ => GenerationSection::default(),
    };
    ExperimentConfig {
        experiment,
        rabi: RabiSection { omega_q: 0.8, g: 0.6, n_fock: DEFAULT_N_FOCK },
        network: NetworkSection { cavities, ..NetworkSection::default() },
        noise: NoiseSection::default(),
        prep: PrepSection::default(),
        generation,
        swap: SwapSection::default(),
        spectrum: SpectrumSection::default(),
        scaling: ScalingSection::default(),
        numerics: NumericsSection::default(),
        output: OutputSection::default(),
    }
    .resolved()
}
