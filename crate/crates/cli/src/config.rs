//! TOML experiment configuration. Every section is optional and unknown keys
//! are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nsk_core::analysis::decay::DecayWindow;
use nsk_core::analysis::EnergyWeights;
use nsk_core::{make_cutoff, Cutoff, Grid, PhysParams, PressureLaw, PressureModel, Scheme, StepperConfig};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub grid: GridConfig,
    pub params: ParamsConfig,
    pub cutoff: CutoffConfig,
    pub stepper: StepperSection,
    pub initial: InitialConfig,
    pub analysis: AnalysisConfig,
    pub picard: PicardSection,
    pub validate: ValidateConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    /// Modes per axis.
    pub modes: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 3, modes: 32, length: 4.0 * std::f64::consts::PI }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case", deny_unknown_fields)]
pub enum PressureConfig {
    /// `c(ρ-1)²`
    Quadratic { c: f64 },
    /// Van der Waals; `theta` defaults to the value giving `P'(1) = 0`.
    VanDerWaals { a: f64, b: f64, theta: Option<f64> },
    /// Coefficients of `(ρ-1)^j`.
    Taylor { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub nu: f64,
    pub nu_tilde: f64,
    pub kappa: f64,
    pub rho_min: f64,
    pub pressure: PressureConfig,
    /// Accept laws with `P'(1) ≠ 0`; the linear part still ignores `P'(1)`.
    pub allow_noncritical: bool,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            nu_tilde: 1.0,
            kappa: 1.0,
            rho_min: 0.1,
            pressure: PressureConfig::Quadratic { c: 1.0 },
            allow_noncritical: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutoffConfig {
    pub r1: f64,
    pub r_inf: f64,
}

impl Default for CutoffConfig {
    fn default() -> Self {
        Self { r1: 1.0, r_inf: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Etd1,
    EtdRk2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperSection {
    pub scheme: SchemeName,
    pub dt: f64,
    pub t_end: f64,
    /// Target local error per unit time; absent for fixed steps.
    pub adapt: Option<f64>,
    pub amplitude_guard: f64,
    pub sample_interval: f64,
}

impl Default for StepperSection {
    fn default() -> Self {
        Self {
            scheme: SchemeName::EtdRk2,
            dt: 0.1,
            t_end: 50.0,
            adapt: None,
            amplitude_guard: 0.5,
            sample_interval: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Periodic Gaussian bump.
    Gaussian,
    /// A single Fourier mode `cos(k·x)`.
    Mode,
    /// Smooth random field drawn from `seed`.
    Random,
    /// Physical samples read from a JSON file.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub profile: Profile,
    /// `sup|φ₀|` scale `ε`.
    pub amplitude: f64,
    /// Momentum scale; defaults to `amplitude`.
    pub m_amplitude: Option<f64>,
    /// Gaussian width.
    pub width: f64,
    /// Random-field spectral width.
    pub band: f64,
    /// Integer labels of the single mode.
    pub mode: Vec<i64>,
    /// `m₀ = ∂₁m̃₀` instead of `m₀ = m̃₀`.
    pub derivative_form: bool,
    /// Rescale to this `E₀ = ‖u₀‖_{H^{s+1}×H^s} + ‖u₀‖_{L¹}`.
    pub data_size: Option<f64>,
    pub path: Option<PathBuf>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            profile: Profile::Gaussian,
            amplitude: 1e-2,
            m_amplitude: None,
            width: 1.0,
            band: 3.0,
            mode: vec![1, 0, 0],
            derivative_form: true,
            data_size: None,
            path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub s: u32,
    pub kappa1: Option<f64>,
    /// Rate of the exponential kernel in the Z-norm history term.
    pub c2: f64,
    /// Decay-fit window `[t_a, t_b]`.
    pub window: [f64; 2],
    pub decay_tol: f64,
    /// Sample count of the linear-decay curve.
    pub samples: usize,
    /// Radius `a` of the kernel cutoff, `χ̂₀ = 1` on `r ≤ a`.
    pub k12_support: f64,
    pub k12_window: [f64; 2],
    /// Multiple of the a priori constant allowed in the energy check.
    pub energy_factor: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            s: 2,
            kappa1: None,
            c2: 1.0,
            window: [1e2, 1e4],
            decay_tol: 0.03,
            samples: 40,
            k12_support: 1.0,
            k12_window: [10.0, 1e4],
            energy_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardSection {
    pub horizon: f64,
    pub mesh_dt: f64,
    pub k_max: usize,
    pub stop_below: f64,
    /// `E₀` the initial data are scaled to.
    pub data_size: f64,
}

impl Default for PicardSection {
    fn default() -> Self {
        Self { horizon: 10.0, mesh_dt: 0.25, k_max: 20, stop_below: 1e-12, data_size: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub tuples: usize,
    pub rk4_tol: f64,
    pub composition_tol: f64,
    pub korteweg_tol: f64,
    /// Relative slack on the exact projection inequalities.
    pub projection_slack: f64,
    pub projection_fields: usize,
    pub energy_runs: usize,
    /// Relative slack on `E(t+Δt) ≤ E(t)`.
    pub energy_slack: f64,
    pub k12_slack: f64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            tuples: 20,
            rk4_tol: 1e-8,
            composition_tol: 1e-10,
            korteweg_tol: 1e-10,
            projection_slack: 1e-12,
            projection_fields: 100,
            energy_runs: 10,
            energy_slack: 1e-12,
            k12_slack: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Range checks that need no numerical work.
    pub fn validate(&self) -> CliResult<()> {
        let c = &self.cutoff;
        if !(c.r1 > 0.0 && c.r1 < c.r_inf) {
            return Err(CliError::Config(format!("cutoff needs 0 < r1 < r_inf, got r1 = {}, r_inf = {}", c.r1, c.r_inf)));
        }
        let g = self.grid()?;
        make_cutoff(&g, c.r1, c.r_inf).map_err(config_err)?;
        let p = self.params()?;
        p.check_dimension(self.grid.dim).map_err(config_err)?;
        self.stepper().validate().map_err(config_err)?;
        let [t_a, t_b] = self.analysis.window;
        DecayWindow { t_a, t_b }.validate(None).map_err(config_err)?;
        let [k_a, k_b] = self.analysis.k12_window;
        if !(k_a > 0.0 && k_b > k_a) {
            return Err(CliError::Config(format!("k12_window must satisfy 0 < t_a < t_b, got [{k_a}, {k_b}]")));
        }
        if self.analysis.samples < 10 {
            return Err(CliError::Config("analysis.samples must be at least 10".into()));
        }
        if !(self.analysis.c2 > 0.0) {
            return Err(CliError::Config("analysis.c2 must be positive".into()));
        }
        self.weights()?;
        let i = &self.initial;
        if !(i.amplitude >= 0.0) || !(i.width > 0.0) || !(i.band > 0.0) {
            return Err(CliError::Config("initial amplitude must be non-negative, width and band positive".into()));
        }
        if i.profile == Profile::Mode && i.mode.len() != self.grid.dim {
            return Err(CliError::Config(format!("initial.mode needs {} labels", self.grid.dim)));
        }
        if i.profile == Profile::File && i.path.is_none() {
            return Err(CliError::Config("profile = \"file\" needs initial.path".into()));
        }
        let pc = &self.picard;
        if !(pc.horizon > 0.0 && pc.mesh_dt > 0.0 && pc.data_size > 0.0) {
            return Err(CliError::Config("picard horizon, mesh_dt and data_size must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<Grid<f64>> {
        Grid::new(self.grid.dim, self.grid.modes, self.grid.length).map_err(config_err)
    }

    pub fn pressure(&self) -> CliResult<PressureModel<f64>> {
        let law = match &self.params.pressure {
            PressureConfig::Quadratic { c } => PressureLaw::CriticalQuadratic { c: *c },
            PressureConfig::VanDerWaals { a, b, theta } => {
                PressureLaw::VanDerWaals { a: *a, b: *b, theta: theta.unwrap_or(2.0 * a * (1.0 - b) * (1.0 - b)) }
            }
            PressureConfig::Taylor { coeffs } => PressureLaw::Taylor { coeffs: coeffs.clone() },
        };
        if self.params.allow_noncritical {
            return Ok(PressureModel::allow_noncritical(law));
        }
        match law {
            PressureLaw::CriticalQuadratic { c } => Ok(PressureModel::critical_quadratic(c)),
            PressureLaw::VanDerWaals { a, b, theta } => PressureModel::van_der_waals(a, b, theta),
            PressureLaw::Taylor { coeffs } => PressureModel::taylor(coeffs),
        }
        .map_err(config_err)
    }

    pub fn params(&self) -> CliResult<PhysParams<f64>> {
        let p = &self.params;
        PhysParams::new(p.nu, p.nu_tilde, p.kappa, self.pressure()?)
            .and_then(|v| v.with_rho_min(p.rho_min))
            .map_err(config_err)
    }

    pub fn cutoff(&self) -> CliResult<Cutoff<f64>> {
        make_cutoff(&self.grid()?, self.cutoff.r1, self.cutoff.r_inf).map_err(config_err)
    }

    pub fn stepper(&self) -> StepperConfig<f64> {
        let s = &self.stepper;
        let mut cfg = StepperConfig::new(s.dt, s.t_end);
        cfg.scheme = match s.scheme {
            SchemeName::Etd1 => Scheme::Etd1,
            SchemeName::EtdRk2 => Scheme::EtdRk2,
        };
        cfg.adapt = s.adapt;
        cfg.amplitude_guard = s.amplitude_guard;
        cfg.sample_interval = s.sample_interval;
        cfg
    }

    pub fn weights(&self) -> CliResult<EnergyWeights> {
        let w = EnergyWeights::new(self.analysis.s, &self.params()?);
        match self.analysis.kappa1 {
            None => Ok(w),
            Some(k) => {
                let min = w.kappa1_min();
                w.with_kappa1(k).ok_or_else(|| CliError::Config(format!("kappa1 = {k} is below the admissible minimum {min}")))
            }
        }
    }

    pub fn decay_window(&self) -> DecayWindow {
        DecayWindow { t_a: self.analysis.window[0], t_b: self.analysis.window[1] }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config is serializable")
    }
}
