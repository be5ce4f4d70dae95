//! Run configuration as read from a JSON file.
//!
//! Frequencies are given as `f = Ω/2π` in MHz and converted to rad/μs on
//! use. Lengths are in μm, temperatures in μK, lifetimes in ms.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use vdwgate::noise::{NoiseConfig, QuadratureSpec};
use vdwgate::units::{mhz, to_mhz, ATOMIC_MASS_UNIT, C6_RB87_97S, RB87_MASS};
use vdwgate::{InteractionSign, ProtocolParams, VdwModel};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    /// Controlled phase gate diag(1, 1, 1, e^{iθ}).
    #[default]
    Cz,
    /// CNOT with the control on the first qubit; requires θ = π.
    Cnot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    #[default]
    Repulsive,
    Attractive,
}

impl From<Sign> for InteractionSign {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Repulsive => InteractionSign::Repulsive,
            Sign::Attractive => InteractionSign::Attractive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Weighted quadrature grid over the six position offsets.
    #[default]
    Grid,
    /// Monte Carlo sampling of the six position offsets.
    Mc,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct InteractionConfig {
    /// C₆/h in MHz·μm⁶.
    pub c6_mhz_um6: f64,
    pub sign: Sign,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self { c6_mhz_um6: to_mhz(C6_RB87_97S), sign: Sign::Repulsive }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSettings {
    /// Longitudinal r.m.s. position spread in the trap, μm.
    pub sigma_z0_um: f64,
    /// Transverse r.m.s. position spread in the trap, μm.
    pub sigma_perp0_um: f64,
    /// Atom temperature, μK.
    pub temperature_uk: f64,
    /// Atomic mass in unified atomic mass units.
    pub mass_amu: f64,
    /// Rydberg lifetime at room temperature, ms.
    pub lifetime_room_ms: f64,
    /// Rydberg lifetime in a cryogenic environment, ms.
    pub lifetime_cryo_ms: f64,
    /// Distance between the trap centers, μm. Defaults to the separation
    /// solved for the nominal interaction.
    pub trap_separation_um: Option<f64>,
}

impl Default for NoiseSettings {
    fn default() -> Self {
        Self {
            sigma_z0_um: 1.47,
            sigma_perp0_um: 0.27,
            temperature_uk: 10.0,
            mass_amu: RB87_MASS / ATOMIC_MASS_UNIT,
            lifetime_room_ms: 0.311,
            lifetime_cryo_ms: 1.10,
            trap_separation_um: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub mode: SamplingMode,
    /// Grid steps in units of σ; each must divide 3 exactly. With two or more
    /// steps the grid estimate is extrapolated to δ → 0.
    pub deltas: Vec<f64>,
    /// Number of Monte Carlo samples, at least 1000.
    pub mc_samples: usize,
    /// Monte Carlo draws beyond ±k·σ per coordinate are rejected; `null`
    /// samples the full Gaussian.
    pub mc_truncation: Option<f64>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            mode: SamplingMode::Grid,
            deltas: vec![0.25, 0.2, 0.15, 0.12, 0.1],
            mc_samples: 1_000_000,
            mc_truncation: Some(1.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// File to write; standard output when absent.
    pub path: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub gate: GateKind,
    /// Conditional phase in rad, in (0, 2π). Ignored when `interaction_mhz`
    /// is set.
    pub theta_rad: f64,
    /// Control Rabi frequency Ω_c/2π, MHz.
    pub omega_c_mhz: f64,
    /// Target Rabi frequency Ω_t/2π, MHz.
    pub omega_t_mhz: f64,
    /// Fixes the nominal interaction V/2π (MHz) instead of solving it from
    /// `theta_rad`.
    pub interaction_mhz: Option<f64>,
    pub interaction: InteractionConfig,
    pub noise: NoiseSettings,
    pub sampling: SamplingConfig,
    /// Seed for all random sampling.
    pub seed: u64,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gate: GateKind::Cz,
            theta_rad: PI,
            omega_c_mhz: 0.8,
            omega_t_mhz: 0.8,
            interaction_mhz: None,
            interaction: InteractionConfig::default(),
            noise: NoiseSettings::default(),
            sampling: SamplingConfig::default(),
            seed: 20_210_601,
            output: OutputConfig::default(),
        }
    }
}

fn positive(field: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field}: must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parses and validates; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                CliError::Config(inner.to_string())
            } else {
                CliError::Config(format!("{path}: {inner}"))
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        positive("omega_c_mhz", self.omega_c_mhz)?;
        positive("omega_t_mhz", self.omega_t_mhz)?;
        match self.interaction_mhz {
            Some(v) if !v.is_finite() || v < 0.0 => {
                return Err(CliError::Config(format!("interaction_mhz: must be non-negative and finite, got {v}")));
            }
            Some(_) => {}
            None => {
                if !(self.theta_rad > 0.0 && self.theta_rad < 2.0 * PI) {
                    return Err(CliError::Config(format!("theta_rad: must lie in (0, 2π), got {}", self.theta_rad)));
                }
            }
        }
        positive("interaction.c6_mhz_um6", self.interaction.c6_mhz_um6)?;
        let n = &self.noise;
        positive("noise.sigma_z0_um", n.sigma_z0_um)?;
        positive("noise.sigma_perp0_um", n.sigma_perp0_um)?;
        if !(n.temperature_uk.is_finite() && n.temperature_uk >= 0.0) {
            return Err(CliError::Config(format!(
                "noise.temperature_uk: must be non-negative and finite, got {}",
                n.temperature_uk
            )));
        }
        positive("noise.mass_amu", n.mass_amu)?;
        positive("noise.lifetime_room_ms", n.lifetime_room_ms)?;
        positive("noise.lifetime_cryo_ms", n.lifetime_cryo_ms)?;
        if let Some(l) = n.trap_separation_um {
            positive("noise.trap_separation_um", l)?;
        }
        let s = &self.sampling;
        if matches!(s.mode, SamplingMode::Grid | SamplingMode::Both) {
            if s.deltas.is_empty() {
                return Err(CliError::Config("sampling.deltas: at least one grid step is required".into()));
            }
            for (i, &d) in s.deltas.iter().enumerate() {
                QuadratureSpec::new(d).map_err(|e| CliError::Config(format!("sampling.deltas[{i}]: {e}")))?;
            }
        }
        if matches!(s.mode, SamplingMode::Mc | SamplingMode::Both) {
            if s.mc_samples < 1000 {
                return Err(CliError::Config(format!(
                    "sampling.mc_samples: need at least 1000, got {}",
                    s.mc_samples
                )));
            }
            if let Some(k) = s.mc_truncation {
                positive("sampling.mc_truncation", k)?;
            }
        }
        Ok(())
    }

    pub fn vdw(&self) -> Result<VdwModel, CliError> {
        VdwModel::new(mhz(self.interaction.c6_mhz_um6), self.interaction.sign.into())
            .map_err(|e| CliError::Config(format!("interaction.c6_mhz_um6: {e}")))
    }

    /// Solves the laser and timing parameters.
    pub fn protocol_params(&self) -> Result<ProtocolParams, CliError> {
        let vdw = self.vdw()?;
        let (wc, wt) = (mhz(self.omega_c_mhz), mhz(self.omega_t_mhz));
        let params = match self.interaction_mhz {
            Some(v) => ProtocolParams::for_interaction(wc, wt, mhz(v), &vdw),
            None => ProtocolParams::for_phase(self.theta_rad, wc, wt, &vdw),
        };
        params.map_err(CliError::from)
    }

    pub fn noise_config(&self, trap_separation: f64) -> NoiseConfig {
        NoiseConfig {
            sigma_z0: self.noise.sigma_z0_um,
            sigma_perp0: self.noise.sigma_perp0_um,
            atom_temperature: self.noise.temperature_uk,
            atom_mass: self.noise.mass_amu * ATOMIC_MASS_UNIT,
            rydberg_lifetime: self.noise.lifetime_room_ms,
            trap_separation,
        }
    }
}
