use serde::{Deserialize, Serialize};
use vdwgate::noise::{FidelityReport, InflatedSigmas};
use vdwgate::units::to_mhz;
use vdwgate::{GateMatrix, ProtocolParams};

use crate::config::RunConfig;

/// Solved laser and timing parameters in configuration units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedParams {
    pub theta_rad: f64,
    pub omega_c_mhz: f64,
    pub omega_t_mhz: f64,
    pub interaction_mhz: f64,
    pub generalized_rabi_mhz: f64,
    pub t0_us: f64,
    pub t_gate_us: f64,
    /// `null` when the interaction is zero.
    pub separation_um: Option<f64>,
}

impl From<&ProtocolParams> for SolvedParams {
    fn from(p: &ProtocolParams) -> Self {
        Self {
            theta_rad: p.theta,
            omega_c_mhz: to_mhz(p.omega_c),
            omega_t_mhz: to_mhz(p.omega_t),
            interaction_mhz: to_mhz(p.interaction),
            generalized_rabi_mhz: to_mhz(p.generalized_rabi()),
            t0_us: p.t0,
            t_gate_us: p.t_gate,
            separation_um: p.separation.is_finite().then_some(p.separation),
        }
    }
}

/// Computational-subspace gate at a fixed interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    /// Interaction the gate was evaluated at, MHz.
    pub interaction_mhz: f64,
    /// Row-major 4×4 matrix of `[re, im]` pairs, global phase fixed by a
    /// real positive ⟨00|U|00⟩.
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub fidelity: f64,
    /// Largest element-wise deviation from the ideal gate.
    pub max_deviation: f64,
}

impl GateReport {
    pub fn new(interaction_mhz: f64, gate: &GateMatrix, fidelity: f64, max_deviation: f64) -> Self {
        let m = gate.matrix();
        let matrix = (0..4).map(|i| (0..4).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        Self { interaction_mhz, matrix, fidelity, max_deviation }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayBudget {
    pub lifetime_room_ms: f64,
    pub lifetime_cryo_ms: f64,
    pub e_decay_room: f64,
    pub e_decay_cryo: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub run_id: String,
    /// RFC 3339, UTC.
    pub timestamp: String,
    pub command: String,
    /// Effective configuration; re-running it reproduces every figure.
    pub config: RunConfig,
    pub params: SolvedParams,
    pub trap_separation_um: Option<f64>,
    pub gate: Option<GateReport>,
    pub t_ryd_us: Option<f64>,
    pub decay: Option<DecayBudget>,
    pub sigmas: Option<InflatedSigmas>,
    /// Net fidelities use the room-temperature lifetime.
    pub grid: Option<FidelityReport>,
    pub monte_carlo: Option<FidelityReport>,
}

impl ResultRecord {
    /// Grid estimate if present, else Monte Carlo.
    pub fn primary_report(&self) -> Option<&FidelityReport> {
        self.grid.as_ref().or(self.monte_carlo.as_ref())
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// `grid`, `grid-extrapolated` or `mc`.
    pub estimator: String,
    pub delta: f64,
    #[serde(rename = "meanFidelity")]
    pub mean_fidelity: f64,
    #[serde(rename = "stdError")]
    pub std_error: Option<f64>,
    #[serde(rename = "netFidelity300K")]
    pub net_fidelity_300k: f64,
    #[serde(rename = "netFidelity4K")]
    pub net_fidelity_4k: f64,
    pub samples: u64,
    #[serde(rename = "wallTime")]
    pub wall_time: f64,
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis: String,
    pub value: f64,
    #[serde(rename = "separationUm")]
    pub separation_um: f64,
    #[serde(rename = "tGateUs")]
    pub t_gate_us: f64,
    #[serde(rename = "nominalFidelity")]
    pub nominal_fidelity: f64,
    #[serde(rename = "meanFidelity")]
    pub mean_fidelity: f64,
    #[serde(rename = "stdError")]
    pub std_error: Option<f64>,
    #[serde(rename = "netFidelity300K")]
    pub net_fidelity_300k: f64,
    #[serde(rename = "netFidelity4K")]
    pub net_fidelity_4k: f64,
    #[serde(rename = "tRydUs")]
    pub t_ryd_us: f64,
    pub samples: u64,
    #[serde(rename = "wallTime")]
    pub wall_time: f64,
}
