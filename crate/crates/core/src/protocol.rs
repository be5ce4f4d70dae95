//! Three-step controlled-phase and CNOT pulse sequences.
//!
//! Pulse 1 takes the control atom |1⟩ → |r⟩ with a π pulse. Pulse 2 drives
//! the target for two detuned Rabi cycles of duration `t0` each, the second
//! with the Rabi frequency negated: the single-excitation channel returns to
//! itself while the |r1⟩ ↔ |rr⟩ channel, detuned by `V`, picks up the phase
//! `θ/2 = −π(1 + V/Ω̄)` per cycle. Pulse 3 de-excites the control.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::interaction::VdwModel;
use crate::quantum::{
    compose, exponentiate, Atom, AtomLevel, Drive, Hamiltonian, Mat9, PropagatorSegment, C64,
};

/// One coupling inside a pulse; the atom is given by [`PulseSpec::actor`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub from: AtomLevel,
    pub to: AtomLevel,
    pub amplitude: C64,
}

impl Coupling {
    pub fn real(from: AtomLevel, to: AtomLevel, amplitude: f64) -> Self {
        Self { from, to, amplitude: C64::new(amplitude, 0.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub actor: Atom,
    pub couplings: Vec<Coupling>,
    /// μs
    pub duration: f64,
}

impl PulseSpec {
    pub fn new(actor: Atom, couplings: Vec<Coupling>, duration: f64) -> Result<Self> {
        ensure_finite("pulse duration", duration)?;
        if duration < 0.0 {
            return Err(Error::invalid("pulse duration", format!("must be non-negative, got {duration}")));
        }
        for c in &couplings {
            if c.from == c.to {
                return Err(Error::invalid("coupling levels", "from and to must differ"));
            }
            if !(c.amplitude.re.is_finite() && c.amplitude.im.is_finite()) {
                return Err(Error::invalid("coupling amplitude", "must be finite"));
            }
        }
        Ok(Self { actor, couplings, duration })
    }

    pub fn drives(&self) -> Vec<Drive> {
        self.couplings
            .iter()
            .map(|c| Drive::new(self.actor, c.from, c.to, c.amplitude))
            .collect()
    }

    pub fn hamiltonian(&self, interaction: f64) -> Result<Hamiltonian> {
        Hamiltonian::build(&self.drives(), interaction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetGate {
    ControlledPhase { theta: f64 },
    Cnot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateProtocol {
    pub pulses: Vec<PulseSpec>,
    /// rad/μs
    pub nominal_interaction: f64,
    pub target: TargetGate,
}

impl GateProtocol {
    pub fn hamiltonians(&self, interaction: f64) -> Result<Vec<Hamiltonian>> {
        self.pulses.iter().map(|p| p.hamiltonian(interaction)).collect()
    }

    /// One propagator per pulse, evaluated at `interaction`.
    pub fn segments(&self, interaction: f64) -> Result<Vec<PropagatorSegment>> {
        self.pulses
            .iter()
            .map(|p| exponentiate(&p.hamiltonian(interaction)?, p.duration))
            .collect()
    }

    /// Full 9 × 9 propagator of the sequence at `interaction`.
    pub fn propagator(&self, interaction: f64) -> Result<Mat9> {
        Ok(compose(&self.segments(interaction)?))
    }

    pub fn duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }
}

/// Detuned Rabi frequency Ω̄ = √(Ω² + V²).
pub fn generalized_rabi(omega_t: f64, interaction: f64) -> f64 {
    omega_t.hypot(interaction)
}

/// Conditional phase `θ = −2πV/Ω̄`, reduced to [0, 2π).
pub fn phase_for_interaction(omega_t: f64, interaction: f64) -> f64 {
    // adding zero turns −0 into +0
    (-TAU * interaction / generalized_rabi(omega_t, interaction)).rem_euclid(TAU) + 0.0
}

/// Inverts the phase condition: with `x = 1 − θ/2π`, `V = Ω_t x / √(1 − x²)`.
pub fn solve_interaction_for_phase(theta: f64, omega_t: f64) -> Result<f64> {
    ensure_positive("omega_t", omega_t)?;
    if !(theta > 0.0 && theta < TAU) {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            reason: "must lie strictly inside (0, 2π)".into(),
        });
    }
    let x = 1.0 - theta / TAU;
    let v = omega_t * x / (1.0 - x * x).sqrt();
    if !v.is_finite() {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            reason: "too close to 0: the required interaction diverges".into(),
        });
    }
    Ok(v)
}

/// Laser and timing parameters of a gate, all derived quantities included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// rad/μs
    pub omega_c: f64,
    /// rad/μs
    pub omega_t: f64,
    /// rad/μs
    pub interaction: f64,
    /// rad, in (0, 2π)
    pub theta: f64,
    /// μs
    pub t0: f64,
    /// μs
    pub t_gate: f64,
    /// μm
    pub separation: f64,
}

impl ProtocolParams {
    /// Solves `V`, `t0`, `t_g` and the trap separation for a target phase.
    pub fn for_phase(theta: f64, omega_c: f64, omega_t: f64, vdw: &VdwModel) -> Result<Self> {
        ensure_positive("omega_c", omega_c)?;
        let interaction = solve_interaction_for_phase(theta, omega_t)?;
        let separation = vdw.separation_for(interaction)?;
        Ok(Self::from_parts(omega_c, omega_t, interaction, theta, separation))
    }

    /// Parameters for a fixed interaction; `θ` follows from the phase condition.
    pub fn for_interaction(omega_c: f64, omega_t: f64, interaction: f64, vdw: &VdwModel) -> Result<Self> {
        ensure_positive("omega_c", omega_c)?;
        ensure_positive("omega_t", omega_t)?;
        ensure_finite("interaction", interaction)?;
        let theta = phase_for_interaction(omega_t, interaction);
        let separation = if interaction.abs() > 0.0 {
            vdw.separation_for(interaction.abs())?
        } else {
            f64::INFINITY
        };
        Ok(Self::from_parts(omega_c, omega_t, interaction, theta, separation))
    }

    fn from_parts(omega_c: f64, omega_t: f64, interaction: f64, theta: f64, separation: f64) -> Self {
        let bar = generalized_rabi(omega_t, interaction);
        Self {
            omega_c,
            omega_t,
            interaction,
            theta,
            t0: TAU / bar,
            t_gate: TAU / omega_c + 2.0 * TAU / bar,
            separation,
        }
    }

    pub fn generalized_rabi(&self) -> f64 {
        generalized_rabi(self.omega_t, self.interaction)
    }

    /// Checks the relations between the stored fields.
    pub fn validate(&self) -> Result<()> {
        ensure_positive("omega_c", self.omega_c)?;
        ensure_positive("omega_t", self.omega_t)?;
        ensure_finite("interaction", self.interaction)?;
        ensure_positive("t0", self.t0)?;
        let bar = self.generalized_rabi();
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1e-300);
        if !rel(self.t0, TAU / bar) {
            return Err(Error::invalid("t0", "must equal 2π/√(Ω_t² + V²)"));
        }
        if !rel(self.t_gate, TAU / self.omega_c + 2.0 * self.t0) {
            return Err(Error::invalid("t_gate", "must equal 2π/Ω_c + 2 t0"));
        }
        let phase = phase_for_interaction(self.omega_t, self.interaction);
        let diff = (phase - self.theta).rem_euclid(TAU);
        if diff.min(TAU - diff) > 1e-9 {
            return Err(Error::invalid("theta", "inconsistent with the interaction and omega_t"));
        }
        Ok(())
    }
}

/// Total duration `2π/Ω_c + 4π/Ω̄_t`.
pub fn gate_duration(params: &ProtocolParams) -> f64 {
    TAU / params.omega_c + 2.0 * TAU / params.generalized_rabi()
}

fn target_halves(omega_t: f64, couplings: impl Fn(f64) -> Vec<Coupling>, t0: f64) -> Result<[PulseSpec; 2]> {
    Ok([
        PulseSpec::new(Atom::Target, couplings(omega_t), t0)?,
        PulseSpec::new(Atom::Target, couplings(-omega_t), t0)?,
    ])
}

/// π pulse on the control, ± detuned cycles on the target, π pulse with the
/// control Rabi frequency negated.
pub fn build_cz_protocol(params: &ProtocolParams) -> Result<GateProtocol> {
    params.validate()?;
    let pi_time = PI / params.omega_c;
    let [first, second] = target_halves(
        params.omega_t,
        |o| vec![Coupling::real(AtomLevel::G1, AtomLevel::Ryd, o)],
        params.t0,
    )?;
    Ok(GateProtocol {
        pulses: vec![
            PulseSpec::new(Atom::Control, vec![Coupling::real(AtomLevel::G1, AtomLevel::Ryd, params.omega_c)], pi_time)?,
            first,
            second,
            PulseSpec::new(Atom::Control, vec![Coupling::real(AtomLevel::G1, AtomLevel::Ryd, -params.omega_c)], pi_time)?,
        ],
        nominal_interaction: params.interaction,
        target: TargetGate::ControlledPhase { theta: params.theta },
    })
}

/// CNOT variant: identical control pulses, and pulse 2 drives both target
/// qubit states with `±Ω_t/√2` so that only (|0⟩ + |1⟩)/√2 is excited.
/// Requires `θ = π`, i.e. `Ω_t/V = √3`.
pub fn build_cnot_protocol(params: &ProtocolParams) -> Result<GateProtocol> {
    params.validate()?;
    let diff = (params.theta - PI).abs();
    if diff > 1e-9 || (params.omega_t / params.interaction - 3f64.sqrt()).abs() > 1e-9 {
        return Err(Error::invalid(
            "theta",
            format!("CNOT requires theta = π (Ω_t/V = √3), got theta = {}", params.theta),
        ));
    }
    let pi_time = PI / params.omega_c;
    let control = PulseSpec::new(
        Atom::Control,
        vec![Coupling::real(AtomLevel::G1, AtomLevel::Ryd, params.omega_c)],
        pi_time,
    )?;
    let [first, second] = target_halves(
        params.omega_t,
        |o| {
            vec![
                Coupling::real(AtomLevel::G0, AtomLevel::Ryd, o * FRAC_1_SQRT_2),
                Coupling::real(AtomLevel::G1, AtomLevel::Ryd, o * FRAC_1_SQRT_2),
            ]
        },
        params.t0,
    )?;
    Ok(GateProtocol {
        pulses: vec![control.clone(), first, second, control],
        nominal_interaction: params.interaction,
        target: TargetGate::Cnot,
    })
}

/// Static estimate `2(Ω_t/E_hyper)²` of off-resonant excitation of |0⟩.
pub fn hyperfine_leakage_estimate(omega_t: f64, hyperfine_splitting: f64) -> f64 {
    2.0 * (omega_t / hyperfine_splitting).powi(2)
}
