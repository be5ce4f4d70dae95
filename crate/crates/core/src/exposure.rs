//! Time-integrated Rydberg population.
//!
//! For every input state the expected number of Rydberg-excited atoms is
//! integrated over the whole pulse sequence with composite Simpson
//! quadrature, propagating exactly between nodes. The result, averaged over
//! the inputs, is the time the pair spends in Rydberg states; divided by the
//! Rydberg lifetime it estimates the decay error of the gate.

use crate::error::{ensure_positive, Error, Result};
use crate::protocol::GateProtocol;
use crate::quantum::{exponentiate, TwoAtomState};

/// Default number of Simpson intervals per pulse.
pub const DEFAULT_STEPS_PER_PULSE: usize = 2000;

/// Relative change allowed when the step is halved.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

/// Mean over `initial_states` of ∫⟨n_ryd⟩ dt (μs) for `protocol` at its
/// nominal interaction, with Simpson nodes at most `dt` apart.
///
/// The result is also computed with `dt/2`; the finer value is returned,
/// and a relative change above [`CONVERGENCE_TOLERANCE`] is an error.
pub fn rydberg_exposure(initial_states: &[TwoAtomState], protocol: &GateProtocol, dt: f64) -> Result<f64> {
    rydberg_exposure_at(initial_states, protocol, protocol.nominal_interaction, dt)
}

pub fn rydberg_exposure_at(
    initial_states: &[TwoAtomState],
    protocol: &GateProtocol,
    interaction: f64,
    dt: f64,
) -> Result<f64> {
    ensure_positive("dt", dt)?;
    let shortest = protocol
        .pulses
        .iter()
        .map(|p| p.duration)
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if shortest.is_infinite() {
        return Ok(0.0);
    }
    if dt >= shortest {
        return Err(Error::invalid(
            "dt",
            format!("must be shorter than the shortest pulse ({shortest} μs), got {dt}"),
        ));
    }
    let coarse = integrate(initial_states, protocol, interaction, |d| (d / dt).ceil() as usize)?;
    let fine = integrate(initial_states, protocol, interaction, |d| (2.0 * d / dt).ceil() as usize)?;
    check_convergence(coarse, fine)?;
    Ok(fine)
}

/// Same quantity with a fixed number of Simpson intervals per pulse.
pub fn rydberg_exposure_steps(
    initial_states: &[TwoAtomState],
    protocol: &GateProtocol,
    interaction: f64,
    steps_per_pulse: usize,
) -> Result<f64> {
    if steps_per_pulse < 2 {
        return Err(Error::invalid("steps_per_pulse", "need at least 2 intervals"));
    }
    let coarse = integrate(initial_states, protocol, interaction, |_| steps_per_pulse)?;
    let fine = integrate(initial_states, protocol, interaction, |_| 2 * steps_per_pulse)?;
    check_convergence(coarse, fine)?;
    Ok(fine)
}

/// Average Rydberg time over the four computational input states, with the
/// default quadrature. For the controlled-phase gate |00⟩ is never excited,
/// so this is one quarter of the sum over |01⟩, |10⟩, |11⟩.
pub fn t_ryd(protocol: &GateProtocol) -> Result<f64> {
    let inputs: Vec<TwoAtomState> = (0..4).map(TwoAtomState::computational).collect();
    rydberg_exposure_steps(&inputs, protocol, protocol.nominal_interaction, DEFAULT_STEPS_PER_PULSE)
}

fn check_convergence(coarse: f64, fine: f64) -> Result<()> {
    let scale = fine.abs().max(f64::MIN_POSITIVE);
    if (coarse - fine).abs() > CONVERGENCE_TOLERANCE * scale {
        return Err(Error::Numeric(format!(
            "Rydberg exposure not converged: {coarse} vs {fine} after halving the step"
        )));
    }
    Ok(())
}

fn integrate(
    initial_states: &[TwoAtomState],
    protocol: &GateProtocol,
    interaction: f64,
    intervals: impl Fn(f64) -> usize,
) -> Result<f64> {
    if initial_states.is_empty() {
        return Err(Error::invalid("initial_states", "at least one state is required"));
    }
    let mut states = initial_states.to_vec();
    let mut total = 0.0;
    for pulse in &protocol.pulses {
        if pulse.duration == 0.0 {
            continue;
        }
        let h = pulse.hamiltonian(interaction)?;
        let mut n = intervals(pulse.duration).max(2);
        n += n % 2;
        let step = pulse.duration / n as f64;
        let u = exponentiate(&h, step)?;
        for psi in states.iter_mut() {
            let mut acc = psi.rydberg_population();
            for k in 1..=n {
                *psi = psi.apply(u.unitary());
                let w = if k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * psi.rydberg_population();
            }
            total += acc * step / 3.0;
        }
    }
    Ok(total / initial_states.len() as f64)
}
