//! Simulation of controlled-phase and CNOT gates between two Rydberg atoms
//! coupled by a weak van der Waals interaction.
//!
//! The gate works in the regime where the interaction `V` is comparable to
//! the Rabi frequency: the conditional phase comes from detuned Rabi cycles
//! of the |r1⟩ ↔ |rr⟩ transition rather than from a blockade.

pub mod error;
pub mod exposure;
pub mod fidelity;
pub mod interaction;
pub mod noise;
pub mod protocol;
pub mod quantum;
pub mod table;
pub mod units;

pub use error::{Error, Result};
pub use fidelity::{extract_gate_matrix, pedersen_fidelity, protocol_fidelity, GateMatrix, IdealGate};
pub use interaction::{distance, separation_for_interaction, vdw_interaction, InteractionSign, QubitGeometry, VdwModel};
pub use protocol::{
    build_cnot_protocol, build_cz_protocol, gate_duration, hyperfine_leakage_estimate,
    solve_interaction_for_phase, GateProtocol, ProtocolParams, PulseSpec, TargetGate,
};
pub use quantum::{evolve, exponentiate, Atom, AtomLevel, Drive, Hamiltonian, PropagatorSegment, TwoAtomState};
