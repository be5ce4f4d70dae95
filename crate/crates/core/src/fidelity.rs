//! Computational-subspace gate matrices and the average gate fidelity
//! `[|Tr(U†M)|² + Tr(U†MM†U)] / (n(n+1))` for a possibly leaky `M`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::Matrix4;
use crate::error::Result;
use crate::protocol::{GateProtocol, TargetGate};
use crate::quantum::{Mat9, C64, COMPUTATIONAL};

pub type Mat4 = Matrix4<C64>;

/// 4 × 4 block of a propagator on {|00⟩, |01⟩, |10⟩, |11⟩}. Columns are
/// inputs; the matrix may be sub-unitary when population leaks out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateMatrix(pub Mat4);

impl GateMatrix {
    /// Restricts a full propagator to the computational block and rotates the
    /// global phase so that the |00⟩ → |00⟩ element is real and non-negative.
    pub fn from_propagator(u: &Mat9) -> Self {
        let mut m = Mat4::from_fn(|i, j| u[(COMPUTATIONAL[i], COMPUTATIONAL[j])]);
        let corner = m[(0, 0)];
        if corner.norm() > 1e-300 {
            let phase = corner.conj() / corner.norm();
            m *= phase;
        }
        GateMatrix(m)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    /// Largest singular value; ≤ 1 for a contraction.
    pub fn max_singular_value(&self) -> f64 {
        self.0.singular_values().max()
    }

    /// Largest modulus among the off-diagonal entries.
    pub fn off_diagonal_max(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    worst = worst.max(self.0[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Largest elementwise distance to `other`.
    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        (self.0 - other).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGate(Mat4);

impl IdealGate {
    pub fn controlled_phase(theta: f64) -> Self {
        let one = C64::new(1.0, 0.0);
        IdealGate(Mat4::from_diagonal(&nalgebra::Vector4::new(one, one, one, C64::from_polar(1.0, theta))))
    }

    pub fn cz() -> Self {
        Self::controlled_phase(std::f64::consts::PI)
    }

    /// Flips the target when the control is |1⟩: swaps |10⟩ and |11⟩.
    pub fn cnot() -> Self {
        let mut m = Mat4::zeros();
        let one = C64::new(1.0, 0.0);
        m[(0, 0)] = one;
        m[(1, 1)] = one;
        m[(3, 2)] = one;
        m[(2, 3)] = one;
        IdealGate(m)
    }

    pub fn identity() -> Self {
        IdealGate(Mat4::identity())
    }

    pub fn for_target(target: &TargetGate) -> Self {
        match *target {
            TargetGate::ControlledPhase { theta } => Self::controlled_phase(theta),
            TargetGate::Cnot => Self::cnot(),
        }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }
}

/// `I ⊗ B` where `B` maps |0⟩, |1⟩ to |0̄⟩ = (|0⟩ − |1⟩)/√2 and |1̄⟩ = (|0⟩ + |1⟩)/√2.
pub fn barred_basis_change() -> Mat4 {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let b = nalgebra::Matrix2::new(s, s, -s, s);
    let mut m = Mat4::zeros();
    for blk in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                m[(2 * blk + i, 2 * blk + j)] = b[(i, j)];
            }
        }
    }
    m
}

/// Simulates the four computational inputs through the full 9-level space.
pub fn extract_gate_matrix(protocol: &GateProtocol, interaction: f64) -> Result<GateMatrix> {
    Ok(GateMatrix::from_propagator(&protocol.propagator(interaction)?))
}

pub fn pedersen_fidelity(actual: &GateMatrix, ideal: &IdealGate) -> f64 {
    let u_dag = ideal.0.adjoint();
    let m = actual.0;
    let overlap = (u_dag * m).trace().norm_sqr();
    let retained = (u_dag * m * m.adjoint() * ideal.0).trace().re;
    let n = 4.0;
    (overlap + retained) / (n * (n + 1.0))
}

/// Fidelity of `protocol` against its own target gate at `interaction`.
pub fn protocol_fidelity(protocol: &GateProtocol, interaction: f64) -> Result<f64> {
    let ideal = IdealGate::for_target(&protocol.target);
    Ok(pedersen_fidelity(&extract_gate_matrix(protocol, interaction)?, &ideal))
}
