//! State-vector dynamics of two three-level atoms.
//!
//! Each atom carries the levels `g0`, `g1` (the qubit) and a Rydberg level.
//! The two-atom space is the 9-dimensional product with basis index
//! `3 * control + target`. Hamiltonians are piecewise constant, so every
//! segment is propagated exactly through a Hermitian eigendecomposition.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

pub use num_complex::Complex64 as C64;
pub type Mat9 = SMatrix<C64, 9, 9>;
pub type Vec9 = SVector<C64, 9>;

pub const DIM: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomLevel {
    G0,
    G1,
    Ryd,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 3] = [AtomLevel::G0, AtomLevel::G1, AtomLevel::Ryd];

    pub fn index(self) -> usize {
        match self {
            AtomLevel::G0 => 0,
            AtomLevel::G1 => 1,
            AtomLevel::Ryd => 2,
        }
    }

    pub fn is_rydberg(self) -> bool {
        self == AtomLevel::Ryd
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Atom {
    Control,
    Target,
}

/// Index of |control, target⟩ in the product basis.
pub fn basis_index(control: AtomLevel, target: AtomLevel) -> usize {
    3 * control.index() + target.index()
}

/// Levels of both atoms for a product-basis index.
pub fn basis_levels(index: usize) -> (AtomLevel, AtomLevel) {
    assert!(index < DIM, "basis index {index} out of range");
    (AtomLevel::ALL[index / 3], AtomLevel::ALL[index % 3])
}

/// Number of atoms in the Rydberg level for every basis state.
pub fn rydberg_count(index: usize) -> f64 {
    let (c, t) = basis_levels(index);
    (c.is_rydberg() as u8 + t.is_rydberg() as u8) as f64
}

/// Product-basis indices of the computational states |00⟩, |01⟩, |10⟩, |11⟩.
pub const COMPUTATIONAL: [usize; 4] = [0, 1, 3, 4];

/// Index of the doubly excited state |rr⟩.
pub const RR: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoAtomState {
    amp: Vec9,
}

impl TwoAtomState {
    /// Wraps an amplitude vector without renormalizing it.
    pub fn from_amplitudes(amp: Vec9) -> Self {
        Self { amp }
    }

    pub fn basis(control: AtomLevel, target: AtomLevel) -> Self {
        let mut amp = Vec9::zeros();
        amp[basis_index(control, target)] = C64::new(1.0, 0.0);
        Self { amp }
    }

    pub fn computational(index: usize) -> Self {
        let mut amp = Vec9::zeros();
        amp[COMPUTATIONAL[index]] = C64::new(1.0, 0.0);
        Self { amp }
    }

    pub fn amplitudes(&self) -> &Vec9 {
        &self.amp
    }

    pub fn amplitude(&self, control: AtomLevel, target: AtomLevel) -> C64 {
        self.amp[basis_index(control, target)]
    }

    pub fn norm(&self) -> f64 {
        self.amp.norm()
    }

    /// Expectation of the number of Rydberg-excited atoms.
    pub fn rydberg_population(&self) -> f64 {
        self.amp
            .iter()
            .enumerate()
            .map(|(i, a)| rydberg_count(i) * a.norm_sqr())
            .sum()
    }

    pub fn apply(&self, u: &Mat9) -> Self {
        Self { amp: u * self.amp }
    }
}

/// One laser coupling `from → to` on a single atom with complex Rabi
/// frequency `amplitude` (rad/μs). Contributes `(Ω/2)|to⟩⟨from| + H.c.`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub atom: Atom,
    pub from: AtomLevel,
    pub to: AtomLevel,
    pub amplitude: C64,
}

impl Drive {
    pub fn new(atom: Atom, from: AtomLevel, to: AtomLevel, amplitude: C64) -> Self {
        Self { atom, from, to, amplitude }
    }

    pub fn real(atom: Atom, from: AtomLevel, to: AtomLevel, amplitude: f64) -> Self {
        Self::new(atom, from, to, C64::new(amplitude, 0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    matrix: Mat9,
}

/// Largest elementwise deviation of `m` from Hermiticity.
pub fn hermitian_defect(m: &Mat9) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..DIM {
        for j in 0..DIM {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest elementwise deviation of `U†U` from the identity.
pub fn unitarity_defect(u: &Mat9) -> f64 {
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..DIM {
        for j in 0..DIM {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

impl Hamiltonian {
    /// Sum of the laser couplings plus `interaction` on |rr⟩⟨rr|.
    pub fn build(drives: &[Drive], interaction: f64) -> Result<Self> {
        ensure_finite("interaction", interaction)?;
        let mut h = Mat9::zeros();
        for d in drives {
            if !(d.amplitude.re.is_finite() && d.amplitude.im.is_finite()) {
                return Err(Error::invalid(
                    "drive amplitude",
                    format!("must be finite, got {}", d.amplitude),
                ));
            }
            if d.from == d.to {
                return Err(Error::invalid(
                    "drive levels",
                    format!("from and to must differ, both are {:?}", d.from),
                ));
            }
            let half = d.amplitude * 0.5;
            for spectator in AtomLevel::ALL {
                let (row, col) = match d.atom {
                    Atom::Control => (basis_index(d.to, spectator), basis_index(d.from, spectator)),
                    Atom::Target => (basis_index(spectator, d.to), basis_index(spectator, d.from)),
                };
                h[(row, col)] += half;
                h[(col, row)] += half.conj();
            }
        }
        h[(RR, RR)] += C64::new(interaction, 0.0);
        Ok(Self { matrix: h })
    }

    /// Accepts an arbitrary matrix if it is Hermitian within 1e-12.
    pub fn from_matrix(matrix: Mat9) -> Result<Self> {
        let defect = hermitian_defect(&matrix);
        if defect.is_finite() && defect < 1e-12 {
            Ok(Self { matrix })
        } else {
            Err(Error::Numeric(format!("matrix is not Hermitian (defect {defect:e})")))
        }
    }

    pub fn matrix(&self) -> &Mat9 {
        &self.matrix
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<[f64; DIM]> {
        let (mut values, _) = eigh(&self.matrix)?;
        values.sort_by(f64::total_cmp);
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSegment {
    unitary: Mat9,
    duration: f64,
}

impl PropagatorSegment {
    pub fn identity() -> Self {
        Self { unitary: Mat9::identity(), duration: 0.0 }
    }

    pub fn unitary(&self) -> &Mat9 {
        &self.unitary
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn adjoint(&self) -> Self {
        Self { unitary: self.unitary.adjoint(), duration: self.duration }
    }
}

/// Hermitian eigendecomposition `H = V Λ V†`, checked by recomposition.
fn eigh(h: &Mat9) -> Result<([f64; DIM], Mat9)> {
    let a = faer::Mat::<C64>::from_fn(DIM, DIM, |i, j| h[(i, j)]);
    let eig = a
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numeric(format!("Hermitian eigendecomposition failed: {e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut values = [0.0; DIM];
    for (k, v) in values.iter_mut().enumerate() {
        *v = s[k].re;
    }
    let vectors = Mat9::from_fn(|i, j| u[(i, j)]);
    let mut scaled = vectors;
    for (k, &lambda) in values.iter().enumerate() {
        scaled.column_mut(k).scale_mut(lambda);
    }
    let residual = (scaled * vectors.adjoint() - h).norm();
    if !(residual <= 1e-12 * h.norm().max(1.0)) {
        return Err(Error::Numeric(format!("eigendecomposition residual {residual:e} is too large")));
    }
    Ok((values, vectors))
}

/// `exp(-i H t)` from the eigendecomposition `H = V Λ V†`.
pub fn exponentiate(h: &Hamiltonian, t: f64) -> Result<PropagatorSegment> {
    ensure_finite("duration", t)?;
    if t < 0.0 {
        return Err(Error::invalid("duration", format!("must be non-negative, got {t}")));
    }
    let (values, vectors) = eigh(&h.matrix)?;
    let mut scaled = vectors;
    for (k, &lambda) in values.iter().enumerate() {
        let phase = C64::from_polar(1.0, -lambda * t);
        for row in 0..DIM {
            scaled[(row, k)] *= phase;
        }
    }
    let unitary = scaled * vectors.adjoint();
    let defect = unitarity_defect(&unitary);
    if !(defect < 1e-10) {
        return Err(Error::Numeric(format!("propagator is not unitary (defect {defect:e})")));
    }
    Ok(PropagatorSegment { unitary, duration: t })
}

/// Applies the segments in order.
pub fn evolve(state: &TwoAtomState, segments: &[PropagatorSegment]) -> Result<TwoAtomState> {
    if segments.is_empty() {
        return Err(Error::invalid("segments", "at least one segment is required"));
    }
    Ok(segments.iter().fold(state.clone(), |psi, seg| psi.apply(&seg.unitary)))
}

/// Product `U_n ⋯ U_1` of the segments.
pub fn compose(segments: &[PropagatorSegment]) -> Mat9 {
    segments.iter().fold(Mat9::identity(), |acc, seg| seg.unitary * acc)
}
