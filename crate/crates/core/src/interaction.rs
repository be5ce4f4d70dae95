//! Isotropic van der Waals interaction and two-trap geometry.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Result};
use crate::units::C6_RB87_97S;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionSign {
    #[default]
    Repulsive,
    Attractive,
}

impl InteractionSign {
    pub fn factor(self) -> f64 {
        match self {
            InteractionSign::Repulsive => 1.0,
            InteractionSign::Attractive => -1.0,
        }
    }
}

/// `V(d) = ± C₆ / d⁶`, with `c6_over_hbar` in rad/μs·μm⁶.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VdwModel {
    c6_over_hbar: f64,
    sign: InteractionSign,
}

impl Default for VdwModel {
    fn default() -> Self {
        Self { c6_over_hbar: C6_RB87_97S, sign: InteractionSign::Repulsive }
    }
}

impl VdwModel {
    pub fn new(c6_over_hbar: f64, sign: InteractionSign) -> Result<Self> {
        ensure_positive("c6_over_hbar", c6_over_hbar)?;
        Ok(Self { c6_over_hbar, sign })
    }

    pub fn c6_over_hbar(&self) -> f64 {
        self.c6_over_hbar
    }

    pub fn sign(&self) -> InteractionSign {
        self.sign
    }

    /// Interaction (rad/μs) at distance `dist` (μm).
    pub fn interaction(&self, dist: f64) -> Result<f64> {
        ensure_positive("distance", dist)?;
        Ok(self.interaction_unchecked(dist))
    }

    #[inline]
    pub(crate) fn interaction_unchecked(&self, dist: f64) -> f64 {
        let d2 = dist * dist;
        self.sign.factor() * self.c6_over_hbar / (d2 * d2 * d2)
    }

    /// Distance at which `|V|` equals `interaction`.
    pub fn separation_for(&self, interaction: f64) -> Result<f64> {
        ensure_positive("interaction", interaction)?;
        Ok((self.c6_over_hbar / interaction).powf(1.0 / 6.0))
    }
}

pub fn vdw_interaction(model: &VdwModel, dist: f64) -> Result<f64> {
    model.interaction(dist)
}

pub fn separation_for_interaction(model: &VdwModel, interaction: f64) -> Result<f64> {
    model.separation_for(interaction)
}

/// Positions of the two atoms as offsets from their trap centers, which sit at
/// the origin (control) and at `(L, 0, 0)` (target).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitGeometry {
    pub control: [f64; 3],
    pub target: [f64; 3],
    pub trap_separation: f64,
}

impl QubitGeometry {
    pub fn new(control: [f64; 3], target: [f64; 3], trap_separation: f64) -> Result<Self> {
        for v in control.iter().chain(target.iter()) {
            ensure_finite("position offset", *v)?;
        }
        ensure_positive("trap_separation", trap_separation)?;
        Ok(Self { control, target, trap_separation })
    }

    pub fn centered(trap_separation: f64) -> Result<Self> {
        Self::new([0.0; 3], [0.0; 3], trap_separation)
    }

    pub fn distance(&self) -> f64 {
        pair_distance(
            self.control[0] - self.target[0],
            self.control[1] - self.target[1],
            self.control[2] - self.target[2],
            self.trap_separation,
        )
    }
}

pub fn distance(geom: &QubitGeometry) -> f64 {
    geom.distance()
}

/// Interatomic distance from the coordinate differences `control − target`.
#[inline]
pub(crate) fn pair_distance(dx: f64, dy: f64, dz: f64, trap_separation: f64) -> f64 {
    let x = dx - trap_separation;
    (x * x + dy * dy + dz * dz).sqrt()
}
