//! Scattering model of the RIS and its supporting wall.
//!
//! The surface is discretised into quadrature nodes (one per patch, or four
//! with [`Quadrature::Sub2x2`](crate::scene::Quadrature)). For each node the
//! incident field of every BS element is computed with a scalar free-space
//! kernel along the BS polarization; the induced electric and magnetic
//! surface currents follow from the local susceptibilities, and the far field
//! at a user is the co-polar projection of the radiated current integral.

mod calibration;
mod cascade;
mod currents;
mod footprint;
mod incidence;
mod nodes;
mod radiation;
pub mod table;

pub use calibration::{uniform_sheet_reflection, verify_calibration, CalibrationReport};
pub use cascade::{cascaded_matrix, far_fields, CascadedChannel, PatchResponses};
pub use currents::{patch_currents, SurfaceCurrent};
pub use footprint::{footprint, FootprintGrid};
pub use incidence::{incidence_matrix, IncidenceMatrix};
pub use nodes::{surface_nodes, Node};
pub use radiation::RadiationMatrix;
pub use table::{calibrate_state_table, PhaseLaw, StateEntry, SusceptibilityTable, WallModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discrete RIS configuration: one 1-based state per meta-atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RisConfiguration(pub Vec<u16>);

impl RisConfiguration {
    pub fn uniform(len: usize, state: u16) -> Self {
        Self(vec![state; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn states(&self) -> &[u16] {
        &self.0
    }

    /// Checks length and that every state lies in `1..=num_states`.
    pub fn validate(&self, num_patches: usize, num_states: u16) -> Result<()> {
        if self.0.len() != num_patches {
            return Err(Error::dim(format!("configuration has {} states for {num_patches} patches", self.0.len())));
        }
        match self.0.iter().position(|&s| s == 0 || s > num_states) {
            Some(p) => Err(Error::StateOutOfRange { patch: p, state: self.0[p], max: num_states }),
            None => Ok(()),
        }
    }

    /// Mean absolute state difference, the per-patch average of `|a − b|`.
    pub fn mean_abs_difference(&self, other: &Self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        let total: u64 = self.0.iter().zip(&other.0).map(|(&a, &b)| u64::from(a.abs_diff(b))).sum();
        total as f64 / self.0.len() as f64
    }
}

impl std::fmt::Display for RisConfiguration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// How the locally averaged fields entering the surface currents are formed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Averaged fields equal the incident fields at the node.
    #[default]
    Incident,
    /// Averaged fields equal the incident fields scaled by a real factor.
    TwoSided(f64),
}

impl Averaging {
    pub fn factor(&self) -> f64 {
        match *self {
            Averaging::Incident => 1.0,
            Averaging::TwoSided(f) => f,
        }
    }
}

/// Treatment of the tangential-gradient terms of the surface currents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TangentialGradient {
    /// Piecewise-constant susceptibilities: gradient terms vanish.
    #[default]
    Off,
    /// Finite differences of the normal field components across neighbouring nodes.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceModel {
    pub averaging: Averaging,
    pub tangential_gradient: TangentialGradient,
}
