//! Zero-forcing beam weights with equal power per beam.

use nalgebra::DMatrix;

use crate::em::CascadedChannel;
use crate::linalg::pseudo_inverse;
use crate::C64;

/// Default relative singular-value cutoff of the pseudo-inverse.
pub const DEFAULT_RTOL: f64 = 1e-10;

/// Excitations `A` (M elements × B beams), one beam per user.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights {
    pub weights: DMatrix<C64>,
    /// Total radiated power Λ (W), shared equally by the beams.
    pub total_power: f64,
    /// The channel had rank below the number of users.
    pub zf_degenerate: bool,
}

impl BeamWeights {
    pub fn num_beams(&self) -> usize {
        self.weights.ncols()
    }
}

/// Scales each non-zero column to squared norm `total_power / B`. Zero columns stay zero.
pub fn normalize_columns(a: &mut DMatrix<C64>, total_power: f64) {
    let b = a.ncols();
    if b == 0 {
        return;
    }
    let target = (total_power / b as f64).sqrt();
    for mut col in a.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col *= C64::from(target / n);
        }
    }
}

/// Pseudo-inverse of Υ with columns normalized to `Λ/B` each.
pub fn zf_weights(channel: &CascadedChannel, total_power: f64, rtol: f64) -> BeamWeights {
    let (mut weights, rank) = pseudo_inverse(channel.matrix(), rtol);
    let zf_degenerate = rank < channel.num_users();
    if zf_degenerate {
        log::debug!("channel rank {rank} below {} users", channel.num_users());
    }
    normalize_columns(&mut weights, total_power);
    BeamWeights { weights, total_power, zf_degenerate }
}
