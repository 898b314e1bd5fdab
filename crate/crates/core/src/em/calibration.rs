use std::f64::consts::PI;

use super::cascade::cascaded_matrix;
use super::incidence::{green, incidence_matrix};
use super::radiation::RadiationMatrix;
use super::table::{PhaseLaw, StateEntry, SusceptibilityTable};
use super::RisConfiguration;
use crate::error::Result;
use crate::scene::{build_scene, SceneConfig, Vec3};
use crate::{units, C64};

/// Side of the test sheet in wavelengths.
const SHEET_WAVELENGTHS: usize = 20;
/// Source and observer distance in wavelengths.
const RANGE_WAVELENGTHS: f64 = 1e5;

/// Specular reflection coefficient of `entry` measured with the forward model.
///
/// A 20λ × 20λ sheet of λ/2 patches is illuminated at normal incidence by one
/// element on the axis far away; the backscattered field is divided by the
/// field an ideal reflector of the same size would return.
pub fn uniform_sheet_reflection(entry: &StateEntry, f0_hz: f64) -> Result<C64> {
    let lambda = units::wavelength(f0_hz);
    let side = SHEET_WAVELENGTHS as f64 * lambda;
    let range = RANGE_WAVELENGTHS * lambda;
    let cells = 2 * SHEET_WAVELENGTHS;
    let scene = build_scene(&SceneConfig {
        f0_hz,
        bs_rows: 1,
        bs_cols: 1,
        bs_position: [0.0, 0.0, range],
        polarization: [1.0, 0.0, 0.0],
        ris_rows: cells,
        ris_cols: cells,
        ris_width_m: side,
        ris_height_m: side,
        wall_width_m: side,
        wall_height_m: side,
        surface_origin: [0.0, 0.0, 0.0],
        surface_u: [1.0, 0.0, 0.0],
        surface_normal: [0.0, 0.0, 1.0],
        ..SceneConfig::default()
    })?
    .without_wall();
    let table = SusceptibilityTable::new(1, f0_hz, vec![*entry; 2], *entry, String::new())?;
    let incidence = incidence_matrix(&scene);
    let observer = Vec3::new(0.0, 0.0, range);
    let radiation = RadiationMatrix::new(&scene, &incidence.nodes, &[observer]);
    let config = RisConfiguration::uniform(scene.num_ris(), 1);
    let field = cascaded_matrix(&scene, &table, &config, &incidence, &radiation)?.0[(0, 0)];
    let k0 = scene.k0;
    let reference = C64::new(0.0, k0 * side * side / (2.0 * PI * range))
        * C64::from_polar(1.0, -k0 * range)
        * green(k0, &observer, &Vec3::zeros());
    Ok(field / reference)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    /// Target and measured reflection per state.
    pub states: Vec<(C64, C64)>,
    /// Largest phase deviation from target (degrees).
    pub max_phase_error_deg: f64,
    /// `max |R_s| / min |R_s| − 1` over states.
    pub amplitude_spread: f64,
    pub max_amplitude: f64,
}

impl CalibrationReport {
    /// Phase within `phase_tol_deg` and amplitude spread within `amplitude_tol`.
    pub fn passes(&self, phase_tol_deg: f64, amplitude_tol: f64) -> bool {
        self.max_phase_error_deg <= phase_tol_deg && self.amplitude_spread <= amplitude_tol
    }
}

/// Measures every state of `table` against the targets `amplitude · exp(j phase(s))`.
pub fn verify_calibration(table: &SusceptibilityTable, amplitude: f64, law: PhaseLaw) -> Result<CalibrationReport> {
    let mut states = Vec::with_capacity(table.states.len());
    for (i, entry) in table.states.iter().enumerate() {
        let target = C64::from_polar(amplitude, law.phase(i as u16 + 1, table.bits));
        states.push((target, uniform_sheet_reflection(entry, table.f0_hz)?));
    }
    let max_phase_error_deg = states
        .iter()
        .map(|(t, m)| (m / t).arg().abs().to_degrees())
        .fold(0.0, f64::max);
    let mags: Vec<f64> = states.iter().map(|(_, m)| m.norm()).collect();
    let max_amplitude = mags.iter().copied().fold(0.0, f64::max);
    let min_amplitude = mags.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CalibrationReport {
        states,
        max_phase_error_deg,
        amplitude_spread: max_amplitude / min_amplitude - 1.0,
        max_amplitude,
    })
}
