//! Physical constants and unit conversions.

/// Vacuum permittivity (F/m), CODATA 2018.
pub const EPS0: f64 = 8.8541878128e-12;
/// Vacuum permeability (H/m), CODATA 2018.
pub const MU0: f64 = 1.25663706212e-6;
/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;

/// Free-space wavenumber `2π f √(ε0 μ0)` in rad/m.
pub fn wavenumber(f0_hz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f0_hz * (EPS0 * MU0).sqrt()
}

/// Free-space impedance `√(μ0/ε0)` in ohms.
pub fn free_space_impedance() -> f64 {
    (MU0 / EPS0).sqrt()
}

pub fn wavelength(f0_hz: f64) -> f64 {
    2.0 * std::f64::consts::PI / wavenumber(f0_hz)
}

/// `W = 10^((dBm - 30)/10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}
