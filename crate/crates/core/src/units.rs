//! Physical constants and unit conversions.
//!
//! Internal units throughout the crate: nm, μs, rad·μs⁻¹, tesla.

use std::f64::consts::PI;

/// CODATA 2018 values in SI.
mod si {
    pub const MU0: f64 = 1.256_637_062_12e-6; // N·A⁻²
    pub const HBAR: f64 = 1.054_571_817e-34; // J·s
    pub const KB: f64 = 1.380_649e-23; // J·K⁻¹
    pub const GAMMA_E: f64 = 1.760_859_630_23e11; // rad·s⁻¹·T⁻¹
    pub const GAMMA_P: f64 = 2.675_221_874_4e8; // rad·s⁻¹·T⁻¹
}

const PER_SECOND_TO_PER_US: f64 = 1e-6;
const M3_TO_NM3: f64 = 1e27;
pub const GAUSS_PER_TESLA: f64 = 1e4;

/// Gyromagnetic ratios and the electron-proton dipolar prefactor in internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// rad·μs⁻¹·T⁻¹
    pub gamma_e: f64,
    /// ¹H, rad·μs⁻¹·T⁻¹
    pub gamma_n: f64,
    /// (μ₀/4π)·γ_e·γ_n·ħ in rad·μs⁻¹·nm³
    pub dipolar_prefactor: f64,
}

impl PhysicalConstants {
    pub fn codata() -> Self {
        let b0_si = si::MU0 / (4.0 * PI) * si::GAMMA_E * si::GAMMA_P * si::HBAR; // rad·s⁻¹·m³
        Self {
            gamma_e: si::GAMMA_E * PER_SECOND_TO_PER_US,
            gamma_n: si::GAMMA_P * PER_SECOND_TO_PER_US,
            dipolar_prefactor: b0_si * PER_SECOND_TO_PER_US * M3_TO_NM3,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

pub fn gauss_to_tesla(gauss: f64) -> f64 {
    gauss / GAUSS_PER_TESLA
}

pub fn tesla_to_gauss(tesla: f64) -> f64 {
    tesla * GAUSS_PER_TESLA
}

/// ¹H Larmor frequency ω_N = γ_n·B in rad·μs⁻¹.
pub fn larmor_frequency(field_tesla: f64) -> f64 {
    PhysicalConstants::codata().gamma_n * field_tesla
}

/// Angular frequency (rad·μs⁻¹) to cyclic frequency in MHz.
pub fn to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI)
}

/// Thermal spin-½ polarization tanh(ħω/2k_BT) for a Larmor frequency in rad·μs⁻¹.
pub fn thermal_polarization(omega: f64, temperature_k: f64) -> f64 {
    let omega_si = omega / PER_SECOND_TO_PER_US;
    (si::HBAR * omega_si / (2.0 * si::KB * temperature_k)).tanh()
}
