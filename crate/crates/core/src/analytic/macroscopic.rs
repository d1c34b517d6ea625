//! Steady-state nuclear polarization of a liquid layer over a dense NV layer.
//!
//! Every NV cycle of length τ_rep hands ½·α of polarization to the N nuclei
//! it addresses, i.e. ½·α/N per nucleus. Diffusion spreads these nuclei
//! through the whole layer, so per unit surface area the injected flux is
//!
//! ```text
//! J = σ_NV · ½·α / τ_rep          [nm⁻²·μs⁻¹]
//! ```
//!
//! with σ_NV the NV areal density. Balancing J against nuclear relaxation T₁ₙ
//! in a layer of thickness h and proton density ρ gives the layer mean
//!
//! ```text
//! P = J · T₁ₙ / (ρ · h)
//! ```
//!
//! N cancels: a larger addressed ensemble gets less per nucleus but is
//! refreshed proportionally less often. When polarization only spreads by
//! diffusion D over one T₁ₙ, the profile decays with ℓ = √(D·T₁ₙ) and the
//! polarization next to the surface is
//!
//! ```text
//! P(0) = J · ℓ · coth(h/ℓ) / (ρ · D)
//! ```
//!
//! which reduces to the layer mean for ℓ ≫ h.

/// Time to re-initialize the NV optically between transfer cycles, μs.
pub const NV_REINIT_US: f64 = 1.0;

/// Thermal polarization scale used as the comparison benchmark.
pub const THERMAL_BENCHMARK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvLayerGeometry {
    /// NV areal density, nm⁻².
    pub nv_areal_density: f64,
    /// Liquid layer thickness, nm.
    pub layer_thickness: f64,
    /// Proton density of the liquid, nm⁻³.
    pub rho: f64,
    /// Molecular diffusion coefficient, nm²·μs⁻¹.
    pub diffusion: f64,
}

impl NvLayerGeometry {
    /// 10¹¹ NV·cm⁻² under a 3 μm oil film.
    pub fn dense_nv_oil_film() -> Self {
        Self {
            nv_areal_density: 1e-3,
            layer_thickness: 3000.0,
            rho: 50.0,
            diffusion: 0.46,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroscopicEstimate {
    /// ½·α/N, polarization handed to each addressed nucleus per cycle.
    pub per_cycle_injection: f64,
    /// J, nm⁻²·μs⁻¹.
    pub flux: f64,
    /// Layer-averaged steady-state polarization.
    pub layer_mean: f64,
    /// Steady-state polarization at the diamond surface.
    pub near_surface: f64,
    /// ℓ = √(D·T₁ₙ), nm.
    pub diffusion_length: f64,
}

impl MacroscopicEstimate {
    pub fn enhancement_over(&self, thermal: f64) -> f64 {
        self.layer_mean / thermal
    }
}

/// Steady-state polarization for transfer efficiency `alpha`, `n_spins` nuclei per NV,
/// cycle time `repetition_time` and nuclear relaxation `t1n` (both μs).
pub fn macroscopic_polarization(
    alpha: f64,
    n_spins: f64,
    repetition_time: f64,
    t1n: f64,
    geometry: &NvLayerGeometry,
) -> MacroscopicEstimate {
    let injected = 0.5 * alpha;
    let flux = geometry.nv_areal_density * injected / repetition_time;
    let layer_mean = flux * t1n / (geometry.rho * geometry.layer_thickness);
    let ell = (geometry.diffusion * t1n).sqrt();
    let near_surface = if ell == 0.0 {
        0.0
    } else if geometry.diffusion == 0.0 {
        layer_mean
    } else {
        flux * ell / (geometry.rho * geometry.diffusion * (geometry.layer_thickness / ell).tanh())
    };
    MacroscopicEstimate {
        per_cycle_injection: if n_spins > 0.0 { injected / n_spins } else { 0.0 },
        flux,
        layer_mean,
        near_surface,
        diffusion_length: ell,
    }
}
