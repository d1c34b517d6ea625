//! Incoherent master-equation model of the NV population.
//!
//! The population obeys
//!
//! ```text
//! d⟨n⟩/dt = −¼·N·γ(t)·(⟨n⟩ − n_B) − (⟨n⟩ − ½)/T₁ρ
//! ```
//!
//! with the memory kernel γ(t). For the exponential kernel γ = σ²τ_c(1 − e^{−t/τ_c}),
//! no T₁ρ and ⟨n⟩(0) = 1 the solution is closed:
//!
//! ```text
//! ⟨n⟩ = n_B + (1 − n_B)·exp(¼·N·τ_c²·σ²·(1 − t/τ_c − e^{−t/τ_c}))
//! ```
//!
//! which decays as a Gaussian with rate √(Nσ²/8) for t ≪ τ_c and exponentially
//! with rate ¼Nσ²τ_c for t ≫ τ_c.

mod macroscopic;
pub mod ode;

pub use macroscopic::{
    macroscopic_polarization, MacroscopicEstimate, NvLayerGeometry, NV_REINIT_US, THERMAL_BENCHMARK,
};

use crate::curve::{PolarizationCurve, Provenance};
use crate::error::{Error, Result};
use crate::statistics::CorrelationEstimate;
use ode::Tolerance;

pub const MASTER_TOLERANCE: Tolerance = Tolerance {
    rtol: 1e-8,
    atol: 1e-13,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticModel {
    pub n_spins: f64,
    /// rad²·μs⁻²
    pub sigma2: f64,
    /// μs
    pub tau_c: f64,
    /// μs; `None` is infinite.
    pub t1rho: Option<f64>,
    /// Mean bath population, ½ for a thermal bath.
    pub n_b: f64,
}

impl AnalyticModel {
    pub fn new(n_spins: f64, sigma2: f64, tau_c: f64) -> Result<Self> {
        let m = Self {
            n_spins,
            sigma2,
            tau_c,
            t1rho: None,
            n_b: 0.5,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_t1rho(mut self, t1rho: Option<f64>) -> Result<Self> {
        self.t1rho = t1rho;
        self.validate()?;
        Ok(self)
    }

    pub fn with_bath_population(mut self, n_b: f64) -> Result<Self> {
        self.n_b = n_b;
        self.validate()?;
        Ok(self)
    }

    pub fn from_estimate(est: &CorrelationEstimate, t1rho: Option<f64>) -> Result<Self> {
        Self::new(est.n_spins as f64, est.sigma2_rad2_per_us2, est.tau_c_us)?.with_t1rho(t1rho)
    }

    fn validate(&self) -> Result<()> {
        if !(self.n_spins >= 0.0) {
            return Err(Error::invalid("n_spins", format!("must be ≥ 0, got {}", self.n_spins)));
        }
        if !(self.sigma2 >= 0.0) {
            return Err(Error::invalid("sigma2", format!("must be ≥ 0, got {}", self.sigma2)));
        }
        if !(self.tau_c > 0.0) {
            return Err(Error::invalid("tau_c", format!("must be > 0, got {}", self.tau_c)));
        }
        if let Some(t) = self.t1rho {
            if !(t > 0.0) {
                return Err(Error::invalid("t1rho", format!("must be > 0, got {t}")));
            }
        }
        if !(0.0..=1.0).contains(&self.n_b) {
            return Err(Error::invalid("n_b", format!("must lie in [0, 1], got {}", self.n_b)));
        }
        Ok(())
    }

    /// Exponential memory kernel σ²τ_c(1 − e^{−t/τ_c}).
    pub fn exponential_kernel(&self) -> impl Fn(f64) -> f64 {
        let (s2, tc) = (self.sigma2, self.tau_c);
        move |t| s2 * tc * -(-t / tc).exp_m1()
    }

    fn relaxation_rate(&self) -> f64 {
        self.t1rho.map_or(0.0, |t| 1.0 / t)
    }
}

/// ⟨n⟩(t) for the exponential kernel, ignoring T₁ρ.
pub fn closed_form(model: &AnalyticModel, t: f64) -> f64 {
    model.n_b + (1.0 - model.n_b) * (-decay_exponent(model, t)).exp()
}

/// −log((⟨n⟩ − n_B)/(1 − n_B)) of the closed form, ¼Nτ_c²σ²(t/τ_c − 1 + e^{−t/τ_c}).
pub fn decay_exponent(model: &AnalyticModel, t: f64) -> f64 {
    let x = t / model.tau_c;
    // exp_m1 avoids the cancellation at small x
    let shape = x + (-x).exp_m1();
    0.25 * model.n_spins * model.tau_c * model.tau_c * model.sigma2 * shape
}

/// Rate of the early Gaussian decay √(Nσ²/8), rad·μs⁻¹.
pub fn short_time_rate(model: &AnalyticModel) -> f64 {
    (model.n_spins * model.sigma2 / 8.0).sqrt()
}

/// Late exponential rate τ_p⁻¹ = ¼Nσ²τ_c, μs⁻¹.
pub fn long_time_rate(model: &AnalyticModel) -> f64 {
    0.25 * model.n_spins * model.sigma2 * model.tau_c
}

/// Late-time decay rate of ⟨n⟩ − ½ with relaxation: ¼Nσ²τ_c + 1/T₁ρ.
pub fn composite_tail_rate(model: &AnalyticModel) -> f64 {
    long_time_rate(model) + model.relaxation_rate()
}

/// Integrate the master equation for an arbitrary kernel on `grid` (μs, starting at 0).
///
/// When n_B = ½ or T₁ρ is absent the equation is homogeneous in ⟨n⟩ − n_B and is
/// integrated for log(⟨n⟩ − n_B), which stays accurate however fast the decay.
/// Otherwise ⟨n⟩ itself is integrated.
pub fn solve_master<G>(model: &AnalyticModel, gamma: G, grid: &[f64]) -> Result<PolarizationCurve>
where
    G: Fn(f64) -> f64,
{
    let quarter_n = 0.25 * model.n_spins;
    let relax = model.relaxation_rate();
    let kernel = |t: f64| -> Result<f64> {
        let g = gamma(t);
        if g < 0.0 || g.is_nan() {
            return Err(Error::NegativeKernel { time: t, value: g });
        }
        Ok(g)
    };
    for &t in grid {
        kernel(t)?;
    }
    let homogeneous = relax == 0.0 || model.n_b == 0.5;
    let n_mean = if homogeneous {
        let logs = ode::integrate(
            |t, _| Ok(-quarter_n * kernel(t)? - relax),
            0.0,
            grid,
            MASTER_TOLERANCE,
        )?;
        logs.iter()
            .map(|u| model.n_b + (1.0 - model.n_b) * u.exp())
            .collect()
    } else {
        ode::integrate(
            |t, n| Ok(-quarter_n * kernel(t)? * (n - model.n_b) - relax * (n - 0.5)),
            1.0,
            grid,
            MASTER_TOLERANCE,
        )?
    };
    let mut curve = PolarizationCurve::new(grid.to_vec(), n_mean, Provenance::Analytic);
    curve.annotate("model", if relax > 0.0 { "master+t1rho" } else { "master" });
    Ok(curve)
}

/// Closed-form curve on a grid.
pub fn closed_form_curve(model: &AnalyticModel, grid: &[f64]) -> PolarizationCurve {
    let mut curve = PolarizationCurve::new(
        grid.to_vec(),
        grid.iter().map(|&t| closed_form(model, t)).collect(),
        Provenance::Analytic,
    );
    curve.annotate("model", "closed-form");
    curve
}

/// Fraction α of the NV polarization that goes to the nuclei rather than to T₁ρ.
pub fn transfer_efficiency(model: &AnalyticModel) -> f64 {
    let transfer = long_time_rate(model);
    transfer / (transfer + model.relaxation_rate())
}

/// Calibrated reference point for the rate scaling τ_p⁻¹ ∝ ρ/(z₀·D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingReference {
    pub rho: f64,
    pub z0: f64,
    pub diffusion: f64,
    /// τ_p⁻¹ at the reference, μs⁻¹.
    pub rate: f64,
}

impl ScalingReference {
    pub fn new(rho: f64, z0: f64, diffusion: f64, model: &AnalyticModel) -> Self {
        Self {
            rho,
            z0,
            diffusion,
            rate: long_time_rate(model),
        }
    }
}

/// Polarization rate predicted from the reference by τ_p⁻¹ ∝ ρ/(z₀·D).
pub fn scaling_rate(rho: f64, z0: f64, diffusion: f64, reference: &ScalingReference) -> f64 {
    reference.rate * (rho / reference.rho) * (reference.z0 / z0) * (reference.diffusion / diffusion)
}

/// Uniform grid {0, dt, …, t_max}.
pub fn uniform_grid(dt: f64, t_max: f64) -> Vec<f64> {
    let n = (t_max / dt).round() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}
