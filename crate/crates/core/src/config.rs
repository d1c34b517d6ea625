//! Scenario configuration: the JSON run file, its validation, and derived fields.
//!
//! Every key carries its unit as a suffix:
//!
//! ```text
//! {
//!   "schema_version": 1,
//!   "z0_nm": 3.2,                   NV depth below the diamond surface
//!   "diffusion_nm2_per_us": 0.46,   self-diffusion coefficient of the liquid
//!   "rho_per_nm3": 50.0,            proton number density
//!   "field_gauss": 660.0,           or "field_tesla"; exactly one of the two
//!   "rabi_rad_per_us": null,        optional, defaults to the Larmor frequency
//!   "box_length_nm": 20.0,          optional, default 20
//!   "n_spins": null,                optional, must agree with rho·L³ within 1
//!   "t1rho_us": 11.0,               optional, absent means no relaxation
//!   "dt_us": 0.1,
//!   "t_max_us": 40.0,
//!   "n_traj": 100,
//!   "seed": 1,
//!   "nv_tilt_deg": 0.0,             optional angle between NV axis and surface normal
//!   "detuning_fluctuations": false, optional per-nucleus A_z/2 detuning in the simulator
//!   "estimator": { ... }            optional, see `EstimatorOverrides`
//! }
//! ```
//!
//! The environment variable `NVDNP_SEED` overrides `seed`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::units::{gauss_to_tesla, larmor_frequency};

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "NVDNP_SEED";
pub const DEFAULT_BOX_LENGTH: f64 = 20.0;
/// Relative detuning |Ω − ω_N|/ω_N above which a resonance warning is attached.
pub const RESONANCE_TOLERANCE: f64 = 0.01;

/// Optional knobs for the correlation estimator. Unset fields are derived from
/// the diffusion time z₀²/D when the estimator runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_traj: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walkers_per_traj: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag_dt_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_origins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_samples: Option<usize>,
}

/// On-disk form of a scenario, field for field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema_version: u32,
    pub z0_nm: f64,
    pub diffusion_nm2_per_us: f64,
    pub rho_per_nm3: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_gauss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_tesla: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_rad_per_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_length_nm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_spins: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1rho_us: Option<f64>,
    pub dt_us: f64,
    pub t_max_us: f64,
    pub n_traj: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nv_tilt_deg: Option<f64>,
    #[serde(default)]
    pub detuning_fluctuations: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorOverrides>,
}

/// A validated scenario. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// NV depth below the surface, nm.
    pub z0: f64,
    /// Diffusion coefficient, nm²·μs⁻¹.
    pub diffusion: f64,
    /// Proton density, nm⁻³.
    pub rho: f64,
    /// Field magnitude, T.
    pub field: f64,
    /// Rabi frequency, rad·μs⁻¹.
    pub rabi: f64,
    /// Box edge, nm.
    pub box_length: f64,
    pub n_spins: usize,
    /// Rotating-frame relaxation time, μs. `None` means infinite.
    pub t1rho: Option<f64>,
    pub dt: f64,
    pub t_max: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// Angle between NV axis and surface normal, radians.
    pub nv_tilt: f64,
    pub detuning_fluctuations: bool,
    pub estimator: EstimatorOverrides,
    /// Derived ω_N = γ_n·B, rad·μs⁻¹.
    pub omega_n: f64,
    pub warnings: Vec<String>,
}

impl RawConfig {
    /// A resonant scenario with defaults for everything optional.
    pub fn new(z0_nm: f64, diffusion_nm2_per_us: f64, rho_per_nm3: f64, field_gauss: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            z0_nm,
            diffusion_nm2_per_us,
            rho_per_nm3,
            field_gauss: Some(field_gauss),
            field_tesla: None,
            rabi_rad_per_us: None,
            box_length_nm: None,
            n_spins: None,
            t1rho_us: None,
            dt_us: 0.1,
            t_max_us: 40.0,
            n_traj: 100,
            seed: 1,
            nv_tilt_deg: None,
            detuning_fluctuations: false,
            estimator: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "scenario config".into(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<ScenarioConfig> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        positive("z0_nm", self.z0_nm)?;
        // D = 0 is a frozen bath, allowed.
        if !(self.diffusion_nm2_per_us >= 0.0) || !self.diffusion_nm2_per_us.is_finite() {
            return Err(Error::invalid(
                "diffusion_nm2_per_us",
                format!("must be ≥ 0, got {}", self.diffusion_nm2_per_us),
            ));
        }
        positive("rho_per_nm3", self.rho_per_nm3)?;
        let field = match (self.field_gauss, self.field_tesla) {
            (Some(g), None) => gauss_to_tesla(g),
            (None, Some(t)) => t,
            (Some(g), Some(t)) => {
                return Err(Error::invalid(
                    "field_gauss",
                    format!("give either field_gauss ({g}) or field_tesla ({t}), not both"),
                ))
            }
            (None, None) => return Err(Error::invalid("field_gauss", "missing magnetic field")),
        };
        if !(field >= 0.0) || !field.is_finite() {
            return Err(Error::invalid("field_gauss", format!("must be ≥ 0, got {field} T")));
        }
        let box_length = self.box_length_nm.unwrap_or(DEFAULT_BOX_LENGTH);
        positive("box_length_nm", box_length)?;
        positive("dt_us", self.dt_us)?;
        if !(self.t_max_us >= self.dt_us) {
            return Err(Error::invalid(
                "t_max_us",
                format!("must be ≥ dt_us ({}), got {}", self.dt_us, self.t_max_us),
            ));
        }
        if self.n_traj < 1 {
            return Err(Error::invalid("n_traj", "must be ≥ 1, got 0"));
        }
        if let Some(t) = self.t1rho_us {
            positive("t1rho_us", t)?;
        }
        let tilt_deg = self.nv_tilt_deg.unwrap_or(0.0);
        if !(0.0..=90.0).contains(&tilt_deg) {
            return Err(Error::invalid("nv_tilt_deg", format!("must lie in [0, 90], got {tilt_deg}")));
        }

        let from_density = (self.rho_per_nm3 * box_length.powi(3)).round();
        let n_spins = match self.n_spins {
            Some(n) if (n as f64 - from_density).abs() > 1.0 => {
                return Err(Error::invalid(
                    "n_spins",
                    format!("{n} disagrees with rho·L³ = {from_density}"),
                ))
            }
            Some(n) => n as usize,
            None => from_density as usize,
        };

        let omega_n = larmor_frequency(field);
        let rabi = self.rabi_rad_per_us.unwrap_or(omega_n);
        if !(rabi >= 0.0) || !rabi.is_finite() {
            return Err(Error::invalid("rabi_rad_per_us", format!("must be ≥ 0, got {rabi}")));
        }
        let mut warnings = Vec::new();
        let detuning = (rabi - omega_n).abs();
        if detuning > RESONANCE_TOLERANCE * omega_n {
            warnings.push(format!(
                "off Hartmann-Hahn resonance: |Ω − ω_N| = {detuning:.4} rad/μs ({:.2}% of ω_N)",
                100.0 * detuning / omega_n.max(f64::MIN_POSITIVE)
            ));
        }

        let seed = match std::env::var(SEED_ENV) {
            Ok(s) => s.trim().parse().map_err(|_| {
                Error::invalid("seed", format!("{SEED_ENV}={s} is not an unsigned integer"))
            })?,
            Err(_) => self.seed,
        };

        Ok(ScenarioConfig {
            z0: self.z0_nm,
            diffusion: self.diffusion_nm2_per_us,
            rho: self.rho_per_nm3,
            field,
            rabi,
            box_length,
            n_spins,
            t1rho: self.t1rho_us,
            dt: self.dt_us,
            t_max: self.t_max_us,
            n_traj: self.n_traj,
            seed,
            nv_tilt: tilt_deg.to_radians(),
            detuning_fluctuations: self.detuning_fluctuations,
            estimator: self.estimator.clone().unwrap_or_default(),
            omega_n,
            warnings,
        })
    }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be > 0, got {value}")))
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RawConfig::from_json(&text)?.validate()
}

impl ScenarioConfig {
    /// Number of integration steps covering [0, t_max].
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    /// Rabi detuning from the nuclear Larmor frequency, rad·μs⁻¹.
    pub fn detuning(&self) -> f64 {
        self.rabi - self.omega_n
    }

    pub fn is_resonant(&self) -> bool {
        self.detuning().abs() <= RESONANCE_TOLERANCE * self.omega_n
    }

    /// The file form of this config, with every derived default written out.
    pub fn to_raw(&self) -> RawConfig {
        RawConfig {
            schema_version: SCHEMA_VERSION,
            z0_nm: self.z0,
            diffusion_nm2_per_us: self.diffusion,
            rho_per_nm3: self.rho,
            field_gauss: None,
            field_tesla: Some(self.field),
            rabi_rad_per_us: Some(self.rabi),
            box_length_nm: Some(self.box_length),
            n_spins: Some(self.n_spins as u64),
            t1rho_us: self.t1rho,
            dt_us: self.dt,
            t_max_us: self.t_max,
            n_traj: self.n_traj,
            seed: self.seed,
            nv_tilt_deg: Some(self.nv_tilt.to_degrees()),
            detuning_fluctuations: self.detuning_fluctuations,
            estimator: Some(self.estimator.clone()),
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.to_raw()).expect("config serializes");
        hex_digest(json.as_bytes())
    }

    pub fn hash_bytes(&self) -> [u8; 32] {
        let json = serde_json::to_string(&self.to_raw()).expect("config serializes");
        Sha256::digest(json.as_bytes()).into()
    }

    /// Copy with a different box edge, keeping ρ and recomputing N.
    pub fn with_box_length(&self, box_length: f64) -> Self {
        let mut c = self.clone();
        c.box_length = box_length;
        c.n_spins = (self.rho * box_length.powi(3)).round() as usize;
        c
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::to_mhz;

    fn oil() -> RawConfig {
        let mut raw = RawConfig::new(3.2, 0.46, 50.0, 660.0);
        raw.box_length_nm = Some(20.0);
        raw
    }

    #[test]
    fn derived_fields() {
        let cfg = oil().validate().unwrap();
        assert!((to_mhz(cfg.omega_n) / 2.81 - 1.0).abs() < 0.01);
        assert_eq!(cfg.n_spins, 400_000);
        assert!(cfg.is_resonant());
        assert!(cfg.warnings.is_empty());
    }

    #[test]
    fn zero_density_rejected() {
        let mut raw = oil();
        raw.rho_per_nm3 = 0.0;
        match raw.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "rho_per_nm3"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spin_count_must_match_density() {
        let mut raw = oil();
        raw.n_spins = Some(400_001);
        assert!(raw.validate().is_ok());
        raw.n_spins = Some(399_000);
        let err = raw.validate().unwrap_err().to_string();
        assert!(err.contains("n_spins") && err.contains("399000") && err.contains("400000"), "{err}");
    }

    #[test]
    fn detuned_rabi_warns() {
        let mut raw = oil();
        raw.rabi_rad_per_us = Some(18.5);
        let cfg = raw.validate().unwrap();
        assert_eq!(cfg.warnings.len(), 1);
        assert!(!cfg.is_resonant());
    }

    #[test]
    fn bad_timestep_and_window() {
        let mut raw = oil();
        raw.dt_us = 0.0;
        assert!(raw.validate().is_err());
        let mut raw = oil();
        raw.t_max_us = 0.01;
        assert!(raw.validate().is_err());
        let mut raw = oil();
        raw.n_traj = 0;
        assert!(raw.validate().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = oil().to_json().replace("\"z0_nm\"", "\"z0\"");
        assert!(RawConfig::from_json(&text).is_err());
    }

    #[test]
    fn round_trip_through_raw_is_stable() {
        let cfg = oil().validate().unwrap();
        let again = cfg.to_raw().validate().unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
    }
}
