//! Secular electron-nuclear dipolar field.
//!
//! For a nucleus at relative position x from the NV, the secular hyperfine
//! vector is A = (b₀/r³)·(3(n̂·r̂)r̂ − n̂) with n̂ the NV quantization axis, and
//! the flip-flop coupling is g = (A_x + i·A_y)/4 with components taken in the
//! NV frame.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::PhysicalConstants;

/// Closest allowed approach, nm.
pub const MIN_DISTANCE: f64 = 0.1;

/// NV-frame components of the hyperfine vector, rad·μs⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperfineVector {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl HyperfineVector {
    pub fn coupling(&self) -> Coupling {
        Coupling(Complex64::new(self.ax, self.ay) / 4.0)
    }

    pub fn norm(&self) -> f64 {
        (self.ax * self.ax + self.ay * self.ay + self.az * self.az).sqrt()
    }
}

/// Flip-flop coupling g, rad·μs⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling(pub Complex64);

/// Orthonormal frame with `axis` along the NV quantization axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvFrame {
    pub ex: Vector3<f64>,
    pub ey: Vector3<f64>,
    pub axis: Vector3<f64>,
}

impl NvFrame {
    /// NV axis along the surface normal ẑ.
    pub fn aligned() -> Self {
        Self::tilted(0.0)
    }

    /// NV axis tilted away from ẑ by `angle` radians in the x–z plane.
    pub fn tilted(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            ex: Vector3::new(c, 0.0, -s),
            ey: Vector3::new(0.0, 1.0, 0.0),
            axis: Vector3::new(s, 0.0, c),
        }
    }
}

/// Dipolar field of one NV with a fixed frame and prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipolarField {
    pub b0: f64,
    pub frame: NvFrame,
}

impl Default for DipolarField {
    fn default() -> Self {
        Self::new(NvFrame::aligned())
    }
}

impl DipolarField {
    pub fn new(frame: NvFrame) -> Self {
        Self {
            b0: PhysicalConstants::codata().dipolar_prefactor,
            frame,
        }
    }

    pub fn hyperfine(&self, x: &Vector3<f64>) -> Result<HyperfineVector> {
        let r = x.norm();
        if !(r >= MIN_DISTANCE) {
            return Err(Error::Singularity {
                distance: r,
                floor: MIN_DISTANCE,
            });
        }
        Ok(self.hyperfine_unchecked(x))
    }

    pub fn coupling(&self, x: &Vector3<f64>) -> Result<Coupling> {
        self.hyperfine(x).map(|a| a.coupling())
    }

    /// Hyperfine vector without the distance check. Callers guarantee |x| > 0.
    #[inline]
    pub fn hyperfine_unchecked(&self, x: &Vector3<f64>) -> HyperfineVector {
        let r2 = x.norm_squared();
        let inv_r3 = 1.0 / (r2 * r2.sqrt());
        let inv_r2 = 1.0 / r2;
        let along = self.frame.axis.dot(x);
        let k = self.b0 * inv_r3;
        HyperfineVector {
            ax: k * 3.0 * along * self.frame.ex.dot(x) * inv_r2,
            ay: k * 3.0 * along * self.frame.ey.dot(x) * inv_r2,
            az: k * (3.0 * along * along * inv_r2 - 1.0),
        }
    }

    /// Transverse components (A_x, A_y) only, for the hot loops.
    #[inline]
    pub fn transverse(&self, x: &Vector3<f64>) -> (f64, f64) {
        let r2 = x.norm_squared();
        let k = 3.0 * self.b0 * self.frame.axis.dot(x) / (r2 * r2 * r2.sqrt());
        (k * self.frame.ex.dot(x), k * self.frame.ey.dot(x))
    }
}

/// Hyperfine vector for the aligned frame (NV axis ∥ ẑ).
pub fn hyperfine(x: &Vector3<f64>) -> Result<HyperfineVector> {
    DipolarField::default().hyperfine(x)
}

/// Flip-flop coupling for the aligned frame.
pub fn coupling(x: &Vector3<f64>) -> Result<Coupling> {
    DipolarField::default().coupling(x)
}

/// Upper bound on |A_⊥|·z₀³/b₀ for any point at least z₀ above the NV along
/// its axis: max over θ of 3·cos⁴θ·sinθ, attained at tanθ = ½.
pub fn transverse_bound_factor() -> f64 {
    let s = 1.0 / 5f64.sqrt();
    let c = 2.0 / 5f64.sqrt();
    3.0 * c.powi(4) * s
}
