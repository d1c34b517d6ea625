//! Single-particle propagators for the beam-splitter Hamiltonian
//!
//! ```text
//! h = ⎡ δ   g₁   g₂  …  ⎤
//!     ⎢ g₁* 0           ⎥
//!     ⎢ g₂*    0        ⎥
//!     ⎣ ⋮          ⋱    ⎦
//! ```
//!
//! in the frame rotating at ω_N. h only mixes the NV mode e₀ with the bright
//! bath mode û = g*/G, G = |g|, and vanishes on the rest of the bath, so
//! e^{−ihτ} is the identity plus a 2×2 block on span{e₀, û}.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest allowed G·dt.
pub const MAX_COUPLING_STEP: f64 = 0.1;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// e^{−ihτ} restricted to span{e₀, û}, as a row-major 2×2 block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrightBlock {
    pub m: [[Complex64; 2]; 2],
    /// G = |g|.
    pub coupling_norm: f64,
}

impl BrightBlock {
    pub fn new(coupling_norm: f64, detuning: f64, tau: f64) -> Self {
        let g = coupling_norm;
        let half = 0.5 * detuning;
        let omega = (half * half + g * g).sqrt();
        let (s, c) = (omega * tau).sin_cos();
        // sin(Ωτ)/Ω, finite as Ω → 0
        let sinc = if omega * tau == 0.0 { tau } else { s / omega };
        let phase = Complex64::from_polar(1.0, -half * tau);
        let m = [
            [phase * (c - I * sinc * half), phase * (-I * sinc * g)],
            [phase * (-I * sinc * g), phase * (c + I * sinc * half)],
        ];
        Self { m, coupling_norm: g }
    }

    pub fn apply(&self, a: Complex64, s: Complex64) -> (Complex64, Complex64) {
        (
            self.m[0][0] * a + self.m[0][1] * s,
            self.m[1][0] * a + self.m[1][1] * s,
        )
    }
}

pub fn coupling_norm(g: &[Complex64]) -> f64 {
    g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn check_step(coupling_norm: f64, dt: f64) -> Result<()> {
    let product = coupling_norm * dt;
    if product >= MAX_COUPLING_STEP {
        return Err(Error::StepSize {
            product,
            limit: MAX_COUPLING_STEP,
        });
    }
    Ok(())
}

/// Dense single-particle matrix h; `az` adds A_z,i/2 on the bath diagonal.
pub fn hamiltonian_matrix(g: &[Complex64], detuning: f64, az: Option<&[f64]>) -> DMatrix<Complex64> {
    let n = g.len() + 1;
    let mut h = DMatrix::zeros(n, n);
    h[(0, 0)] = Complex64::new(detuning, 0.0);
    for (i, gi) in g.iter().enumerate() {
        h[(0, i + 1)] = *gi;
        h[(i + 1, 0)] = gi.conj();
        if let Some(az) = az {
            h[(i + 1, i + 1)] = Complex64::new(0.5 * az[i], 0.0);
        }
    }
    h
}

/// e^{−ihτ} of a Hermitian matrix by full diagonalization.
pub fn exact_propagator(h: &DMatrix<Complex64>, tau: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * tau)),
    );
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&phases) * v.adjoint()
}
