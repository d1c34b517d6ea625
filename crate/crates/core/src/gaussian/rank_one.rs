//! Correlation matrix of the form C = ½·I + ½·ψψ†.
//!
//! The initial state has this form with ψ = e₀. A unitary step maps ψ → Uψ,
//! a reset of mode j sets ψ_j = 0, and the T₁ρ channel scales ψ₀ by
//! e^{−dt/2T₁ρ}, so the form is preserved exactly and only ψ is stored.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::propagator::{check_step, coupling_norm, BrightBlock};
use super::ModeState;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneState {
    pub psi: Vec<Complex64>,
}

impl RankOneState {
    pub fn new(n: usize) -> Self {
        let mut psi = vec![Complex64::new(0.0, 0.0); n + 1];
        psi[0] = Complex64::new(1.0, 0.0);
        Self { psi }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let n = self.psi.len();
        DMatrix::from_fn(n, n, |i, j| {
            let thermal = if i == j { 0.5 } else { 0.0 };
            Complex64::new(thermal, 0.0) + 0.5 * self.psi[i] * self.psi[j].conj()
        })
    }
}

impl ModeState for RankOneState {
    fn n_spins(&self) -> usize {
        self.psi.len() - 1
    }

    fn nv_population(&self) -> f64 {
        0.5 + 0.5 * self.psi[0].norm_sqr()
    }

    fn trace(&self) -> f64 {
        0.5 * self.psi.len() as f64 + 0.5 * self.norm_sqr()
    }

    fn bath_gain(&self) -> f64 {
        0.5 * self.psi[1..].iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    fn occupation_range(&self) -> (f64, f64) {
        self.psi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| {
            let n = 0.5 + 0.5 * z.norm_sqr();
            (lo.min(n), hi.max(n))
        })
    }

    fn step(&mut self, g: &[Complex64], detuning: f64, dt: f64) -> Result<()> {
        let big_g = coupling_norm(g);
        check_step(big_g, dt)?;
        let block = BrightBlock::new(big_g, detuning, dt);
        let (nv, bath) = self.psi.split_first_mut().expect("NV mode present");
        if big_g == 0.0 {
            *nv *= block.m[0][0];
            return Ok(());
        }
        // û_i = g_i*/G, s = û†ψ
        let s = bath.iter().zip(g).map(|(p, gi)| gi * p).sum::<Complex64>() / big_g;
        let (a, s_new) = block.apply(*nv, s);
        *nv = a;
        let shift = (s_new - s) / big_g;
        for (p, gi) in bath.iter_mut().zip(g) {
            *p += shift * gi.conj();
        }
        Ok(())
    }

    fn phase_nuclei(&mut self, az: &[f64], tau: f64) {
        for (p, a) in self.psi[1..].iter_mut().zip(az) {
            *p *= Complex64::from_polar(1.0, -0.5 * a * tau);
        }
    }

    fn reset_modes(&mut self, indices: &[usize]) {
        for &i in indices {
            self.psi[i + 1] = Complex64::new(0.0, 0.0);
        }
    }

    fn apply_t1rho(&mut self, dt: f64, t1rho: f64) {
        self.psi[0] *= (-0.5 * dt / t1rho).exp();
    }
}
