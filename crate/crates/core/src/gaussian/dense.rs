//! Full (N+1)×(N+1) one-particle correlation matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::propagator::{
    check_step, coupling_norm, exact_propagator, hamiltonian_matrix, BrightBlock,
};
use super::ModeState;
use crate::error::Result;

/// C_ij = ⟨b_i† b_j⟩ with mode 0 the NV and modes 1..=N the nuclei.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCorrelationMatrix {
    pub c: DMatrix<Complex64>,
    hermiticity_drift: f64,
}

/// C₀₀ = 1, C_ii = ½ for the nuclei, no correlations.
pub fn init_state(n: usize) -> ModeCorrelationMatrix {
    let mut c = DMatrix::from_diagonal_element(n + 1, n + 1, Complex64::new(0.5, 0.0));
    c[(0, 0)] = Complex64::new(1.0, 0.0);
    ModeCorrelationMatrix {
        c,
        hermiticity_drift: 0.0,
    }
}

impl ModeCorrelationMatrix {
    /// C ← U C U†.
    pub fn transform(&mut self, u: &DMatrix<Complex64>) {
        self.c = u * &self.c * u.adjoint();
        self.symmetrize();
    }

    /// Step through full diagonalization of h. O(N³); used as an oracle.
    pub fn step_exact(&mut self, g: &[Complex64], detuning: f64, az: Option<&[f64]>, dt: f64) -> Result<()> {
        check_step(coupling_norm(g), dt)?;
        let u = exact_propagator(&hamiltonian_matrix(g, detuning, az), dt);
        self.transform(&u);
        Ok(())
    }

    fn symmetrize(&mut self) {
        let adj = self.c.adjoint();
        let drift = (&self.c - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.hermiticity_drift = self.hermiticity_drift.max(drift);
        self.c = (&self.c + adj) * Complex64::new(0.5, 0.0);
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.c.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
    }
}

impl ModeState for ModeCorrelationMatrix {
    fn n_spins(&self) -> usize {
        self.c.nrows() - 1
    }

    fn nv_population(&self) -> f64 {
        self.c[(0, 0)].re
    }

    fn trace(&self) -> f64 {
        self.c.diagonal().iter().map(|z| z.re).sum()
    }

    fn bath_gain(&self) -> f64 {
        self.c.diagonal().iter().skip(1).map(|z| z.re - 0.5).sum()
    }

    fn occupation_range(&self) -> (f64, f64) {
        self.c
            .diagonal()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)))
    }

    fn hermiticity_drift(&self) -> f64 {
        self.hermiticity_drift
    }

    /// U = I + Q(M − I)Q† with Q = [e₀, û]; C ← U C U† as two rank-2 updates.
    fn step(&mut self, g: &[Complex64], detuning: f64, dt: f64) -> Result<()> {
        let big_g = coupling_norm(g);
        check_step(big_g, dt)?;
        let n = self.c.nrows();
        let block = BrightBlock::new(big_g, detuning, dt);
        let mut q = DMatrix::zeros(n, 2);
        q[(0, 0)] = Complex64::new(1.0, 0.0);
        if big_g > 0.0 {
            for (i, gi) in g.iter().enumerate() {
                q[(i + 1, 1)] = gi.conj() / big_g;
            }
        }
        let one = Complex64::new(1.0, 0.0);
        let k = DMatrix::from_row_slice(
            2,
            2,
            &[
                block.m[0][0] - one,
                block.m[0][1],
                block.m[1][0],
                block.m[1][1] - one,
            ],
        );
        // W = C V†, then V W
        let w = &self.c + (&self.c * &q) * k.adjoint() * q.adjoint();
        self.c = &w + &q * (k * (q.adjoint() * &w));
        self.symmetrize();
        Ok(())
    }

    fn phase_nuclei(&mut self, az: &[f64], tau: f64) {
        let n = self.c.nrows();
        let phase: Vec<Complex64> = std::iter::once(Complex64::new(1.0, 0.0))
            .chain(az.iter().map(|a| Complex64::from_polar(1.0, -0.5 * a * tau)))
            .collect();
        for j in 0..n {
            for i in 0..n {
                self.c[(i, j)] *= phase[i] * phase[j].conj();
            }
        }
    }

    fn reset_modes(&mut self, indices: &[usize]) {
        let zero = Complex64::new(0.0, 0.0);
        for &i in indices {
            let j = i + 1;
            self.c.row_mut(j).fill(zero);
            self.c.column_mut(j).fill(zero);
            self.c[(j, j)] = Complex64::new(0.5, 0.0);
        }
    }

    fn apply_t1rho(&mut self, dt: f64, t1rho: f64) {
        let decay = (-dt / t1rho).exp();
        let half = (-0.5 * dt / t1rho).exp();
        let n = self.c.nrows();
        for j in 1..n {
            self.c[(0, j)] *= half;
            self.c[(j, 0)] *= half;
        }
        let c00 = self.c[(0, 0)].re;
        self.c[(0, 0)] = Complex64::new(0.5 + (c00 - 0.5) * decay, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_state() {
        let c = init_state(0);
        assert_eq!(c.c.shape(), (1, 1));
        assert_eq!(c.nv_population(), 1.0);
        let c = init_state(4);
        let ev = c.eigenvalues();
        assert!(ev.iter().all(|&l| (0.0..=1.0).contains(&l)));
        assert_eq!(c.trace(), 3.0);
    }

    #[test]
    fn zero_couplings_leave_state() {
        let mut c = init_state(3);
        c.c[(0, 2)] = Complex64::new(0.1, 0.2);
        c.c[(2, 0)] = Complex64::new(0.1, -0.2);
        let before = c.c.clone();
        c.step(&[Complex64::new(0.0, 0.0); 3], 0.0, 0.1).unwrap();
        assert!((&c.c - before).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn rank_two_update_matches_diagonalization() {
        let g = [
            Complex64::new(0.2, 0.1),
            Complex64::new(-0.3, 0.05),
            Complex64::new(0.0, -0.25),
            Complex64::new(0.1, 0.1),
        ];
        let mut a = init_state(4);
        let mut b = init_state(4);
        for _ in 0..5 {
            a.step(&g, 0.05, 0.09).unwrap();
            b.step_exact(&g, 0.05, None, 0.09).unwrap();
        }
        assert!((&a.c - &b.c).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn two_steps_equal_one_double_step() {
        // Random 5-mode Hermitian h: U(dt)² = U(2dt) for the exact exponential.
        let mut h = DMatrix::<Complex64>::zeros(5, 5);
        let vals = [0.3, -0.7, 0.11, 0.52, -0.2, 0.9, 0.05, -0.33, 0.41, 0.6];
        let mut k = 0;
        for i in 0..5 {
            h[(i, i)] = Complex64::new(vals[i], 0.0);
            for j in (i + 1)..5 {
                let z = Complex64::new(vals[k % 10], vals[(k + 3) % 10]);
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
                k += 1;
            }
        }
        for dt in [0.01, 0.05, 0.1] {
            let one = exact_propagator(&h, dt);
            let two = exact_propagator(&h, 2.0 * dt);
            let mut a = init_state(4);
            a.transform(&one);
            a.transform(&one);
            let mut b = init_state(4);
            b.transform(&two);
            assert!((&a.c - &b.c).iter().all(|z| z.norm() < 1e-12 + dt.powi(3)));
        }
    }

    #[test]
    fn reset_of_thermal_mode_is_identity() {
        let mut c = init_state(3);
        let before = c.clone();
        c.reset_modes(&[1]);
        assert_eq!(c, before);
    }

    #[test]
    fn reset_all_keeps_nv() {
        let mut c = init_state(2);
        c.step(&[Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.4)], 0.0, 0.1).unwrap();
        let nv = c.nv_population();
        c.reset_modes(&[0, 1]);
        let mut expect = init_state(2).c;
        expect[(0, 0)] = Complex64::new(nv, 0.0);
        assert!((&c.c - expect).iter().all(|z| z.norm() < 1e-15));
    }
}
