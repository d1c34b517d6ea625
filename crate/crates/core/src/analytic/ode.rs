//! Scalar Dormand–Prince 5(4) integrator that lands exactly on a user grid.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// 5th-order weights (same as the last row of A).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

/// Integrate y' = f(t, y) from (grid[0], y0) and return y on every grid point.
/// `f` may fail; its error aborts the integration.
pub fn integrate<F>(mut f: F, y0: f64, grid: &[f64], tol: Tolerance) -> Result<Vec<f64>>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let mut out = Vec::with_capacity(grid.len());
    let Some(&t0) = grid.first() else {
        return Ok(out);
    };
    out.push(y0);
    let (mut t, mut y) = (t0, y0);
    let span = grid.last().unwrap() - t0;
    let mut h = if span > 0.0 { span * 1e-3 } else { 0.0 };
    let mut k1 = f(t, y)?;
    let mut steps = 0;
    for &target in &grid[1..] {
        if target < t {
            return Err(Error::Invariant("integration grid must be non-decreasing".into()));
        }
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Invariant(format!(
                    "ODE step limit exceeded near t = {t}; the problem is too stiff for an explicit pair"
                )));
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            let mut k = [0.0; 7];
            k[0] = k1;
            for s in 1..7 {
                let yi = y + step * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
                k[s] = f(t + C[s] * step, yi)?;
            }
            let y5 = y + step * (0..7).map(|j| B5[j] * k[j]).sum::<f64>();
            let y4 = y + step * (0..7).map(|j| B4[j] * k[j]).sum::<f64>();
            let scale = tol.atol + tol.rtol * y.abs().max(y5.abs());
            let err = ((y5 - y4) / scale).abs();
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y5;
                k1 = k[6];
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 && last {
                // keep the unclipped step for the next interval
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let grid: Vec<f64> = (0..=50).map(|k| k as f64 * 0.2).collect();
        let tol = Tolerance { rtol: 1e-10, atol: 1e-14 };
        let y = integrate(|_, y| Ok(-1.3 * y), 2.0, &grid, tol).unwrap();
        for (t, v) in grid.iter().zip(&y) {
            assert!((v - 2.0 * (-1.3 * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = cos t, y = sin t
        let grid = [0.0, 0.1, 1.0, 3.0, 3.0, 7.5];
        let tol = Tolerance { rtol: 1e-10, atol: 1e-12 };
        let y = integrate(|t, _| Ok(t.cos()), 0.0, &grid, tol).unwrap();
        for (t, v) in grid.iter().zip(&y) {
            assert!((v - t.sin()).abs() < 1e-9, "{t} {v}");
        }
    }

    #[test]
    fn rhs_errors_propagate() {
        let r = integrate(|t, _| if t > 0.5 { Err(Error::Invariant("boom".into())) } else { Ok(0.0) }, 0.0, &[0.0, 1.0], Tolerance { rtol: 1e-8, atol: 1e-12 });
        assert!(r.is_err());
    }
}
