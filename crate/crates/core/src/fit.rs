//! Least-squares line fits used for tail rates and scaling exponents.

/// Ordinary least squares y = slope·x + intercept. `None` for fewer than two
/// distinct abscissae.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Exponent p of y ∝ xᵖ from a fit in log-log space; non-positive points are skipped.
pub fn power_law_exponent(x: &[f64], y: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    linear_fit(&lx, &ly).map(|(p, _)| p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let (s, c) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((s - 2.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn inverse_law() {
        let x = [0.5, 1.0, 2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 / v).collect();
        assert!((power_law_exponent(&x, &y).unwrap() + 1.0).abs() < 1e-12);
    }
}
