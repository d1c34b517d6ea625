//! NV population curves and their CSV form.
//!
//! ```text
//! # key=value            zero or more annotation lines
//! t_us,n_mean,stderr,provenance
//! 0,1,0,gaussian-sim
//! ```
//!
//! `stderr` is empty for curves without error bars.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fit::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    GaussianSim,
    Measured,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::GaussianSim => "gaussian-sim",
            Provenance::Measured => "measured",
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" => Ok(Provenance::Analytic),
            "gaussian-sim" => Ok(Provenance::GaussianSim),
            "measured" => Ok(Provenance::Measured),
            other => Err(Error::Parse {
                what: "provenance".into(),
                message: format!("unknown provenance `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationCurve {
    /// μs
    pub times: Vec<f64>,
    pub n_mean: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
    pub provenance: Provenance,
    /// Free-form `key=value` annotations carried in the CSV header.
    pub annotations: Vec<(String, String)>,
}

impl PolarizationCurve {
    pub fn new(times: Vec<f64>, n_mean: Vec<f64>, provenance: Provenance) -> Self {
        assert_eq!(times.len(), n_mean.len());
        Self {
            times,
            n_mean,
            stderr: None,
            provenance,
            annotations: Vec::new(),
        }
    }

    pub fn with_stderr(mut self, stderr: Vec<f64>) -> Self {
        assert_eq!(stderr.len(), self.times.len());
        self.stderr = Some(stderr);
        self
    }

    pub fn annotate(&mut self, key: impl Into<String>, value: impl ToString) {
        self.annotations.push((key.into(), value.to_string()));
    }

    pub fn annotation(&self, key: &str) -> Option<&str> {
        self.annotations
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation at `t`; `None` outside the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let (first, last) = (*self.times.first()?, *self.times.last()?);
        if t < first || t > last {
            return None;
        }
        let k = self.times.partition_point(|&x| x < t);
        if k == 0 {
            return Some(self.n_mean[0]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (y0, y1) = (self.n_mean[k - 1], self.n_mean[k]);
        if t1 == t0 {
            return Some(y1);
        }
        Some(y0 + (y1 - y0) * (t - t0) / (t1 - t0))
    }

    /// Decay rate of ⟨n⟩ − ½ from a log-linear fit over `from ≤ t ≤ to`, μs⁻¹.
    pub fn tail_rate(&self, from: f64, to: f64) -> Option<f64> {
        let (t, y): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.n_mean)
            .filter(|(t, n)| **t >= from && **t <= to && **n > 0.5)
            .map(|(t, n)| (*t, (n - 0.5).ln()))
            .unzip();
        linear_fit(&t, &y).map(|(slope, _)| -slope)
    }

    /// RMS of self − other on this curve's samples with t ≤ `until`.
    /// `relative` divides each residual by other − ½.
    pub fn rms_deviation(&self, other: &PolarizationCurve, until: f64, relative: bool) -> Option<f64> {
        let residuals: Vec<f64> = self
            .times
            .iter()
            .zip(&self.n_mean)
            .filter(|(t, _)| **t <= until)
            .filter_map(|(&t, &n)| {
                let o = other.interpolate(t)?;
                Some(if relative { (n - o) / (o - 0.5) } else { n - o })
            })
            .collect();
        if residuals.is_empty() {
            return None;
        }
        Some((residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.annotations {
            let _ = writeln!(s, "# {k}={v}");
        }
        s.push_str("t_us,n_mean,stderr,provenance\n");
        for i in 0..self.times.len() {
            let err = self
                .stderr
                .as_ref()
                .map(|e| format!("{:e}", e[i]))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                "{:e},{:e},{},{}",
                self.times[i],
                self.n_mean[i],
                err,
                self.provenance.as_str()
            );
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            what: format!("curve CSV line {line}"),
            message,
        };
        let mut annotations = Vec::new();
        let mut lines = text.lines().enumerate().peekable();
        while let Some((_, l)) = lines.peek() {
            if let Some(rest) = l.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    annotations.push((k.trim().to_string(), v.trim().to_string()));
                }
                lines.next();
            } else {
                break;
            }
        }
        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(0, "missing header".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "t_us" {
            return Err(parse_err(hline + 1, format!("unexpected header `{header}`")));
        }
        let mut times = Vec::new();
        let mut n_mean = Vec::new();
        let mut stderr = Vec::new();
        let mut provenance = None;
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let num = |j: usize| -> Result<f64> {
                fields
                    .get(j)
                    .ok_or_else(|| parse_err(i + 1, format!("missing column {j}")))?
                    .parse::<f64>()
                    .map_err(|e| parse_err(i + 1, e.to_string()))
            };
            times.push(num(0)?);
            n_mean.push(num(1)?);
            match fields.get(2) {
                Some(s) if !s.is_empty() => stderr.push(Some(num(2)?)),
                _ => stderr.push(None),
            }
            if let Some(p) = fields.get(3).filter(|p| !p.is_empty()) {
                provenance.get_or_insert(p.parse::<Provenance>()?);
            }
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(parse_err(0, "t_us must be non-decreasing".into()));
        }
        let stderr = if !stderr.is_empty() && stderr.iter().all(Option::is_some) {
            Some(stderr.into_iter().map(Option::unwrap).collect())
        } else {
            None
        };
        Ok(Self {
            times,
            n_mean,
            stderr,
            provenance: provenance.unwrap_or(Provenance::Measured),
            annotations,
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut c = PolarizationCurve::new(vec![0.0, 0.5, 1.0], vec![1.0, 0.9, 0.8125], Provenance::GaussianSim)
            .with_stderr(vec![0.0, 0.01, 0.02]);
        c.annotate("validity_horizon_us", "inf");
        let back = PolarizationCurve::from_csv(&c.to_csv()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.annotation("validity_horizon_us"), Some("inf"));
    }

    #[test]
    fn measured_three_column_input() {
        let text = "t_us,population,error\n0,1.0,0.02\n2,0.8,0.02\n";
        let c = PolarizationCurve::from_csv(text).unwrap();
        assert_eq!(c.provenance, Provenance::Measured);
        assert_eq!(c.stderr, Some(vec![0.02, 0.02]));
        assert_eq!(c.interpolate(1.0), Some(0.9));
        assert_eq!(c.interpolate(3.0), None);
    }

    #[test]
    fn tail_rate_and_rms() {
        let times: Vec<f64> = (0..=40).map(f64::from).collect();
        let n: Vec<f64> = times.iter().map(|t| 0.5 + 0.5 * (-0.1 * t).exp()).collect();
        let c = PolarizationCurve::new(times, n, Provenance::Analytic);
        assert!((c.tail_rate(20.0, 40.0).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(c.rms_deviation(&c, 40.0, true), Some(0.0));
    }

    #[test]
    fn bad_rows_are_errors() {
        assert!(PolarizationCurve::from_csv("t_us,n_mean\n0,abc\n").is_err());
        assert!(PolarizationCurve::from_csv("time,n\n0,1\n").is_err());
        assert!(PolarizationCurve::from_csv("t_us,n_mean\n1,1\n0,1\n").is_err());
    }
}
