//! Monte-Carlo estimates of the coupling statistics that feed the analytic model.
//!
//! For one transverse hyperfine component A_α of a nucleus that is uniform over
//! the box, `estimate_moments` gives ⟨A_α⟩, σ² and the third cumulant ⟨ξ³⟩.
//! `estimate_correlation` follows independent Brownian walkers and averages
//! ξ(t₀)ξ(t₀+t) over walkers, several time origins and both components α ∈ {x, y}.
//! A walker swapped into the reservoir carries no memory: any product spanning a
//! swap contributes zero.
//!
//! τ_c is the 1/e decay time of that autocorrelation, C(τ_c) = C(0)/e. The
//! running integral γ(t) = ∫₀ᵗ C is reported alongside, together with
//! `tau_c_integral` = γ(window)/C(0) and the RMS misfit of γ(t) against the
//! exponential-kernel form σ²τ_c(1 − e^{−t/τ_c}). The dipolar correlation has a
//! power-law tail, so `tau_c_integral` exceeds `tau_c` and grows with the window.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{field_for, uniform_in_box, BathState};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

const MOMENT_BATCHES: usize = 32;
const DEFAULT_MOMENT_SAMPLES: usize = 4_000_000;
const DEFAULT_WALKERS: usize = 2000;
const DEFAULT_ORIGINS: usize = 8;
/// Lag step and window in units of the diffusion time z₀²/D.
const LAG_DT_PER_DIFFUSION_TIME: f64 = 0.02;
const WINDOW_PER_DIFFUSION_TIME: f64 = 3.0;
const TAU_BATCHES: usize = 10;
/// γ plateau: last 20% of the window varies by less than 2% of the final value.
const PLATEAU_TAIL: f64 = 0.2;
const PLATEAU_TOLERANCE: f64 = 0.02;

/// Single-nucleus moments of a transverse hyperfine component, averaged over x and y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// ⟨A_x⟩, ⟨A_y⟩ in rad·μs⁻¹.
    pub mean_ax: f64,
    pub mean_ay: f64,
    pub mean_stderr: f64,
    /// rad²·μs⁻²
    pub sigma2: f64,
    pub sigma2_stderr: f64,
    /// rad³·μs⁻³
    pub third_cumulant: f64,
    pub third_cumulant_stderr: f64,
    pub n_samples: usize,
}

impl Moments {
    /// ⟨g⟩ = (⟨A_x⟩ + i⟨A_y⟩)/4.
    pub fn mean_g(&self) -> Complex64 {
        Complex64::new(self.mean_ax, self.mean_ay) / 4.0
    }
}

#[derive(Default, Clone, Copy)]
struct PowerSums {
    n: f64,
    s1: [f64; 2],
    s2: [f64; 2],
    s3: [f64; 2],
}

impl PowerSums {
    fn push(&mut self, a: [f64; 2]) {
        self.n += 1.0;
        for k in 0..2 {
            self.s1[k] += a[k];
            self.s2[k] += a[k] * a[k];
            self.s3[k] += a[k] * a[k] * a[k];
        }
    }

    fn merge(&mut self, o: &PowerSums) {
        self.n += o.n;
        for k in 0..2 {
            self.s1[k] += o.s1[k];
            self.s2[k] += o.s2[k];
            self.s3[k] += o.s3[k];
        }
    }

    /// (means, variance, third central moment) averaged over components.
    fn central(&self) -> ([f64; 2], f64, f64) {
        let mut mean = [0.0; 2];
        let mut var = 0.0;
        let mut third = 0.0;
        for k in 0..2 {
            let m = self.s1[k] / self.n;
            let e2 = self.s2[k] / self.n;
            let e3 = self.s3[k] / self.n;
            mean[k] = m;
            var += 0.5 * (e2 - m * m);
            third += 0.5 * (e3 - 3.0 * m * e2 + 2.0 * m * m * m);
        }
        (mean, var, third)
    }
}

fn spread(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Moments of A_α over the uniform one-nucleus distribution in the box.
pub fn estimate_moments(cfg: &ScenarioConfig, n_samples: usize) -> Moments {
    let n_samples = n_samples.max(MOMENT_BATCHES);
    let per_batch = n_samples / MOMENT_BATCHES;
    let field = field_for(cfg);
    let batches: Vec<PowerSums> = (0..MOMENT_BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(cfg.seed, Purpose::Moments, b as u64);
            let mut sums = PowerSums::default();
            for _ in 0..per_batch {
                let p = uniform_in_box(&mut rng, cfg.box_length);
                let (ax, ay) = field.transverse(&nalgebra::Vector3::new(p[0], p[1], p[2] + cfg.z0));
                sums.push([ax, ay]);
            }
            sums
        })
        .collect();
    let mut total = PowerSums::default();
    for b in &batches {
        total.merge(b);
    }
    let (mean, sigma2, third) = total.central();
    let per: Vec<_> = batches.iter().map(PowerSums::central).collect();
    Moments {
        mean_ax: mean[0],
        mean_ay: mean[1],
        mean_stderr: spread(&per.iter().map(|p| 0.5 * (p.0[0] + p.0[1])).collect::<Vec<_>>()),
        sigma2,
        sigma2_stderr: spread(&per.iter().map(|p| p.1).collect::<Vec<_>>()),
        third_cumulant: third,
        third_cumulant_stderr: spread(&per.iter().map(|p| p.2).collect::<Vec<_>>()),
        n_samples: per_batch * MOMENT_BATCHES,
    }
}

/// Resolved knobs of the correlation estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSettings {
    pub n_traj: usize,
    pub walkers_per_traj: usize,
    pub lag_dt_us: f64,
    pub window_us: f64,
    pub n_origins: usize,
    pub moment_samples: usize,
}

impl CorrelationSettings {
    pub fn for_config(cfg: &ScenarioConfig) -> Self {
        let o = &cfg.estimator;
        let diffusion_time = cfg.z0 * cfg.z0 / cfg.diffusion;
        let (lag_dt, window) = if diffusion_time.is_finite() {
            (
                LAG_DT_PER_DIFFUSION_TIME * diffusion_time,
                WINDOW_PER_DIFFUSION_TIME * diffusion_time,
            )
        } else {
            (cfg.dt, cfg.t_max)
        };
        Self {
            n_traj: o.n_traj.unwrap_or(cfg.n_traj),
            walkers_per_traj: o.walkers_per_traj.unwrap_or(DEFAULT_WALKERS),
            lag_dt_us: o.lag_dt_us.unwrap_or(lag_dt),
            window_us: o.window_us.unwrap_or(window),
            n_origins: o.n_origins.unwrap_or(DEFAULT_ORIGINS).max(1),
            moment_samples: o.moment_samples.unwrap_or(DEFAULT_MOMENT_SAMPLES),
        }
    }

    fn n_lags(&self) -> usize {
        ((self.window_us / self.lag_dt_us).round() as usize).max(2)
    }

    fn origin_stride(&self) -> usize {
        (self.n_lags() / 4).max(1)
    }
}

/// Regime of the dimensionless parameter χ = ω_N·τ_c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// χ ≥ 1: flip-flip suppressed, net transfer.
    ResonantTransfer,
    /// χ < 1: flip-flop and flip-flip balance, no net polarization.
    MotionalSuppression,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::ResonantTransfer => "resonant-transfer regime",
            Regime::MotionalSuppression => "motional-suppression regime",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub chi: f64,
    pub regime: Regime,
    /// 0.1 < χ < 10: neither limit applies cleanly.
    pub marginal: bool,
}

/// Report of one correlation estimate. Units are in the field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub config_hash: String,
    pub seed: u64,
    pub n_spins: usize,
    pub omega_n_rad_per_us: f64,
    pub settings: CorrelationSettings,

    pub sigma2_rad2_per_us2: f64,
    pub sigma2_stderr: f64,
    /// C(0) from the trajectories; agrees with `sigma2` within statistics.
    pub sigma2_dynamic_rad2_per_us2: f64,
    pub tau_c_us: f64,
    pub tau_c_stderr: f64,
    pub tau_c_integral_us: f64,
    pub tau_c_integral_stderr: f64,
    pub chi: f64,
    pub chi_stderr: f64,
    pub regime: Regime,

    pub mean_ax_rad_per_us: f64,
    pub mean_ay_rad_per_us: f64,
    pub mean_a_stderr: f64,
    pub third_cumulant_rad3_per_us3: f64,
    pub third_cumulant_stderr: f64,

    /// RMS of (γ − σ²τ_c(1 − e^{−t/τ_c}))/(σ²τ_c) over the window.
    pub exponential_fit_residual: f64,
    pub gamma_plateau: bool,

    pub lag_dt_us: f64,
    /// C(t) on the lag grid, rad²·μs⁻².
    pub autocorrelation: Vec<f64>,
    /// γ(t) on the lag grid, rad²·μs⁻¹.
    pub gamma: Vec<f64>,
    pub gamma_stderr: Vec<f64>,
}

impl CorrelationEstimate {
    pub fn mean_g(&self) -> Complex64 {
        Complex64::new(self.mean_ax_rad_per_us, self.mean_ay_rad_per_us) / 4.0
    }

    pub fn lag_times(&self) -> Vec<f64> {
        (0..self.gamma.len()).map(|k| k as f64 * self.lag_dt_us).collect()
    }

    /// Linear interpolation of the estimated γ(t), held constant past the window.
    pub fn gamma_at(&self, t: f64) -> f64 {
        let x = t / self.lag_dt_us;
        let k = x.floor() as usize;
        if k + 1 >= self.gamma.len() {
            return *self.gamma.last().unwrap_or(&0.0);
        }
        let f = x - k as f64;
        self.gamma[k] * (1.0 - f) + self.gamma[k + 1] * f
    }

    /// ¼·N·τ_c·σ², μs⁻¹.
    pub fn polarization_rate(&self) -> f64 {
        0.25 * self.n_spins as f64 * self.tau_c_us * self.sigma2_rad2_per_us2
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "correlation estimate".into(),
            message: e.to_string(),
        })
    }
}

/// Per-lag sums of one batch of walkers, per component.
#[derive(Clone)]
struct LagSums {
    /// Σ A(t₀)A(t₀+τ) over live pairs.
    cross: [Vec<f64>; 2],
    /// Σ A(t₀) and Σ A(t₀+τ) over live pairs.
    head: [Vec<f64>; 2],
    tail: [Vec<f64>; 2],
    live: Vec<f64>,
    /// Pairs offered per component (live or not).
    pairs: f64,
    /// Σ A and sample count over every visited configuration.
    sum: [f64; 2],
    count: f64,
}

impl LagSums {
    fn zeros(n: usize) -> Self {
        Self {
            cross: [vec![0.0; n], vec![0.0; n]],
            head: [vec![0.0; n], vec![0.0; n]],
            tail: [vec![0.0; n], vec![0.0; n]],
            live: vec![0.0; n],
            pairs: 0.0,
            sum: [0.0; 2],
            count: 0.0,
        }
    }

    fn merge(&mut self, o: &LagSums) {
        for k in 0..2 {
            add(&mut self.cross[k], &o.cross[k]);
            add(&mut self.head[k], &o.head[k]);
            add(&mut self.tail[k], &o.tail[k]);
            self.sum[k] += o.sum[k];
        }
        add(&mut self.live, &o.live);
        self.pairs += o.pairs;
        self.count += o.count;
    }

    fn means(&self) -> [f64; 2] {
        [self.sum[0] / self.count, self.sum[1] / self.count]
    }

    /// Autocorrelation of ξ = A − mean, averaged over components.
    fn autocorrelation(&self, mean: [f64; 2]) -> Vec<f64> {
        (0..self.live.len())
            .map(|l| {
                let mut c = 0.0;
                for k in 0..2 {
                    let m = mean[k];
                    c += self.cross[k][l] - m * (self.head[k][l] + self.tail[k][l])
                        + m * m * self.live[l];
                }
                0.5 * c / self.pairs
            })
            .collect()
    }
}

fn add(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn walker_run(cfg: &ScenarioConfig, s: &CorrelationSettings, traj: u64) -> LagSums {
    let n_lags = s.n_lags();
    let stride = s.origin_stride();
    let n_steps = n_lags + (s.n_origins - 1) * stride;
    let w = s.walkers_per_traj;
    let field = field_for(cfg);
    let mut bath = BathState::new(
        w,
        cfg.box_length,
        rng::stream(cfg.seed, Purpose::Correlation, traj),
    );
    let mut ax = vec![0.0; (n_steps + 1) * w];
    let mut ay = vec![0.0; (n_steps + 1) * w];
    let mut epoch = vec![0u32; (n_steps + 1) * w];
    let mut current = vec![0u32; w];
    let mut sums = LagSums::zeros(n_lags + 1);
    for step in 0..=n_steps {
        if step > 0 {
            bath.step_diffusion(s.lag_dt_us, cfg.diffusion);
            for &i in bath.swap_events() {
                current[i] += 1;
            }
        }
        let row = step * w;
        for (i, p) in bath.positions().iter().enumerate() {
            let (x, y) = field.transverse(&nalgebra::Vector3::new(p[0], p[1], p[2] + cfg.z0));
            ax[row + i] = x;
            ay[row + i] = y;
            epoch[row + i] = current[i];
            sums.sum[0] += x;
            sums.sum[1] += y;
        }
        sums.count += w as f64;
    }
    for o in 0..s.n_origins {
        let origin = o * stride * w;
        for lag in 0..=n_lags {
            let at = origin + lag * w;
            let (mut cx, mut cy, mut hx, mut hy, mut tx, mut ty, mut live) =
                (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..w {
                if epoch[origin + i] == epoch[at + i] {
                    let (x0, y0) = (ax[origin + i], ay[origin + i]);
                    let (x1, y1) = (ax[at + i], ay[at + i]);
                    cx += x0 * x1;
                    cy += y0 * y1;
                    hx += x0;
                    hy += y0;
                    tx += x1;
                    ty += y1;
                    live += 1.0;
                }
            }
            sums.cross[0][lag] += cx;
            sums.cross[1][lag] += cy;
            sums.head[0][lag] += hx;
            sums.head[1][lag] += hy;
            sums.tail[0][lag] += tx;
            sums.tail[1][lag] += ty;
            sums.live[lag] += live;
        }
    }
    sums.pairs = (s.n_origins * w) as f64;
    sums
}

/// First time C(t) drops to C(0)/e, linearly interpolated.
fn e_folding_time(c: &[f64], dt: f64) -> Option<f64> {
    let target = c[0] / std::f64::consts::E;
    if !(c[0] > 0.0) {
        return None;
    }
    c.windows(2).enumerate().find_map(|(k, w)| {
        (w[1] <= target).then(|| {
            let f = (w[0] - target) / (w[0] - w[1]);
            (k as f64 + f) * dt
        })
    })
}

fn running_integral(c: &[f64], dt: f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(c.len());
    out.push(0.0);
    for w in c.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * dt;
        out.push(acc);
    }
    out
}

fn has_plateau(gamma: &[f64]) -> bool {
    let end = *gamma.last().unwrap_or(&0.0);
    if !(end > 0.0) {
        return false;
    }
    let start = ((1.0 - PLATEAU_TAIL) * (gamma.len() - 1) as f64).floor() as usize;
    let tail = &gamma[start..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &g| (lo.min(g), hi.max(g)));
    hi - lo < PLATEAU_TOLERANCE * end
}

/// Ensemble estimate of σ², τ_c, γ(t) and the cumulant diagnostics.
pub fn estimate_correlation(cfg: &ScenarioConfig, n_traj: usize) -> Result<CorrelationEstimate> {
    let mut settings = CorrelationSettings::for_config(cfg);
    settings.n_traj = n_traj.max(1);
    estimate_with(cfg, settings)
}

pub fn estimate_with(cfg: &ScenarioConfig, settings: CorrelationSettings) -> Result<CorrelationEstimate> {
    let moments = estimate_moments(cfg, settings.moment_samples);
    let runs: Vec<LagSums> = (0..settings.n_traj as u64)
        .into_par_iter()
        .map(|t| walker_run(cfg, &settings, t))
        .collect();
    let n_lags = settings.n_lags();
    let dt = settings.lag_dt_us;

    let mut total = LagSums::zeros(n_lags + 1);
    for r in &runs {
        total.merge(r);
    }
    let mean = total.means();
    let c = total.autocorrelation(mean);
    let gamma = running_integral(&c, dt);

    let n_batches = TAU_BATCHES.min(runs.len());
    let batches: Vec<LagSums> = (0..n_batches)
        .map(|b| {
            let mut s = LagSums::zeros(n_lags + 1);
            for r in runs.iter().skip(b).step_by(n_batches) {
                s.merge(r);
            }
            s
        })
        .collect();
    let batch_c: Vec<Vec<f64>> = batches.iter().map(|b| b.autocorrelation(mean)).collect();
    let batch_gamma: Vec<Vec<f64>> = batch_c.iter().map(|c| running_integral(c, dt)).collect();
    // Batch means each carry 1/n_batches of the data: stderr = sd/√n.
    let gamma_stderr: Vec<f64> = (0..=n_lags)
        .map(|l| spread(&batch_gamma.iter().map(|g| g[l]).collect::<Vec<_>>()))
        .collect();

    let Some(tau_c) = e_folding_time(&c, dt) else {
        return Err(Error::Inconclusive {
            window_us: n_lags as f64 * dt,
            reason: "autocorrelation never fell below C(0)/e".into(),
            partial_gamma: gamma,
        });
    };
    let batch_tau: Vec<f64> = batch_c.iter().filter_map(|c| e_folding_time(c, dt)).collect();
    let tau_c_stderr = spread(&batch_tau);
    let tau_int = gamma[n_lags] / c[0];
    let batch_tau_int: Vec<f64> = batch_c
        .iter()
        .zip(&batch_gamma)
        .map(|(c, g)| g[n_lags] / c[0])
        .collect();

    let model = |t: f64| c[0] * tau_c * (1.0 - (-t / tau_c).exp());
    let residual = (gamma
        .iter()
        .enumerate()
        .map(|(k, g)| ((g - model(k as f64 * dt)) / (c[0] * tau_c)).powi(2))
        .sum::<f64>()
        / gamma.len() as f64)
        .sqrt();

    let chi = cfg.omega_n * tau_c;
    Ok(CorrelationEstimate {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        n_spins: cfg.n_spins,
        omega_n_rad_per_us: cfg.omega_n,
        settings,
        sigma2_rad2_per_us2: moments.sigma2,
        sigma2_stderr: moments.sigma2_stderr,
        sigma2_dynamic_rad2_per_us2: c[0],
        tau_c_us: tau_c,
        tau_c_stderr,
        tau_c_integral_us: tau_int,
        tau_c_integral_stderr: spread(&batch_tau_int),
        chi,
        chi_stderr: cfg.omega_n * tau_c_stderr,
        regime: classify(chi).regime,
        mean_ax_rad_per_us: moments.mean_ax,
        mean_ay_rad_per_us: moments.mean_ay,
        mean_a_stderr: moments.mean_stderr,
        third_cumulant_rad3_per_us3: moments.third_cumulant,
        third_cumulant_stderr: moments.third_cumulant_stderr,
        exponential_fit_residual: residual,
        gamma_plateau: has_plateau(&gamma),
        lag_dt_us: dt,
        autocorrelation: c,
        gamma,
        gamma_stderr,
    })
}

fn classify(chi: f64) -> RegimeReport {
    RegimeReport {
        chi,
        regime: if chi >= 1.0 {
            Regime::ResonantTransfer
        } else {
            Regime::MotionalSuppression
        },
        marginal: chi > 0.1 && chi < 10.0,
    }
}

/// χ = ω_N·τ_c with its regime label.
pub fn regime_chi(cfg: &ScenarioConfig, est: &CorrelationEstimate) -> RegimeReport {
    classify(cfg.omega_n * est.tau_c_us)
}

/// Latest time at which the incoherent model holds:
/// min(1/(N·|⟨ξ³⟩|·τ_c²), 1/(N·|⟨g⟩|²·τ_c)), infinite when both moments vanish.
pub fn validity_horizon(cfg: &ScenarioConfig, est: &CorrelationEstimate) -> f64 {
    horizon(
        cfg.n_spins as f64,
        est.third_cumulant_rad3_per_us3,
        est.mean_g(),
        est.tau_c_us,
    )
}

pub fn horizon(n: f64, third_cumulant: f64, mean_g: Complex64, tau_c: f64) -> f64 {
    let skew = 1.0 / (n * third_cumulant.abs() * tau_c * tau_c);
    let coherent = 1.0 / (n * mean_g.norm_sqr() * tau_c);
    skew.min(coherent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    fn cfg(z0: f64, d: f64, l: f64) -> ScenarioConfig {
        let mut raw = RawConfig::new(z0, d, 1.0, 660.0);
        raw.box_length_nm = Some(l);
        raw.validate().unwrap()
    }

    #[test]
    fn collapsed_box_has_no_variance() {
        let m = estimate_moments(&cfg(3.2, 0.46, 1e-9), 10_000);
        assert!(m.sigma2 < 1e-20, "{}", m.sigma2);
    }

    #[test]
    fn symmetric_box_has_vanishing_odd_moments() {
        let m = estimate_moments(&cfg(3.2, 0.46, 10.0), 400_000);
        assert!(m.mean_ax.abs() < 4.0 * m.mean_stderr + 1e-12);
        assert!(m.mean_ay.abs() < 4.0 * m.mean_stderr + 1e-12);
        assert!(m.third_cumulant.abs() < 4.0 * m.third_cumulant_stderr);
    }

    #[test]
    fn e_folding_interpolates() {
        let c: Vec<f64> = (0..100).map(|k| (-(k as f64) * 0.1 / 2.0).exp()).collect();
        let tau = e_folding_time(&c, 0.1).unwrap();
        assert!((tau - 2.0).abs() < 2e-3);
        assert!(e_folding_time(&[1.0, 1.0, 1.0], 0.1).is_none());
    }

    #[test]
    fn plateau_detection() {
        let flat: Vec<f64> = (0..100).map(|k| 1.0 - (-(k as f64) / 5.0).exp()).collect();
        assert!(has_plateau(&flat));
        let ramp: Vec<f64> = (0..100).map(|k| k as f64).collect();
        assert!(!has_plateau(&ramp));
    }

    #[test]
    fn regime_labels() {
        let r = classify(2.0 * std::f64::consts::PI * 2.8 * 10.0);
        assert!((r.chi - 175.9).abs() < 0.1);
        assert_eq!(r.regime.label(), "resonant-transfer regime");
        assert!(!r.marginal);
        let r = classify(0.0);
        assert_eq!(r.regime.label(), "motional-suppression regime");
    }

    #[test]
    fn horizon_arithmetic() {
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(horizon(1e4, 0.0, zero, 10.0), f64::INFINITY);
        // N⟨ξ³⟩τ_c² = 0.1 μs⁻¹
        let third = 0.1 / (1e4 * 100.0);
        assert!((horizon(1e4, third, zero, 10.0) - 10.0).abs() < 1e-9);
        let g = Complex64::new(0.0, (0.5f64 / (1e4 * 10.0)).sqrt());
        assert!((horizon(1e4, 0.0, g, 10.0) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn frozen_bath_is_inconclusive() {
        let mut raw = RawConfig::new(3.2, 0.0, 1.0, 660.0);
        raw.box_length_nm = Some(10.0);
        raw.t_max_us = 20.0;
        raw.dt_us = 0.5;
        let c = raw.validate().unwrap();
        let mut s = CorrelationSettings::for_config(&c);
        s.n_traj = 2;
        s.walkers_per_traj = 100;
        s.moment_samples = 1000;
        match estimate_with(&c, s) {
            Err(Error::Inconclusive { partial_gamma, .. }) => assert_eq!(partial_gamma.len(), 41),
            other => panic!("{other:?}"),
        }
    }
}
