//! Bosonized NV + bath dynamics.
//!
//! Under the Holstein-Primakoff mapping the NV and each nucleus become modes
//! coupled by the beam-splitter Hamiltonian Σ g_i a†b_i + h.c., which conserves
//! the excitation number and produces no anomalous correlations. The state is
//! therefore fully described by the one-particle correlation matrix
//! C_ij = ⟨b_i†b_j⟩, with C₀₀ the NV population: the initial bright NV gives
//! C₀₀ = 1, the thermal bath C_ii = ½, and ⟨n⟩ = ½ + (C₀₀ − ½).
//!
//! Each step of length dt
//!
//! 1. applies half the T₁ρ channel,
//! 2. applies half the A_z/2 bath phases, if enabled,
//! 3. propagates exactly with the couplings at the start of the step,
//! 4. repeats 2 and 1,
//! 5. advances the bath and resets the modes of replaced nuclei.
//!
//! Two state representations are available: the full matrix
//! ([`ModeCorrelationMatrix`], O(N²) per step) and [`RankOneState`], which
//! exploits C = ½I + ½ψψ† and costs O(N) per step. Both give the same C.
//!
//! The HPA treats the bath as bosons and so underestimates the spin
//! polarization; it is a lower bound on the transfer, not an exact result.

mod dense;
mod propagator;
mod rank_one;

pub use dense::{init_state, ModeCorrelationMatrix};
pub use propagator::{
    check_step, coupling_norm, exact_propagator, hamiltonian_matrix, BrightBlock, MAX_COUPLING_STEP,
};
pub use rank_one::RankOneState;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bath::{CouplingTrajectory, FrameSource, LiveBath, Replay};
use crate::config::ScenarioConfig;
use crate::curve::{PolarizationCurve, Provenance};
use crate::error::{Error, Result};

/// Largest per-step change of tr C allowed during a unitary step.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-9;
pub const HERMITICITY_LIMIT: f64 = 1e-10;
pub const OCCUPATION_SLACK: f64 = 1e-9;
/// Largest N accepted for the dense representation.
pub const DENSE_LIMIT: usize = 4096;

pub trait ModeState {
    fn n_spins(&self) -> usize;
    /// ⟨n⟩ = ½ + (C₀₀ − ½).
    fn nv_population(&self) -> f64;
    fn trace(&self) -> f64;
    /// Σ_{i≥1} (C_ii − ½).
    fn bath_gain(&self) -> f64;
    /// Smallest and largest diagonal entry.
    fn occupation_range(&self) -> (f64, f64);
    fn hermiticity_drift(&self) -> f64 {
        0.0
    }
    /// C ← U C U† with U = e^{−ih·dt}, NV detuning `detuning`.
    fn step(&mut self, g: &[Complex64], detuning: f64, dt: f64) -> Result<()>;
    /// Bath phases e^{−i·A_z,i·τ/2}.
    fn phase_nuclei(&mut self, az: &[f64], tau: f64);
    /// Replace nuclei (bath indices, 0-based) by fresh thermal modes.
    fn reset_modes(&mut self, indices: &[usize]);
    fn apply_t1rho(&mut self, dt: f64, t1rho: f64);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Representation {
    #[default]
    RankOne,
    Dense,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::RankOne => "rank-one",
            Representation::Dense => "dense",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub n_traj: usize,
    /// Largest |Δ tr C| over any unitary step.
    pub max_trace_drift: f64,
    pub max_hermiticity_drift: f64,
    pub min_occupation: f64,
    pub max_occupation: f64,
    pub swap_count: u64,
    /// Largest |NV loss − bath gain| over trajectories without swaps or T₁ρ.
    pub max_bookkeeping_error: f64,
}

impl Diagnostics {
    pub fn to_text(&self) -> String {
        format!(
            "n_traj={}\nmax_trace_drift={:e}\nmax_hermiticity_drift={:e}\nmin_occupation={}\nmax_occupation={}\nswap_count={}\nmax_bookkeeping_error={:e}\n",
            self.n_traj,
            self.max_trace_drift,
            self.max_hermiticity_drift,
            self.min_occupation,
            self.max_occupation,
            self.swap_count,
            self.max_bookkeeping_error,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub curve: PolarizationCurve,
    /// Ensemble mean of the final Σ_{i≥1}(C_ii − ½).
    pub bath_gain: f64,
    pub diagnostics: Diagnostics,
}

/// Result of one ensemble member.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub populations: Vec<f64>,
    pub bath_gain: f64,
    pub max_trace_drift: f64,
    pub hermiticity_drift: f64,
    pub occupation_range: (f64, f64),
    pub swap_count: u64,
}

/// Propagate `state` through `n_steps` frames of `source`.
pub fn propagate<S: ModeState, F: FrameSource>(
    state: &mut S,
    source: &mut F,
    cfg: &ScenarioConfig,
    dt: f64,
    n_steps: usize,
) -> Result<TrajectoryRecord> {
    let n = source.n_spins();
    if state.n_spins() != n {
        return Err(Error::Incompatible(format!(
            "state has {} nuclei, frame source {}",
            state.n_spins(),
            n
        )));
    }
    let detuning = cfg.detuning();
    let mut g = vec![Complex64::new(0.0, 0.0); n];
    let mut az = vec![0.0; if cfg.detuning_fluctuations { n } else { 0 }];
    let mut populations = Vec::with_capacity(n_steps + 1);
    populations.push(state.nv_population());
    let mut max_trace_drift: f64 = 0.0;
    let mut swap_count = 0u64;
    for k in 0..n_steps {
        source.couplings(&mut g);
        if cfg.detuning_fluctuations {
            source.longitudinal(&mut az);
        }
        if let Some(t1) = cfg.t1rho {
            state.apply_t1rho(0.5 * dt, t1);
        }
        if cfg.detuning_fluctuations {
            state.phase_nuclei(&az, 0.5 * dt);
        }
        let before = state.trace();
        state.step(&g, detuning, dt)?;
        let drift = (state.trace() - before).abs();
        max_trace_drift = max_trace_drift.max(drift);
        if drift > TRACE_DRIFT_LIMIT || state.hermiticity_drift() > HERMITICITY_LIMIT {
            return Err(Error::Invariant(format!(
                "invariant drift at step {k} (t = {} μs): trace drift {drift:e}, hermiticity drift {:e}, ⟨n⟩ = {}",
                k as f64 * dt,
                state.hermiticity_drift(),
                state.nv_population()
            )));
        }
        if cfg.detuning_fluctuations {
            state.phase_nuclei(&az, 0.5 * dt);
        }
        if let Some(t1) = cfg.t1rho {
            state.apply_t1rho(0.5 * dt, t1);
        }
        let swaps = source.advance();
        swap_count += swaps.len() as u64;
        state.reset_modes(swaps);
        populations.push(state.nv_population());
    }
    let occupation_range = state.occupation_range();
    if occupation_range.0 < -OCCUPATION_SLACK || occupation_range.1 > 1.0 + OCCUPATION_SLACK {
        return Err(Error::Invariant(format!(
            "occupation out of [0, 1]: range {:?}",
            occupation_range
        )));
    }
    Ok(TrajectoryRecord {
        populations,
        bath_gain: state.bath_gain(),
        max_trace_drift,
        hermiticity_drift: state.hermiticity_drift(),
        occupation_range,
        swap_count,
    })
}

fn propagate_as<F: FrameSource>(
    repr: Representation,
    source: &mut F,
    cfg: &ScenarioConfig,
    dt: f64,
    n_steps: usize,
) -> Result<TrajectoryRecord> {
    let n = source.n_spins();
    match repr {
        Representation::RankOne => propagate(&mut RankOneState::new(n), source, cfg, dt, n_steps),
        Representation::Dense => {
            if n > DENSE_LIMIT {
                return Err(Error::invalid(
                    "representation",
                    format!("dense matrices are limited to N ≤ {DENSE_LIMIT}, got {n}"),
                ));
            }
            propagate(&mut init_state(n), source, cfg, dt, n_steps)
        }
    }
}

/// Ensemble over `cfg.n_traj` live baths seeded by `cfg.seed`.
pub fn run(cfg: &ScenarioConfig) -> Result<SimOutcome> {
    run_with(cfg, Representation::RankOne)
}

pub fn run_with(cfg: &ScenarioConfig, repr: Representation) -> Result<SimOutcome> {
    let n_steps = cfg.n_steps();
    let records = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|index| {
            let mut bath = LiveBath::new(cfg, cfg.seed, index);
            propagate_as(repr, &mut bath, cfg, cfg.dt, n_steps)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = reduce(cfg, &records, cfg.dt);
    out.curve.annotate("representation", repr.as_str());
    Ok(out)
}

/// Ensemble over recorded trajectories, which must come from `cfg`.
pub fn run_replay(cfg: &ScenarioConfig, trajectories: &[CouplingTrajectory]) -> Result<SimOutcome> {
    let hash = cfg.hash_bytes();
    let Some(first) = trajectories.first() else {
        return Err(Error::invalid("trajectories", "at least one trajectory is required"));
    };
    for t in trajectories {
        if t.config_hash != hash {
            return Err(Error::Incompatible(
                "trajectory was recorded for a different configuration".into(),
            ));
        }
        if t.frames.is_empty() || t.frames.len() != first.frames.len() || t.dt != first.dt {
            return Err(Error::Incompatible("trajectories have different grids".into()));
        }
    }
    let n_steps = first.frames.len() - 1;
    let records = trajectories
        .par_iter()
        .map(|t| propagate_as(Representation::RankOne, &mut Replay::new(t), cfg, t.dt, n_steps))
        .collect::<Result<Vec<_>>>()?;
    let mut out = reduce(cfg, &records, first.dt);
    out.curve.annotate("source", "replay");
    Ok(out)
}

/// Fixed-order ensemble average.
fn reduce(cfg: &ScenarioConfig, records: &[TrajectoryRecord], dt: f64) -> SimOutcome {
    let n_traj = records.len();
    let n_points = records[0].populations.len();
    let mut sum = vec![0.0; n_points];
    let mut sum_sq = vec![0.0; n_points];
    for r in records {
        for (k, &p) in r.populations.iter().enumerate() {
            sum[k] += p;
            sum_sq[k] += p * p;
        }
    }
    let m = n_traj as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let stderr: Vec<f64> = if n_traj > 1 {
        sum_sq
            .iter()
            .zip(&mean)
            .map(|(sq, mu)| ((sq / m - mu * mu).max(0.0) * m / (m - 1.0) / m).sqrt())
            .collect()
    } else {
        vec![0.0; n_points]
    };
    let mut diagnostics = Diagnostics {
        n_traj,
        min_occupation: f64::INFINITY,
        max_occupation: f64::NEG_INFINITY,
        ..Diagnostics::default()
    };
    let closed = cfg.t1rho.is_none();
    for r in records {
        diagnostics.max_trace_drift = diagnostics.max_trace_drift.max(r.max_trace_drift);
        diagnostics.max_hermiticity_drift = diagnostics.max_hermiticity_drift.max(r.hermiticity_drift);
        diagnostics.min_occupation = diagnostics.min_occupation.min(r.occupation_range.0);
        diagnostics.max_occupation = diagnostics.max_occupation.max(r.occupation_range.1);
        diagnostics.swap_count += r.swap_count;
        if closed && r.swap_count == 0 {
            let loss = r.populations[0] - r.populations[n_points - 1];
            diagnostics.max_bookkeeping_error =
                diagnostics.max_bookkeeping_error.max((loss - r.bath_gain).abs());
        }
    }
    let bath_gain = records.iter().map(|r| r.bath_gain).sum::<f64>() / m;
    let times = (0..n_points).map(|k| k as f64 * dt).collect();
    let mut curve = PolarizationCurve::new(times, mean, Provenance::GaussianSim).with_stderr(stderr);
    curve.annotate("n_traj", n_traj);
    curve.annotate("seed", cfg.seed);
    curve.annotate("n_spins", cfg.n_spins);
    curve.annotate("dt_us", dt);
    curve.annotate("config_hash", cfg.hash());
    SimOutcome {
        curve,
        bath_gain,
        diagnostics,
    }
}
