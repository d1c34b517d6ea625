//! Brownian nuclear bath in a box above the diamond surface.
//!
//! Coordinates are relative to the surface point straight above the NV, which
//! sits at (0, 0, −z₀). Nuclei live in [−L/2, L/2]² × [0, L]. Each step adds an
//! independent Gaussian increment of variance 2·D·dt per axis, then:
//!
//! * the diamond surface z = 0 reflects (no swap),
//! * leaving through a lateral face wraps to the opposite face (periodic),
//! * leaving through the top face reflects back into the box,
//!
//! and in the last two cases the nucleus is flagged as a reservoir swap: the
//! walker that re-enters is a fresh thermal spin with no history. A swapped
//! nucleus is additionally mirrored through x = 0 and through y = 0, each with
//! probability ½. The positions of crossing nuclei are symmetric under these
//! mirrors, so the one-time density stays uniform, while for an NV aligned with
//! the surface normal A_x is odd in x and A_y odd in y, so couplings before and
//! after a swap are uncorrelated.

mod dump;

pub use dump::{read_trajectory, write_trajectory};

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::ScenarioConfig;
use crate::dipolar::{DipolarField, NvFrame};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

/// Upper limit on N × frames for an in-memory trajectory (2 GiB of couplings).
pub const MAX_TRAJECTORY_SAMPLES: u128 = 1 << 27;

#[derive(Debug, Clone)]
pub struct BathState {
    positions: Vec<[f64; 3]>,
    swap_events: Vec<usize>,
    rng: ChaCha8Rng,
    box_length: f64,
}

impl BathState {
    /// `n` nuclei uniform over the box.
    pub fn new(n: usize, box_length: f64, mut rng: ChaCha8Rng) -> Self {
        let positions = (0..n)
            .map(|_| uniform_in_box(&mut rng, box_length))
            .collect();
        Self {
            positions,
            swap_events: Vec::new(),
            rng,
            box_length,
        }
    }

    /// Bath for ensemble member `index` under base seed `seed`.
    pub fn for_trajectory(cfg: &ScenarioConfig, seed: u64, index: u64) -> Self {
        Self::new(
            cfg.n_spins,
            cfg.box_length,
            rng::stream(seed, Purpose::Bath, index),
        )
    }

    /// Build a bath with explicit positions (no validation beyond the box).
    pub fn from_positions(positions: Vec<[f64; 3]>, box_length: f64, rng: ChaCha8Rng) -> Self {
        Self {
            positions,
            swap_events: Vec::new(),
            rng,
            box_length,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    /// Indices replaced by reservoir nuclei during the last step.
    pub fn swap_events(&self) -> &[usize] {
        &self.swap_events
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// One Brownian step of length `dt` (μs) with diffusion coefficient `d`.
    pub fn step_diffusion(&mut self, dt: f64, d: f64) {
        self.swap_events.clear();
        if d == 0.0 {
            return;
        }
        let sigma = (2.0 * d * dt).sqrt();
        let l = self.box_length;
        let half = 0.5 * l;
        for (i, p) in self.positions.iter_mut().enumerate() {
            let mut swapped = false;
            for axis in 0..2 {
                let dx: f64 = self.rng.sample(StandardNormal);
                let mut x = p[axis] + sigma * dx;
                if x.abs() > half {
                    x -= l * (x / l).round();
                    swapped = true;
                }
                p[axis] = x;
            }
            let dz: f64 = self.rng.sample(StandardNormal);
            let z = p[2] + sigma * dz;
            if !(0.0..=l).contains(&z) {
                if z > l || z < -l {
                    swapped = true;
                }
                p[2] = fold(z, l);
            } else {
                p[2] = z;
            }
            if swapped {
                let flips: u8 = self.rng.random();
                if flips & 1 != 0 {
                    p[0] = -p[0];
                }
                if flips & 2 != 0 {
                    p[1] = -p[1];
                }
                self.swap_events.push(i);
            }
        }
    }

    /// Couplings g_i to the NV at depth `z0` into `out` (length N).
    pub fn couplings_into(&self, field: &DipolarField, z0: f64, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.positions.len());
        for (g, p) in out.iter_mut().zip(&self.positions) {
            let (ax, ay) = field.transverse(&relative(p, z0));
            *g = Complex64::new(0.25 * ax, 0.25 * ay);
        }
    }

    /// Longitudinal hyperfine components A_z into `out`.
    pub fn longitudinal_into(&self, field: &DipolarField, z0: f64, out: &mut [f64]) {
        for (a, p) in out.iter_mut().zip(&self.positions) {
            *a = field.hyperfine_unchecked(&relative(p, z0)).az;
        }
    }
}

#[inline]
fn relative(p: &[f64; 3], z0: f64) -> Vector3<f64> {
    Vector3::new(p[0], p[1], p[2] + z0)
}

/// Map z onto [0, L] by mirror images at 0 and L.
fn fold(z: f64, l: f64) -> f64 {
    // single reflections are exact; deeper excursions fold through the period
    if (0.0..=l).contains(&z) {
        return z;
    } else if (-l..0.0).contains(&z) {
        return -z;
    } else if z > l && z <= 2.0 * l {
        return 2.0 * l - z;
    }
    let period = 2.0 * l;
    let m = z.rem_euclid(period);
    if m > l {
        period - m
    } else {
        m
    }
}

pub(crate) fn uniform_in_box<R: Rng>(rng: &mut R, l: f64) -> [f64; 3] {
    [
        (rng.random::<f64>() - 0.5) * l,
        (rng.random::<f64>() - 0.5) * l,
        rng.random::<f64>() * l,
    ]
}

/// Dipolar field for a scenario's NV orientation.
pub fn field_for(cfg: &ScenarioConfig) -> DipolarField {
    DipolarField::new(NvFrame::tilted(cfg.nv_tilt))
}

/// Bath trajectory 0 for `seed`.
pub fn init_bath(cfg: &ScenarioConfig, seed: u64) -> BathState {
    BathState::for_trajectory(cfg, seed, 0)
}

pub fn step_diffusion(state: &mut BathState, dt: f64, d: f64) {
    state.step_diffusion(dt, d);
}

/// g_i for every nucleus, NV at (0, 0, −z₀).
pub fn sample_couplings(state: &BathState, cfg: &ScenarioConfig) -> Result<Vec<Complex64>> {
    let field = field_for(cfg);
    state
        .positions
        .iter()
        .map(|p| field.coupling(&relative(p, cfg.z0)).map(|c| c.0))
        .collect()
}

/// One frame of a coupling trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub time: f64,
    /// Nuclei replaced during the step that led into this frame.
    pub swaps: Vec<u32>,
    pub g: Vec<Complex64>,
    /// Longitudinal components, present when detuning fluctuations are on.
    pub az: Option<Vec<f64>>,
}

/// Coupling time series for one ensemble member on the grid {0, dt, …, t_max}.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTrajectory {
    pub dt: f64,
    pub n_spins: usize,
    pub config_hash: [u8; 32],
    pub frames: Vec<Frame>,
}

impl CouplingTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.time).collect()
    }

    /// Series of nucleus `i`.
    pub fn series(&self, i: usize) -> Vec<Complex64> {
        self.frames.iter().map(|f| f.g[i]).collect()
    }

    /// (time, index) for every swap.
    pub fn swap_log(&self) -> Vec<(f64, usize)> {
        self.frames
            .iter()
            .flat_map(|f| f.swaps.iter().map(move |&i| (f.time, i as usize)))
            .collect()
    }
}

/// Source of per-step couplings and swap lists for the simulator: either a
/// live bath or a recorded trajectory.
pub trait FrameSource {
    fn n_spins(&self) -> usize;
    /// Couplings at the current frame.
    fn couplings(&mut self, out: &mut [Complex64]);
    /// A_z at the current frame.
    fn longitudinal(&mut self, out: &mut [f64]);
    /// Advance one frame; returns the swapped indices.
    fn advance(&mut self) -> &[usize];
}

/// Bath stepped on the fly.
pub struct LiveBath {
    pub state: BathState,
    field: DipolarField,
    z0: f64,
    dt: f64,
    diffusion: f64,
}

impl LiveBath {
    pub fn new(cfg: &ScenarioConfig, seed: u64, index: u64) -> Self {
        Self {
            state: BathState::for_trajectory(cfg, seed, index),
            field: field_for(cfg),
            z0: cfg.z0,
            dt: cfg.dt,
            diffusion: cfg.diffusion,
        }
    }
}

impl FrameSource for LiveBath {
    fn n_spins(&self) -> usize {
        self.state.len()
    }

    fn couplings(&mut self, out: &mut [Complex64]) {
        self.state.couplings_into(&self.field, self.z0, out);
    }

    fn longitudinal(&mut self, out: &mut [f64]) {
        self.state.longitudinal_into(&self.field, self.z0, out);
    }

    fn advance(&mut self) -> &[usize] {
        self.state.step_diffusion(self.dt, self.diffusion);
        self.state.swap_events()
    }
}

/// Replays a recorded trajectory frame by frame.
pub struct Replay<'a> {
    traj: &'a CouplingTrajectory,
    frame: usize,
    swaps: Vec<usize>,
}

impl<'a> Replay<'a> {
    pub fn new(traj: &'a CouplingTrajectory) -> Self {
        Self {
            traj,
            frame: 0,
            swaps: Vec::new(),
        }
    }
}

impl FrameSource for Replay<'_> {
    fn n_spins(&self) -> usize {
        self.traj.n_spins
    }

    fn couplings(&mut self, out: &mut [Complex64]) {
        out.copy_from_slice(&self.traj.frames[self.frame].g);
    }

    fn longitudinal(&mut self, out: &mut [f64]) {
        match &self.traj.frames[self.frame].az {
            Some(az) => out.copy_from_slice(az),
            None => out.fill(0.0),
        }
    }

    fn advance(&mut self) -> &[usize] {
        self.frame = (self.frame + 1).min(self.traj.frames.len() - 1);
        self.swaps.clear();
        self.swaps
            .extend(self.traj.frames[self.frame].swaps.iter().map(|&i| i as usize));
        &self.swaps
    }
}

/// Record trajectory `index` of the ensemble seeded by `seed`.
pub fn generate_trajectory_member(
    cfg: &ScenarioConfig,
    seed: u64,
    index: u64,
) -> Result<CouplingTrajectory> {
    let n_frames = cfg.n_steps() + 1;
    let samples = cfg.n_spins as u128 * n_frames as u128;
    if samples > MAX_TRAJECTORY_SAMPLES {
        return Err(Error::TooLarge {
            samples,
            nuclei: cfg.n_spins,
            frames: n_frames,
            limit: MAX_TRAJECTORY_SAMPLES,
        });
    }
    let mut live = LiveBath::new(cfg, seed, index);
    let n = cfg.n_spins;
    let mut frames = Vec::with_capacity(n_frames);
    let mut swaps = Vec::new();
    for k in 0..n_frames {
        if k > 0 {
            swaps = live.advance().iter().map(|&i| i as u32).collect();
        }
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        live.couplings(&mut g);
        let az = cfg.detuning_fluctuations.then(|| {
            let mut az = vec![0.0; n];
            live.longitudinal(&mut az);
            az
        });
        frames.push(Frame {
            time: k as f64 * cfg.dt,
            swaps: std::mem::take(&mut swaps),
            g,
            az,
        });
    }
    Ok(CouplingTrajectory {
        dt: cfg.dt,
        n_spins: n,
        config_hash: cfg.hash_bytes(),
        frames,
    })
}

pub fn generate_trajectory(cfg: &ScenarioConfig, seed: u64) -> Result<CouplingTrajectory> {
    generate_trajectory_member(cfg, seed, 0)
}
