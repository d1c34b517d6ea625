//! Batch front end for the `nvdnp` binary: argument definitions and the five
//! subcommands. Every command writes its outputs plus a `manifest-<command>.json`
//! into `--out-dir`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "nvdnp", version, about = "NV-center polarization transfer to diffusing nuclear spins")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Directory for outputs and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,

    /// Override the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Override the number of trajectories for estimation and simulation.
    #[arg(long, global = true)]
    pub traj: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate σ², τ_c, γ(t) and χ from Brownian trajectories.
    Estimate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Analytic ⟨n⟩(t) from a correlation estimate.
    Predict {
        #[arg(long)]
        config: PathBuf,
        /// Estimate report (default: <out-dir>/estimate.json).
        #[arg(long)]
        estimate: Option<PathBuf>,
    },
    /// Ensemble ⟨n⟩(t) from the bosonized simulator.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Use the full correlation matrix instead of the rank-one form.
        #[arg(long)]
        dense: bool,
        /// Replay recorded trajectory dumps instead of live baths.
        #[arg(long, num_args = 1..)]
        replay: Vec<PathBuf>,
        /// Also write every ensemble member's coupling trajectory.
        #[arg(long)]
        dump_trajectories: bool,
    },
    /// Compare curves with each other or with measured data.
    Compare {
        /// Curve CSV files.
        #[arg(required = true)]
        curves: Vec<PathBuf>,
        /// Measured data (t_us, population, error); becomes the reference.
        #[arg(long)]
        measured: Option<PathBuf>,
        /// T₁ρ used to turn fitted tail rates into α.
        #[arg(long)]
        t1rho: Option<f64>,
        /// Start of the tail fit window, μs (default: middle of the overlap).
        #[arg(long)]
        tail_from: Option<f64>,
        /// End of the RMS window, μs (default: end of the overlap).
        #[arg(long)]
        until: Option<f64>,
    },
    /// Estimate over a range of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    /// Proton density, nm⁻³.
    Rho,
    /// NV depth, nm; the box is scaled with it.
    Z0,
    /// Diffusion coefficient, nm²·μs⁻¹.
    D,
    /// Field, gauss; the drive stays on resonance.
    B,
    /// T₁ρ, μs.
    T1rho,
}

impl SweepParam {
    pub fn column(self) -> &'static str {
        match self {
            SweepParam::Rho => "rho_per_nm3",
            SweepParam::Z0 => "z0_nm",
            SweepParam::D => "diffusion_nm2_per_us",
            SweepParam::B => "field_gauss",
            SweepParam::T1rho => "t1rho_us",
        }
    }
}
