use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nvdnp_core::analytic::{
    closed_form_curve, composite_tail_rate, solve_master, transfer_efficiency, uniform_grid,
    AnalyticModel,
};
use nvdnp_core::bath::{generate_trajectory_member, read_trajectory, write_trajectory};
use nvdnp_core::fit::power_law_exponent;
use nvdnp_core::gaussian::{self, Representation};
use nvdnp_core::statistics::{
    estimate_with, validity_horizon, CorrelationEstimate, CorrelationSettings,
};
use nvdnp_core::{Error, PolarizationCurve, Provenance, RawConfig, ScenarioConfig};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::{Cli, Command, SweepParam};

pub fn run(cli: &Cli) -> CliResult<()> {
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| CliError::io(&cli.out_dir, e))?;
    match &cli.command {
        Command::Estimate { config } => cmd_estimate(cli, config),
        Command::Predict { config, estimate } => cmd_predict(cli, config, estimate.as_deref()),
        Command::Simulate {
            config,
            dense,
            replay,
            dump_trajectories,
        } => cmd_simulate(cli, config, *dense, replay, *dump_trajectories),
        Command::Compare {
            curves,
            measured,
            t1rho,
            tail_from,
            until,
        } => cmd_compare(cli, curves, measured.as_deref(), *t1rho, *tail_from, *until),
        Command::Sweep {
            config,
            param,
            values,
        } => cmd_sweep(cli, config, *param, values),
    }
}

fn read_raw(path: &Path) -> CliResult<RawConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(RawConfig::from_json(&text)?)
}

/// Validate `raw` and apply the command-line overrides; the `--seed` flag wins
/// over both the file and the environment.
fn finalize(cli: &Cli, raw: &RawConfig) -> CliResult<ScenarioConfig> {
    let mut cfg = raw.validate()?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.traj {
        if n == 0 {
            return Err(CliError::Usage("--traj must be ≥ 1".into()));
        }
        cfg.n_traj = n;
        cfg.estimator.n_traj = Some(n);
    }
    Ok(cfg)
}

fn load(cli: &Cli, path: &Path) -> CliResult<ScenarioConfig> {
    let cfg = finalize(cli, &read_raw(path)?)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn format_gamma(lag_dt: f64, gamma: &[f64]) -> String {
    let mut s = String::from("t_us,gamma_rad2_per_us\n");
    for (k, g) in gamma.iter().enumerate() {
        let _ = writeln!(s, "{:e},{:e}", k as f64 * lag_dt, g);
    }
    s
}

fn cmd_estimate(cli: &Cli, config: &Path) -> CliResult<()> {
    let cfg = load(cli, config)?;
    let mut manifest = RunManifest::new("estimate", &cli.out_dir);
    manifest.set_config(cfg.hash(), cfg.seed);
    manifest.stage("estimate");
    let settings = CorrelationSettings::for_config(&cfg);
    let lag_dt = settings.lag_dt_us;
    match estimate_with(&cfg, settings) {
        Ok(est) => {
            manifest.write("estimate.json", est.to_json().as_bytes())?;
            manifest.finish()?;
            print_estimate(&cfg, &est);
            Ok(())
        }
        Err(Error::Inconclusive {
            window_us,
            reason,
            partial_gamma,
        }) => {
            manifest.write("estimate-partial-gamma.csv", format_gamma(lag_dt, &partial_gamma).as_bytes())?;
            manifest.finish()?;
            Err(Error::Inconclusive {
                window_us,
                reason,
                partial_gamma,
            }
            .into())
        }
        Err(e) => {
            manifest.finish()?;
            Err(e.into())
        }
    }
}

fn print_estimate(cfg: &ScenarioConfig, est: &CorrelationEstimate) {
    let rate = est.polarization_rate();
    println!("n_spins      {}", est.n_spins);
    println!(
        "sigma2       {:.4e} ± {:.1e} rad²/μs²",
        est.sigma2_rad2_per_us2, est.sigma2_stderr
    );
    println!("tau_c        {:.3} ± {:.3} μs", est.tau_c_us, est.tau_c_stderr);
    println!("chi          {:.3} ({})", est.chi, est.regime.label());
    println!("tau_p        {:.4} μs", 1.0 / rate);
    println!("horizon      {:.4e} μs", validity_horizon(cfg, est));
}

fn cmd_predict(cli: &Cli, config: &Path, estimate: Option<&Path>) -> CliResult<()> {
    let cfg = load(cli, config)?;
    let est_path = estimate
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cli.out_dir.join("estimate.json"));
    let text = std::fs::read_to_string(&est_path).map_err(|e| CliError::io(&est_path, e))?;
    let est = CorrelationEstimate::from_json(&text)?;

    let mut manifest = RunManifest::new("predict", &cli.out_dir);
    manifest.set_config(cfg.hash(), cfg.seed);
    manifest.stage("predict");

    let n = cfg.n_spins as f64;
    let bare = AnalyticModel::new(n, est.sigma2_rad2_per_us2, est.tau_c_us)?;
    let relaxed = bare.with_t1rho(cfg.t1rho)?;
    let grid = uniform_grid(cfg.dt, cfg.t_max);
    let horizon = nvdnp_core::statistics::horizon(
        n,
        est.third_cumulant_rad3_per_us3,
        est.mean_g(),
        est.tau_c_us,
    );
    let rate = 0.25 * n * est.tau_c_us * est.sigma2_rad2_per_us2;

    let annotate = |curve: &mut PolarizationCurve, model: &AnalyticModel| {
        curve.annotate("config_hash", cfg.hash());
        curve.annotate("estimate_config_hash", &est.config_hash);
        curve.annotate("n_spins", cfg.n_spins);
        curve.annotate("sigma2_rad2_per_us2", est.sigma2_rad2_per_us2);
        curve.annotate("tau_c_us", est.tau_c_us);
        curve.annotate("validity_horizon_us", horizon);
        curve.annotate("tau_p_us", 1.0 / rate);
        curve.annotate("tail_rate_per_us", composite_tail_rate(model));
        curve.annotate("alpha", transfer_efficiency(model));
        if horizon < cfg.t_max {
            curve.annotate(
                "warning",
                format!("validity horizon {horizon:.4e} us is shorter than t_max {} us", cfg.t_max),
            );
        }
        if est.config_hash != cfg.hash() {
            curve.annotate("warning_estimate", "estimate was produced from a different configuration");
        }
    };

    let mut closed = closed_form_curve(&bare, &grid);
    annotate(&mut closed, &bare);
    let mut master = solve_master(&relaxed, relaxed.exponential_kernel(), &grid)?;
    annotate(&mut master, &relaxed);
    let mut kernel = solve_master(&relaxed, |t| est.gamma_at(t), &grid)?;
    kernel.annotate("kernel", "estimated");
    annotate(&mut kernel, &relaxed);

    manifest.write("predict-closed-form.csv", closed.to_csv().as_bytes())?;
    manifest.write("predict-t1rho.csv", master.to_csv().as_bytes())?;
    manifest.write("predict-kernel.csv", kernel.to_csv().as_bytes())?;
    manifest.finish()?;

    if horizon < cfg.t_max {
        eprintln!("warning: validity horizon {horizon:.4e} μs is shorter than t_max {} μs", cfg.t_max);
    }
    println!("tau_p        {:.4} μs", 1.0 / rate);
    println!("tail rate    {:.4} μs⁻¹", composite_tail_rate(&relaxed));
    println!("alpha        {:.4}", transfer_efficiency(&relaxed));
    Ok(())
}

fn cmd_simulate(
    cli: &Cli,
    config: &Path,
    dense: bool,
    replay: &[PathBuf],
    dump: bool,
) -> CliResult<()> {
    let cfg = load(cli, config)?;
    let mut manifest = RunManifest::new("simulate", &cli.out_dir);
    manifest.set_config(cfg.hash(), cfg.seed);

    if dump {
        manifest.stage("dump");
        for k in 0..cfg.n_traj as u64 {
            let traj = generate_trajectory_member(&cfg, cfg.seed, k)?;
            let name = format!("trajectory-{k:04}.bin");
            write_trajectory(cli.out_dir.join(&name), &traj)?;
            manifest.record_file(&name)?;
        }
    }

    manifest.stage("simulate");
    let outcome = if replay.is_empty() {
        let repr = if dense {
            Representation::Dense
        } else {
            Representation::RankOne
        };
        gaussian::run_with(&cfg, repr)?
    } else {
        if dense {
            return Err(CliError::Usage("--dense cannot be combined with --replay".into()));
        }
        let trajectories = replay
            .iter()
            .map(read_trajectory)
            .collect::<nvdnp_core::Result<Vec<_>>>()?;
        gaussian::run_replay(&cfg, &trajectories)?
    };

    let mut diagnostics = outcome.diagnostics.to_text();
    let _ = writeln!(diagnostics, "bath_gain={:e}", outcome.bath_gain);
    manifest.write("simulate.csv", outcome.curve.to_csv().as_bytes())?;
    manifest.write("simulate-diagnostics.txt", diagnostics.as_bytes())?;
    manifest.finish()?;

    let last = outcome.curve.n_mean.last().copied().unwrap_or(f64::NAN);
    println!("n_traj       {}", outcome.diagnostics.n_traj);
    println!("final <n>    {last:.6}");
    println!("swaps        {}", outcome.diagnostics.swap_count);
    Ok(())
}

struct Labeled {
    label: String,
    curve: PolarizationCurve,
}

fn read_curve(path: &Path) -> CliResult<Labeled> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(Labeled {
        label: path.display().to_string(),
        curve: PolarizationCurve::from_csv(&text)?,
    })
}

fn cmd_compare(
    cli: &Cli,
    curves: &[PathBuf],
    measured: Option<&Path>,
    t1rho: Option<f64>,
    tail_from: Option<f64>,
    until: Option<f64>,
) -> CliResult<()> {
    let mut manifest = RunManifest::new("compare", &cli.out_dir);
    manifest.stage("compare");

    let mut all = Vec::new();
    if let Some(m) = measured {
        let mut data = read_curve(m)?;
        data.curve.provenance = Provenance::Measured;
        if let Some(bad) = data.curve.n_mean.iter().find(|n| !(0.0..=1.0).contains(*n)) {
            return Err(Error::invalid(
                "measured",
                format!("normalized population must lie in [0, 1], got {bad}"),
            )
            .into());
        }
        all.push(data);
    }
    for path in curves {
        all.push(read_curve(path)?);
    }
    if let Some(bad) = all.iter().find(|c| c.curve.is_empty()) {
        return Err(Error::Incompatible(format!("{} has no samples", bad.label)).into());
    }

    let lo = all.iter().map(|c| c.curve.times[0]).fold(f64::NEG_INFINITY, f64::max);
    let hi = all
        .iter()
        .map(|c| *c.curve.times.last().unwrap())
        .fold(f64::INFINITY, f64::min);
    if hi <= lo {
        return Err(Error::Incompatible(format!(
            "curves share no time range (latest start {lo} us, earliest end {hi} us)"
        ))
        .into());
    }
    let until = until.unwrap_or(hi).min(hi);
    let tail_from = tail_from.unwrap_or(0.5 * (lo + hi));
    if let Some(t) = t1rho {
        if !(t > 0.0) {
            return Err(Error::invalid("t1rho", format!("must be > 0, got {t}")).into());
        }
    }

    let reference = &all[0];
    let grid: Vec<f64> = reference
        .curve
        .times
        .iter()
        .copied()
        .filter(|&t| t >= lo && t <= hi)
        .collect();

    let entries: Vec<serde_json::Value> = all
        .iter()
        .map(|c| {
            let on_grid = PolarizationCurve::new(
                grid.clone(),
                grid.iter().map(|&t| c.curve.interpolate(t).unwrap()).collect(),
                c.curve.provenance,
            );
            let rms = on_grid.rms_deviation(&reference.curve, until, false);
            let relative = on_grid.rms_deviation(&reference.curve, until, true);
            let tail = c.curve.tail_rate(tail_from, hi);
            let alpha = match (tail, t1rho) {
                (Some(r), Some(t)) if r > 0.0 => Some((r - 1.0 / t) / r),
                _ => None,
            };
            json!({
                "path": c.label,
                "provenance": c.curve.provenance.as_str(),
                "rms": rms,
                "relative_rms": relative,
                "tail_rate_per_us": tail,
                "alpha": alpha,
            })
        })
        .collect();

    let report = json!({
        "reference": reference.label,
        "overlap_us": [lo, hi],
        "rms_until_us": until,
        "tail_window_us": [tail_from, hi],
        "t1rho_us": t1rho,
        "curves": entries,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    manifest.write("compare.json", text.as_bytes())?;

    let mut dat = String::from("# t_us");
    for (k, c) in all.iter().enumerate() {
        let _ = write!(dat, " {}", column_name(k, c));
        if c.curve.stderr.is_some() {
            let _ = write!(dat, " {}_err", column_name(k, c));
        }
    }
    dat.push('\n');
    for &t in &grid {
        let _ = write!(dat, "{t:e}");
        for c in &all {
            let _ = write!(dat, " {:e}", c.curve.interpolate(t).unwrap());
            if let Some(err) = &c.curve.stderr {
                let _ = write!(dat, " {:e}", interpolate_err(&c.curve, err, t));
            }
        }
        dat.push('\n');
    }
    manifest.write("compare.dat", dat.as_bytes())?;
    manifest.finish()?;
    println!("{text}");
    Ok(())
}

fn column_name(k: usize, c: &Labeled) -> String {
    let stem = Path::new(&c.label)
        .file_stem()
        .map(|s| s.to_string_lossy().replace(char::is_whitespace, "_"))
        .unwrap_or_default();
    format!("{k}:{stem}")
}

fn interpolate_err(curve: &PolarizationCurve, err: &[f64], t: f64) -> f64 {
    let errs = PolarizationCurve::new(curve.times.clone(), err.to_vec(), curve.provenance);
    errs.interpolate(t).unwrap_or(f64::NAN)
}

fn sweep_point(cli: &Cli, base: &RawConfig, param: SweepParam, value: f64) -> CliResult<ScenarioConfig> {
    let mut raw = base.clone();
    match param {
        SweepParam::Rho => {
            raw.rho_per_nm3 = value;
            raw.n_spins = None;
        }
        SweepParam::Z0 => {
            let box_length = raw.box_length_nm.unwrap_or(nvdnp_core::config::DEFAULT_BOX_LENGTH);
            raw.box_length_nm = Some(box_length * value / raw.z0_nm);
            raw.z0_nm = value;
            raw.n_spins = None;
        }
        SweepParam::D => raw.diffusion_nm2_per_us = value,
        SweepParam::B => {
            raw.field_gauss = Some(value);
            raw.field_tesla = None;
            raw.rabi_rad_per_us = None;
        }
        SweepParam::T1rho => raw.t1rho_us = Some(value),
    }
    finalize(cli, &raw)
}

struct SweepRow {
    value: f64,
    result: CliResult<(ScenarioConfig, CorrelationEstimate)>,
}

fn cmd_sweep(cli: &Cli, config: &Path, param: SweepParam, values: &[f64]) -> CliResult<()> {
    let base_cfg = load(cli, config)?;
    let base = base_cfg.to_raw();
    let mut manifest = RunManifest::new("sweep", &cli.out_dir);
    manifest.set_config(base_cfg.hash(), base_cfg.seed);
    manifest.stage("sweep");

    let rows: Vec<SweepRow> = values
        .iter()
        .map(|&value| SweepRow {
            value,
            result: sweep_point(cli, &base, param, value).and_then(|cfg| {
                let est = estimate_with(&cfg, CorrelationSettings::for_config(&cfg))?;
                Ok((cfg, est))
            }),
        })
        .collect();

    let mut csv = format!(
        "# param={}\nvalue,n_spins,tau_c_us,tau_c_stderr,sigma2_rad2_per_us2,rate_per_us,alpha,chi,regime,error\n",
        param.column()
    );
    let mut fit_x = Vec::new();
    let mut fit = [Vec::new(), Vec::new(), Vec::new()];
    for row in &rows {
        match &row.result {
            Ok((cfg, est)) => {
                let rate = est.polarization_rate();
                let alpha = cfg.t1rho.map_or(1.0, |t| rate / (rate + 1.0 / t));
                let _ = writeln!(
                    csv,
                    "{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{},",
                    row.value,
                    est.n_spins,
                    est.tau_c_us,
                    est.tau_c_stderr,
                    est.sigma2_rad2_per_us2,
                    rate,
                    alpha,
                    est.chi,
                    est.regime.label()
                );
                fit_x.push(row.value);
                fit[0].push(est.tau_c_us);
                fit[1].push(est.sigma2_rad2_per_us2);
                fit[2].push(rate);
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                eprintln!("warning: {}={}: {e}", param.column(), row.value);
                let _ = writeln!(csv, "{:e},,,,,,,,,{msg}", row.value);
            }
        }
    }
    for (name, ys) in ["tau_c_us", "sigma2_rad2_per_us2", "rate_per_us"].iter().zip(&fit) {
        match power_law_exponent(&fit_x, ys) {
            Some(p) => {
                let _ = writeln!(csv, "# exponent {name} vs {}={p:.6}", param.column());
            }
            None => {
                let _ = writeln!(csv, "# exponent {name} vs {}=n/a", param.column());
            }
        }
    }
    manifest.write("sweep.csv", csv.as_bytes())?;
    manifest.finish()?;
    print!("{csv}");
    Ok(())
}
