//! The six subcommands. Each resolves its configuration, runs the library,
//! and writes fixed-name files into the output directory.

use serde::Serialize;

use weakwave::condavg::interpolation_sweep;
use weakwave::crystal::{
    perturbed_density, ratio_profile, CrystalSetup, DetectionPlane, GridSpec,
};
use weakwave::directstate::reconstruct_via_crystal;
use weakwave::metrology::{estimate_epsilon, sample_photons, sweep_theta, SweepRange};
use weakwave::pointer::{bohm_momentum, TransverseProfile};
use weakwave::qcore::{
    make_postselection_wrapped, make_preselection, HermitianObservable, Ket, PolarizationConfig,
};
use weakwave::quad::cumulative_trapezoid;
use weakwave::rng::derive_seed;
use weakwave::weakval::stokes_weak_value;

use crate::config::{Cli, Command, FormatArg, Resolved};
use crate::error::CliError;
use crate::output::{number, write_csv, write_json};

/// Default crystal couplings for the density figure, in beam widths.
const FIG3_EPSILONS: [f64; 4] = [0.1, 0.5, 1.0, 2.0];
/// Default couplings for the conditioned-average interpolation figure.
const FIG5_EPSILONS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];

pub fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let resolved = cli.resolve()?;
    std::fs::create_dir_all(&resolved.out_dir)?;
    match cli.command {
        Command::Fig3 => cmd_fig3(&resolved),
        Command::Fig4 { sweep_points } => cmd_fig4(&resolved, sweep_points),
        Command::Fig5 { sweep_points } => cmd_fig5(&resolved, sweep_points),
        Command::Estimate { n_photons, trials } => cmd_estimate(&resolved, n_photons, trials),
        Command::Tomo => cmd_tomo(&resolved),
        Command::Bohm {
            slit_offset,
            slit_sigma,
            convergence,
            streamlines,
            z_span,
        } => cmd_bohm(&resolved, slit_offset, slit_sigma, convergence, streamlines, z_span),
    }
}

/// Applies `WEAKWAVE_THREADS` to the global worker pool. Results never
/// depend on the count; only wall time does.
fn configure_threads() -> Result<(), CliError> {
    let text = match std::env::var("WEAKWAVE_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(err) => return Err(CliError::config(format!("WEAKWAVE_THREADS: {err}"))),
        Ok(text) => text,
    };
    let count: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::config(format!(
                "WEAKWAVE_THREADS must be a positive integer, got \"{text}\""
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(count)
        .build_global()
        .map_err(|err| CliError::config(format!("thread pool: {err}")))
}

fn selection_states(resolved: &Resolved) -> Result<(Ket, Ket), CliError> {
    let i = make_preselection(PolarizationConfig::new(resolved.phi, 0.0)?);
    let f = make_postselection_wrapped(resolved.theta);
    Ok((i, f))
}

/// A detection grid wide enough for the largest coupling in play, with any
/// configured overrides applied.
fn shared_grid(
    resolved: &Resolved,
    profile: &TransverseProfile,
    epsilon_max: f64,
    plane: DetectionPlane,
) -> Result<GridSpec, CliError> {
    let derived = GridSpec::for_profile(profile, epsilon_max, plane)?;
    let half_width = resolved.half_width.unwrap_or_else(|| derived.half_width());
    let points = resolved.grid_points.unwrap_or(GridSpec::DEFAULT_POINTS);
    Ok(GridSpec::new(half_width, points)?)
}

fn epsilon_set(resolved: &Resolved, defaults: &[f64]) -> Vec<f64> {
    match resolved.epsilon {
        Some(eps) => vec![eps],
        None => defaults.iter().map(|&k| k * resolved.sigma).collect(),
    }
}

fn cmd_fig3(resolved: &Resolved) -> Result<(), CliError> {
    resolved.require_format(FormatArg::Csv, "fig3")?;
    let (i, f) = selection_states(resolved)?;
    let profile = TransverseProfile::gaussian(resolved.sigma)?;
    let epsilons = epsilon_set(resolved, &FIG3_EPSILONS);
    let epsilon_max = epsilons.iter().cloned().fold(0.0, f64::max);
    let grid = shared_grid(resolved, &profile, epsilon_max, DetectionPlane::Position)?;
    let setup_at = |eps: f64| {
        CrystalSetup::new(
            i.clone(),
            f.clone(),
            profile.clone(),
            eps,
            DetectionPlane::Position,
            Some(grid),
        )
    };
    let unperturbed = perturbed_density(&setup_at(0.0)?)?;
    let mut densities = Vec::new();
    let mut ratios = Vec::new();
    for &eps in &epsilons {
        let setup = setup_at(eps)?;
        densities.push(perturbed_density(&setup)?);
        ratios.push(ratio_profile(&setup)?);
    }

    let mut header_a = vec!["x".to_string(), "unperturbed_density".to_string()];
    for &eps in &epsilons {
        header_a.push(format!("perturbed_density_eps_{eps}"));
    }
    let axis = unperturbed.axis().to_vec();
    let rows_a = axis.iter().enumerate().map(|(k, &x)| {
        let mut row = vec![Some(x), Some(unperturbed.values()[k])];
        row.extend(densities.iter().map(|d| Some(d.values()[k])));
        row
    });
    write_csv(&resolved.out_dir.join("fig3a.csv"), &header_a, rows_a)?;

    let mut header_b = vec!["x".to_string()];
    for &eps in &epsilons {
        header_b.push(format!("exact_ratio_eps_{eps}"));
        header_b.push(format!("first_order_ratio_eps_{eps}"));
    }
    let rows_b = axis.iter().enumerate().map(|(k, &x)| {
        let mut row = vec![Some(x)];
        for ratio in &ratios {
            row.push(Some(ratio.exact[k]));
            row.push(Some(ratio.first_order[k]));
        }
        row
    });
    write_csv(&resolved.out_dir.join("fig3b.csv"), &header_b, rows_b)?;
    Ok(())
}

fn cmd_fig4(resolved: &Resolved, sweep_points: usize) -> Result<(), CliError> {
    resolved.require_format(FormatArg::Csv, "fig4")?;
    let range = SweepRange::new(0.0, 2.0 * std::f64::consts::PI, sweep_points)?;
    let sweep = sweep_theta(resolved.phi, &range, &HermitianObservable::stokes())?;
    let header: Vec<String> = ["theta", "re_sw", "im_sw", "postselect_prob"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = sweep.rows.iter().map(|row| {
        vec![
            Some(row.parameter),
            row.re_weak_value,
            row.im_weak_value,
            Some(row.postselect_probability),
        ]
    });
    write_csv(&resolved.out_dir.join("fig4.csv"), &header, rows)?;
    Ok(())
}

fn cmd_fig5(resolved: &Resolved, sweep_points: usize) -> Result<(), CliError> {
    resolved.require_format(FormatArg::Csv, "fig5")?;
    let i = make_preselection(PolarizationConfig::new(resolved.phi, 0.0)?);
    let profile = TransverseProfile::gaussian(resolved.sigma)?;
    let epsilons = epsilon_set(resolved, &FIG5_EPSILONS);
    let range = SweepRange::new(0.0, 2.0 * std::f64::consts::PI, sweep_points)?;
    let table = interpolation_sweep(&i, &profile, &range, &epsilons)?;
    let header: Vec<String> = ["theta", "epsilon", "cond_avg", "re_sw", "classical"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = table.rows.iter().map(|row| {
        vec![
            Some(row.theta),
            Some(row.epsilon),
            row.conditioned_average,
            row.re_weak_value,
            row.classical,
        ]
    });
    write_csv(&resolved.out_dir.join("fig5.csv"), &header, rows)?;
    Ok(())
}

#[derive(Serialize)]
struct EstimateReport {
    epsilon_true: f64,
    epsilon_hat_mean: f64,
    epsilon_hat_stderr: Option<f64>,
    n_detected_mean: f64,
    plane: &'static str,
    seed: u64,
    trials: usize,
    n_photons: usize,
}

fn cmd_estimate(resolved: &Resolved, n_photons: usize, trials: usize) -> Result<(), CliError> {
    resolved.require_format(FormatArg::Json, "estimate")?;
    if n_photons == 0 || trials == 0 {
        return Err(CliError::config("estimate needs n_photons > 0 and trials > 0"));
    }
    let (i, f) = selection_states(resolved)?;
    let profile = TransverseProfile::gaussian(resolved.sigma)?;
    let epsilon_true = resolved.epsilon.unwrap_or(1e-3 * resolved.sigma);
    let grid = shared_grid(resolved, &profile, epsilon_true, resolved.plane)?;
    let setup = CrystalSetup::new(
        i.clone(),
        f.clone(),
        profile,
        epsilon_true,
        resolved.plane,
        Some(grid),
    )?;
    let gain = stokes_weak_value(&i, &f)?;
    let mut estimates = Vec::with_capacity(trials);
    let mut detected_total = 0usize;
    for trial in 0..trials {
        let sample = sample_photons(&setup, n_photons, derive_seed(resolved.seed, trial as u64))?;
        detected_total += sample.n_detected();
        if let Some(mean) = sample.mean() {
            estimates.push(estimate_epsilon(mean, gain, resolved.plane, resolved.sigma)?);
        }
    }
    if estimates.is_empty() {
        return Err(CliError::physics("no photons survived postselection"));
    }
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let stderr = if estimates.len() > 1 {
        let ss: f64 = estimates.iter().map(|&e| (e - mean) * (e - mean)).sum();
        Some((ss / (estimates.len() - 1) as f64).sqrt() / (estimates.len() as f64).sqrt())
    } else {
        None
    };
    let report = EstimateReport {
        epsilon_true,
        epsilon_hat_mean: mean,
        epsilon_hat_stderr: stderr,
        n_detected_mean: detected_total as f64 / trials as f64,
        plane: match resolved.plane {
            DetectionPlane::Position => "position",
            DetectionPlane::Fourier => "fourier",
        },
        seed: resolved.seed,
        trials,
        n_photons,
    };
    write_json(&resolved.out_dir.join("estimate.json"), &report)?;
    Ok(())
}

#[derive(Serialize)]
struct TomoReport {
    true_state: [[f64; 2]; 2],
    reconstructed: [[f64; 2]; 2],
    fidelity: Option<f64>,
    epsilon: f64,
}

fn ket_pairs(ket: &Ket) -> [[f64; 2]; 2] {
    let h = ket.amplitude(0);
    let v = ket.amplitude(1);
    [[h.re, h.im], [v.re, v.im]]
}

fn cmd_tomo(resolved: &Resolved) -> Result<(), CliError> {
    resolved.require_format(FormatArg::Json, "tomo")?;
    if resolved.sigma != 1.0 {
        return Err(CliError::config(
            "tomo reconstructs through a unit-width beam; sigma must stay 1",
        ));
    }
    let true_state = make_preselection(PolarizationConfig::new(resolved.phi, 0.0)?);
    let epsilon = resolved.epsilon.unwrap_or(1e-3);
    let reconstruction = reconstruct_via_crystal(&true_state, epsilon)?;
    let report = TomoReport {
        true_state: ket_pairs(&true_state),
        reconstructed: ket_pairs(&reconstruction.state),
        fidelity: reconstruction.fidelity,
        epsilon,
    };
    write_json(&resolved.out_dir.join("tomo.json"), &report)?;
    Ok(())
}

/// Draws streamline seeds at evenly spaced quantiles of the transverse
/// density.
fn quantile_starts(axis: &[f64], density: &[f64], step: f64, count: usize) -> Vec<f64> {
    let cdf = cumulative_trapezoid(density, step);
    let mass = *cdf.last().expect("grid is nonempty");
    (1..=count)
        .map(|k| {
            let target = mass * k as f64 / (count + 1) as f64;
            let j = cdf.partition_point(|&c| c < target);
            if j == 0 {
                return axis[0];
            }
            if j >= cdf.len() {
                return *axis.last().expect("grid is nonempty");
            }
            let (c0, c1) = (cdf[j - 1], cdf[j]);
            let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
            axis[j - 1] + t * (axis[j] - axis[j - 1])
        })
        .collect()
}

fn cmd_bohm(
    resolved: &Resolved,
    slit_offset: f64,
    slit_sigma: f64,
    convergence: f64,
    streamlines: usize,
    z_span: f64,
) -> Result<(), CliError> {
    resolved.require_format(FormatArg::Csv, "bohm")?;
    if !(z_span > 0.0) || !z_span.is_finite() {
        return Err(CliError::config(format!("z_span must be positive, got {z_span}")));
    }
    let profile = TransverseProfile::two_slit(slit_offset, slit_sigma, convergence)?;
    let grid = shared_grid(resolved, &profile, 0.0, DetectionPlane::Position)?;
    let axis = grid.axis();
    let density: Vec<f64> = axis.iter().map(|&x| profile.psi_x(x).norm_sqr()).collect();
    let header: Vec<String> = ["x", "bohm_momentum", "density"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::with_capacity(axis.len());
    for (k, &x) in axis.iter().enumerate() {
        rows.push(vec![Some(x), Some(bohm_momentum(&profile, x)?), Some(density[k])]);
    }
    write_csv(&resolved.out_dir.join("bohm.csv"), &header, rows)?;

    if streamlines == 0 {
        return Ok(());
    }
    let starts = quantile_starts(&axis, &density, grid.step(), streamlines);
    let step = 0.01 * slit_sigma;
    let n_steps = (z_span / step).ceil() as usize;
    let mut out = String::from("streamline,z,x\n");
    for (line, &start) in starts.iter().enumerate() {
        let mut x = start;
        for k in 0..=n_steps {
            let z = k as f64 * step;
            out.push_str(&format!("{line},{},{}\n", number(z), number(x)));
            if k == n_steps {
                break;
            }
            // midpoint rule for dx/dz = p_B(x) at unit longitudinal momentum
            let slope = bohm_momentum(&profile, x)?;
            let midpoint = x + 0.5 * step * slope;
            x += step * bohm_momentum(&profile, midpoint)?;
        }
    }
    std::fs::write(resolved.out_dir.join("bohm_streamlines.csv"), out)?;
    Ok(())
}
