//! Command-line definition, the JSON run configuration, and their merge.
//!
//! Precedence is flags over file over built-in defaults. The config file is
//! flat JSON with exactly the documented keys; unknown keys are rejected so
//! a typo cannot silently fall back to a default.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use weakwave::crystal::DetectionPlane;

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "weakwave",
    version,
    about = "Simulate pre/postselected weak measurements in a birefringent crystal",
    after_help = "Exit codes: 0 success, 1 I/O failure, 2 configuration error, \
                  3 physics-domain error (dark port, node).\n\
                  WEAKWAVE_THREADS caps the worker count; output is identical \
                  for any setting."
)]
pub struct Cli {
    /// Flat JSON config file; flags given here override its values
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Preselection phase in [-pi, pi] (state (|H> - e^{i phi}|V>)/sqrt(2))
    #[arg(long, global = true)]
    pub phi: Option<f64>,

    /// Postselection analyzer angle (state cos(theta/2)|H> + sin(theta/2)|V>)
    #[arg(long, global = true)]
    pub theta: Option<f64>,

    /// Transverse beam width
    #[arg(long, global = true)]
    pub sigma: Option<f64>,

    /// Crystal displacement; replaces a command's default sweep set
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,

    /// Detection plane
    #[arg(long, global = true, value_enum)]
    pub plane: Option<PlaneArg>,

    /// Detector grid sample count (odd, at least 64)
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,

    /// Detector grid half width
    #[arg(long, global = true)]
    pub half_width: Option<f64>,

    /// Master seed for photon sampling
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory, created if missing
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Output encoding; each command supports its documented format only
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Detector densities and density ratios at several couplings
    Fig3,
    /// Weak value and survival probability swept over the analyzer angle
    Fig4 {
        /// Number of analyzer angles in [0, 2*pi)
        #[arg(long, default_value_t = 2001)]
        sweep_points: usize,
    },
    /// Conditioned averages bridging the weak and classical limits
    Fig5 {
        /// Number of analyzer angles in [0, 2*pi)
        #[arg(long, default_value_t = 201)]
        sweep_points: usize,
    },
    /// Monte Carlo estimation of the displacement through the weak-value gain
    Estimate {
        /// Photons emitted per trial
        #[arg(long, default_value_t = 100_000)]
        n_photons: usize,
        /// Independent repetitions
        #[arg(long, default_value_t = 16)]
        trials: usize,
    },
    /// Reconstruct the preselected state from simulated detector centroids
    Tomo,
    /// Bohmian momentum field and streamlines of a two-slit profile
    Bohm {
        /// Slit separation from the axis
        #[arg(long, default_value_t = 5.0)]
        slit_offset: f64,
        /// Width of each slit's Gaussian
        #[arg(long, default_value_t = 1.0)]
        slit_sigma: f64,
        /// Inward transverse momentum on each slit
        #[arg(long, default_value_t = 0.5)]
        convergence: f64,
        /// Streamline count, seeded at density quantiles; 0 skips the file
        #[arg(long, default_value_t = 9)]
        streamlines: usize,
        /// Propagation length for streamline integration
        #[arg(long, default_value_t = 10.0)]
        z_span: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlaneArg {
    Position,
    Fourier,
}

impl From<PlaneArg> for DetectionPlane {
    fn from(arg: PlaneArg) -> Self {
        match arg {
            PlaneArg::Position => DetectionPlane::Position,
            PlaneArg::Fourier => DetectionPlane::Fourier,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

/// The documented run-configuration file. Every field is optional; absent
/// fields fall back to flags or defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub phi: Option<f64>,
    pub theta: Option<f64>,
    pub sigma: Option<f64>,
    pub epsilon: Option<f64>,
    pub plane: Option<String>,
    pub grid_points: Option<usize>,
    pub grid_half_width: Option<f64>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub format: Option<String>,
}

/// Fully merged settings, before command-specific defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub phi: f64,
    pub theta: f64,
    pub sigma: f64,
    pub epsilon: Option<f64>,
    pub plane: DetectionPlane,
    pub grid_points: Option<usize>,
    pub half_width: Option<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: Option<FormatArg>,
}

fn parse_plane(text: &str) -> Result<DetectionPlane, CliError> {
    match text {
        "position" => Ok(DetectionPlane::Position),
        "fourier" => Ok(DetectionPlane::Fourier),
        other => Err(CliError::config(format!(
            "plane must be \"position\" or \"fourier\", got \"{other}\""
        ))),
    }
}

fn parse_format(text: &str) -> Result<FormatArg, CliError> {
    match text {
        "csv" => Ok(FormatArg::Csv),
        "json" => Ok(FormatArg::Json),
        other => Err(CliError::config(format!(
            "format must be \"csv\" or \"json\", got \"{other}\""
        ))),
    }
}

fn require_finite(name: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::config(format!("{name} must be finite, got {value}")))
    }
}

impl Cli {
    /// Applies flag-over-file precedence and validates the merged values.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str::<RunConfig>(&text).map_err(|err| {
                    CliError::config(format!("{}: {err}", path.display()))
                })?
            }
            None => RunConfig::default(),
        };
        let plane = match (self.plane, file.plane.as_deref()) {
            (Some(arg), _) => arg.into(),
            (None, Some(text)) => parse_plane(text)?,
            (None, None) => DetectionPlane::Position,
        };
        let format = match (self.format, file.format.as_deref()) {
            (Some(arg), _) => Some(arg),
            (None, Some(text)) => Some(parse_format(text)?),
            (None, None) => None,
        };
        let resolved = Resolved {
            phi: require_finite("phi", self.phi.or(file.phi).unwrap_or(0.1))?,
            theta: require_finite(
                "theta",
                self.theta
                    .or(file.theta)
                    .unwrap_or(std::f64::consts::FRAC_PI_2 - 0.2),
            )?,
            sigma: require_finite("sigma", self.sigma.or(file.sigma).unwrap_or(1.0))?,
            epsilon: self
                .epsilon
                .or(file.epsilon)
                .map(|e| require_finite("epsilon", e))
                .transpose()?,
            plane,
            grid_points: self.grid_points.or(file.grid_points),
            half_width: self
                .half_width
                .or(file.grid_half_width)
                .map(|w| require_finite("grid_half_width", w))
                .transpose()?,
            seed: self.seed.or(file.seed).unwrap_or(42),
            out_dir: self
                .out
                .clone()
                .or(file.output_path)
                .unwrap_or_else(|| PathBuf::from(".")),
            format,
        };
        if !(resolved.sigma > 0.0) {
            return Err(CliError::config(format!(
                "sigma must be positive, got {}",
                resolved.sigma
            )));
        }
        Ok(resolved)
    }
}

impl Resolved {
    /// Rejects a requested format the command cannot honor; commands have a
    /// single documented output encoding.
    pub fn require_format(&self, supported: FormatArg, command: &str) -> Result<(), CliError> {
        match self.format {
            None => Ok(()),
            Some(f) if f == supported => Ok(()),
            Some(_) => Err(CliError::config(format!(
                "{command} writes {} output only",
                match supported {
                    FormatArg::Csv => "csv",
                    FormatArg::Json => "json",
                }
            ))),
        }
    }
}
