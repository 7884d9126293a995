//! The birefringent-crystal coupling and its detection-plane signatures.
//!
//! The crystal displaces the transverse beam by `+epsilon` for `|H>` and
//! `-epsilon` for `|V>`. After postselecting the polarization, the exact
//! detected amplitude is a two-term superposition of displaced beams, kept
//! analytic: in the position plane the beams are shifted, in the Fourier
//! plane they pick up opposite linear phases. Grids appear only at the
//! detection step, to integrate densities.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pointer::{pointer_weak_value_momentum, pointer_weak_value_position, TransverseProfile};
use crate::qcore::Ket;
use crate::quad::simpson;
use crate::weakval::stokes_weak_value;

/// Intensity totals at or below this count as fully extinguished.
pub const INTENSITY_FLOOR: f64 = 1e-15;

/// Where the beam is detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionPlane {
    /// Direct image of the transverse position.
    Position,
    /// Optical Fourier plane; the coordinate is transverse momentum.
    Fourier,
}

/// A uniform symmetric detection grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    points: usize,
}

impl GridSpec {
    pub const DEFAULT_POINTS: usize = 4097;

    /// Requires at least 64 points, an odd count (so Simpson weights apply
    /// and zero is a sample), and a positive half width.
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if points < 64 || points % 2 == 0 {
            return Err(Error::parameter(format!(
                "grid needs an odd point count of at least 64, got {points}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::parameter(format!(
                "grid half width {half_width} must be positive and finite"
            )));
        }
        Ok(GridSpec { half_width, points })
    }

    /// The default grid for a profile displaced by up to `epsilon`: wide
    /// enough that truncated tails sit far below every tolerance in use.
    pub fn for_profile(
        profile: &TransverseProfile,
        epsilon: f64,
        plane: DetectionPlane,
    ) -> Result<Self> {
        GridSpec::new(required_half_width(profile, epsilon, plane), Self::DEFAULT_POINTS)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.points as f64 - 1.0)
    }

    pub fn axis(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.points).map(|j| -self.half_width + j as f64 * step).collect()
    }
}

/// Minimum grid half width for a displaced profile: eight beam widths past
/// every mode in the position plane, the Fourier-space equivalent otherwise.
fn required_half_width(profile: &TransverseProfile, epsilon: f64, plane: DetectionPlane) -> f64 {
    match plane {
        DetectionPlane::Position => profile.position_reach() + epsilon,
        DetectionPlane::Fourier => profile.momentum_reach(),
    }
}

/// An immutable crystal measurement setup.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSetup {
    epsilon: f64,
    interaction: Option<(f64, f64)>,
    preselect: Ket,
    postselect: Ket,
    profile: TransverseProfile,
    plane: DetectionPlane,
    grid: GridSpec,
}

impl CrystalSetup {
    /// Builds and validates a setup. Passing `None` for the grid derives one
    /// from the profile and displacement.
    pub fn new(
        preselect: Ket,
        postselect: Ket,
        profile: TransverseProfile,
        epsilon: f64,
        plane: DetectionPlane,
        grid: Option<GridSpec>,
    ) -> Result<Self> {
        if preselect.dim() != 2 || postselect.dim() != 2 {
            return Err(Error::DimensionMismatch {
                left: preselect.dim().max(postselect.dim()),
                right: 2,
            });
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::parameter(format!(
                "displacement epsilon = {epsilon} must be finite and nonnegative"
            )));
        }
        let grid = match grid {
            Some(g) => g,
            None => GridSpec::for_profile(&profile, epsilon, plane)?,
        };
        let required = required_half_width(&profile, epsilon, plane);
        if grid.half_width() + 1e-12 < required {
            return Err(Error::parameter(format!(
                "grid half width {} too narrow; the displaced beam needs {:.6}",
                grid.half_width(),
                required
            )));
        }
        Ok(CrystalSetup {
            epsilon,
            interaction: None,
            preselect,
            postselect,
            profile,
            plane,
            grid,
        })
    }

    /// Records the interaction time and group-velocity difference behind the
    /// displacement; they must reproduce `epsilon = v * tau`.
    pub fn with_interaction(mut self, tau: f64, v: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() || !v.is_finite() {
            return Err(Error::parameter(format!(
                "interaction needs tau > 0 and finite v, got tau = {tau}, v = {v}"
            )));
        }
        if (v * tau - self.epsilon).abs() > 1e-12 * self.epsilon.max(1.0) {
            return Err(Error::parameter(format!(
                "inconsistent interaction: v * tau = {} but epsilon = {}",
                v * tau,
                self.epsilon
            )));
        }
        self.interaction = Some((tau, v));
        Ok(self)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `(tau, v)` when the displacement was specified through an interaction.
    pub fn interaction(&self) -> Option<(f64, f64)> {
        self.interaction
    }

    pub fn preselect(&self) -> &Ket {
        &self.preselect
    }

    pub fn postselect(&self) -> &Ket {
        &self.postselect
    }

    pub fn profile(&self) -> &TransverseProfile {
        &self.profile
    }

    pub fn plane(&self) -> DetectionPlane {
        self.plane
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Postselected path weights `(<f|H><H|i>, <f|V><V|i>)`.
    fn path_weights(&self) -> (Complex64, Complex64) {
        (
            self.postselect.amplitude(0).conj() * self.preselect.amplitude(0),
            self.postselect.amplitude(1).conj() * self.preselect.amplitude(1),
        )
    }

    /// Squared overlap of the selections.
    pub fn postselection_probability(&self) -> f64 {
        let (w_h, w_v) = self.path_weights();
        (w_h + w_v).norm_sqr()
    }

    /// Detected amplitude at `coordinate` in `plane` for a signed
    /// displacement. Negative values only arise internally, from centered
    /// finite differences in the coupling strength.
    pub(crate) fn amplitude_signed(
        &self,
        plane: DetectionPlane,
        coordinate: f64,
        epsilon: f64,
    ) -> Complex64 {
        let (w_h, w_v) = self.path_weights();
        match plane {
            DetectionPlane::Position => {
                w_h * self.profile.psi_x(coordinate - epsilon)
                    + w_v * self.profile.psi_x(coordinate + epsilon)
            }
            DetectionPlane::Fourier => {
                let phase = Complex64::from_polar(1.0, -coordinate * epsilon);
                (w_h * phase + w_v * phase.conj()) * self.profile.psi_p(coordinate)
            }
        }
    }

    pub(crate) fn density_signed(&self, epsilon: f64) -> Result<DensityProfile> {
        let axis = self.grid.axis();
        let values: Vec<f64> = axis
            .iter()
            .map(|&xi| self.amplitude_signed(self.plane, xi, epsilon).norm_sqr())
            .collect();
        let total = simpson(&values, self.grid.step())?;
        Ok(DensityProfile { axis, values, total })
    }
}

/// Exact postselected position-plane amplitude
/// `<f|H><H|i> psi(x - eps) + <f|V><V|i> psi(x + eps)`.
pub fn joint_amplitude_x(setup: &CrystalSetup, x: f64) -> Complex64 {
    setup.amplitude_signed(DetectionPlane::Position, x, setup.epsilon)
}

/// Exact postselected Fourier-plane amplitude
/// `(<f|H><H|i> e^{-i p eps} + <f|V><V|i> e^{+i p eps}) psi~(p)`.
pub fn joint_amplitude_p(setup: &CrystalSetup, p: f64) -> Complex64 {
    setup.amplitude_signed(DetectionPlane::Fourier, p, setup.epsilon)
}

/// A detection density sampled on the setup grid, with its quadrature total.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    axis: Vec<f64>,
    values: Vec<f64>,
    total: f64,
}

impl DensityProfile {
    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fraction of input photons that reach this detector.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn step(&self) -> f64 {
        self.axis[1] - self.axis[0]
    }

    /// Mean detection coordinate of the conditioned (renormalized) density.
    pub fn conditioned_mean(&self) -> Result<f64> {
        if self.total <= INTENSITY_FLOOR {
            return Err(Error::ZeroPostselectedIntensity);
        }
        let weighted: Vec<f64> = self
            .axis
            .iter()
            .zip(&self.values)
            .map(|(&xi, &v)| xi * v)
            .collect();
        Ok(simpson(&weighted, self.step())? / self.total)
    }
}

/// The exact postselected density in the setup's detection plane.
pub fn perturbed_density(setup: &CrystalSetup) -> Result<DensityProfile> {
    setup.density_signed(setup.epsilon())
}

/// Pointwise ratio of the perturbed to the unperturbed postselected density,
/// exact and to first order in the displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioProfile {
    pub axis: Vec<f64>,
    pub exact: Vec<f64>,
    pub first_order: Vec<f64>,
}

/// Compares the exact density ratio against the linear-response model
/// `1 + eps x Re S_w / sigma^2` (position) or `1 + 2 eps p Im S_w` (Fourier).
pub fn ratio_profile(setup: &CrystalSetup) -> Result<RatioProfile> {
    let sw = stokes_weak_value(setup.preselect(), setup.postselect())?;
    let p_post = setup.postselection_probability();
    let axis = setup.grid().axis();
    let eps = setup.epsilon();
    let variance = setup.profile().variance_x();
    let mut exact = Vec::with_capacity(axis.len());
    let mut first_order = Vec::with_capacity(axis.len());
    for &xi in &axis {
        let perturbed = setup.amplitude_signed(setup.plane(), xi, eps).norm_sqr();
        let unperturbed = p_post
            * match setup.plane() {
                DetectionPlane::Position => setup.profile().psi_x(xi).norm_sqr(),
                DetectionPlane::Fourier => setup.profile().psi_p(xi).norm_sqr(),
            };
        exact.push(perturbed / unperturbed);
        first_order.push(match setup.plane() {
            DetectionPlane::Position => 1.0 + eps * xi * sw.re / variance,
            DetectionPlane::Fourier => 1.0 + 2.0 * eps * xi * sw.im,
        });
    }
    Ok(RatioProfile { axis, exact, first_order })
}

/// First-order relative intensity change at one pixel,
/// `2 eps Im(S_w p_w)`, built from the pointer weak value at that pixel.
pub fn first_order_correction(setup: &CrystalSetup, pixel: f64) -> Result<f64> {
    let sw = stokes_weak_value(setup.preselect(), setup.postselect())?;
    let pw = match setup.plane() {
        DetectionPlane::Position => pointer_weak_value_position(setup.profile(), pixel)?,
        DetectionPlane::Fourier => pointer_weak_value_momentum(setup.profile(), pixel)?,
    };
    Ok(2.0 * setup.epsilon() * (sw * pw).im)
}

/// Centroid of the conditioned detection density. To first order this is
/// `eps Re S_w` in the position plane and `eps Im S_w / (2 sigma^2)` in the
/// Fourier plane.
pub fn centroid(setup: &CrystalSetup) -> Result<f64> {
    perturbed_density(setup)?.conditioned_mean()
}
