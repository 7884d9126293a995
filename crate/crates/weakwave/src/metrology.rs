//! Weak-value amplification: parameter sweeps, displacement estimators,
//! Fisher information, and photon-counting simulation.
//!
//! Amplification trades detected intensity for per-photon displacement: near
//! a crossed analyzer the centroid shift grows like the weak value while the
//! detection probability shrinks like its inverse square, so the net
//! statistical sensitivity of an ideal detector stays flat. The routines
//! here expose both sides of that trade, plus a counter-based Monte Carlo
//! sampler for finite-photon experiments.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::crystal::{perturbed_density, CrystalSetup, DetectionPlane, INTENSITY_FLOOR};
use crate::error::{Error, Result};
use crate::qcore::{
    inner, make_postselection_wrapped, make_preselection, HermitianObservable, Ket,
    PolarizationConfig,
};
use crate::quad::{cumulative_trapezoid, simpson};
use crate::rng::CounterRng;
use crate::weakval::{weak_value, ORTHOGONALITY_THRESHOLD};

/// A weak-value gain below this magnitude cannot be inverted into a
/// displacement estimate.
pub const DEGENERATE_GAIN: f64 = 1e-12;

/// A half-open uniform grid `[start, end)` with `steps` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    start: f64,
    end: f64,
    steps: usize,
}

impl SweepRange {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() || !(end > start) {
            return Err(Error::parameter(format!(
                "sweep range [{start}, {end}) must be finite and increasing"
            )));
        }
        if steps == 0 {
            return Err(Error::parameter("sweep range needs at least one step"));
        }
        Ok(SweepRange { start, end, steps })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// The sample points, excluding `end`.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let width = (self.end - self.start) / self.steps as f64;
        (0..self.steps).map(move |k| self.start + k as f64 * width)
    }
}

/// One analyzer angle in an amplification sweep. The weak value is absent
/// where the postselection is orthogonal to the preselection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    pub re_weak_value: Option<f64>,
    pub im_weak_value: Option<f64>,
    pub postselect_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Sweeps the analyzer angle at fixed preselection phase, recording the weak
/// value of `a` and the postselection probability. The most anomalous weak
/// values appear exactly where the fewest photons survive.
pub fn sweep_theta(phi: f64, range: &SweepRange, a: &HermitianObservable) -> Result<SweepResult> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch { left: a.dim(), right: 2 });
    }
    // the config constructor owns the phase range check
    let i = make_preselection(PolarizationConfig::new(phi, 0.0)?);
    let thetas: Vec<f64> = range.values().collect();
    let rows = thetas
        .par_iter()
        .map(|&theta| -> Result<SweepRow> {
            let f = make_postselection_wrapped(theta);
            let overlap = inner(&f, &i)?.norm_sqr();
            let wv = match weak_value(a, &i, &f, 1) {
                Ok(result) => Some(result.value),
                Err(Error::OrthogonalPostselection { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(SweepRow {
                parameter: theta,
                re_weak_value: wv.map(|w| w.re),
                im_weak_value: wv.map(|w| w.im),
                postselect_probability: overlap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// Inverts a measured centroid into a displacement estimate through the
/// appropriate weak-value gain: `Re` for the position plane, `Im` (scaled by
/// the beam bandwidth) for the Fourier plane.
pub fn estimate_epsilon(
    centroid: f64,
    weak_value: Complex64,
    plane: DetectionPlane,
    sigma: f64,
) -> Result<f64> {
    if !centroid.is_finite() {
        return Err(Error::parameter(format!("centroid {centroid} must be finite")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::parameter(format!("beam width sigma = {sigma} must be positive")));
    }
    let gain = match plane {
        DetectionPlane::Position => weak_value.re,
        DetectionPlane::Fourier => weak_value.im,
    };
    if gain.abs() <= DEGENERATE_GAIN {
        return Err(Error::DegenerateAmplifier { value: gain });
    }
    Ok(match plane {
        DetectionPlane::Position => centroid / gain,
        DetectionPlane::Fourier => centroid * 2.0 * sigma * sigma / gain,
    })
}

/// Both sides of the amplification identity
/// `|<f|i>|^2 |S_w|^2 = |<f|S|i>|^2`: the left is what a weak-value
/// experiment controls (survival probability times squared gain), the right
/// is a selection-independent matrix element. At an orthogonal
/// postselection the left side is reported at its algebraic limit, which is
/// the right side itself.
pub fn snr_identity_check(i: &Ket, f: &Ket) -> Result<(f64, f64)> {
    let s = HermitianObservable::stokes();
    if i.dim() != 2 || f.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: i.dim().max(f.dim()),
            right: 2,
        });
    }
    let rotated = s.apply(i.amplitudes())?;
    let numerator = f.amplitudes().dotc(&rotated);
    let rhs = numerator.norm_sqr();
    let probability = inner(f, i)?.norm_sqr();
    let lhs = if probability <= ORTHOGONALITY_THRESHOLD {
        rhs
    } else {
        probability * (numerator / inner(f, i)?).norm_sqr()
    };
    Ok((lhs, rhs))
}

/// Step for centered finite differences in the coupling strength.
fn fd_step(epsilon: f64) -> f64 {
    (epsilon * 1e-4).max(1e-6)
}

/// Sensitivity of the conditioned detection density to the displacement:
/// `d/d eps ln rho(pixel | detected)`, by centered differences. In the weak
/// limit this is `x Re S_w / sigma^2` (position plane) or `2 p Im S_w`
/// (Fourier plane).
pub fn fisher_score(setup: &CrystalSetup, pixel: f64) -> Result<f64> {
    if !pixel.is_finite() {
        return Err(Error::parameter(format!("pixel {pixel} must be finite")));
    }
    let eps = setup.epsilon();
    let total_now = perturbed_density(setup)?.total();
    if total_now <= INTENSITY_FLOOR {
        return Err(Error::ZeroPostselectedIntensity);
    }
    let density_now = setup.amplitude_signed(setup.plane(), pixel, eps).norm_sqr();
    if density_now / total_now <= INTENSITY_FLOOR {
        return Err(Error::ZeroDensity { pixel });
    }
    let h = fd_step(eps);
    let rho_plus = setup.amplitude_signed(setup.plane(), pixel, eps + h).norm_sqr();
    let rho_minus = setup.amplitude_signed(setup.plane(), pixel, eps - h).norm_sqr();
    if rho_plus <= 0.0 || rho_minus <= 0.0 {
        return Err(Error::ZeroDensity { pixel });
    }
    let total_plus = setup.density_signed(eps + h)?.total();
    let total_minus = setup.density_signed(eps - h)?.total();
    if total_plus <= INTENSITY_FLOOR || total_minus <= INTENSITY_FLOOR {
        return Err(Error::ZeroPostselectedIntensity);
    }
    Ok(((rho_plus.ln() - rho_minus.ln()) - (total_plus.ln() - total_minus.ln())) / (2.0 * h))
}

/// Per-detected-photon Fisher information about the displacement carried by
/// the conditioned density in the setup's detection plane.
pub fn fisher_information(setup: &CrystalSetup) -> Result<f64> {
    let eps = setup.epsilon();
    let h = fd_step(eps);
    let now = perturbed_density(setup)?;
    if now.total() <= INTENSITY_FLOOR {
        return Err(Error::ZeroPostselectedIntensity);
    }
    let plus = setup.density_signed(eps + h)?;
    let minus = setup.density_signed(eps - h)?;
    if plus.total() <= INTENSITY_FLOOR || minus.total() <= INTENSITY_FLOOR {
        return Err(Error::ZeroPostselectedIntensity);
    }
    let norm_shift = (plus.total().ln() - minus.total().ln()) / (2.0 * h);
    let mut integrand = Vec::with_capacity(now.values().len());
    for k in 0..now.values().len() {
        let v = now.values()[k];
        let vp = plus.values()[k];
        let vm = minus.values()[k];
        // nodes carry vanishing weight; skip them rather than difference
        // logarithms across them
        if v <= 0.0 || vp <= 0.0 || vm <= 0.0 {
            integrand.push(0.0);
            continue;
        }
        let score = (vp.ln() - vm.ln()) / (2.0 * h) - norm_shift;
        integrand.push(v / now.total() * score * score);
    }
    simpson(&integrand, now.step())
}

/// Photon coordinates accepted by the analyzer, in emission order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonSample {
    positions: Vec<f64>,
    seed: u64,
    n_requested: usize,
}

impl PhotonSample {
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_requested(&self) -> usize {
        self.n_requested
    }

    pub fn n_detected(&self) -> usize {
        self.positions.len()
    }

    pub fn mean(&self) -> Option<f64> {
        if self.positions.is_empty() {
            return None;
        }
        Some(self.positions.iter().sum::<f64>() / self.positions.len() as f64)
    }

    /// Unbiased sample standard deviation; needs at least two detections.
    pub fn sample_std(&self) -> Option<f64> {
        if self.positions.len() < 2 {
            return None;
        }
        let mean = self.mean()?;
        let ss: f64 = self.positions.iter().map(|&x| (x - mean) * (x - mean)).sum();
        Some((ss / (self.positions.len() - 1) as f64).sqrt())
    }
}

/// Inverse transform sampling on a tabulated cumulative distribution, with
/// linear interpolation inside each cell.
fn invert_cdf(axis: &[f64], cdf: &[f64], target: f64) -> f64 {
    let k = cdf.partition_point(|&c| c < target);
    if k == 0 {
        return axis[0];
    }
    if k >= cdf.len() {
        return *axis.last().expect("cdf is nonempty");
    }
    let (c0, c1) = (cdf[k - 1], cdf[k]);
    let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
    axis[k - 1] + t * (axis[k] - axis[k - 1])
}

/// Simulates `n` photons through the setup. Each photon survives
/// postselection with the transmitted fraction as probability and, if
/// detected, lands at a coordinate drawn from the conditioned density.
///
/// Draws are a pure function of `(seed, photon index)`, so results are
/// identical for any thread count. A dark port yields an empty sample.
pub fn sample_photons(setup: &CrystalSetup, n: usize, seed: u64) -> Result<PhotonSample> {
    let density = perturbed_density(setup)?;
    let survival = density.total().clamp(0.0, 1.0);
    let cdf = cumulative_trapezoid(density.values(), density.step());
    let mass = *cdf.last().expect("density grid is nonempty");
    let axis = density.axis().to_vec();
    let rng = CounterRng::new(seed);
    let positions: Vec<f64> = (0..n)
        .into_par_iter()
        .filter_map(|photon| {
            let index = 2 * photon as u64;
            if rng.uniform(index) >= survival || mass <= 0.0 {
                return None;
            }
            Some(invert_cdf(&axis, &cdf, rng.uniform(index + 1) * mass))
        })
        .collect();
    Ok(PhotonSample {
        positions,
        seed,
        n_requested: n,
    })
}
